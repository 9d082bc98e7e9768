#include "json_convert.hpp"

namespace webdep {

json parse_json(std::string_view text, ErrorCode code, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(code, std::string(what) + ": " + e.what());
  }
}

void to_json(json& j, const SiteRecord& v) {
  j = json{{"domain", v.domain}, {"country", v.country}, {"rank", v.rank}};
}
void from_json(const json& j, SiteRecord& v) {
  j.at("domain").get_to(v.domain);
  j.at("country").get_to(v.country);
  j.at("rank").get_to(v.rank);
}

void to_json(json& j, const DnsFacts& v) {
  j = json{{"nameservers", v.nameservers},
           {"soa_authority", v.soa_authority},
           {"nameserver_soa", v.nameserver_soa}};
}
void from_json(const json& j, DnsFacts& v) {
  j.at("nameservers").get_to(v.nameservers);
  j.at("soa_authority").get_to(v.soa_authority);
  j.at("nameserver_soa").get_to(v.nameserver_soa);
}

void to_json(json& j, const TlsFacts& v) {
  j = json{{"https_supported", v.https_supported},
           {"san_list", v.san_list},
           {"ca_name", v.ca_name},
           {"ca_url", v.ca_url},
           {"ocsp_stapled", v.ocsp_stapled}};
}
void from_json(const json& j, TlsFacts& v) {
  j.at("https_supported").get_to(v.https_supported);
  j.at("san_list").get_to(v.san_list);
  j.at("ca_name").get_to(v.ca_name);
  j.at("ca_url").get_to(v.ca_url);
  j.at("ocsp_stapled").get_to(v.ocsp_stapled);
}

void to_json(json& j, const ResourceSet& v) {
  j = json{{"resources", v.resources},
           {"source", v.source == ResourceSource::kHarImport ? "har-import" : "html-fallback"}};
}
void from_json(const json& j, ResourceSet& v) {
  j.at("resources").get_to(v.resources);
  const auto source = j.at("source").get<std::string>();
  if (source == "har-import") {
    v.source = ResourceSource::kHarImport;
  } else if (source == "html-fallback") {
    v.source = ResourceSource::kHtmlFallback;
  } else {
    throw Error(ErrorCode::kMalformedDataFile, "unknown resource source '" + source + "'");
  }
}

void to_json(json& j, const CnameChain& v) {
  j = json{{"origin", v.origin}, {"chain", v.chain}, {"terminal", v.terminal}};
}
void from_json(const json& j, CnameChain& v) {
  j.at("origin").get_to(v.origin);
  j.at("chain").get_to(v.chain);
  j.at("terminal").get_to(v.terminal);
}

void to_json(json& j, const StageError& v) {
  j = json{{"stage", v.stage}, {"message", v.message}};
}
void from_json(const json& j, StageError& v) {
  j.at("stage").get_to(v.stage);
  j.at("message").get_to(v.message);
}

void to_json(json& j, const ProbeResult& v) {
  j = json{{"site", v.site},         {"dns", v.dns},
           {"tls", v.tls},           {"resources", v.resources},
           {"cnames", v.cnames},     {"host_soa", v.host_soa},
           {"probe_time", v.probe_time}, {"errors", v.errors}};
}
void from_json(const json& j, ProbeResult& v) {
  j.at("site").get_to(v.site);
  j.at("dns").get_to(v.dns);
  j.at("tls").get_to(v.tls);
  j.at("resources").get_to(v.resources);
  j.at("cnames").get_to(v.cnames);
  j.at("host_soa").get_to(v.host_soa);
  j.at("probe_time").get_to(v.probe_time);
  j.at("errors").get_to(v.errors);
}

void to_json(json& j, const ServiceClassification& v) {
  j = json{{"site", v.site},
           {"kind", to_string(v.kind)},
           {"service_host", v.service_host},
           {"provider", v.provider},
           {"cdn_name", v.cdn_name},
           {"verdict", to_string(v.verdict)},
           {"rule_fired", to_string(v.rule_fired)}};
}
void from_json(const json& j, ServiceClassification& v) {
  j.at("site").get_to(v.site);
  v.kind = parse_service_kind(j.at("kind").get<std::string>());
  j.at("service_host").get_to(v.service_host);
  j.at("provider").get_to(v.provider);
  j.at("cdn_name").get_to(v.cdn_name);
  v.verdict = parse_classification(j.at("verdict").get<std::string>());
  v.rule_fired = parse_rule_fired(j.at("rule_fired").get<std::string>());
}

void to_json(json& j, const SiteDependencyReport& v) {
  j = json{{"site", v.site},
           {"dns", v.dns},
           {"ca", v.ca},
           {"cdns", v.cdns},
           {"internal_resources", v.internal_resources},
           {"https_supported", v.https_supported},
           {"ocsp_stapled", v.ocsp_stapled}};
}
void from_json(const json& j, SiteDependencyReport& v) {
  j.at("site").get_to(v.site);
  j.at("dns").get_to(v.dns);
  j.at("ca").get_to(v.ca);
  j.at("cdns").get_to(v.cdns);
  j.at("internal_resources").get_to(v.internal_resources);
  j.at("https_supported").get_to(v.https_supported);
  j.at("ocsp_stapled").get_to(v.ocsp_stapled);
}

void to_json(json& j, const Rate& v) {
  j = json{{"numerator", v.numerator}, {"denominator", v.denominator}};
}
void from_json(const json& j, Rate& v) {
  j.at("numerator").get_to(v.numerator);
  j.at("denominator").get_to(v.denominator);
}

void to_json(json& j, const IndirectEdge& v) {
  j = json{{"n_providers", v.n_providers},
           {"third_party_fraction", v.third_party_fraction},
           {"newly_dependent_sites", v.newly_dependent_sites}};
}
void from_json(const json& j, IndirectEdge& v) {
  j.at("n_providers").get_to(v.n_providers);
  j.at("third_party_fraction").get_to(v.third_party_fraction);
  j.at("newly_dependent_sites").get_to(v.newly_dependent_sites);
}

void to_json(json& j, const IndirectDependencyReport& v) {
  j = json{{"country", v.country},     {"n_sites", v.n_sites},
           {"cdn_to_dns", v.cdn_to_dns}, {"ca_to_dns", v.ca_to_dns},
           {"ca_to_cdn", v.ca_to_cdn}};
}
void from_json(const json& j, IndirectDependencyReport& v) {
  j.at("country").get_to(v.country);
  j.at("n_sites").get_to(v.n_sites);
  j.at("cdn_to_dns").get_to(v.cdn_to_dns);
  j.at("ca_to_dns").get_to(v.ca_to_dns);
  j.at("ca_to_cdn").get_to(v.ca_to_cdn);
}

}  // namespace webdep
