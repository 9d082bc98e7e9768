#include "webdep/classify.hpp"

#include <algorithm>
#include <set>

#include "webdep/dns_name.hpp"
#include "webdep/error.hpp"
#include "webdep/url.hpp"

namespace webdep {

std::string_view to_string(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::kDns: return "DNS";
    case ServiceKind::kCa: return "CA";
    case ServiceKind::kCdn: return "CDN";
  }
  return "?";
}

std::string_view to_string(Classification verdict) {
  switch (verdict) {
    case Classification::kUnknown: return "unknown";
    case Classification::kPrivate: return "private";
    case Classification::kThirdParty: return "third-party";
  }
  return "?";
}

std::string_view to_string(RuleFired rule) {
  switch (rule) {
    case RuleFired::kNone: return "none";
    case RuleFired::kTldMatch: return "tld-match";
    case RuleFired::kSanList: return "san-list";
    case RuleFired::kSoaMismatch: return "soa-mismatch";
    case RuleFired::kConcentration: return "concentration";
  }
  return "?";
}

ServiceKind parse_service_kind(std::string_view text) {
  for (auto k : {ServiceKind::kDns, ServiceKind::kCa, ServiceKind::kCdn}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::kMalformedDataFile, "unknown service kind '" + std::string(text) + "'");
}

Classification parse_classification(std::string_view text) {
  for (auto c : {Classification::kUnknown, Classification::kPrivate, Classification::kThirdParty}) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorCode::kMalformedDataFile, "unknown verdict '" + std::string(text) + "'");
}

RuleFired parse_rule_fired(std::string_view text) {
  for (auto r : {RuleFired::kNone, RuleFired::kTldMatch, RuleFired::kSanList,
                 RuleFired::kSoaMismatch, RuleFired::kConcentration}) {
    if (to_string(r) == text) return r;
  }
  throw Error(ErrorCode::kMalformedDataFile, "unknown rule '" + std::string(text) + "'");
}

Classification combine_verdicts(Classification a, Classification b) {
  if (a == Classification::kPrivate || b == Classification::kPrivate) {
    return Classification::kPrivate;
  }
  if (a == Classification::kThirdParty || b == Classification::kThirdParty) {
    return Classification::kThirdParty;
  }
  return Classification::kUnknown;
}

std::vector<RegistrableDomain> san_registrable_domains(std::span<const std::string> san_list,
                                                       const PublicSuffixList& psl) {
  std::set<RegistrableDomain> out;
  for (const auto& entry : san_list) {
    std::string_view name = entry;
    if (name.starts_with("*.")) name.remove_prefix(2);
    if (auto rd = psl.try_registrable_domain(name)) out.insert(std::move(*rd));
  }
  return {out.begin(), out.end()};
}

Subject Subject::make(std::string_view host, bool https, std::span<const std::string> san_list,
                      std::optional<RegistrableDomain> soa, const PublicSuffixList& psl) {
  Subject w;
  w.host = fold_dns_name(host);
  w.domain = psl.try_registrable_domain(w.host);
  w.https = https;
  if (https) w.san_domains = san_registrable_domains(san_list, psl);
  w.soa = std::move(soa);
  return w;
}

Verdict find_service_type(const Subject& w, std::string_view service_host,
                          const std::optional<RegistrableDomain>& soa_of_service,
                          const PublicSuffixList& psl) {
  const auto service_domain = psl.try_registrable_domain(service_host);
  if (w.domain && service_domain && *w.domain == *service_domain) {
    return {Classification::kPrivate, RuleFired::kTldMatch};
  }
  if (w.https && service_domain &&
      std::binary_search(w.san_domains.begin(), w.san_domains.end(), *service_domain)) {
    return {Classification::kPrivate, RuleFired::kSanList};
  }
  if (w.soa && soa_of_service && *w.soa != *soa_of_service) {
    return {Classification::kThirdParty, RuleFired::kSoaMismatch};
  }
  return {};
}

ConcentrationMap compute_concentration(std::span<const ProbeResult> corpus,
                                       const PublicSuffixList& psl) {
  std::map<ProviderId, std::set<std::string>> sites_by_provider;
  for (const auto& probe : corpus) {
    const std::string site = fold_dns_name(probe.site.domain);
    for (const auto& ns : probe.dns.nameservers) {
      if (auto id = try_provider_id(ns, psl)) sites_by_provider[*id].insert(site);
    }
  }
  ConcentrationMap out;
  for (const auto& [id, sites] : sites_by_provider) out.emplace(id, sites.size());
  return out;
}

std::vector<ServiceClassification> classify_dns(const SiteRecord& site, const Subject& w,
                                                const DnsFacts& dns,
                                                const ConcentrationMap& concentration,
                                                std::uint64_t threshold,
                                                const PublicSuffixList& psl) {
  if (dns.nameservers.empty()) {
    throw Error(ErrorCode::kEmptyNameserverSet, site.domain + ": no nameservers to classify");
  }
  std::vector<ServiceClassification> out;
  out.reserve(dns.nameservers.size());
  for (const auto& ns : dns.nameservers) {
    ServiceClassification sc;
    sc.site = site;
    sc.kind = ServiceKind::kDns;
    sc.service_host = ns;
    sc.provider = try_provider_id(ns, psl);
    std::optional<RegistrableDomain> ns_soa;
    if (auto it = dns.nameserver_soa.find(ns); it != dns.nameserver_soa.end()) ns_soa = it->second;
    Verdict v = find_service_type(w, ns, ns_soa, psl);
    if (v.classification == Classification::kUnknown && sc.provider) {
      auto it = concentration.find(*sc.provider);
      if (it != concentration.end() && it->second > threshold) {
        v = {Classification::kThirdParty, RuleFired::kConcentration};
      }
    }
    sc.verdict = v.classification;
    sc.rule_fired = v.rule;
    out.push_back(std::move(sc));
  }
  return out;
}

namespace {

std::optional<RegistrableDomain> soa_for(const SoaLookup& host_soa, const std::string& host) {
  auto it = host_soa.find(host);
  return it == host_soa.end() ? std::nullopt : it->second;
}

}  // namespace

std::optional<ServiceClassification> classify_ca(const SiteRecord& site, const Subject& w,
                                                 const TlsFacts& tls, const SoaLookup& host_soa,
                                                 const PublicSuffixList& psl) {
  if (!tls.https_supported) return std::nullopt;
  ServiceClassification sc;
  sc.site = site;
  sc.kind = ServiceKind::kCa;
  if (!tls.ca_url) return sc;  // issuer not in the CA directory: unknown
  sc.service_host = *tls.ca_url;
  sc.provider = try_provider_id(*tls.ca_url, psl);
  const Verdict v = find_service_type(w, *tls.ca_url, soa_for(host_soa, *tls.ca_url), psl);
  sc.verdict = v.classification;
  sc.rule_fired = v.rule;
  return sc;
}

std::vector<std::string> identify_internal_resources(const Subject& w,
                                                     std::span<const std::string> resources,
                                                     const SoaLookup& host_soa,
                                                     const PublicSuffixList& psl) {
  const auto site_icann =
      psl.try_registrable_domain(w.host, PublicSuffixList::Scope::kIcannOnly);
  std::vector<std::string> internal;
  for (const auto& url : resources) {
    const auto host = url_host(url);
    if (!host) continue;
    const auto domain = psl.try_registrable_domain(*host);
    bool is_internal = w.domain && domain && *w.domain == *domain;
    if (!is_internal && w.https && domain) {
      is_internal = std::binary_search(w.san_domains.begin(), w.san_domains.end(), *domain);
    }
    if (!is_internal && w.soa) {
      const auto soa = soa_for(host_soa, *host);
      is_internal = soa && *soa == *w.soa;
    }
    if (!is_internal && site_icann) {
      const auto icann = psl.try_registrable_domain(*host, PublicSuffixList::Scope::kIcannOnly);
      is_internal = icann && *icann == *site_icann;
    }
    if (is_internal) internal.push_back(url);
  }
  return internal;
}

std::vector<ServiceClassification> classify_cdns(
    const SiteRecord& site, const Subject& w, std::span<const std::string> internal_resources,
    const std::map<std::string, CnameChain>& cname_chains, const CdnCnameMap& cdn_map,
    const SoaLookup& host_soa, const PublicSuffixList& psl) {
  // cdn name -> every CNAME of an internal resource that maps to it
  std::map<std::string, std::set<std::string>> cnames_by_cdn;
  for (const auto& url : internal_resources) {
    const auto host = url_host(url);
    if (!host) continue;
    auto it = cname_chains.find(*host);
    if (it == cname_chains.end()) continue;
    for (const auto& cname : it->second.chain) {
      if (auto cdn = cdn_map.lookup(cname)) cnames_by_cdn[*cdn].insert(cname);
    }
  }

  std::vector<ServiceClassification> out;
  for (const auto& [cdn, cnames] : cnames_by_cdn) {
    ServiceClassification best;
    best.site = site;
    best.kind = ServiceKind::kCdn;
    best.cdn_name = cdn;
    bool first = true;
    // cnames iterate in lexicographic order, so ties keep the smallest name.
    for (const auto& cname : cnames) {
      const Verdict v = find_service_type(w, cname, soa_for(host_soa, cname), psl);
      const bool better =
          first || (v.classification != best.verdict &&
                    combine_verdicts(v.classification, best.verdict) == v.classification);
      if (better) {
        best.service_host = cname;
        best.provider = try_provider_id(cname, psl);
        best.verdict = v.classification;
        best.rule_fired = v.rule;
        first = false;
      }
    }
    out.push_back(std::move(best));
  }
  return out;
}

SiteDependencyReport classify_site(const ProbeResult& probe, const DataFiles& data,
                                   const ConcentrationMap& concentration,
                                   const ClassifyOptions& options) {
  const auto& psl = data.psl;
  const Subject w = Subject::make(probe.site.domain, probe.tls.https_supported,
                                  probe.tls.san_list, probe.dns.soa_authority, psl);
  SiteDependencyReport report;
  report.site = probe.site;
  report.https_supported = probe.tls.https_supported;
  report.ocsp_stapled = probe.tls.https_supported && probe.tls.ocsp_stapled;
  if (!probe.dns.nameservers.empty()) {
    report.dns = classify_dns(probe.site, w, probe.dns, concentration,
                              options.concentration_threshold, psl);
  }
  report.ca = classify_ca(probe.site, w, probe.tls, probe.host_soa, psl);
  report.internal_resources =
      identify_internal_resources(w, probe.resources.resources, probe.host_soa, psl);
  report.cdns = classify_cdns(probe.site, w, report.internal_resources, probe.cnames,
                              data.cdn_map, probe.host_soa, psl);
  return report;
}

}  // namespace webdep
