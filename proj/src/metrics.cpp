#include "webdep/metrics.hpp"

#include <algorithm>
#include <set>

#include "webdep/error.hpp"

namespace webdep {
namespace {

void require_nonempty(std::span<const SiteDependencyReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyCorpus, "no site reports");
}

std::string provider_key(const ServiceClassification& sc) {
  if (sc.kind == ServiceKind::kCdn && sc.cdn_name) return *sc.cdn_name;
  if (sc.provider) return sc.provider->value();
  if (!sc.service_host.empty()) return sc.service_host;
  return "(unresolved)";
}

template <typename Pred>
Rate count_sites(std::span<const SiteDependencyReport> reports, Pred&& pred) {
  require_nonempty(reports);
  Rate rate{0, reports.size()};
  for (const auto& r : reports) {
    if (pred(r)) ++rate.numerator;
  }
  return rate;
}

std::size_t count_verdict(const std::map<std::string, Classification>& providers,
                          Classification verdict) {
  return static_cast<std::size_t>(std::count_if(
      providers.begin(), providers.end(), [&](const auto& p) { return p.second == verdict; }));
}

}  // namespace

std::map<std::string, Classification> site_providers(const SiteDependencyReport& report,
                                                     ServiceKind kind) {
  std::map<std::string, Classification> out;
  auto add = [&](const ServiceClassification& sc) {
    auto [it, inserted] = out.emplace(provider_key(sc), sc.verdict);
    if (!inserted) it->second = combine_verdicts(it->second, sc.verdict);
  };
  switch (kind) {
    case ServiceKind::kDns:
      for (const auto& sc : report.dns) add(sc);
      break;
    case ServiceKind::kCa:
      if (report.ca) add(*report.ca);
      break;
    case ServiceKind::kCdn:
      for (const auto& sc : report.cdns) add(sc);
      break;
  }
  return out;
}

bool is_third_party_dependent(const SiteDependencyReport& report, ServiceKind kind) {
  return count_verdict(site_providers(report, kind), Classification::kThirdParty) > 0;
}

bool is_critically_dependent(const SiteDependencyReport& report, ServiceKind kind) {
  if (kind == ServiceKind::kCa) {
    return report.https_supported && report.ca &&
           report.ca->verdict == Classification::kThirdParty && !report.ocsp_stapled;
  }
  const auto providers = site_providers(report, kind);
  return providers.size() == 1 && providers.begin()->second == Classification::kThirdParty;
}

Rate third_party_rate(std::span<const SiteDependencyReport> reports, ServiceKind kind) {
  return count_sites(reports, [&](const auto& r) { return is_third_party_dependent(r, kind); });
}

Rate critical_rate(std::span<const SiteDependencyReport> reports, ServiceKind kind) {
  return count_sites(reports, [&](const auto& r) { return is_critically_dependent(r, kind); });
}

Rate unknown_rate(std::span<const SiteDependencyReport> reports, ServiceKind kind) {
  return count_sites(reports, [&](const auto& r) {
    return count_verdict(site_providers(r, kind), Classification::kUnknown) > 0;
  });
}

Rate https_rate(std::span<const SiteDependencyReport> reports) {
  return count_sites(reports, [](const auto& r) { return r.https_supported; });
}

Rate ocsp_rate(std::span<const SiteDependencyReport> reports) {
  return count_sites(reports, [](const auto& r) { return r.https_supported && r.ocsp_stapled; });
}

RedundancyRates redundancy_rates(std::span<const SiteDependencyReport> reports, ServiceKind kind) {
  if (kind == ServiceKind::kCa) {
    throw Error(ErrorCode::kUsage, "redundancy is defined for DNS and CDN only");
  }
  require_nonempty(reports);
  RedundancyRates out{{0, reports.size()}, {0, reports.size()}, {0, reports.size()}};
  for (const auto& r : reports) {
    const auto providers = site_providers(r, kind);
    const auto third = count_verdict(providers, Classification::kThirdParty);
    const auto priv = count_verdict(providers, Classification::kPrivate);
    if (providers.size() > 1) ++out.redundant.numerator;
    if (third > 1) ++out.multi_third.numerator;
    if (third >= 1 && priv >= 1) ++out.mixed.numerator;
  }
  return out;
}

std::vector<ProviderCount> rank_providers(std::span<const SiteDependencyReport> reports,
                                          ServiceKind kind) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : reports) {
    for (const auto& [key, verdict] : site_providers(r, kind)) {
      if (verdict == Classification::kThirdParty) ++counts[key];
    }
  }
  std::vector<ProviderCount> ranked;
  ranked.reserve(counts.size());
  for (const auto& [key, n] : counts) ranked.push_back({key, n});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ProviderCount& a, const ProviderCount& b) { return a.sites > b.sites; });
  return ranked;
}

TopKCoverage top_k_coverage(std::span<const SiteDependencyReport> reports, ServiceKind kind,
                            std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kUsage, "k must be at least 1");
  require_nonempty(reports);
  auto ranked = rank_providers(reports, kind);
  if (ranked.empty()) {
    throw Error(ErrorCode::kNoThirdPartySites,
                std::string("no site depends on a third-party ") + std::string(to_string(kind)));
  }
  ranked.resize(std::min(k, ranked.size()));
  std::set<std::string> top;
  for (const auto& p : ranked) top.insert(p.provider);

  TopKCoverage out;
  out.providers = std::move(ranked);
  for (const auto& r : reports) {
    bool dependent = false;
    bool covered = false;
    for (const auto& [key, verdict] : site_providers(r, kind)) {
      if (verdict != Classification::kThirdParty) continue;
      dependent = true;
      if (top.count(key)) covered = true;
    }
    if (dependent) ++out.coverage.denominator;
    if (covered) ++out.coverage.numerator;
  }
  return out;
}

const KindAggregate& CountryAggregate::of(ServiceKind kind) const {
  switch (kind) {
    case ServiceKind::kDns: return dns;
    case ServiceKind::kCa: return ca;
    case ServiceKind::kCdn: return cdn;
  }
  return dns;
}

double CountryAggregate::mean_third_party() const {
  return (dns.third_party.value() + ca.third_party.value() + cdn.third_party.value()) / 3.0;
}

CountryAggregate aggregate_country(const std::string& country,
                                   std::span<const SiteDependencyReport> reports) {
  require_nonempty(reports);
  CountryAggregate agg;
  agg.country = country;
  agg.n_sites = reports.size();
  for (ServiceKind kind : {ServiceKind::kDns, ServiceKind::kCa, ServiceKind::kCdn}) {
    KindAggregate& k = kind == ServiceKind::kDns ? agg.dns
                       : kind == ServiceKind::kCa ? agg.ca
                                                   : agg.cdn;
    k.third_party = third_party_rate(reports, kind);
    k.critical = critical_rate(reports, kind);
    k.unknown = unknown_rate(reports, kind);
    k.top_providers = rank_providers(reports, kind);
    if (!k.top_providers.empty()) {
      for (std::size_t topk : kTopKValues) k.top_k[topk] = top_k_coverage(reports, kind, topk).coverage;
    }
  }
  agg.dns_redundancy = redundancy_rates(reports, ServiceKind::kDns);
  agg.cdn_redundancy = redundancy_rates(reports, ServiceKind::kCdn);
  agg.https = https_rate(reports);
  agg.ocsp = ocsp_rate(reports);
  return agg;
}

std::vector<CountryAggregate> aggregate_by_country(std::span<const SiteDependencyReport> reports) {
  require_nonempty(reports);
  std::map<std::string, std::vector<SiteDependencyReport>> by_country;
  for (const auto& r : reports) by_country[r.site.country].push_back(r);
  std::vector<CountryAggregate> out;
  for (const auto& [country, rs] : by_country) out.push_back(aggregate_country(country, rs));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// True when any nameserver of `host` is third-party with `host` as subject.
bool dns_third_party(const std::string& host, IndirectFactSource& facts, const DataFiles& data) {
  const auto dns = facts.nameservers(host);
  if (!dns) return false;
  const Subject w = Subject::make(host, false, {}, facts.soa(host), data.psl);
  for (const auto& ns : dns->nameservers) {
    std::optional<RegistrableDomain> ns_soa;
    if (auto it = dns->nameserver_soa.find(ns); it != dns->nameserver_soa.end()) ns_soa = it->second;
    if (find_service_type(w, ns, ns_soa, data.psl).classification == Classification::kThirdParty) {
      return true;
    }
  }
  return false;
}

bool cdn_third_party(const std::string& ca_host, IndirectFactSource& facts, const DataFiles& data) {
  const auto chain = facts.cname_chain(ca_host);
  if (!chain) return false;
  const Subject w = Subject::make(ca_host, false, {}, facts.soa(ca_host), data.psl);
  std::map<std::string, Classification> by_cdn;
  for (const auto& name : chain->chain) {
    const auto cdn = data.cdn_map.lookup(name);
    if (!cdn) continue;
    const Classification v = find_service_type(w, name, facts.soa(name), data.psl).classification;
    auto [it, inserted] = by_cdn.emplace(*cdn, v);
    if (!inserted) it->second = combine_verdicts(it->second, v);
  }
  return std::any_of(by_cdn.begin(), by_cdn.end(),
                     [](const auto& p) { return p.second == Classification::kThirdParty; });
}

Rate fraction_true(const std::map<std::string, bool>& flags) {
  Rate r{0, flags.size()};
  for (const auto& [_, flag] : flags) r.numerator += flag ? 1 : 0;
  return r;
}

}  // namespace

IndirectDependencyReport indirect_dependencies(const std::string& country,
                                               std::span<const SiteDependencyReport> reports,
                                               IndirectFactSource& facts,
                                               const DataFiles& data) {
  IndirectDependencyReport out;
  out.country = country;
  out.n_sites = reports.size();

  std::map<std::string, std::string> canonical_cname;  // cdn name -> smallest CNAME
  std::set<std::string> ca_hosts;
  for (const auto& r : reports) {
    for (const auto& sc : r.cdns) {
      if (!sc.cdn_name || sc.service_host.empty()) continue;
      auto [it, inserted] = canonical_cname.emplace(*sc.cdn_name, sc.service_host);
      if (!inserted && sc.service_host < it->second) it->second = sc.service_host;
    }
    if (r.ca && !r.ca->service_host.empty()) ca_hosts.insert(r.ca->service_host);
  }

  std::map<std::string, bool> cdn_dns;
  for (const auto& [cdn, cname] : canonical_cname) cdn_dns[cdn] = dns_third_party(cname, facts, data);
  std::map<std::string, bool> ca_dns;
  std::map<std::string, bool> ca_cdn;
  for (const auto& host : ca_hosts) {
    ca_dns[host] = dns_third_party(host, facts, data);
    ca_cdn[host] = cdn_third_party(host, facts, data);
  }

  out.cdn_to_dns = {cdn_dns.size(), fraction_true(cdn_dns), 0};
  out.ca_to_dns = {ca_dns.size(), fraction_true(ca_dns), 0};
  out.ca_to_cdn = {ca_cdn.size(), fraction_true(ca_cdn), 0};

  for (const auto& r : reports) {
    const bool has_third_dns = is_third_party_dependent(r, ServiceKind::kDns);
    const bool has_third_cdn = is_third_party_dependent(r, ServiceKind::kCdn);
    const bool ca_not_third = r.ca && !r.ca->service_host.empty() &&
                              r.ca->verdict != Classification::kThirdParty;
    if (!has_third_dns) {
      const bool via_cdn = std::any_of(r.cdns.begin(), r.cdns.end(), [&](const auto& sc) {
        return sc.verdict != Classification::kThirdParty && sc.cdn_name &&
               cdn_dns.count(*sc.cdn_name) && cdn_dns.at(*sc.cdn_name);
      });
      if (via_cdn) ++out.cdn_to_dns.newly_dependent_sites;
      if (ca_not_third && ca_dns.at(r.ca->service_host)) ++out.ca_to_dns.newly_dependent_sites;
    }
    if (!has_third_cdn && ca_not_third && ca_cdn.at(r.ca->service_host)) {
      ++out.ca_to_cdn.newly_dependent_sites;
    }
  }
  return out;
}

}  // namespace webdep
