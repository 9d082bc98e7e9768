#include "webdep/probe.hpp"

#include <algorithm>
#include <ctime>
#include <set>

#include "webdep/dns_name.hpp"
#include "webdep/error.hpp"
#include "webdep/url.hpp"

namespace webdep {
namespace {

std::optional<std::string> parent_name(const std::string& name) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) return std::nullopt;
  return name.substr(dot + 1);
}

std::vector<std::string> records_of(const DnsResponse& response, RecordType type) {
  std::vector<std::string> out;
  for (const auto& rr : response.answers) {
    if (rr.type == type) out.push_back(rr.data);
  }
  return out;
}

}  // namespace

bool site_order(const SiteRecord& a, const SiteRecord& b) {
  return std::tie(a.country, a.rank, a.domain) < std::tie(b.country, b.rank, b.domain);
}

std::string utc_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  ::gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<RegistrableDomain> soa_authority(std::string_view host,
                                               const DnsResolver& resolver,
                                               const PublicSuffixList& psl) {
  std::string name;
  try {
    name = normalize_dns_name(host);
  } catch (const Error&) {
    return std::nullopt;
  }
  bool alias = false;
  auto mname_of = [&](const std::string& n) -> std::optional<std::string> {
    try {
      const DnsResponse response = resolver.query(n, RecordType::kSoa);
      for (const auto& rr : response.answers) {
        if (rr.type == RecordType::kCname && rr.name == n) alias = true;
      }
      if (alias) return std::nullopt;
      auto soa = records_of(response, RecordType::kSoa);
      if (!soa.empty()) return soa.front();
      // NODATA / NXDOMAIN: the enclosing zone's SOA rides in the authority
      // section.
      for (const auto& rr : response.authority) {
        if (rr.type == RecordType::kSoa) return rr.data;
      }
    } catch (const Error&) {
    }
    return std::nullopt;
  };
  std::optional<std::string> mname = mname_of(name);
  if (alias) {
    // The resolver answered for the alias target's zone. The alias itself
    // belongs to the zone of its registrable domain.
    const auto rd = psl.try_registrable_domain(name);
    if (!rd || rd->value() == name) return std::nullopt;
    alias = false;
    mname = mname_of(rd->value());
  } else if (!mname) {
    if (auto parent = parent_name(name)) mname = mname_of(*parent);
  }
  if (!mname) return std::nullopt;
  return psl.try_registrable_domain(*mname);
}

DnsFacts probe_dns(std::string_view domain, const DnsResolver& resolver,
                   const PublicSuffixList& psl) {
  const std::string name = normalize_dns_name(domain);

  // NS records owned by `n` itself; records reached through a CNAME belong to
  // the alias target and are ignored.
  auto lookup = [&](const std::string& n) {
    DnsResponse response = resolver.query(n, RecordType::kNs);
    if (response.rcode == Rcode::kNxDomain) {
      throw Error(ErrorCode::kResolutionFailed, n + ": NXDOMAIN");
    }
    std::vector<std::string> out;
    for (const auto& rr : response.answers) {
      if (rr.type == RecordType::kNs && rr.name == n) out.push_back(rr.data);
    }
    return out;
  };

  // Walk up to the zone cut, never into an ICANN public suffix. Private-section
  // suffixes are ordinary zones run by their operator.
  std::vector<std::string> raw = lookup(name);
  for (auto parent = parent_name(name);
       raw.empty() && parent && !psl.is_public_suffix(*parent, PublicSuffixList::Scope::kIcannOnly);
       parent = parent_name(*parent)) {
    raw = lookup(*parent);
  }

  std::set<std::string> unique;
  for (const auto& ns : raw) {
    if (is_valid_dns_name(ns)) unique.insert(normalize_dns_name(ns));
  }
  if (unique.empty()) {
    throw Error(ErrorCode::kResolutionFailed, name + ": NODATA (no NS records)");
  }

  DnsFacts facts;
  facts.nameservers.assign(unique.begin(), unique.end());
  facts.soa_authority = soa_authority(name, resolver, psl);
  for (const auto& ns : facts.nameservers) {
    facts.nameserver_soa[ns] = soa_authority(ns, resolver, psl);
  }
  return facts;
}

CnameChain resolve_cname_chain(std::string_view hostname, const DnsResolver& resolver,
                               std::size_t max_depth) {
  CnameChain result;
  result.origin = normalize_dns_name(hostname);
  std::set<std::string> seen{result.origin};
  std::string current = result.origin;

  while (true) {
    const DnsResponse response = resolver.query(current, RecordType::kA);
    std::map<std::string, std::string> aliases;
    bool has_address = false;
    for (const auto& rr : response.answers) {
      if (rr.type == RecordType::kCname) aliases.emplace(rr.name, normalize_dns_name(rr.data));
    }
    bool progressed = false;
    for (auto it = aliases.find(current); it != aliases.end(); it = aliases.find(current)) {
      const std::string target = it->second;
      if (!seen.insert(target).second) {
        throw Error(ErrorCode::kChainTooLong,
                    result.origin + ": CNAME loop through " + target);
      }
      result.chain.push_back(target);
      if (result.chain.size() > max_depth) {
        throw Error(ErrorCode::kChainTooLong, result.origin + ": CNAME chain longer than " +
                                                  std::to_string(max_depth));
      }
      current = target;
      progressed = true;
    }
    for (const auto& rr : response.answers) {
      if ((rr.type == RecordType::kA || rr.type == RecordType::kAaaa) && rr.name == current) {
        has_address = true;
      }
    }
    if (response.rcode == Rcode::kNxDomain) {
      if (result.chain.empty()) {
        throw Error(ErrorCode::kResolutionFailed, current + ": NXDOMAIN");
      }
      break;  // dangling alias; the last name is terminal
    }
    // A partial answer ends at an alias without data: ask again from there.
    if (!progressed || has_address) break;
  }
  result.terminal = current;
  return result;
}

std::optional<std::string> resolve_address(std::string_view host, const DnsResolver& resolver) {
  for (RecordType type : {RecordType::kA, RecordType::kAaaa}) {
    try {
      auto addrs = records_of(resolver.query(host, type), type);
      if (!addrs.empty()) return addrs.back();
    } catch (const Error&) {
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Prober::Prober(ProbeConfig config, std::shared_ptr<const DataFiles> data)
    : config_(std::move(config)), data_(std::move(data)), resolver_(config_.resolver) {}

void Prober::throttle(const std::string& host) const {
  if (config_.host_limiter) config_.host_limiter->acquire("host:" + host);
}

ProbeResult Prober::probe_site(const SiteRecord& site) const {
  ProbeResult result;
  result.site = site;
  result.probe_time = utc_timestamp_now();
  result.tls = TlsFacts{};
  result.resources.source = ResourceSource::kHtmlFallback;

  std::string domain;
  try {
    domain = normalize_dns_name(site.domain);
  } catch (const Error& e) {
    for (const char* stage : {"dns", "tls", "resources"}) result.errors.push_back({stage, e.what()});
    return result;
  }
  result.site.domain = domain;

  try {
    result.dns = probe_dns(domain, resolver_, data_->psl);
  } catch (const Error& e) {
    result.errors.push_back({"dns", e.what()});
  }

  throttle(domain);
  std::string tls_failure;
  result.tls = probe_tls(domain, resolver_, config_.tls, data_->ca_directory, &tls_failure);
  if (!result.tls.https_supported) result.errors.push_back({"tls", tls_failure});

  bool have_resources = false;
  if (config_.har_dir) {
    const auto har = *config_.har_dir / (domain + ".har");
    if (std::filesystem::exists(har)) {
      try {
        result.resources = ingest_har(har);
        have_resources = true;
      } catch (const Error& e) {
        result.errors.push_back({"resources", e.what()});
      }
    }
  }
  if (!have_resources) {
    throttle(domain);
    try {
      result.resources = fetch_resources_fallback(domain, resolver_, config_.http);
    } catch (const Error& e) {
      result.resources = ResourceSet{{}, ResourceSource::kHtmlFallback};
      result.errors.push_back({"resources", e.what()});
    }
  }

  std::set<std::string> hosts;
  for (const auto& url : result.resources.resources) {
    if (auto host = url_host(url)) hosts.insert(*host);
  }
  std::set<std::string> soa_hosts(hosts);
  for (const auto& host : hosts) {
    try {
      CnameChain chain = resolve_cname_chain(host, resolver_, config_.cname_depth);
      soa_hosts.insert(chain.chain.begin(), chain.chain.end());
      result.cnames.emplace(host, std::move(chain));
    } catch (const Error& e) {
      result.errors.push_back({"cname", e.what()});
    }
  }
  if (result.tls.ca_url) soa_hosts.insert(*result.tls.ca_url);
  for (const auto& host : soa_hosts) {
    result.host_soa[host] = soa_authority(host, resolver_, data_->psl);
  }
  return result;
}

}  // namespace webdep
