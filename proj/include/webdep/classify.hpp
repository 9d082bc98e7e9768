#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webdep/foundation.hpp"
#include "webdep/probe.hpp"

namespace webdep {

enum class ServiceKind { kDns, kCa, kCdn };
enum class Classification { kUnknown, kPrivate, kThirdParty };
enum class RuleFired { kNone, kTldMatch, kSanList, kSoaMismatch, kConcentration };

std::string_view to_string(ServiceKind kind);
std::string_view to_string(Classification verdict);
std::string_view to_string(RuleFired rule);
ServiceKind parse_service_kind(std::string_view text);
Classification parse_classification(std::string_view text);
RuleFired parse_rule_fired(std::string_view text);

struct Verdict {
  Classification classification = Classification::kUnknown;
  RuleFired rule = RuleFired::kNone;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct ServiceClassification {
  SiteRecord site;
  ServiceKind kind = ServiceKind::kDns;
  std::string service_host;  // nameserver, CA url or CNAME; empty for an unresolved CA
  std::optional<ProviderId> provider;
  std::optional<std::string> cdn_name;  // CDN only
  Classification verdict = Classification::kUnknown;
  RuleFired rule_fired = RuleFired::kNone;

  friend bool operator==(const ServiceClassification&, const ServiceClassification&) = default;
};

struct SiteDependencyReport {
  SiteRecord site;
  std::vector<ServiceClassification> dns;
  std::optional<ServiceClassification> ca;
  std::vector<ServiceClassification> cdns;
  std::vector<std::string> internal_resources;
  bool https_supported = false;
  bool ocsp_stapled = false;

  friend bool operator==(const SiteDependencyReport&, const SiteDependencyReport&) = default;
};

// The subject `w` of the ownership heuristics: a website, or during the
// indirect analysis a CNAME or CA host standing in for one.
struct Subject {
  std::string host;
  std::optional<RegistrableDomain> domain;
  bool https = false;
  std::vector<RegistrableDomain> san_domains;  // sorted, unique
  std::optional<RegistrableDomain> soa;

  static Subject make(std::string_view host, bool https, std::span<const std::string> san_list,
                      std::optional<RegistrableDomain> soa, const PublicSuffixList& psl);
};

// SAN entries reduced to registrable domains; wildcard labels are stripped
// first and entries that are bare public suffixes are dropped.
std::vector<RegistrableDomain> san_registrable_domains(std::span<const std::string> san_list,
                                                       const PublicSuffixList& psl);

// The three ordered rules: registrable-domain match, SAN match (HTTPS only),
// SOA mismatch. Total: falls back to unknown.
Verdict find_service_type(const Subject& w, std::string_view service_host,
                          const std::optional<RegistrableDomain>& soa_of_service,
                          const PublicSuffixList& psl);

inline constexpr std::uint64_t kDefaultConcentrationThreshold = 50;

using ConcentrationMap = std::map<ProviderId, std::uint64_t>;

// Distinct sites (by domain) whose nameserver set includes a host of each
// provider.
ConcentrationMap compute_concentration(std::span<const ProbeResult> corpus,
                                       const PublicSuffixList& psl);

// Throws EmptyNameserverSet.
std::vector<ServiceClassification> classify_dns(const SiteRecord& site, const Subject& w,
                                                const DnsFacts& dns,
                                                const ConcentrationMap& concentration,
                                                std::uint64_t threshold,
                                                const PublicSuffixList& psl);

using SoaLookup = std::map<std::string, std::optional<RegistrableDomain>>;

std::optional<ServiceClassification> classify_ca(const SiteRecord& site, const Subject& w,
                                                 const TlsFacts& tls, const SoaLookup& host_soa,
                                                 const PublicSuffixList& psl);

// Resources whose host matches the site by registrable domain, SAN list or
// SOA authority, then by ICANN-section registrable domain. Keeps input order.
std::vector<std::string> identify_internal_resources(const Subject& w,
                                                     std::span<const std::string> resources,
                                                     const SoaLookup& host_soa,
                                                     const PublicSuffixList& psl);

std::vector<ServiceClassification> classify_cdns(
    const SiteRecord& site, const Subject& w, std::span<const std::string> internal_resources,
    const std::map<std::string, CnameChain>& cname_chains, const CdnCnameMap& cdn_map,
    const SoaLookup& host_soa, const PublicSuffixList& psl);

struct ClassifyOptions {
  std::uint64_t concentration_threshold = kDefaultConcentrationThreshold;
};

// All three service kinds for one probed site.
SiteDependencyReport classify_site(const ProbeResult& probe, const DataFiles& data,
                                   const ConcentrationMap& concentration,
                                   const ClassifyOptions& options);

// Precedence used when several verdicts describe one provider:
// private > third-party > unknown.
Classification combine_verdicts(Classification a, Classification b);

}  // namespace webdep
