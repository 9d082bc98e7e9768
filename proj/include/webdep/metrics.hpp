#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "webdep/classify.hpp"

namespace webdep {

// Exact fraction; exports render it as a one-decimal percentage.
struct Rate {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;

  double value() const noexcept {
    return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  friend bool operator==(const Rate&, const Rate&) = default;
};

// Per-site view of one service kind at provider granularity. The provider key
// is the CDN name for CDNs and the provider id (registrable domain) for DNS
// and CA; several classifications of one provider combine with
// combine_verdicts.
std::map<std::string, Classification> site_providers(const SiteDependencyReport& report,
                                                     ServiceKind kind);

// A site is third-party dependent for `kind` when at least one of its
// providers is third-party.
bool is_third_party_dependent(const SiteDependencyReport& report, ServiceKind kind);
bool is_critically_dependent(const SiteDependencyReport& report, ServiceKind kind);

// All of these throw EmptyCorpus for an empty input.
Rate third_party_rate(std::span<const SiteDependencyReport> reports, ServiceKind kind);
Rate critical_rate(std::span<const SiteDependencyReport> reports, ServiceKind kind);
// Sites with at least one provider of `kind` whose combined verdict is unknown.
Rate unknown_rate(std::span<const SiteDependencyReport> reports, ServiceKind kind);
Rate https_rate(std::span<const SiteDependencyReport> reports);
Rate ocsp_rate(std::span<const SiteDependencyReport> reports);

struct RedundancyRates {
  Rate redundant;    // > 1 distinct provider
  Rate multi_third;  // > 1 distinct third-party provider
  Rate mixed;        // >= 1 third-party and >= 1 private provider

  friend bool operator==(const RedundancyRates&, const RedundancyRates&) = default;
};

// kind must be DNS or CDN.
RedundancyRates redundancy_rates(std::span<const SiteDependencyReport> reports, ServiceKind kind);

struct ProviderCount {
  std::string provider;
  std::uint64_t sites = 0;

  friend bool operator==(const ProviderCount&, const ProviderCount&) = default;
};

// Providers by distinct third-party-dependent site count, descending, ties by
// provider key.
std::vector<ProviderCount> rank_providers(std::span<const SiteDependencyReport> reports,
                                          ServiceKind kind);

struct TopKCoverage {
  Rate coverage;
  std::vector<ProviderCount> providers;  // the top k (fewer if not enough exist)

  friend bool operator==(const TopKCoverage&, const TopKCoverage&) = default;
};

// Throws EmptyCorpus, NoThirdPartySites, or Usage when k == 0.
TopKCoverage top_k_coverage(std::span<const SiteDependencyReport> reports, ServiceKind kind,
                            std::size_t k);

inline constexpr std::size_t kTopKValues[] = {1, 3, 5};

struct KindAggregate {
  Rate third_party;
  Rate critical;
  Rate unknown;
  std::map<std::size_t, Rate> top_k;  // empty when no site depends on a third party
  std::vector<ProviderCount> top_providers;

  friend bool operator==(const KindAggregate&, const KindAggregate&) = default;
};

struct CountryAggregate {
  std::string country;
  std::uint64_t n_sites = 0;
  KindAggregate dns;
  KindAggregate ca;
  KindAggregate cdn;
  RedundancyRates dns_redundancy;
  RedundancyRates cdn_redundancy;
  Rate https;
  Rate ocsp;

  const KindAggregate& of(ServiceKind kind) const;
  // Unweighted mean of the DNS, CA and CDN third-party rates.
  double mean_third_party() const;

  friend bool operator==(const CountryAggregate&, const CountryAggregate&) = default;
};

CountryAggregate aggregate_country(const std::string& country,
                                   std::span<const SiteDependencyReport> reports);
// One aggregate per country present in `reports`, ordered by country code.
std::vector<CountryAggregate> aggregate_by_country(std::span<const SiteDependencyReport> reports);

// --- Indirect dependencies -----------------------------------------------------

// Network facts about hosts that are not websites (CNAME targets, CA hosts).
class IndirectFactSource {
 public:
  virtual ~IndirectFactSource() = default;
  // nullopt when resolution failed.
  virtual std::optional<DnsFacts> nameservers(const std::string& host) = 0;
  virtual std::optional<CnameChain> cname_chain(const std::string& host) = 0;
  virtual std::optional<RegistrableDomain> soa(const std::string& host) = 0;
};

struct IndirectEdge {
  std::uint64_t n_providers = 0;
  Rate third_party_fraction;
  std::uint64_t newly_dependent_sites = 0;

  friend bool operator==(const IndirectEdge&, const IndirectEdge&) = default;
};

struct IndirectDependencyReport {
  std::string country;
  std::uint64_t n_sites = 0;
  IndirectEdge cdn_to_dns;
  IndirectEdge ca_to_dns;
  IndirectEdge ca_to_cdn;

  friend bool operator==(const IndirectDependencyReport&, const IndirectDependencyReport&) = default;
};

// Each CDN (via its canonical CNAME: the smallest supporting CNAME seen in the
// country) and each CA url is classified as a subject against its own
// nameservers and, for CAs, against the CDNs its CNAME chain maps to.
IndirectDependencyReport indirect_dependencies(const std::string& country,
                                               std::span<const SiteDependencyReport> reports,
                                               IndirectFactSource& facts,
                                               const DataFiles& data);

}  // namespace webdep
