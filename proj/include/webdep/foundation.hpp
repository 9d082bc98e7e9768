#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace webdep {

// Lowercase DNS name value with a domain-specific tag, so a registrable domain
// cannot be passed where a provider id is expected (and vice versa).
template <typename Tag>
class DomainKey {
 public:
  DomainKey() = default;
  explicit DomainKey(std::string value) : value_(std::move(value)) {}

  const std::string& value() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const DomainKey&, const DomainKey&) = default;

 private:
  std::string value_;
};

struct RegistrableDomainTag {};
struct ProviderIdTag {};

// One label plus its public suffix (eTLD+1).
using RegistrableDomain = DomainKey<RegistrableDomainTag>;
// Grouping key for "provider": the registrable domain of a service hostname.
using ProviderId = DomainKey<ProviderIdTag>;

// Public suffix list in the standard public_suffix_list.dat format.
class PublicSuffixList {
 public:
  enum class Scope { kAll, kIcannOnly };

  static PublicSuffixList parse(std::string_view text);
  static PublicSuffixList load(const std::filesystem::path& path);

  // Throws MalformedHostname or SuffixOnly.
  RegistrableDomain registrable_domain(std::string_view hostname,
                                       Scope scope = Scope::kAll) const;
  std::optional<RegistrableDomain> try_registrable_domain(std::string_view hostname,
                                                          Scope scope = Scope::kAll) const;

  std::string public_suffix(std::string_view hostname, Scope scope = Scope::kAll) const;
  bool is_public_suffix(std::string_view hostname, Scope scope = Scope::kAll) const;

  std::size_t rule_count() const noexcept { return rules_.size(); }

 private:
  // Low three bits hold ICANN-section rule kinds, the next three the same
  // kinds from the PRIVATE DOMAINS section.
  enum RuleBits : std::uint8_t {
    kExact = 1,
    kWildcard = 2,
    kException = 4,
  };
  static constexpr int kPrivateShift = 3;

  std::size_t suffix_label_count(const std::vector<std::string_view>& labels,
                                 Scope scope) const;
  std::uint8_t bits_for(const std::string& suffix, Scope scope) const;

  std::unordered_map<std::string, std::uint8_t> rules_;
};

// "TLD match" predicate: both hostnames share a registrable domain.
bool same_registrable_domain(std::string_view a, std::string_view b,
                             const PublicSuffixList& psl);

ProviderId provider_id(std::string_view hostname, const PublicSuffixList& psl);
std::optional<ProviderId> try_provider_id(std::string_view hostname,
                                          const PublicSuffixList& psl);

// `key<TAB>value` text file: '#' comments, blank lines ignored.
std::vector<std::pair<std::string, std::string>> parse_tab_file(std::string_view text,
                                                                std::string_view source);
std::string read_text_file(const std::filesystem::path& path);

// Suffix -> CDN display name fingerprint table.
class CdnCnameMap {
 public:
  struct Entry {
    std::string suffix;
    std::string cdn_name;
  };

  CdnCnameMap() = default;
  explicit CdnCnameMap(std::vector<Entry> entries);

  static CdnCnameMap parse(std::string_view text);
  static CdnCnameMap load(const std::filesystem::path& path);

  // Longest suffix that aligns with a label boundary wins.
  std::optional<std::string> lookup(std::string_view cname) const;

  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Registrable domain -> provider display name (display only; grouping stays
// on the registrable domain).
class ProviderAliases {
 public:
  static ProviderAliases parse(std::string_view text);
  static ProviderAliases load(const std::filesystem::path& path);

  std::string display_name(const ProviderId& id) const;

 private:
  std::unordered_map<std::string, std::string> names_;
};

// Issuer organization -> canonical CA hostname.
class CaDirectory {
 public:
  static CaDirectory parse(std::string_view text);
  static CaDirectory load(const std::filesystem::path& path);

  // Case-insensitive exact match on the organization name.
  std::optional<std::string> ca_url(std::string_view issuer_organization) const;

 private:
  std::unordered_map<std::string, std::string> hosts_;
};

// Bundles every read-only data table the pipeline consults.
struct DataFiles {
  PublicSuffixList psl;
  CdnCnameMap cdn_map;
  ProviderAliases aliases;
  CaDirectory ca_directory;
};

}  // namespace webdep
