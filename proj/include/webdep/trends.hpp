#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webdep/metrics.hpp"

namespace webdep {

struct RankedList {
  std::string label;
  std::vector<std::string> entries;  // unique; rank = position + 1

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

// Normalizes entries and rejects duplicates (MalformedRow).
RankedList make_ranked_list(std::string label, std::span<const std::string> domains);
// One domain per line; blank lines and '#' comments skipped.
RankedList load_ranked_list(const std::filesystem::path& path, std::string label);
// First `n` entries (all of them when n exceeds the size).
RankedList prefix(const RankedList& list, std::size_t n);

enum class Indicator { kGdp, kKei, kNri, kIdi };
std::string_view to_string(Indicator indicator);
Indicator parse_indicator(std::string_view text);

struct CountryIndicator {
  std::string country;
  Indicator indicator = Indicator::kGdp;
  double value = 0.0;

  friend bool operator==(const CountryIndicator&, const CountryIndicator&) = default;
};

enum class GroupScheme { kRegion, kLanguage, kTradingBloc, kOverlapClass };
std::string_view to_string(GroupScheme scheme);
GroupScheme parse_group_scheme(std::string_view text);

struct CountryGroup {
  GroupScheme scheme = GroupScheme::kRegion;
  std::string group_name;
  std::set<std::string> countries;

  friend bool operator==(const CountryGroup&, const CountryGroup&) = default;
};

// `country,indicator,value`. An optional header row is skipped.
std::vector<CountryIndicator> parse_indicators(std::string_view text, std::string_view source);
std::vector<CountryIndicator> load_indicators(const std::filesystem::path& path);
// `scheme,group,country`. Region, language and overlap-class must partition
// their countries; trading blocs may overlap.
std::vector<CountryGroup> parse_groupings(std::string_view text, std::string_view source);
std::vector<CountryGroup> load_groupings(const std::filesystem::path& path);
std::vector<CountryGroup> groups_of(std::span<const CountryGroup> groups, GroupScheme scheme);

// |regional ∩ global| / |regional|. Throws EmptyRegionalList.
double overlap_fraction(const RankedList& regional, const RankedList& global_subset);

enum class OverlapClass { kHigh, kMedium, kLow };
std::string_view to_string(OverlapClass c);

// Tertiles by descending overlap; equal overlaps are ordered by country code
// so the earlier code lands in the higher class. With n % 3 leftover
// countries, high takes the first extra and medium the second.
// Throws TooFewCountries.
std::map<std::string, OverlapClass> overlap_class(const std::map<std::string, double>& overlaps);

// Sample Pearson coefficient. Throws TooFewPoints, LengthMismatch, ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

enum class Strength { kWeak, kModerate, kStrong };
std::string_view to_string(Strength s);
// Half-open bands on |r|: [0, 0.3) weak, [0.3, 0.7) moderate, [0.7, 1] strong.
Strength strength_of(double r);
// e.g. "moderate positive", "weak negative"; r == 0 is "weak none".
std::string strength_label(double r);

enum class DependencyVariable { kMean, kDns, kCa, kCdn };
std::string_view to_string(DependencyVariable v);
DependencyVariable parse_dependency_variable(std::string_view text);
double dependency_value(const CountryAggregate& agg, DependencyVariable v);

struct CorrelationResult {
  Indicator indicator = Indicator::kGdp;
  DependencyVariable dependency = DependencyVariable::kMean;
  std::string scope;  // "overall" or a group name
  double r = 0.0;
  std::size_t n = 0;
  Strength strength = Strength::kWeak;
  std::optional<std::string> error;  // error code name when r is undefined for the group

  friend bool operator==(const CorrelationResult&, const CorrelationResult&) = default;
};

// One overall result plus one per group (groups with no aggregated member are
// omitted). Throws MissingIndicator listing every aggregated country without a
// value. Pearson errors are recorded per scope in CorrelationResult::error.
std::vector<CorrelationResult> correlate(std::span<const CountryAggregate> aggregates,
                                         std::span<const CountryIndicator> indicators,
                                         Indicator indicator,
                                         std::span<const CountryGroup> groups,
                                         DependencyVariable dependency = DependencyVariable::kMean);

struct FiveNumberSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;

  friend bool operator==(const FiveNumberSummary&, const FiveNumberSummary&) = default;
};

// Quartiles by linear interpolation between order statistics. Throws EmptyGroup.
FiveNumberSummary five_number_summary(std::span<const double> values);

struct GroupSummary {
  GroupScheme scheme = GroupScheme::kRegion;
  std::string group_name;
  std::size_t n = 0;
  FiveNumberSummary summary;
  double mean = 0.0;
  // Sample standard deviation across the member countries; absent when n < 2.
  std::optional<double> std_dev;

  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

// Groups with no aggregated member are omitted; a group defined with no
// countries throws EmptyGroup.
std::vector<GroupSummary> group_summary(std::span<const CountryAggregate> aggregates,
                                        std::span<const CountryGroup> groups,
                                        DependencyVariable dependency = DependencyVariable::kMean);

}  // namespace webdep
