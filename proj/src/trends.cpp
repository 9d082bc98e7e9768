#include "webdep/trends.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "webdep/dns_name.hpp"
#include "webdep/error.hpp"
#include "webdep/text.hpp"

namespace webdep {
namespace {

[[noreturn]] void malformed(std::string_view source, std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::kMalformedRow,
              std::string(source) + ":" + std::to_string(line_no) + ": " + why);
}

std::string country_code(std::string_view raw, std::string_view source, std::size_t line_no) {
  std::string code(trim(raw));
  std::transform(code.begin(), code.end(), code.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (code.size() != 2 || !std::isalpha(static_cast<unsigned char>(code[0])) ||
      !std::isalpha(static_cast<unsigned char>(code[1]))) {
    malformed(source, line_no, "bad country code '" + std::string(raw) + "'");
  }
  return code;
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const Enum (&values)[N], std::string_view what) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::kMalformedRow, "unknown " + std::string(what) + " '" + std::string(text) + "'");
}

constexpr Indicator kIndicators[] = {Indicator::kGdp, Indicator::kKei, Indicator::kNri,
                                     Indicator::kIdi};
constexpr GroupScheme kSchemes[] = {GroupScheme::kRegion, GroupScheme::kLanguage,
                                    GroupScheme::kTradingBloc, GroupScheme::kOverlapClass};
constexpr DependencyVariable kDependencyVariables[] = {
    DependencyVariable::kMean, DependencyVariable::kDns, DependencyVariable::kCa,
    DependencyVariable::kCdn};

}  // namespace

RankedList make_ranked_list(std::string label, std::span<const std::string> domains) {
  RankedList list;
  list.label = std::move(label);
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    std::string d = normalize_dns_name(domains[i]);
    if (!seen.insert(d).second) malformed(list.label, i + 1, "duplicate entry " + d);
    list.entries.push_back(std::move(d));
  }
  return list;
}

RankedList load_ranked_list(const std::filesystem::path& path, std::string label) {
  const std::string text = read_text_file(path);
  RankedList list;
  list.label = std::move(label);
  std::unordered_set<std::string> seen;
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    if (!is_valid_dns_name(line)) malformed(path.string(), line_no, "invalid domain");
    std::string d = normalize_dns_name(line);
    if (!seen.insert(d).second) malformed(path.string(), line_no, "duplicate entry " + d);
    list.entries.push_back(std::move(d));
  });
  return list;
}

RankedList prefix(const RankedList& list, std::size_t n) {
  RankedList out;
  out.label = list.label;
  out.entries.assign(list.entries.begin(),
                     list.entries.begin() + static_cast<std::ptrdiff_t>(std::min(n, list.entries.size())));
  return out;
}

std::string_view to_string(Indicator indicator) {
  switch (indicator) {
    case Indicator::kGdp: return "GDP";
    case Indicator::kKei: return "KEI";
    case Indicator::kNri: return "NRI";
    case Indicator::kIdi: return "IDI";
  }
  return "?";
}

Indicator parse_indicator(std::string_view text) {
  const std::string upper = [&] {
    std::string s(text);
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  }();
  return parse_enum(std::string_view(upper), kIndicators, "indicator");
}

std::string_view to_string(GroupScheme scheme) {
  switch (scheme) {
    case GroupScheme::kRegion: return "region";
    case GroupScheme::kLanguage: return "language";
    case GroupScheme::kTradingBloc: return "trading-bloc";
    case GroupScheme::kOverlapClass: return "overlap-class";
  }
  return "?";
}

GroupScheme parse_group_scheme(std::string_view text) {
  return parse_enum(text, kSchemes, "grouping scheme");
}

std::vector<CountryIndicator> parse_indicators(std::string_view text, std::string_view source) {
  std::vector<CountryIndicator> out;
  std::set<std::pair<std::string, Indicator>> seen;
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto fields = split(line, ',');
    if (fields.size() != 3) malformed(source, line_no, "expected country,indicator,value");
    if (out.empty() && seen.empty() && ascii_lower(trim(fields[0])) == "country") return;
    CountryIndicator ci;
    ci.country = country_code(fields[0], source, line_no);
    try {
      ci.indicator = parse_indicator(trim(fields[1]));
    } catch (const Error&) {
      malformed(source, line_no, "unknown indicator '" + std::string(trim(fields[1])) + "'");
    }
    const std::string_view v = trim(fields[2]);
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), ci.value);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(ci.value)) {
      malformed(source, line_no, "bad value '" + std::string(v) + "'");
    }
    if (!seen.emplace(ci.country, ci.indicator).second) {
      malformed(source, line_no, "duplicate " + ci.country + " " + std::string(to_string(ci.indicator)));
    }
    out.push_back(std::move(ci));
  });
  return out;
}

std::vector<CountryIndicator> load_indicators(const std::filesystem::path& path) {
  return parse_indicators(read_text_file(path), path.string());
}

std::vector<CountryGroup> parse_groupings(std::string_view text, std::string_view source) {
  std::map<std::pair<GroupScheme, std::string>, std::set<std::string>> members;
  std::map<std::pair<GroupScheme, std::string>, std::string> partition_owner;
  bool first_row = true;
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const bool header_candidate = first_row;
    first_row = false;
    const auto fields = split(line, ',');
    if (fields.size() != 3) malformed(source, line_no, "expected scheme,group,country");
    if (header_candidate && ascii_lower(trim(fields[0])) == "scheme") return;
    GroupScheme scheme;
    try {
      scheme = parse_group_scheme(trim(fields[0]));
    } catch (const Error&) {
      malformed(source, line_no, "unknown scheme '" + std::string(trim(fields[0])) + "'");
    }
    const std::string group(trim(fields[1]));
    if (group.empty()) malformed(source, line_no, "empty group name");
    const std::string country = country_code(fields[2], source, line_no);
    if (scheme != GroupScheme::kTradingBloc) {
      auto [it, inserted] = partition_owner.emplace(std::make_pair(scheme, country), group);
      if (!inserted && it->second != group) {
        malformed(source, line_no,
                  country + " is in both '" + it->second + "' and '" + group + "'");
      }
    }
    members[{scheme, group}].insert(country);
  });
  std::vector<CountryGroup> out;
  for (auto& [key, countries] : members) {
    out.push_back({key.first, key.second, std::move(countries)});
  }
  return out;
}

std::vector<CountryGroup> load_groupings(const std::filesystem::path& path) {
  return parse_groupings(read_text_file(path), path.string());
}

std::vector<CountryGroup> groups_of(std::span<const CountryGroup> groups, GroupScheme scheme) {
  std::vector<CountryGroup> out;
  for (const auto& g : groups) {
    if (g.scheme == scheme) out.push_back(g);
  }
  return out;
}

double overlap_fraction(const RankedList& regional, const RankedList& global_subset) {
  if (regional.entries.empty()) {
    throw Error(ErrorCode::kEmptyRegionalList, "regional list '" + regional.label + "' is empty");
  }
  const std::unordered_set<std::string> global(global_subset.entries.begin(),
                                               global_subset.entries.end());
  std::size_t shared = 0;
  for (const auto& d : regional.entries) shared += global.count(d);
  return static_cast<double>(shared) / static_cast<double>(regional.entries.size());
}

std::string_view to_string(OverlapClass c) {
  switch (c) {
    case OverlapClass::kHigh: return "high";
    case OverlapClass::kMedium: return "medium";
    case OverlapClass::kLow: return "low";
  }
  return "?";
}

std::map<std::string, OverlapClass> overlap_class(const std::map<std::string, double>& overlaps) {
  const std::size_t n = overlaps.size();
  if (n < 3) {
    throw Error(ErrorCode::kTooFewCountries,
                "need at least 3 countries, got " + std::to_string(n));
  }
  std::vector<std::pair<std::string, double>> order(overlaps.begin(), overlaps.end());
  // The map is already ordered by code, so a stable sort keeps codes ascending
  // among equal overlaps.
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t base = n / 3;
  const std::size_t high = base + (n % 3 >= 1 ? 1 : 0);
  const std::size_t medium = base + (n % 3 == 2 ? 1 : 0);
  std::map<std::string, OverlapClass> out;
  for (std::size_t i = 0; i < n; ++i) {
    const OverlapClass c = i < high            ? OverlapClass::kHigh
                           : i < high + medium ? OverlapClass::kMedium
                                               : OverlapClass::kLow;
    out.emplace(order[i].first, c);
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "series lengths " + std::to_string(x.size()) +
                                                " and " + std::to_string(y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::kTooFewPoints, "need at least 2 points, got " + std::to_string(n));
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kZeroVariance, sxx == 0.0 ? "x has zero variance" : "y has zero variance");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::string_view to_string(Strength s) {
  switch (s) {
    case Strength::kWeak: return "weak";
    case Strength::kModerate: return "moderate";
    case Strength::kStrong: return "strong";
  }
  return "?";
}

Strength strength_of(double r) {
  const double a = std::fabs(r);
  if (a < 0.3) return Strength::kWeak;
  if (a < 0.7) return Strength::kModerate;
  return Strength::kStrong;
}

std::string strength_label(double r) {
  const char* sign = r > 0 ? "positive" : r < 0 ? "negative" : "none";
  return std::string(to_string(strength_of(r))) + " " + sign;
}

std::string_view to_string(DependencyVariable v) {
  switch (v) {
    case DependencyVariable::kMean: return "mean";
    case DependencyVariable::kDns: return "DNS";
    case DependencyVariable::kCa: return "CA";
    case DependencyVariable::kCdn: return "CDN";
  }
  return "?";
}

DependencyVariable parse_dependency_variable(std::string_view text) {
  for (DependencyVariable v : kDependencyVariables) {
    if (ascii_lower(to_string(v)) == ascii_lower(text)) return v;
  }
  throw Error(ErrorCode::kUsage, "unknown dependency variable '" + std::string(text) + "'");
}

double dependency_value(const CountryAggregate& agg, DependencyVariable v) {
  switch (v) {
    case DependencyVariable::kMean: return agg.mean_third_party();
    case DependencyVariable::kDns: return agg.dns.third_party.value();
    case DependencyVariable::kCa: return agg.ca.third_party.value();
    case DependencyVariable::kCdn: return agg.cdn.third_party.value();
  }
  return 0.0;
}

std::vector<CorrelationResult> correlate(std::span<const CountryAggregate> aggregates,
                                         std::span<const CountryIndicator> indicators,
                                         Indicator indicator,
                                         std::span<const CountryGroup> groups,
                                         DependencyVariable dependency) {
  std::map<std::string, double> values;
  for (const auto& ci : indicators) {
    if (ci.indicator == indicator) values[ci.country] = ci.value;
  }
  std::map<std::string, std::pair<double, double>> points;  // country -> (indicator, dependency)
  std::string missing;
  for (const auto& agg : aggregates) {
    auto it = values.find(agg.country);
    if (it == values.end()) {
      missing += (missing.empty() ? "" : ",") + agg.country;
      continue;
    }
    points[agg.country] = {it->second, dependency_value(agg, dependency)};
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kMissingIndicator,
                std::string(to_string(indicator)) + " missing for " + missing);
  }

  auto result_for = [&](const std::string& scope, const std::vector<std::string>& countries) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& c : countries) {
      xs.push_back(points.at(c).first);
      ys.push_back(points.at(c).second);
    }
    CorrelationResult res;
    res.indicator = indicator;
    res.dependency = dependency;
    res.scope = scope;
    res.n = xs.size();
    try {
      res.r = pearson(xs, ys);
      res.strength = strength_of(res.r);
    } catch (const Error& e) {
      res.error = std::string(error_code_name(e.code()));
    }
    return res;
  };

  std::vector<CorrelationResult> out;
  std::vector<std::string> all;
  for (const auto& [c, _] : points) all.push_back(c);
  out.push_back(result_for("overall", all));
  for (const auto& g : groups) {
    std::vector<std::string> members;
    for (const auto& c : g.countries) {
      if (points.count(c)) members.push_back(c);
    }
    if (members.empty()) continue;
    out.push_back(result_for(g.group_name, members));
  }
  return out;
}

FiveNumberSummary five_number_summary(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyGroup, "no values to summarize");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {v.front(), quantile(0.25), quantile(0.5), quantile(0.75), v.back()};
}

std::vector<GroupSummary> group_summary(std::span<const CountryAggregate> aggregates,
                                        std::span<const CountryGroup> groups,
                                        DependencyVariable dependency) {
  std::map<std::string, double> by_country;
  for (const auto& agg : aggregates) by_country[agg.country] = dependency_value(agg, dependency);
  std::vector<GroupSummary> out;
  for (const auto& g : groups) {
    if (g.countries.empty()) {
      throw Error(ErrorCode::kEmptyGroup, "group '" + g.group_name + "' has no countries");
    }
    std::vector<double> vals;
    for (const auto& c : g.countries) {
      if (auto it = by_country.find(c); it != by_country.end()) vals.push_back(it->second);
    }
    if (vals.empty()) continue;
    GroupSummary gs{g.scheme, g.group_name, vals.size(), five_number_summary(vals)};
    gs.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    if (vals.size() >= 2) {
      double ss = 0.0;
      for (double v : vals) ss += (v - gs.mean) * (v - gs.mean);
      gs.std_dev = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    }
    out.push_back(std::move(gs));
  }
  return out;
}

}  // namespace webdep
