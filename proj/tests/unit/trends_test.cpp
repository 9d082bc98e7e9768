#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "common.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "webdep/error.hpp"
#include "webdep/trends.hpp"

using namespace webdep;
using namespace webdep::testing;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kUsage;
}

RankedList list(std::vector<std::string> domains, std::string label = "l") {
  return make_ranked_list(std::move(label), domains);
}

// An aggregate whose three third-party rates are a/1000, b/1000, c/1000.
CountryAggregate agg(const std::string& country, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  CountryAggregate g;
  g.country = country;
  g.n_sites = 1000;
  g.dns.third_party = {a, 1000};
  g.ca.third_party = {b, 1000};
  g.cdn.third_party = {c, 1000};
  return g;
}

}  // namespace

TEST_SUITE("overlap") {
  TEST_CASE("worked examples") {
    const auto r = list({"a.test", "b.test", "c.test", "d.test"});
    CHECK(overlap_fraction(r, list({"d.test", "c.test", "b.test", "a.test", "e.test"})) == 1.0);
    CHECK(overlap_fraction(r, list({"x.test", "y.test"})) == 0.0);
    CHECK(overlap_fraction(r, list({"b.test", "z.test", "d.test"})) == 0.5);
    CHECK(code_of([] { overlap_fraction(list({}), list({"a.test"})); }) == ErrorCode::kEmptyRegionalList);
  }

  TEST_CASE("ranked lists") {
    CHECK(code_of([] { list({"a.test", "A.test."}); }) == ErrorCode::kMalformedRow);
    const auto l = list({"a.test", "b.test", "c.test"});
    CHECK(prefix(l, 2).entries == std::vector<std::string>{"a.test", "b.test"});
    CHECK(prefix(l, 10).entries.size() == 3);
  }

  TEST_CASE("monotone in the global subset") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 200; ++i) {
      std::vector<std::string> universe;
      for (int k = 0; k < 40; ++k) universe.push_back("d" + std::to_string(k) + ".test");
      std::shuffle(universe.begin(), universe.end(), rng);
      const auto global = list(universe);
      std::shuffle(universe.begin(), universe.end(), rng);
      const auto regional = list(std::vector<std::string>(universe.begin(), universe.begin() + 10));
      double prev = 0.0;
      for (std::size_t n = 0; n <= 40; n += 5) {
        const double f = overlap_fraction(regional, prefix(global, n));
        CHECK(f >= prev);
        prev = f;
      }
      CHECK(prev == 1.0);
    }
  }

  TEST_CASE("tertiles") {
    const auto three = overlap_class({{"AA", 0.9}, {"BB", 0.5}, {"CC", 0.1}});
    CHECK(three.at("AA") == OverlapClass::kHigh);
    CHECK(three.at("BB") == OverlapClass::kMedium);
    CHECK(three.at("CC") == OverlapClass::kLow);

    const auto tied = overlap_class({{"CC", 0.4}, {"AA", 0.4}, {"BB", 0.4}, {"DD", 0.4}});
    CHECK(tied.at("AA") == OverlapClass::kHigh);
    CHECK(tied.at("BB") == OverlapClass::kHigh);
    CHECK(tied.at("CC") == OverlapClass::kMedium);
    CHECK(tied.at("DD") == OverlapClass::kLow);
    CHECK(overlap_class({{"CC", 0.4}, {"AA", 0.4}, {"BB", 0.4}, {"DD", 0.4}}) == tied);

    CHECK(code_of([] { overlap_class({{"AA", 0.1}, {"BB", 0.2}}); }) == ErrorCode::kTooFewCountries);
  }

  TEST_CASE("class sizes differ by at most one") {
    std::mt19937_64 rng(115);
    for (std::size_t n = 3; n <= 115; ++n) {
      std::map<std::string, double> overlaps;
      for (std::size_t i = 0; i < n; ++i) {
        overlaps["C" + std::to_string(i)] = static_cast<double>(rng() % 5) / 4.0;
      }
      std::map<OverlapClass, std::size_t> sizes;
      const auto classes = overlap_class(overlaps);
      for (const auto& [_, c] : classes) ++sizes[c];
      const auto [lo, hi] = std::minmax({sizes[OverlapClass::kHigh], sizes[OverlapClass::kMedium],
                                         sizes[OverlapClass::kLow]});
      CHECK(hi - lo <= 1);
      // Higher classes never hold a smaller overlap than lower ones.
      for (const auto& [a, ca] : classes) {
        for (const auto& [b, cb] : classes) {
          if (ca < cb) CHECK(overlaps[a] >= overlaps[b]);
        }
      }
    }
  }
}

TEST_SUITE("pearson") {
  TEST_CASE("worked examples") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> neg{-1, -2, -3, -4};
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    const std::vector<double> y{2, 1, 4, 3};
    const double r = pearson(x, y);
    CHECK(std::fabs(r - static_cast<double>(textbook_pearson(x, y))) <= 1e-12);
    CHECK(std::fabs(r - 0.6) <= 1e-12);
  }

  TEST_CASE("errors") {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{1, 2};
    const std::vector<double> flat{5, 5, 5};
    const std::vector<double> one{1};
    CHECK(code_of([&] { pearson(a, b); }) == ErrorCode::kLengthMismatch);
    CHECK(code_of([&] { pearson(a, flat); }) == ErrorCode::kZeroVariance);
    CHECK(code_of([&] { pearson(one, one); }) == ErrorCode::kTooFewPoints);
  }

  TEST_CASE("symmetry, affine invariance and negation") {
    std::mt19937_64 rng(202);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
      const std::size_t n = 3 + rng() % 40;
      std::vector<double> x(n), y(n);
      for (std::size_t k = 0; k < n; ++k) {
        x[k] = noise(rng);
        y[k] = 0.5 * x[k] + noise(rng);
      }
      const double r = pearson(x, y);
      CHECK(pearson(y, x) == doctest::Approx(r).epsilon(1e-12));
      std::vector<double> ax(n), ny(n);
      for (std::size_t k = 0; k < n; ++k) {
        ax[k] = 3.5 * x[k] + 100.0;
        ny[k] = -y[k];
      }
      CHECK(std::fabs(pearson(ax, y) - r) <= 1e-12);
      CHECK(std::fabs(pearson(x, ny) + r) <= 1e-12);
      CHECK(std::fabs(r - static_cast<double>(textbook_pearson(x, y))) <= 1e-12);
      CHECK(std::fabs(r) <= 1.0);
    }
  }

  TEST_CASE("strength bands") {
    CHECK(strength_of(0.0) == Strength::kWeak);
    CHECK(strength_of(0.29) == Strength::kWeak);
    CHECK(strength_of(std::nextafter(0.3, 0.0)) == Strength::kWeak);
    CHECK(strength_of(0.3) == Strength::kModerate);
    CHECK(strength_of(-0.3) == Strength::kModerate);
    CHECK(strength_of(std::nextafter(0.7, 0.0)) == Strength::kModerate);
    CHECK(strength_of(0.7) == Strength::kStrong);
    CHECK(strength_of(-1.0) == Strength::kStrong);
    CHECK(strength_label(0.44) == "moderate positive");
    CHECK(strength_label(-0.1) == "weak negative");
    CHECK(strength_label(0.0) == "weak none");
  }
}

TEST_SUITE("correlate") {
  const std::vector<CountryGroup> kGroups{
      {GroupScheme::kRegion, "East", {"AA", "BB", "CC"}},
      {GroupScheme::kRegion, "West", {"DD", "EE", "FF"}},
      {GroupScheme::kLanguage, "Pair", {"AA", "DD"}},
      {GroupScheme::kRegion, "Nobody", {"ZZ"}}};

  TEST_CASE("indicator equal to the dependency gives r = 1 everywhere") {
    std::vector<CountryAggregate> aggs;
    std::vector<CountryIndicator> ind;
    int i = 0;
    for (const char* c : {"AA", "BB", "CC", "DD", "EE", "FF"}) {
      aggs.push_back(agg(c, 100 * i, 50 + 30 * i, 7 * i * i));
      ind.push_back({c, Indicator::kGdp, aggs.back().mean_third_party()});
      ++i;
    }
    const auto out = correlate(aggs, ind, Indicator::kGdp, kGroups);
    REQUIRE(out.size() == 4);  // overall + three groups with members
    CHECK(out[0].scope == "overall");
    CHECK(out[0].n == 6);
    for (const auto& r : out) {
      CHECK_FALSE(r.error.has_value());
      CHECK(r.r == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.strength == Strength::kStrong);
    }
  }

  TEST_CASE("two-point groups and per-scope errors") {
    std::vector<CountryAggregate> aggs{agg("AA", 1, 1, 1), agg("DD", 2, 2, 2), agg("BB", 3, 3, 3)};
    std::vector<CountryIndicator> ind{{"AA", Indicator::kNri, 5}, {"DD", Indicator::kNri, 5},
                                      {"BB", Indicator::kNri, 7}};
    const auto out = correlate(aggs, ind, Indicator::kNri, kGroups, DependencyVariable::kDns);
    for (const auto& r : out) {
      if (r.scope == "Pair") CHECK(r.error == "ZERO_VARIANCE");
      if (r.scope == "East") CHECK(std::fabs(r.r) == doctest::Approx(1.0));
      if (r.scope == "overall") CHECK(std::fabs(std::fabs(r.r) - 1.0) > 1e-9);
    }
    ind[1].value = 9;
    for (const auto& r : correlate(aggs, ind, Indicator::kNri, kGroups)) {
      if (r.scope == "Pair") CHECK(std::fabs(r.r) == doctest::Approx(1.0));
    }
    // A lone member cannot carry a coefficient.
    const std::vector<CountryGroup> solo{{GroupScheme::kRegion, "Solo", {"AA"}}};
    CHECK(correlate(aggs, ind, Indicator::kNri, solo).back().error == "TOO_FEW_POINTS");
  }

  TEST_CASE("missing indicator lists every country") {
    std::vector<CountryAggregate> aggs{agg("AA", 1, 1, 1), agg("BB", 2, 2, 2), agg("CC", 3, 3, 3)};
    std::vector<CountryIndicator> ind{{"BB", Indicator::kGdp, 1}, {"AA", Indicator::kKei, 1}};
    try {
      correlate(aggs, ind, Indicator::kGdp, kGroups);
      FAIL("expected MissingIndicator");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingIndicator);
      CHECK(std::string(e.what()).find("AA,CC") != std::string::npos);
    }
  }
}

TEST_SUITE("group summaries") {
  TEST_CASE("worked examples") {
    const std::vector<double> one{0.37};
    const auto s = five_number_summary(one);
    CHECK(s == FiveNumberSummary{0.37, 0.37, 0.37, 0.37, 0.37});
    const std::vector<double> three{0.6, 0.2, 0.4};
    CHECK(five_number_summary(three).median == 0.4);
    CHECK(code_of([] { five_number_summary(std::vector<double>{}); }) == ErrorCode::kEmptyGroup);
  }

  TEST_CASE("quartiles match a sort-based oracle and stay in range") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      std::vector<double> v(1 + rng() % 30);
      for (auto& x : v) x = u(rng);
      const auto s = five_number_summary(v);
      CHECK(s.q1 == doctest::Approx(sorted_quantile(v, 0.25)).epsilon(1e-12));
      CHECK(s.median == doctest::Approx(sorted_quantile(v, 0.5)).epsilon(1e-12));
      CHECK(s.q3 == doctest::Approx(sorted_quantile(v, 0.75)).epsilon(1e-12));
      CHECK(s.min == *std::min_element(v.begin(), v.end()));
      CHECK(s.max == *std::max_element(v.begin(), v.end()));
      CHECK((s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max));
    }
  }

  TEST_CASE("groups without aggregated members are omitted") {
    const std::vector<CountryAggregate> aggs{agg("AA", 200, 400, 600), agg("BB", 0, 0, 0)};
    const std::vector<CountryGroup> groups{{GroupScheme::kRegion, "R1", {"AA", "BB", "CC"}},
                                           {GroupScheme::kRegion, "R2", {"DD"}}};
    const auto out = group_summary(aggs, groups, DependencyVariable::kCa);
    REQUIRE(out.size() == 1);
    CHECK(out[0].n == 2);
    CHECK(out[0].summary.max == 0.4);
    CHECK(out[0].mean == doctest::Approx(0.2).epsilon(1e-12));
    // Sample standard deviation of {0.4, 0}: sqrt(0.08).
    REQUIRE(out[0].std_dev.has_value());
    CHECK(*out[0].std_dev == doctest::Approx(0.2828427124746190).epsilon(1e-12));
    const std::vector<CountryGroup> solo{{GroupScheme::kRegion, "R3", {"AA"}}};
    CHECK_FALSE(group_summary(aggs, solo, DependencyVariable::kCa)[0].std_dev.has_value());
    const std::vector<CountryGroup> empty{{GroupScheme::kRegion, "Empty", {}}};
    CHECK(code_of([&] { group_summary(aggs, empty); }) == ErrorCode::kEmptyGroup);
  }
}

TEST_SUITE("trend data files") {
  TEST_CASE("indicators") {
    const auto ind = parse_indicators("country,indicator,value\nus,GDP,65100\nDE,NRI,1.5e1\n", "t");
    REQUIRE(ind.size() == 2);
    CHECK(ind[0] == CountryIndicator{"US", Indicator::kGdp, 65100});
    CHECK(ind[1].value == 15.0);
    CHECK(code_of([] { parse_indicators("US,GDP,1\nUS,GDP,2\n", "t"); }) == ErrorCode::kMalformedRow);
    CHECK(code_of([] { parse_indicators("US,XYZ,1\n", "t"); }) == ErrorCode::kMalformedRow);
    CHECK(code_of([] { parse_indicators("US,GDP,abc\n", "t"); }) == ErrorCode::kMalformedRow);
    CHECK(code_of([] { parse_indicators("USA,GDP,1\n", "t"); }) == ErrorCode::kMalformedRow);
  }

  TEST_CASE("groupings") {
    const auto g = parse_groupings(
        "scheme,group,country\nregion,Europe,DE\nregion,Europe,FR\ntrading-bloc,EEA,DE\n"
        "trading-bloc,EU,DE\n",
        "t");
    CHECK(g.size() == 3);
    CHECK(groups_of(g, GroupScheme::kTradingBloc).size() == 2);
    CHECK(code_of([] { parse_groupings("region,A,DE\nregion,B,DE\n", "t"); }) == ErrorCode::kMalformedRow);
    CHECK(code_of([] { parse_groupings("planet,A,DE\n", "t"); }) == ErrorCode::kMalformedRow);
  }

  TEST_CASE("shipped groupings partition the fifty countries") {
    const auto g = load_groupings(source_dir() / "data" / "groupings.csv");
    for (auto scheme : {GroupScheme::kRegion, GroupScheme::kLanguage, GroupScheme::kOverlapClass}) {
      std::set<std::string> all;
      std::size_t total = 0;
      for (const auto& grp : groups_of(g, scheme)) {
        all.insert(grp.countries.begin(), grp.countries.end());
        total += grp.countries.size();
      }
      CHECK(all.size() == 50);
      CHECK(total == 50);
    }
  }
}
