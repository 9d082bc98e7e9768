#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "common.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "webdep/error.hpp"
#include "webdep/metrics.hpp"

using namespace webdep;
using namespace webdep::testing;

namespace {

using C = Classification;

struct Svc {
  std::string host;
  C verdict;
  std::string cdn;  // CDN name, CDN entries only
};

ServiceClassification svc(const SiteRecord& site, ServiceKind kind, const Svc& s) {
  ServiceClassification sc;
  sc.site = site;
  sc.kind = kind;
  sc.service_host = s.host;
  if (!s.host.empty()) sc.provider = try_provider_id(s.host, shipped_psl());
  if (kind == ServiceKind::kCdn) sc.cdn_name = s.cdn;
  sc.verdict = s.verdict;
  sc.rule_fired = s.verdict == C::kPrivate      ? RuleFired::kTldMatch
                  : s.verdict == C::kThirdParty ? RuleFired::kSoaMismatch
                                                : RuleFired::kNone;
  return sc;
}

SiteDependencyReport report(const std::string& domain, std::vector<Svc> dns,
                            std::optional<Svc> ca = std::nullopt, std::vector<Svc> cdns = {},
                            bool ocsp = false, const std::string& country = "US") {
  static int rank = 0;
  SiteDependencyReport r;
  r.site = {domain, country, ++rank};
  for (const auto& s : dns) r.dns.push_back(svc(r.site, ServiceKind::kDns, s));
  if (ca) r.ca = svc(r.site, ServiceKind::kCa, *ca);
  for (const auto& s : cdns) r.cdns.push_back(svc(r.site, ServiceKind::kCdn, s));
  r.https_supported = ca.has_value();
  r.ocsp_stapled = r.https_supported && ocsp;
  return r;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kUsage;
}

class MapFactSource : public IndirectFactSource {
 public:
  std::map<std::string, DnsFacts> ns;
  std::map<std::string, CnameChain> chains;
  std::map<std::string, RegistrableDomain> soas;

  std::optional<DnsFacts> nameservers(const std::string& host) override {
    auto it = ns.find(host);
    return it == ns.end() ? std::nullopt : std::optional(it->second);
  }
  std::optional<CnameChain> cname_chain(const std::string& host) override {
    auto it = chains.find(host);
    return it == chains.end() ? CnameChain{host, {}, host} : it->second;
  }
  std::optional<RegistrableDomain> soa(const std::string& host) override {
    auto it = soas.find(host);
    return it == soas.end() ? std::nullopt : std::optional(it->second);
  }

  void zone(const std::string& host, std::vector<std::string> servers, const std::string& host_soa,
            const std::string& server_soa) {
    DnsFacts f;
    f.nameservers = std::move(servers);
    for (const auto& s : f.nameservers) f.nameserver_soa[s] = RegistrableDomain(server_soa);
    ns[host] = f;
    soas[host] = RegistrableDomain(host_soa);
  }
};

DataFiles indirect_data() {
  DataFiles d;
  d.psl = shipped_psl();
  d.cdn_map = CdnCnameMap(std::vector<CdnCnameMap::Entry>{{"edgekey.net", "Akamai"},
                                                          {"cdn.cloudflare.net", "Cloudflare"}});
  return d;
}

}  // namespace

TEST_SUITE("site rates") {
  TEST_CASE("third-party rate") {
    std::vector<SiteDependencyReport> rs;
    for (int i = 0; i < 8; ++i) {
      const std::string d = "s" + std::to_string(i) + ".test";
      rs.push_back(report(d, {{i < 4 ? "ns1.dnsprov.test" : "ns1." + d, i < 4 ? C::kThirdParty : C::kPrivate}}));
    }
    const Rate r = third_party_rate(rs, ServiceKind::kDns);
    CHECK(r == Rate{4, 8});
    CHECK(r.value() == 0.5);
    for (int i = 0; i < 4; ++i) rs[i].dns[0].verdict = C::kPrivate;
    CHECK(third_party_rate(rs, ServiceKind::kDns).value() == 0.0);
    CHECK(code_of([] { third_party_rate({}, ServiceKind::kDns); }) == ErrorCode::kEmptyCorpus);
  }

  TEST_CASE("criticality") {
    const auto single = report("a.test", {{"ns1.cf.test", C::kThirdParty}, {"ns2.cf.test", C::kThirdParty}});
    CHECK(is_critically_dependent(single, ServiceKind::kDns));
    const auto mixed = report("b.test", {{"ns1.cf.test", C::kThirdParty}, {"ns1.b.test", C::kPrivate}});
    CHECK_FALSE(is_critically_dependent(mixed, ServiceKind::kDns));
    const auto two = report("c.test", {{"ns1.cf.test", C::kThirdParty}, {"ns1.dyn.test", C::kThirdParty}});
    CHECK_FALSE(is_critically_dependent(two, ServiceKind::kDns));

    const auto stapled = report("d.test", {}, Svc{"digicert.com", C::kThirdParty, ""}, {}, true);
    CHECK(is_third_party_dependent(stapled, ServiceKind::kCa));
    CHECK_FALSE(is_critically_dependent(stapled, ServiceKind::kCa));
    const auto unstapled = report("e.test", {}, Svc{"digicert.com", C::kThirdParty, ""}, {}, false);
    CHECK(is_critically_dependent(unstapled, ServiceKind::kCa));
    const auto http = report("f.test", {});
    CHECK_FALSE(is_third_party_dependent(http, ServiceKind::kCa));
  }

  TEST_CASE("providers combine verdicts before counting") {
    // Two CNAMEs of one CDN, and two hosts of one DNS provider.
    const auto r = report("a.test", {{"ns1.p.test", C::kThirdParty}, {"ns2.p.test", C::kPrivate}}, std::nullopt,
                          {{"x.edgekey.net", C::kUnknown, "Akamai"}, {"y.akamaiedge.net", C::kThirdParty, "Akamai"}});
    const auto dns = site_providers(r, ServiceKind::kDns);
    CHECK(dns == std::map<std::string, C>{{"p.test", C::kPrivate}});
    const auto cdn = site_providers(r, ServiceKind::kCdn);
    CHECK(cdn == std::map<std::string, C>{{"Akamai", C::kThirdParty}});
    CHECK_FALSE(is_third_party_dependent(r, ServiceKind::kDns));
    CHECK(is_critically_dependent(r, ServiceKind::kCdn));
  }

  TEST_CASE("unknown, https and ocsp rates") {
    const std::vector<SiteDependencyReport> rs{
        report("a.test", {{"ns1.x.test", C::kUnknown}}, Svc{"", C::kUnknown, ""}, {}, true),
        report("b.test", {{"ns1.b.test", C::kPrivate}}, Svc{"digicert.com", C::kThirdParty, ""}),
        report("c.test", {{"ns1.c.test", C::kPrivate}})};
    CHECK(unknown_rate(rs, ServiceKind::kDns) == Rate{1, 3});
    CHECK(unknown_rate(rs, ServiceKind::kCa) == Rate{1, 3});
    CHECK(https_rate(rs) == Rate{2, 3});
    CHECK(ocsp_rate(rs) == Rate{1, 3});
  }

  TEST_CASE("redundancy") {
    const std::vector<SiteDependencyReport> rs{
        report("a.test", {{"ns1.p1.test", C::kThirdParty}, {"ns1.p2.test", C::kThirdParty}}),
        report("b.test", {{"ns1.p1.test", C::kThirdParty}, {"ns1.b.test", C::kPrivate}}),
        report("c.test", {{"ns1.p1.test", C::kThirdParty}, {"ns2.p1.test", C::kThirdParty}})};
    const auto r = redundancy_rates(rs, ServiceKind::kDns);
    CHECK(r.redundant == Rate{2, 3});
    CHECK(r.multi_third == Rate{1, 3});
    CHECK(r.mixed == Rate{1, 3});
    CHECK(code_of([&] { redundancy_rates(rs, ServiceKind::kCa); }) == ErrorCode::kUsage);
  }
}

TEST_SUITE("top-k") {
  std::vector<SiteDependencyReport> one_provider_each(const std::vector<std::pair<std::string, int>>& counts) {
    std::vector<SiteDependencyReport> rs;
    int i = 0;
    for (const auto& [provider, n] : counts) {
      for (int k = 0; k < n; ++k, ++i) {
        rs.push_back(report("s" + std::to_string(i) + ".test", {{"ns1." + provider, C::kThirdParty}}));
      }
    }
    return rs;
  }

  TEST_CASE("worked example and degenerate cases") {
    const auto rs = one_provider_each({{"a.test", 5}, {"b.test", 3}, {"c.test", 1}, {"d.test", 1}});
    const auto top3 = top_k_coverage(rs, ServiceKind::kDns, 3);
    CHECK(top3.coverage == Rate{9, 10});
    CHECK(top3.providers == std::vector<ProviderCount>{{"a.test", 5}, {"b.test", 3}, {"c.test", 1}});
    CHECK(top_k_coverage(rs, ServiceKind::kDns, 4).coverage.value() == 1.0);
    CHECK(top_k_coverage(rs, ServiceKind::kDns, 50).coverage.value() == 1.0);

    const auto single = one_provider_each({{"only.test", 4}});
    for (std::size_t k : {1, 2, 7}) CHECK(top_k_coverage(single, ServiceKind::kDns, k).coverage.value() == 1.0);

    CHECK(code_of([&] { top_k_coverage(rs, ServiceKind::kDns, 0); }) == ErrorCode::kUsage);
    CHECK(code_of([&] { top_k_coverage(rs, ServiceKind::kCdn, 1); }) == ErrorCode::kNoThirdPartySites);
    CHECK(code_of([&] { top_k_coverage({}, ServiceKind::kDns, 1); }) == ErrorCode::kEmptyCorpus);
  }

  TEST_CASE("ranking ties break on provider key") {
    const auto rs = one_provider_each({{"zeta.test", 2}, {"alpha.test", 2}, {"mid.test", 3}});
    CHECK(rank_providers(rs, ServiceKind::kDns) ==
          std::vector<ProviderCount>{{"mid.test", 3}, {"alpha.test", 2}, {"zeta.test", 2}});
  }

  TEST_CASE("coverage is monotone in k and bounded") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 200; ++i) {
      const auto rs = random_corpus(rng, {});
      if (rank_providers(rs, ServiceKind::kDns).empty()) continue;
      double prev = 0.0;
      for (std::size_t k = 1; k <= 8; ++k) {
        const double c = top_k_coverage(rs, ServiceKind::kDns, k).coverage.value();
        CHECK(c >= prev);
        CHECK(c <= 1.0);
        prev = c;
      }
    }
  }
}

TEST_SUITE("aggregates") {
  TEST_CASE("random corpora equal the brute-force recount") {
    std::mt19937_64 rng(88);
    for (int i = 0; i < 100; ++i) {
      const auto rs = random_corpus(rng, {.max_sites = 50});
      if (rs.empty()) continue;
      const auto diff = compare_aggregate(aggregate_country("ZZ", rs), brute_force_aggregate(rs));
      CHECK_MESSAGE(diff.empty(), diff);
    }
  }

  TEST_CASE("critical never exceeds third-party; permutation invariant") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
      auto rs = random_corpus(rng, {});
      if (rs.empty()) continue;
      const auto a = aggregate_country("ZZ", rs);
      for (auto kind : {ServiceKind::kDns, ServiceKind::kCa, ServiceKind::kCdn}) {
        CHECK(a.of(kind).critical.numerator <= a.of(kind).third_party.numerator);
      }
      std::shuffle(rs.begin(), rs.end(), rng);
      CHECK(aggregate_country("ZZ", rs) == a);
    }
  }

  TEST_CASE("per-country split and mean") {
    const std::vector<SiteDependencyReport> rs{
        report("a.test", {{"ns1.p.test", C::kThirdParty}}, std::nullopt, {}, false, "US"),
        report("b.test", {{"ns1.b.test", C::kPrivate}}, std::nullopt, {}, false, "DE")};
    const auto aggs = aggregate_by_country(rs);
    REQUIRE(aggs.size() == 2);
    CHECK(aggs[0].country == "DE");
    CHECK(aggs[1].dns.third_party == Rate{1, 1});
    CHECK(aggs[1].mean_third_party() == doctest::Approx(1.0 / 3.0));
    CHECK(aggs[0].dns.top_k.empty());
  }
}

TEST_SUITE("indirect") {
  TEST_CASE("CDN on its own nameservers adds no dependents") {
    const auto data = indirect_data();
    MapFactSource facts;
    facts.zone("e1.edgekey.net", {"ns1.edgekey.net"}, "edgekey.net", "edgekey.net");
    const std::vector<SiteDependencyReport> rs{
        report("a.test", {{"ns1.a.test", C::kPrivate}}, std::nullopt,
               {{"e1.edgekey.net", C::kPrivate, "Akamai"}})};
    const auto out = indirect_dependencies("US", rs, facts, data);
    CHECK(out.cdn_to_dns.n_providers == 1);
    CHECK(out.cdn_to_dns.third_party_fraction == Rate{0, 1});
    CHECK(out.cdn_to_dns.newly_dependent_sites == 0);
  }

  TEST_CASE("CA behind a third-party CDN") {
    const auto data = indirect_data();
    MapFactSource facts;
    facts.zone("pki.mega.test", {"ns1.mega.test"}, "mega.test", "mega.test");
    facts.chains["pki.mega.test"] = {"pki.mega.test", {"pki.mega.test.cdn.cloudflare.net"},
                                     "pki.mega.test.cdn.cloudflare.net"};
    facts.soas["pki.mega.test.cdn.cloudflare.net"] = RegistrableDomain("cloudflare.net");
    const std::vector<SiteDependencyReport> rs{
        report("a.test", {{"ns1.a.test", C::kPrivate}}, Svc{"pki.mega.test", C::kPrivate, ""}),
        report("b.test", {{"ns1.b.test", C::kPrivate}}, Svc{"pki.mega.test", C::kUnknown, ""}, {},
               false)};
    const auto out = indirect_dependencies("US", rs, facts, data);
    CHECK(out.ca_to_cdn.n_providers == 1);
    CHECK(out.ca_to_cdn.third_party_fraction == Rate{1, 1});
    CHECK(out.ca_to_cdn.newly_dependent_sites == 2);
    CHECK(out.ca_to_dns.third_party_fraction == Rate{0, 1});
  }

  TEST_CASE("sites already on third-party DNS cannot newly depend") {
    const auto data = indirect_data();
    MapFactSource facts;
    facts.zone("x.edgekey.net", {"ns1.dnsprov.test"}, "edgekey.net", "dnsprov.test");
    std::vector<SiteDependencyReport> rs;
    for (int i = 0; i < 5; ++i) {
      rs.push_back(report("s" + std::to_string(i) + ".test", {{"ns1.dnsprov.test", C::kThirdParty}},
                          std::nullopt, {{"x.edgekey.net", C::kPrivate, "Akamai"}}));
    }
    const auto out = indirect_dependencies("US", rs, facts, data);
    CHECK(out.cdn_to_dns.third_party_fraction == Rate{1, 1});
    CHECK(out.cdn_to_dns.newly_dependent_sites == 0);

    // The same CDN edge for a site on its own DNS does count.
    rs.push_back(report("own.test", {{"ns1.own.test", C::kPrivate}}, std::nullopt,
                        {{"x.edgekey.net", C::kUnknown, "Akamai"}}));
    CHECK(indirect_dependencies("US", rs, facts, data).cdn_to_dns.newly_dependent_sites == 1);
  }

  TEST_CASE("canonical CNAME is the smallest one seen") {
    const auto data = indirect_data();
    MapFactSource facts;
    facts.zone("a.edgekey.net", {"ns1.edgekey.net"}, "edgekey.net", "edgekey.net");
    facts.zone("b.edgekey.net", {"ns1.dnsprov.test"}, "edgekey.net", "dnsprov.test");
    const std::vector<SiteDependencyReport> rs{
        report("s1.test", {}, std::nullopt, {{"b.edgekey.net", C::kThirdParty, "Akamai"}}),
        report("s2.test", {}, std::nullopt, {{"a.edgekey.net", C::kThirdParty, "Akamai"}})};
    CHECK(indirect_dependencies("US", rs, facts, data).cdn_to_dns.third_party_fraction == Rate{0, 1});
  }
}
