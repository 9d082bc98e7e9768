#include "fixture_world.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace webdep::testing {
namespace {

constexpr const char* kLoopback = "127.0.0.1";

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string har(const std::vector<std::string>& urls) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& url : urls) {
    entries.push_back({{"request", {{"method", "GET"}, {"url", url}}},
                       {"response", {{"status", 200}}}});
  }
  return nlohmann::json{{"log", {{"version", "1.2"}, {"entries", entries}}}}.dump(2);
}

struct ZoneBuilder {
  std::map<std::string, StubNode> nodes;

  StubNode& at(const std::string& name) { return nodes[name]; }
  void host(const std::string& name) { at(name).a = {kLoopback}; }
  void zone(const std::string& name, std::vector<std::string> ns, const std::string& mname) {
    at(name).ns = std::move(ns);
    at(name).soa_mname = mname;
  }
  void cname(const std::string& name, const std::string& target) { at(name).cname = target; }
  // A website: delegated zone, SOA primary and an address.
  void site(const std::string& name, std::vector<std::string> ns, const std::string& mname) {
    zone(name, std::move(ns), mname);
    host(name);
  }
};

std::map<std::string, StubNode> build_zone() {
  ZoneBuilder z;

  // Providers.
  z.zone("dnsprov.net", {"ns1.dnsprov.net", "ns2.dnsprov.net"}, "ns1.dnsprov.net");
  z.host("ns1.dnsprov.net");
  z.host("ns2.dnsprov.net");
  z.zone("otherdns.org", {"pdns1.otherdns.org"}, "pdns1.otherdns.org");
  z.host("pdns1.otherdns.org");
  z.host("bulkdns.net");  // no SOA anywhere above these hosts
  z.host("ns1.bulkdns.net");
  z.host("ns2.bulkdns.net");
  z.host("fewdns.net");
  z.host("ns1.fewdns.net");
  z.zone("megacorp.com", {"ns1.megacorp.com", "ns2.megacorp.com"}, "ns1.megacorp.com");
  z.host("megacorp.com");
  z.host("ns1.megacorp.com");
  z.host("ns2.megacorp.com");
  // The CA host sits behind a third-party CDN.
  z.cname("pki.megacorp.com", "pki.megacorp.com.cdn.cloudflare.net");
  z.host("pki.megacorp.com.cdn.cloudflare.net");
  z.zone("wildhost.net", {"ns1.wildhost.net"}, "ns1.wildhost.net");
  z.host("ns1.wildhost.net");
  z.zone("newsops.net", {"ns1.newsops.net"}, "ns1.newsops.net");
  z.host("ns1.newsops.net");
  z.zone("newsassets.net", {"ns1.newsops.net"}, "ns1.newsops.net");
  z.host("static.newsassets.net");
  z.zone("adnet.com", {"ns1.adnet.com"}, "ns1.adnet.com");
  z.host("ads.adnet.com");
  z.zone("blogspot.com", {"ns1.blogger-dns.com"}, "ns1.blogger-dns.com");
  z.host("resources.blogspot.com");

  // Certificate authorities.
  z.site("letsencrypt.org", {"ns1.letsencrypt.org"}, "ns1.letsencrypt.org");
  z.host("ns1.letsencrypt.org");
  z.zone("digicert.com", {"ns1.dnsprov.net", "ns2.dnsprov.net"}, "ns1.digicert.com");
  z.host("digicert.com");
  z.zone("sectigo.com", {"ns1.dnsprov.net"}, "ns1.sectigo.com");
  z.host("sectigo.com");

  // CDNs.
  z.zone("akamaiedge.net", {"ns1.akamai.net"}, "ns1.akamai.net");
  z.zone("edgekey.net", {"ns1.akamai.net"}, "ns1.akamai.net");
  z.zone("akamai.net", {"ns1.akamai.net"}, "ns1.akamai.net");
  z.host("e1.akamaiedge.net");
  z.zone("cdn.cloudflare.net", {"ns1.cloudflare.net"}, "ns1.cloudflare.com");
  z.zone("cloudfront.net", {"ns-1.awsdns-01.org"}, "ns-1.awsdns-01.org");
  z.host("d111.cloudfront.net");
  z.zone("fastly.net", {"ns1.dnsprov.net"}, "ns1.fastly.net");
  z.host("multicdn.global.ssl.fastly.net");
  z.zone("megacdn.net", {"ns1.megacdn-dns.net"}, "ns1.megacdn-dns.net");

  // US sites.
  z.site("selfdns.com", {"ns1.selfdns.com", "ns2.selfdns.com"}, "ns1.selfdns.com");
  z.host("ns1.selfdns.com");
  z.host("ns2.selfdns.com");
  z.cname("static.selfdns.com", "selfdns.com.edgekey.net");
  z.cname("selfdns.com.edgekey.net", "e1.akamaiedge.net");

  z.site("vidtube.com", {"ns1.megacorp.com", "ns2.megacorp.com"}, "ns1.megacorp.com");
  z.cname("i.vidtube.com", "i.vidtube.com.mcdn.megacorp.com");
  z.host("i.vidtube.com.mcdn.megacorp.com");

  z.site("shopone.com", {"ns1.dnsprov.net", "ns2.dnsprov.net"}, "ns0.shopone.com");
  z.cname("img.shopone.com", "d111.cloudfront.net");
  z.cname("www.google-analytics.com", "ga.cdn.cloudflare.net");
  z.host("ga.cdn.cloudflare.net");

  z.site("redundant.com", {"ns1.redundant.com", "ns1.dnsprov.net", "pdns1.otherdns.org"},
         "ns1.redundant.com");
  z.host("ns1.redundant.com");
  z.cname("media.redundant.com", "media.redundant.com.cdn.cloudflare.net");
  z.host("media.redundant.com.cdn.cloudflare.net");

  for (const char* bulk : {"bulk1.com", "bulk2.com", "bulk3.com", "bulk4.com", "zeitung.de"}) {
    z.site(bulk, {"ns1.bulkdns.net", "ns2.bulkdns.net"}, "ns1.bulkdns.net");
  }
  z.site("few1.com", {"ns1.fewdns.net"}, "ns1.fewdns.net");
  z.site("few2.com", {"ns1.fewdns.net"}, "ns1.fewdns.net");
  z.site("wild.com", {"ns1.wildhost.net"}, "ns1.wildhost.net");

  z.site("newsdaily.com", {"ns1.newsops.net"}, "ns1.newsops.net");
  z.cname("img.newsdaily.com", "img.newsdaily.com.edgekey.net");
  z.cname("img.newsdaily.com.edgekey.net", "e1.akamaiedge.net");

  z.site("myblog.blogspot.com", {"ns1.megacorp.com"}, "ns1.megacorp.com");

  z.at("flaky.com").servfail = true;

  z.site("loopy.com", {"ns1.loopy.com"}, "ns1.loopy.com");
  z.host("ns1.loopy.com");
  z.cname("a.loopy.com", "b.loopy.com");
  z.cname("b.loopy.com", "a.loopy.com");

  z.site("multicdn.com", {"ns1.dnsprov.net"}, "ns0.multicdn.com");
  z.cname("img.multicdn.com", "img.multicdn.com.cdn.cloudflare.net");
  z.host("img.multicdn.com.cdn.cloudflare.net");
  z.cname("js.multicdn.com", "multicdn.global.ssl.fastly.net");

  z.cname("a.megacorp.com", "a.megacdn.net");
  z.host("a.megacdn.net");
  z.cname("b.megacorp.com", "b.mcdn.megacorp.com");
  z.host("b.mcdn.megacorp.com");

  // DE sites.
  z.site("autohaus.de", {"ns1.dnsprov.net", "ns2.dnsprov.net"}, "ns.autohaus.de");
  z.site("bank.de", {"ns1.bank.de", "ns2.dnsprov.net"}, "ns1.bank.de");
  z.host("ns1.bank.de");
  z.zone("online-bank.de", {"ns1.bank.de"}, "ns1.bank.de");
  z.host("online-bank.de");
  z.cname("cdn.bank.de", "cdn.bank.de.edgekey.net");
  z.cname("cdn.bank.de.edgekey.net", "e1.akamaiedge.net");

  // FR sites.
  z.site("journal.fr", {"ns1.dnsprov.net"}, "ns.journal.fr");
  z.site("boutique.fr", {"ns1.bulkdns.net", "ns2.bulkdns.net"}, "ns1.bulkdns.net");
  z.site("mairie.fr", {"ns1.mairie.fr"}, "ns1.mairie.fr");
  z.host("ns1.mairie.fr");
  return z.nodes;
}

std::string page(const std::string& body) {
  return "<!doctype html><html><head></head><body>" + body + "</body></html>";
}

std::map<std::string, StubTlsSite> build_tls() {
  const std::string le = "Let's Encrypt";
  const std::string digicert = "DigiCert Inc";
  const std::string mega = "Mega Trust Services";
  const std::string hello = page("<p>hello</p>");
  std::map<std::string, StubTlsSite> t;
  t["selfdns.com"] = {{"selfdns.com", "www.selfdns.com"}, le, true,
                      page("<script src=\"/app.js\"></script>"
                           "<img src=\"https://static.selfdns.com/logo.png\">")};
  t["vidtube.com"] = {{"vidtube.com", "*.vidtube.com", "*.megacorp.com"}, mega, true,
                      page("<img src=\"https://i.vidtube.com/t.jpg\">"
                           "<script src=\"https://ads.adnet.com/a.js\"></script>")};
  t["shopone.com"] = {{"shopone.com", "www.shopone.com"}, digicert, false, {}};
  t["bulk1.com"] = {{"bulk1.com"}, le, true, hello};
  t["bulk2.com"] = {{"bulk2.com"}, le, false, hello};
  t["bulk4.com"] = {{"bulk4.com"}, "Obscure CA Ltd", true, hello};
  t["zeitung.de"] = {{"zeitung.de", "www.zeitung.de"}, le, true, hello};
  t["few1.com"] = {{"few1.com"}, le, true, hello};
  t["few2.com"] = {{"few2.com"}, digicert, true, hello};
  t["wild.com"] = {{"wild.com", "*.wildhost.net"}, le, false, hello};
  t["letsencrypt.org"] = {{"letsencrypt.org", "www.letsencrypt.org"}, le, true, hello};
  t["newsdaily.com"] = {{"newsdaily.com", "www.newsdaily.com"}, "Sectigo Limited", true,
                        page("<link rel=\"stylesheet\" href=\"https://static.newsassets.net/s.css\">"
                             "<img src=\"https://img.newsdaily.com/p.jpg\">")};
  t["myblog.blogspot.com"] = {{"*.blogspot.com", "blogspot.com"}, mega, true,
                              page("<link rel=\"stylesheet\" "
                                   "href=\"https://resources.blogspot.com/b.css\">")};
  t["multicdn.com"] = {{"multicdn.com", "*.multicdn.com"}, le, true, {}};
  t["megacorp.com"] = {{"megacorp.com", "*.megacorp.com"}, mega, true,
                       page("<script src=\"https://a.megacorp.com/x.js\"></script>"
                            "<script src=\"https://b.megacorp.com/y.js\"></script>")};
  t["bank.de"] = {{"bank.de", "www.bank.de", "online-bank.de"}, digicert, false, {}};
  t["boutique.fr"] = {{"boutique.fr"}, le, true, hello};
  t["mairie.fr"] = {{"mairie.fr", "www.mairie.fr"}, "Sectigo Limited", false, hello};
  return t;
}

std::map<std::string, std::string> build_http() {
  std::map<std::string, std::string> h;
  h["redundant.com"] = page("<script src=\"/r.js\"></script>"
                            "<img src=\"http://media.redundant.com/x.png\">");
  h["bulk3.com"] = page("<p>plain</p>");
  h["loopy.com"] = page("<img src=\"http://a.loopy.com/1.png\">");
  h["autohaus.de"] = page("<p>plain</p>");
  h["journal.fr"] = page("<p>plain</p>");
  return h;
}

std::map<std::string, std::vector<std::string>> build_hars() {
  std::map<std::string, std::vector<std::string>> h;
  h["shopone.com"] = {"https://shopone.com/", "https://img.shopone.com/a.png",
                      "https://www.google-analytics.com/ga.js"};
  h["multicdn.com"] = {"https://multicdn.com/", "https://img.multicdn.com/1.png",
                       "https://js.multicdn.com/a.js", "https://img.multicdn.com/2.png"};
  h["bank.de"] = {"https://bank.de/", "https://online-bank.de/login.js",
                  "https://cdn.bank.de/c.css"};
  return h;
}

}  // namespace

std::filesystem::path source_dir() { return WEBDEP_SOURCE_DIR; }

std::filesystem::path fixture_data_dir() { return source_dir() / "tests" / "data" / "fixture"; }

std::filesystem::path make_temp_dir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  const auto dir = std::filesystem::temp_directory_path() /
                   (prefix + "-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter++) + "-" + std::to_string(rd() % 100000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

FixtureWorld::FixtureWorld(const std::filesystem::path& dir) : dir_(dir) {
  dns_ = std::make_unique<StubDnsServer>(build_zone());
  tls_ = std::make_unique<StubTlsServer>(build_tls());
  http_ = std::make_unique<StubHttpServer>(build_http());

  for (const auto& [domain, urls] : build_hars()) {
    write_file(dir_ / "har" / (domain + ".har"), har(urls));
  }

  std::string csv = "rank,domain,country\n";
  for (const auto& s : sites()) {
    csv += std::to_string(s.rank) + "," + s.domain + "," + s.country + "\n";
  }
  write_file(list_path(), csv);

  const auto data = source_dir() / "data";
  const auto fx = fixture_data_dir();
  std::string conf;
  conf += "# stub network\n";
  conf += "resolver = " + dns_->endpoint() + "\n";
  conf += "tls_port = " + std::to_string(tls_->port()) + "\n";
  conf += "https_port = " + std::to_string(tls_->port()) + "\n";
  conf += "http_port = " + std::to_string(http_->port()) + "\n";
  conf += "dns_retries = 1\ndns_backoff_ms = 5\ndns_timeout_ms = 500\n";
  conf += "tls_timeout_ms = 2000\nhttp_timeout_ms = 2000\ntls_retries = 0\nhttp_retries = 0\n";
  conf += "dns_rate = 0\nhost_rate = 0\nparallelism = 4\nconcentration_threshold = 3\n";
  conf += "psl = " + (data / "public_suffix_list.dat").string() + "\n";
  conf += "cdn_map = " + (fx / "cdn_cname_map.tsv").string() + "\n";
  conf += "ca_directory = " + (fx / "ca_directory.tsv").string() + "\n";
  conf += "provider_aliases = " + (fx / "provider_aliases.tsv").string() + "\n";
  conf += "groupings = " + (fx / "groupings.csv").string() + "\n";
  conf += "indicators = " + (fx / "indicators.csv").string() + "\n";
  conf += "global_list = " + (fx / "global_top.txt").string() + "\n";
  conf += "overlap_subsets = 2,5,10\n";
  conf += "har_dir = har\n";
  conf += "store = store\n";
  write_file(config_path(), conf);
}

RunConfig FixtureWorld::config() const { return load_config(config_path()); }

std::vector<SiteRecord> FixtureWorld::sites() const {
  const std::vector<std::string> us = {
      "selfdns.com", "vidtube.com", "shopone.com",     "redundant.com",
      "bulk1.com",   "bulk2.com",   "bulk3.com",       "bulk4.com",
      "few1.com",    "few2.com",    "wild.com",        "letsencrypt.org",
      "newsdaily.com", "myblog.blogspot.com", "broken.com", "flaky.com",
      "loopy.com",   "multicdn.com", "megacorp.com"};
  const std::vector<std::string> de = {"zeitung.de", "autohaus.de", "bank.de"};
  const std::vector<std::string> fr = {"journal.fr", "boutique.fr", "mairie.fr"};
  std::vector<SiteRecord> out;
  for (std::size_t i = 0; i < us.size(); ++i) {
    out.push_back({us[i], "US", static_cast<int>(i + 1)});
  }
  for (std::size_t i = 0; i < de.size(); ++i) {
    out.push_back({de[i], "DE", static_cast<int>(i + 1)});
  }
  for (std::size_t i = 0; i < fr.size(); ++i) {
    out.push_back({fr[i], "FR", static_cast<int>(i + 1)});
  }
  return out;
}

}  // namespace webdep::testing
