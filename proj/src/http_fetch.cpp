#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <set>

#include "webdep/dns_name.hpp"
#include "webdep/error.hpp"
#include "webdep/probe.hpp"

namespace webdep {
namespace {

struct Page {
  std::string url;
  std::string body;
};

std::optional<Page> fetch_root(const std::string& domain, const std::string& address,
                               const std::string& scheme, std::uint16_t port,
                               const HttpProbeConfig& config, std::string* failure) {
  const bool default_port = (scheme == "https" && port == 443) || (scheme == "http" && port == 80);
  const std::string origin =
      scheme + "://" + domain + (default_port ? "" : ":" + std::to_string(port));
  httplib::Client client(origin);
  client.set_hostname_addr_map({{domain, address}});
  client.enable_server_certificate_verification(false);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    auto res = client.Get("/");
    if (!res) {
      *failure = origin + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 400) {
      *failure = origin + ": HTTP " + std::to_string(res->status);
      return std::nullopt;
    }
    return Page{origin + "/", res->body};
  }
  return std::nullopt;
}

}  // namespace

ResourceSet fetch_resources_fallback(std::string_view raw_domain, const DnsResolver& resolver,
                                     const HttpProbeConfig& config) {
  const std::string domain = normalize_dns_name(raw_domain);
  const auto address = resolve_address(domain, resolver);
  if (!address) {
    throw Error(ErrorCode::kFetchFailed, domain + ": no address");
  }
  std::string https_failure;
  std::string http_failure;
  std::optional<Page> page =
      fetch_root(domain, *address, "https", config.https_port, config, &https_failure);
  if (!page) page = fetch_root(domain, *address, "http", config.http_port, config, &http_failure);
  if (!page) {
    throw Error(ErrorCode::kFetchFailed, https_failure + "; " + http_failure);
  }

  ResourceSet set;
  set.source = ResourceSource::kHtmlFallback;
  std::set<std::string> seen;
  auto add = [&](std::string url) {
    if (seen.insert(url).second) set.resources.push_back(std::move(url));
  };
  add(page->url);
  for (auto& url : extract_resource_urls(page->body, page->url)) add(std::move(url));
  return set;
}

}  // namespace webdep
