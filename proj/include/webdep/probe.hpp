#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webdep/dns_client.hpp"
#include "webdep/foundation.hpp"
#include "webdep/rate_limiter.hpp"

namespace webdep {

// A ranked website within one country list.
struct SiteRecord {
  std::string domain;
  std::string country;  // ISO 3166-1 alpha-2, upper case
  int rank = 1;

  friend bool operator==(const SiteRecord&, const SiteRecord&) = default;
};

// Orders by (country, rank, domain).
bool site_order(const SiteRecord& a, const SiteRecord& b);

struct DnsFacts {
  std::vector<std::string> nameservers;  // sorted, unique
  std::optional<RegistrableDomain> soa_authority;
  std::map<std::string, std::optional<RegistrableDomain>> nameserver_soa;

  friend bool operator==(const DnsFacts&, const DnsFacts&) = default;
};

struct TlsFacts {
  bool https_supported = false;
  std::vector<std::string> san_list;  // sorted, unique, may contain "*." patterns
  std::optional<std::string> ca_name;
  std::optional<std::string> ca_url;
  bool ocsp_stapled = false;

  friend bool operator==(const TlsFacts&, const TlsFacts&) = default;
};

enum class ResourceSource { kHarImport, kHtmlFallback };

struct ResourceSet {
  std::vector<std::string> resources;
  ResourceSource source = ResourceSource::kHarImport;

  friend bool operator==(const ResourceSet&, const ResourceSet&) = default;
};

struct CnameChain {
  std::string origin;
  std::vector<std::string> chain;
  std::string terminal;

  friend bool operator==(const CnameChain&, const CnameChain&) = default;
};

struct StageError {
  std::string stage;
  std::string message;

  friend bool operator==(const StageError&, const StageError&) = default;
};

struct ProbeResult {
  SiteRecord site;
  DnsFacts dns;
  TlsFacts tls;
  ResourceSet resources;
  std::map<std::string, CnameChain> cnames;  // keyed by resource hostname
  // SOA authority for every other host the classifier compares against the
  // site: resource hosts, names in their CNAME chains, and the CA url.
  std::map<std::string, std::optional<RegistrableDomain>> host_soa;
  std::string probe_time;  // UTC, ISO 8601
  std::vector<StageError> errors;

  friend bool operator==(const ProbeResult&, const ProbeResult&) = default;
};

inline constexpr std::size_t kDefaultCnameDepth = 8;

struct TlsProbeConfig {
  std::uint16_t port = 443;
  std::chrono::milliseconds timeout{10000};
  int retries = 1;
};

struct HttpProbeConfig {
  std::uint16_t https_port = 443;
  std::uint16_t http_port = 80;
  std::chrono::milliseconds timeout{10000};
  int retries = 1;
};

struct ProbeConfig {
  ResolverConfig resolver;
  TlsProbeConfig tls;
  HttpProbeConfig http;
  std::optional<std::filesystem::path> har_dir;
  std::size_t cname_depth = kDefaultCnameDepth;
  std::shared_ptr<RateLimiter> host_limiter;  // per target host; may be null
};

// --- DNS -------------------------------------------------------------------

// NS lookup for `domain`, walking up to the enclosing zone cut when the name
// has no NS records of its own, plus SOA authorities for the domain and each
// nameserver. Throws ResolutionFailed when no nameserver set is obtained.
DnsFacts probe_dns(std::string_view domain, const DnsResolver& resolver,
                   const PublicSuffixList& psl);

// Registrable domain of the SOA MNAME for `host`: the answer's SOA, else the
// SOA in the authority section of a NODATA/NXDOMAIN reply, else the same for
// the parent name. For an alias the lookup moves to its registrable domain,
// since the resolver would answer for the alias target's zone.
std::optional<RegistrableDomain> soa_authority(std::string_view host,
                                               const DnsResolver& resolver,
                                               const PublicSuffixList& psl);

// Follows CNAME records to the terminal name. Throws ChainTooLong on loops or
// when more than `max_depth` aliases are followed, ResolutionFailed otherwise.
CnameChain resolve_cname_chain(std::string_view hostname, const DnsResolver& resolver,
                               std::size_t max_depth = kDefaultCnameDepth);

// First IPv4 (else IPv6) address for `host`, following CNAMEs.
std::optional<std::string> resolve_address(std::string_view host, const DnsResolver& resolver);

// --- TLS -------------------------------------------------------------------

// Handshake with status_request to `address:port` using `domain` as SNI.
// Never throws; a failed handshake yields https_supported = false and the
// reason in `failure` when given.
TlsFacts probe_tls_at(std::string_view domain, const std::string& address,
                      const TlsProbeConfig& config, const CaDirectory& ca_directory,
                      std::string* failure = nullptr);

TlsFacts probe_tls(std::string_view domain, const DnsResolver& resolver,
                   const TlsProbeConfig& config, const CaDirectory& ca_directory,
                   std::string* failure = nullptr);

// --- Resources ---------------------------------------------------------------

ResourceSet parse_har(std::string_view json_text);
// Throws MalformedHar.
ResourceSet ingest_har(const std::filesystem::path& path);

// URLs referenced by src/href attributes of script, img, link, iframe and
// source elements, resolved against `page_url`, in document order.
std::vector<std::string> extract_resource_urls(std::string_view html, std::string_view page_url);

// Fetches the root page over HTTPS, then HTTP. Result starts with the page URL.
// Throws FetchFailed.
ResourceSet fetch_resources_fallback(std::string_view domain, const DnsResolver& resolver,
                                     const HttpProbeConfig& config);

// --- Composition -------------------------------------------------------------

class Prober {
 public:
  Prober(ProbeConfig config, std::shared_ptr<const DataFiles> data);

  // Runs every collection stage; stage failures are recorded in
  // ProbeResult::errors and never abort the other stages.
  ProbeResult probe_site(const SiteRecord& site) const;

  const DnsResolver& resolver() const noexcept { return resolver_; }
  const ProbeConfig& config() const noexcept { return config_; }
  const DataFiles& data() const noexcept { return *data_; }

 private:
  void throttle(const std::string& host) const;

  ProbeConfig config_;
  std::shared_ptr<const DataFiles> data_;
  DnsResolver resolver_;
};

std::string utc_timestamp_now();

}  // namespace webdep
