#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webdep/rate_limiter.hpp"

namespace webdep {

enum class RecordType : std::uint16_t {
  kA = 1,
  kNs = 2,
  kCname = 5,
  kSoa = 6,
  kAaaa = 28,
};

enum class Rcode : int {
  kNoError = 0,
  kFormErr = 1,
  kServFail = 2,
  kNxDomain = 3,
  kNotImp = 4,
  kRefused = 5,
};

std::string_view rcode_name(Rcode rcode);

struct ResourceRecord {
  std::string name;  // owner, normalized
  RecordType type = RecordType::kA;
  std::uint32_t ttl = 0;
  // Target name for NS/CNAME, MNAME for SOA, textual address for A/AAAA.
  std::string data;
};

struct DnsResponse {
  Rcode rcode = Rcode::kNoError;
  std::vector<ResourceRecord> answers;
  std::vector<ResourceRecord> authority;
};

struct ResolverEndpoint {
  std::string address = "127.0.0.1";
  std::uint16_t port = 53;

  // Accepts "1.2.3.4", "1.2.3.4:5353", "[::1]:53" or "::1".
  static ResolverEndpoint parse(std::string_view text);
  // First `nameserver` of /etc/resolv.conf, falling back to 127.0.0.1.
  static ResolverEndpoint system_default();
  std::string to_string() const;
};

struct RetryPolicy {
  int retries = 2;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds attempt_timeout{2000};
};

// Thread-safe memo of completed queries. Only definitive answers (NOERROR,
// NXDOMAIN) are stored.
class DnsCache {
 public:
  std::optional<DnsResponse> get(const std::string& name, RecordType type) const;
  void put(const std::string& name, RecordType type, const DnsResponse& response);

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::uint16_t>, DnsResponse> entries_;
};

struct ResolverConfig {
  ResolverEndpoint endpoint = ResolverEndpoint::system_default();
  RetryPolicy retry;
  std::shared_ptr<RateLimiter> rate_limiter;  // keyed by endpoint; may be null
  std::shared_ptr<DnsCache> cache;            // may be null
};

// Stub resolver speaking to one recursive resolver over UDP, falling back to
// TCP on truncation.
class DnsResolver {
 public:
  explicit DnsResolver(ResolverConfig config);

  // Returns NOERROR and NXDOMAIN responses. Throws ResolutionFailed once the
  // retries are spent on timeouts, SERVFAIL or REFUSED; the message names the
  // last failure.
  DnsResponse query(std::string_view name, RecordType type) const;

  const ResolverConfig& config() const noexcept { return config_; }

 private:
  DnsResponse query_once(const std::string& name, RecordType type) const;

  ResolverConfig config_;
};

// Encodes a standard recursive query (RD set, one question, class IN).
std::vector<std::uint8_t> encode_query(std::string_view name, RecordType type,
                                       std::uint16_t id);
// Throws ResolutionFailed("malformed response") when the message cannot be
// parsed.
DnsResponse decode_response(const std::uint8_t* data, std::size_t size);

}  // namespace webdep
