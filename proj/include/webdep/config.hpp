#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webdep/foundation.hpp"
#include "webdep/probe.hpp"

namespace webdep {

// Effective run configuration. Loaded from a `key = value` file; CLI flags
// override individual keys afterwards.
struct RunConfig {
  std::string resolver;  // "ip[:port]"; empty means the system resolver
  std::size_t parallelism = 8;
  double dns_rate = 50.0;  // queries per second toward the resolver, 0 = unlimited
  double host_rate = 2.0;  // connections per second per target host, 0 = unlimited
  std::uint64_t concentration_threshold = 50;

  std::filesystem::path psl;
  std::filesystem::path cdn_map;
  std::filesystem::path provider_aliases;
  std::filesystem::path ca_directory;
  std::optional<std::filesystem::path> indicators;
  std::optional<std::filesystem::path> groupings;
  std::optional<std::filesystem::path> global_list;
  std::vector<std::size_t> overlap_subsets{1000, 5000, 10000, 20000, 50000, 100000};

  std::optional<std::filesystem::path> har_dir;
  bool offline = false;
  std::filesystem::path store = "webdep-store";

  int dns_retries = 2;
  std::chrono::milliseconds dns_backoff{1000};
  std::chrono::milliseconds dns_timeout{2000};
  std::chrono::milliseconds tls_timeout{10000};
  std::chrono::milliseconds http_timeout{10000};
  int tls_retries = 1;
  int http_retries = 1;
  std::uint16_t tls_port = 443;
  std::uint16_t https_port = 443;
  std::uint16_t http_port = 80;
  std::size_t cname_depth = kDefaultCnameDepth;

  // Applies one `key`/`value` pair. Throws ConfigError on unknown keys or
  // unparsable values.
  void set(std::string_view key, std::string_view value);

  // Throws ConfigError when parallelism < 1 or a referenced file is missing.
  void validate() const;

  // Stable `key = value` rendering of every setting, used for the digest.
  std::string canonical_text() const;
  // Hex SHA-256 of canonical_text().
  std::string digest() const;
};

// Directory holding the shipped data files: $WEBDEP_DATA_DIR when set, else
// the build-time default.
std::filesystem::path default_data_dir();

// Defaults with data paths under default_data_dir().
RunConfig default_config();

// Parses `key = value` lines onto `base`. '#' starts a comment; values may be
// double-quoted; `[section]` lines are ignored.
RunConfig parse_config(std::string_view text, std::string_view source, RunConfig base);
RunConfig load_config(const std::filesystem::path& path);

std::shared_ptr<DataFiles> load_data_files(const RunConfig& config);
// Resolver, TLS/HTTP, CNAME and rate settings for the prober.
ProbeConfig make_probe_config(const RunConfig& config);

}  // namespace webdep
