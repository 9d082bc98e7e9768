#include "webdep/config.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "webdep/error.hpp"
#include "webdep/text.hpp"

namespace webdep {
namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::kConfigError,
              "bad value for " + std::string(key) + ": '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string v = ascii_lower(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, value);
}

std::chrono::milliseconds parse_ms(std::string_view key, std::string_view value) {
  const auto ms = parse_number<long long>(key, value);
  if (ms < 0) bad_value(key, value);
  return std::chrono::milliseconds(ms);
}

std::uint16_t parse_port(std::string_view key, std::string_view value) {
  const auto port = parse_number<unsigned>(key, value);
  if (port == 0 || port > 65535) bad_value(key, value);
  return static_cast<std::uint16_t>(port);
}

std::optional<std::filesystem::path> optional_path(std::string_view value) {
  if (value.empty()) return std::nullopt;
  return std::filesystem::path(std::string(value));
}

std::string path_text(const std::optional<std::filesystem::path>& p) {
  return p ? p->string() : "";
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  if (key == "resolver") {
    resolver = std::string(value);
  } else if (key == "parallelism") {
    parallelism = parse_number<std::size_t>(key, value);
  } else if (key == "dns_rate") {
    dns_rate = parse_number<double>(key, value);
  } else if (key == "host_rate") {
    host_rate = parse_number<double>(key, value);
  } else if (key == "concentration_threshold") {
    concentration_threshold = parse_number<std::uint64_t>(key, value);
  } else if (key == "psl") {
    psl = std::string(value);
  } else if (key == "cdn_map") {
    cdn_map = std::string(value);
  } else if (key == "provider_aliases") {
    provider_aliases = std::string(value);
  } else if (key == "ca_directory") {
    ca_directory = std::string(value);
  } else if (key == "indicators") {
    indicators = optional_path(value);
  } else if (key == "groupings") {
    groupings = optional_path(value);
  } else if (key == "global_list") {
    global_list = optional_path(value);
  } else if (key == "overlap_subsets") {
    overlap_subsets.clear();
    for (auto part : split(value, ',')) {
      const auto n = parse_number<std::size_t>(key, trim(part));
      if (n == 0) bad_value(key, value);
      overlap_subsets.push_back(n);
    }
  } else if (key == "har_dir") {
    har_dir = optional_path(value);
  } else if (key == "offline") {
    offline = parse_bool(key, value);
  } else if (key == "store") {
    store = std::string(value);
  } else if (key == "dns_retries") {
    dns_retries = parse_number<int>(key, value);
  } else if (key == "dns_backoff_ms") {
    dns_backoff = parse_ms(key, value);
  } else if (key == "dns_timeout_ms") {
    dns_timeout = parse_ms(key, value);
  } else if (key == "tls_timeout_ms") {
    tls_timeout = parse_ms(key, value);
  } else if (key == "http_timeout_ms") {
    http_timeout = parse_ms(key, value);
  } else if (key == "tls_retries") {
    tls_retries = parse_number<int>(key, value);
  } else if (key == "http_retries") {
    http_retries = parse_number<int>(key, value);
  } else if (key == "tls_port") {
    tls_port = parse_port(key, value);
  } else if (key == "https_port") {
    https_port = parse_port(key, value);
  } else if (key == "http_port") {
    http_port = parse_port(key, value);
  } else if (key == "cname_depth") {
    cname_depth = parse_number<std::size_t>(key, value);
  } else {
    throw Error(ErrorCode::kConfigError, "unknown config key '" + std::string(key) + "'");
  }
}

void RunConfig::validate() const {
  if (parallelism < 1) throw Error(ErrorCode::kConfigError, "parallelism must be at least 1");
  if (dns_rate < 0 || host_rate < 0) throw Error(ErrorCode::kConfigError, "rates must be >= 0");
  if (dns_retries < 0 || tls_retries < 0 || http_retries < 0) {
    throw Error(ErrorCode::kConfigError, "retries must be >= 0");
  }
  auto require = [](const char* key, const std::filesystem::path& p) {
    if (!std::filesystem::is_regular_file(p)) {
      throw Error(ErrorCode::kConfigError,
                  std::string(key) + ": file not found: " + p.string());
    }
  };
  require("psl", psl);
  require("cdn_map", cdn_map);
  require("provider_aliases", provider_aliases);
  require("ca_directory", ca_directory);
  if (indicators) require("indicators", *indicators);
  if (groupings) require("groupings", *groupings);
  if (global_list) require("global_list", *global_list);
  if (har_dir && !std::filesystem::is_directory(*har_dir)) {
    throw Error(ErrorCode::kConfigError, "har_dir: not a directory: " + har_dir->string());
  }
}

std::string RunConfig::canonical_text() const {
  std::ostringstream out;
  out << "resolver = " << resolver << "\n"
      << "parallelism = " << parallelism << "\n"
      << "dns_rate = " << dns_rate << "\n"
      << "host_rate = " << host_rate << "\n"
      << "concentration_threshold = " << concentration_threshold << "\n"
      << "psl = " << psl.string() << "\n"
      << "cdn_map = " << cdn_map.string() << "\n"
      << "provider_aliases = " << provider_aliases.string() << "\n"
      << "ca_directory = " << ca_directory.string() << "\n"
      << "indicators = " << path_text(indicators) << "\n"
      << "groupings = " << path_text(groupings) << "\n"
      << "global_list = " << path_text(global_list) << "\n"
      << "overlap_subsets = ";
  for (std::size_t i = 0; i < overlap_subsets.size(); ++i) {
    out << (i ? "," : "") << overlap_subsets[i];
  }
  out << "\n"
      << "har_dir = " << path_text(har_dir) << "\n"
      << "offline = " << (offline ? "true" : "false") << "\n"
      << "store = " << store.string() << "\n"
      << "dns_retries = " << dns_retries << "\n"
      << "dns_backoff_ms = " << dns_backoff.count() << "\n"
      << "dns_timeout_ms = " << dns_timeout.count() << "\n"
      << "tls_timeout_ms = " << tls_timeout.count() << "\n"
      << "http_timeout_ms = " << http_timeout.count() << "\n"
      << "tls_retries = " << tls_retries << "\n"
      << "http_retries = " << http_retries << "\n"
      << "tls_port = " << tls_port << "\n"
      << "https_port = " << https_port << "\n"
      << "http_port = " << http_port << "\n"
      << "cname_depth = " << cname_depth << "\n";
  return out.str();
}

std::string RunConfig::digest() const {
  const std::string text = canonical_text();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kConfigError, "sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("WEBDEP_DATA_DIR"); env && *env) return env;
  return WEBDEP_DEFAULT_DATA_DIR;
}

RunConfig default_config() {
  const auto dir = default_data_dir();
  RunConfig c;
  c.psl = dir / "public_suffix_list.dat";
  c.cdn_map = dir / "cdn_cname_map.tsv";
  c.provider_aliases = dir / "provider_aliases.tsv";
  c.ca_directory = dir / "ca_directory.tsv";
  if (std::filesystem::exists(dir / "groupings.csv")) c.groupings = dir / "groupings.csv";
  if (std::filesystem::exists(dir / "indicators.csv")) c.indicators = dir / "indicators.csv";
  return c;
}

RunConfig parse_config(std::string_view text, std::string_view source, RunConfig base) {
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == '[') return;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfigError,
                  std::string(source) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"') {
      const std::size_t close = value.find('"', 1);
      if (close == std::string_view::npos) {
        throw Error(ErrorCode::kConfigError,
                    std::string(source) + ":" + std::to_string(line_no) + ": unterminated string");
      }
      value = value.substr(1, close - 1);
    } else if (const std::size_t hash = value.find(" #"); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    try {
      base.set(key, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfigError,
                  std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return base;
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig cfg = parse_config(read_text_file(path), path.string(), default_config());
  // Relative data paths in a config file are taken relative to the file.
  const auto base = path.parent_path();
  auto rebase = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  auto rebase_opt = [&](std::optional<std::filesystem::path>& p) {
    if (p) rebase(*p);
  };
  rebase(cfg.psl);
  rebase(cfg.cdn_map);
  rebase(cfg.provider_aliases);
  rebase(cfg.ca_directory);
  rebase_opt(cfg.indicators);
  rebase_opt(cfg.groupings);
  rebase_opt(cfg.global_list);
  rebase_opt(cfg.har_dir);
  rebase(cfg.store);
  return cfg;
}

std::shared_ptr<DataFiles> load_data_files(const RunConfig& config) {
  auto data = std::make_shared<DataFiles>();
  data->psl = PublicSuffixList::load(config.psl);
  data->cdn_map = CdnCnameMap::load(config.cdn_map);
  data->aliases = ProviderAliases::load(config.provider_aliases);
  data->ca_directory = CaDirectory::load(config.ca_directory);
  return data;
}

ProbeConfig make_probe_config(const RunConfig& config) {
  ProbeConfig pc;
  pc.resolver.endpoint = config.resolver.empty() ? ResolverEndpoint::system_default()
                                                 : ResolverEndpoint::parse(config.resolver);
  pc.resolver.retry.retries = config.dns_retries;
  pc.resolver.retry.initial_backoff = config.dns_backoff;
  pc.resolver.retry.attempt_timeout = config.dns_timeout;
  pc.resolver.cache = std::make_shared<DnsCache>();
  if (config.dns_rate > 0) {
    pc.resolver.rate_limiter =
        std::make_shared<RateLimiter>(RateLimiter::interval_for_rate(config.dns_rate));
  }
  if (config.host_rate > 0) {
    pc.host_limiter =
        std::make_shared<RateLimiter>(RateLimiter::interval_for_rate(config.host_rate));
  }
  pc.tls.port = config.tls_port;
  pc.tls.timeout = config.tls_timeout;
  pc.tls.retries = config.tls_retries;
  pc.http.https_port = config.https_port;
  pc.http.http_port = config.http_port;
  pc.http.timeout = config.http_timeout;
  pc.http.retries = config.http_retries;
  pc.har_dir = config.har_dir;
  pc.cname_depth = config.cname_depth;
  return pc;
}

}  // namespace webdep
