#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace webdep {

struct UrlParts {
  std::string scheme;  // lowercase
  std::string host;    // folded; empty when the URL has no authority
  std::string port;    // empty when absent
  std::string path;    // includes query; "/" when empty
};

// Parses an absolute http(s)/ws(s)/ftp-style URL. Returns nullopt for
// relative references and URLs without a hostname.
std::optional<UrlParts> parse_absolute_url(std::string_view url);

// Hostname of an absolute URL, normalized; nullopt when absent or invalid.
std::optional<std::string> url_host(std::string_view url);

// Resolves `ref` against `base` (scheme-relative, absolute-path and
// path-relative forms). Returns nullopt for non-fetchable schemes such as
// data:, javascript: and mailto:.
std::optional<std::string> resolve_url(std::string_view base, std::string_view ref);

}  // namespace webdep
