#include "webdep/url.hpp"

#include <algorithm>
#include <vector>

#include "webdep/dns_name.hpp"

namespace webdep {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  });
  return out;
}

bool is_scheme_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '+' || c == '-' || c == '.';
}

// Scheme if `s` starts with one, else empty.
std::string_view scheme_of(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos || colon == 0) return {};
  std::string_view scheme = s.substr(0, colon);
  if (!std::all_of(scheme.begin(), scheme.end(), is_scheme_char)) return {};
  if (!((scheme[0] >= 'a' && scheme[0] <= 'z') || (scheme[0] >= 'A' && scheme[0] <= 'Z'))) {
    return {};
  }
  return scheme;
}

}  // namespace

std::optional<UrlParts> parse_absolute_url(std::string_view url) {
  while (!url.empty() && (url.front() == ' ' || url.front() == '\t')) url.remove_prefix(1);
  while (!url.empty() && (url.back() == ' ' || url.back() == '\t')) url.remove_suffix(1);
  std::string_view scheme = scheme_of(url);
  if (scheme.empty()) return std::nullopt;
  std::string_view rest = url.substr(scheme.size() + 1);
  if (!rest.starts_with("//")) return std::nullopt;
  rest.remove_prefix(2);
  const auto path_start = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, path_start);
  std::string_view path = path_start == std::string_view::npos ? "" : rest.substr(path_start);
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority.remove_prefix(at + 1);
  }
  std::string_view host = authority;
  std::string_view port;
  if (authority.starts_with('[')) {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(0, close + 1);
    if (close + 1 < authority.size() && authority[close + 1] == ':') {
      port = authority.substr(close + 2);
    }
  } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  if (host.empty()) return std::nullopt;
  UrlParts parts;
  parts.scheme = lower(scheme);
  parts.host = fold_dns_name(host);
  parts.port = std::string(port);
  parts.path = path.empty() || path.front() != '/' ? "/" + std::string(path) : std::string(path);
  if (const auto hash = parts.path.find('#'); hash != std::string::npos) parts.path.resize(hash);
  return parts;
}

std::optional<std::string> url_host(std::string_view url) {
  auto parts = parse_absolute_url(url);
  if (!parts || !is_valid_dns_name(parts->host)) return std::nullopt;
  return parts->host;
}

namespace {

// RFC 3986 section 5.2.4 on the path part; the query is left alone.
std::string remove_dot_segments(std::string_view path_and_query) {
  const std::size_t q = path_and_query.find('?');
  std::string_view in = path_and_query.substr(0, q);
  std::vector<std::string_view> out;
  const bool trailing = in.ends_with("/.") || in.ends_with("/..") || in == "." || in == "..";
  std::size_t start = in.starts_with('/') ? 1 : 0;
  while (start <= in.size()) {
    std::size_t slash = in.find('/', start);
    if (slash == std::string_view::npos) slash = in.size();
    const std::string_view seg = in.substr(start, slash - start);
    if (seg == "..") {
      if (!out.empty()) out.pop_back();
    } else if (seg != ".") {
      out.push_back(seg);
    }
    start = slash + 1;
  }
  std::string path = "/";
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i > 0) path += '/';
    path += out[i];
  }
  if (trailing && path.back() != '/') path += '/';
  if (q != std::string_view::npos) path += path_and_query.substr(q);
  return path;
}

}  // namespace

std::optional<std::string> resolve_url(std::string_view base, std::string_view ref) {
  while (!ref.empty() && (ref.front() == ' ' || ref.front() == '\t' || ref.front() == '\n' ||
                          ref.front() == '\r')) {
    ref.remove_prefix(1);
  }
  while (!ref.empty() && (ref.back() == ' ' || ref.back() == '\t' || ref.back() == '\n' ||
                          ref.back() == '\r')) {
    ref.remove_suffix(1);
  }
  if (ref.empty() || ref.front() == '#') return std::nullopt;

  if (std::string_view scheme = scheme_of(ref); !scheme.empty()) {
    const std::string s = lower(scheme);
    if (s != "http" && s != "https") return std::nullopt;
    if (!parse_absolute_url(ref)) return std::nullopt;
    return std::string(ref);
  }

  auto b = parse_absolute_url(base);
  if (!b) return std::nullopt;
  const std::string authority = b->host + (b->port.empty() ? "" : ":" + b->port);
  if (ref.starts_with("//")) return b->scheme + ":" + std::string(ref);
  if (ref.front() == '/') return b->scheme + "://" + authority + remove_dot_segments(ref);

  std::string dir = b->path.substr(0, b->path.find('?'));
  dir = dir.substr(0, dir.rfind('/') + 1);
  if (ref.front() == '?') {
    return b->scheme + "://" + authority + b->path.substr(0, b->path.find('?')) +
           std::string(ref);
  }
  return b->scheme + "://" + authority + remove_dot_segments(dir + std::string(ref));
}

}  // namespace webdep
