#include "webdep/foundation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "webdep/dns_name.hpp"
#include "webdep/error.hpp"
#include "webdep/text.hpp"

namespace webdep {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kConfigError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// PublicSuffixList

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
  PublicSuffixList psl;
  bool in_private = false;
  for_each_line(text, [&](std::string_view raw, std::size_t) {
    std::string_view line = trim(raw);
    if (line.starts_with("//")) {
      if (line.find("===BEGIN PRIVATE DOMAINS===") != std::string_view::npos) in_private = true;
      if (line.find("===END PRIVATE DOMAINS===") != std::string_view::npos) in_private = false;
      return;
    }
    // Only the text up to the first whitespace is a rule.
    line = line.substr(0, line.find_first_of(" \t"));
    if (line.empty()) return;

    std::uint8_t kind = kExact;
    std::string rule;
    if (line.front() == '!') {
      kind = kException;
      rule = ascii_lower(line.substr(1));
    } else if (line.starts_with("*.")) {
      kind = kWildcard;
      rule = ascii_lower(line.substr(2));
    } else {
      rule = ascii_lower(line);
    }
    if (rule.empty()) return;
    // Rules for IDN suffixes are written as U-labels; names compare as A-labels.
    if (std::any_of(rule.begin(), rule.end(), [](char c) { return c & 0x80; })) {
      if (!is_valid_dns_name(rule)) return;
      rule = normalize_dns_name(rule);
    }
    const int shift = in_private ? kPrivateShift : 0;
    psl.rules_[rule] |= static_cast<std::uint8_t>(kind << shift);
  });
  if (psl.rules_.empty()) {
    throw Error(ErrorCode::kMalformedDataFile, "public suffix list contains no rules");
  }
  return psl;
}

PublicSuffixList PublicSuffixList::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

std::uint8_t PublicSuffixList::bits_for(const std::string& suffix, Scope scope) const {
  auto it = rules_.find(suffix);
  if (it == rules_.end()) return 0;
  std::uint8_t bits = it->second & 0x7;
  if (scope == Scope::kAll) bits |= (it->second >> kPrivateShift) & 0x7;
  return bits;
}

std::size_t PublicSuffixList::suffix_label_count(const std::vector<std::string_view>& labels,
                                                 Scope scope) const {
  const std::size_t n = labels.size();
  // suffixes[i] = labels[i..n) joined with dots.
  std::vector<std::string> suffixes(n + 1);
  for (std::size_t i = n; i-- > 0;) {
    suffixes[i] = std::string(labels[i]);
    if (i + 1 < n) suffixes[i] += "." + suffixes[i + 1];
  }

  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t here = bits_for(suffixes[i], scope);
    if (here & kException) {
      // An exception rule prevails over everything; the suffix is the rule
      // minus its leftmost label. Scanning from the left finds the longest.
      return n - i - 1;
    }
    if (here & kExact) best = std::max(best, n - i);
    if (i + 1 < n && (bits_for(suffixes[i + 1], scope) & kWildcard)) {
      best = std::max(best, n - i);
    }
  }
  // Default rule "*".
  return best == 0 ? 1 : best;
}

std::string PublicSuffixList::public_suffix(std::string_view hostname, Scope scope) const {
  const std::string name = normalize_dns_name(hostname);
  const auto labels = split_labels(name);
  const std::size_t count = std::min(suffix_label_count(labels, scope), labels.size());
  std::string out;
  for (std::size_t i = labels.size() - count; i < labels.size(); ++i) {
    if (!out.empty()) out += '.';
    out += labels[i];
  }
  return out;
}

bool PublicSuffixList::is_public_suffix(std::string_view hostname, Scope scope) const {
  const std::string name = normalize_dns_name(hostname);
  return suffix_label_count(split_labels(name), scope) >= split_labels(name).size();
}

RegistrableDomain PublicSuffixList::registrable_domain(std::string_view hostname,
                                                       Scope scope) const {
  const std::string name = normalize_dns_name(hostname);
  const auto labels = split_labels(name);
  const std::size_t count = suffix_label_count(labels, scope);
  if (count >= labels.size()) {
    throw Error(ErrorCode::kSuffixOnly, "'" + name + "' is a public suffix");
  }
  std::string out;
  for (std::size_t i = labels.size() - count - 1; i < labels.size(); ++i) {
    if (!out.empty()) out += '.';
    out += labels[i];
  }
  return RegistrableDomain(std::move(out));
}

std::optional<RegistrableDomain> PublicSuffixList::try_registrable_domain(
    std::string_view hostname, Scope scope) const {
  try {
    return registrable_domain(hostname, scope);
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool same_registrable_domain(std::string_view a, std::string_view b,
                             const PublicSuffixList& psl) {
  auto ra = psl.try_registrable_domain(a);
  auto rb = psl.try_registrable_domain(b);
  return ra && rb && *ra == *rb;
}

ProviderId provider_id(std::string_view hostname, const PublicSuffixList& psl) {
  return ProviderId(psl.registrable_domain(hostname).value());
}

std::optional<ProviderId> try_provider_id(std::string_view hostname,
                                          const PublicSuffixList& psl) {
  if (auto rd = psl.try_registrable_domain(hostname)) return ProviderId(rd->value());
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Tab-separated data files

std::vector<std::pair<std::string, std::string>> parse_tab_file(std::string_view text,
                                                                std::string_view source) {
  std::vector<std::pair<std::string, std::string>> rows;
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedDataFile, std::string(source) + ":" +
                                                     std::to_string(line_no) +
                                                     ": expected key<TAB>value");
    }
    std::string_view key = trim(line.substr(0, tab));
    std::string_view value = trim(line.substr(tab + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorCode::kMalformedDataFile, std::string(source) + ":" +
                                                     std::to_string(line_no) +
                                                     ": empty field");
    }
    rows.emplace_back(std::string(key), std::string(value));
  });
  return rows;
}

// ---------------------------------------------------------------------------
// CdnCnameMap

CdnCnameMap::CdnCnameMap(std::vector<Entry> entries) {
  for (auto& e : entries) {
    std::string suffix = normalize_dns_name(e.suffix);
    if (index_.count(suffix) != 0) {
      throw Error(ErrorCode::kMalformedDataFile, "duplicate CDN suffix '" + suffix + "'");
    }
    index_.emplace(suffix, entries_.size());
    entries_.push_back({std::move(suffix), std::move(e.cdn_name)});
  }
}

CdnCnameMap CdnCnameMap::parse(std::string_view text) {
  std::vector<Entry> entries;
  for (auto& [suffix, name] : parse_tab_file(text, "cdn map")) {
    std::string_view s = suffix;
    if (s.starts_with('.')) s.remove_prefix(1);
    entries.push_back({std::string(s), std::move(name)});
  }
  return CdnCnameMap(std::move(entries));
}

CdnCnameMap CdnCnameMap::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

std::optional<std::string> CdnCnameMap::lookup(std::string_view cname) const {
  const std::string name = fold_dns_name(cname);
  std::string_view rest = name;
  // Whole name first, then each shorter dot-aligned suffix: the first hit is
  // the longest.
  while (!rest.empty()) {
    if (auto it = index_.find(std::string(rest)); it != index_.end()) {
      return entries_[it->second].cdn_name;
    }
    const std::size_t dot = rest.find('.');
    if (dot == std::string_view::npos) break;
    rest.remove_prefix(dot + 1);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ProviderAliases / CaDirectory

ProviderAliases ProviderAliases::parse(std::string_view text) {
  ProviderAliases aliases;
  for (auto& [domain, name] : parse_tab_file(text, "provider aliases")) {
    aliases.names_[fold_dns_name(domain)] = std::move(name);
  }
  return aliases;
}

ProviderAliases ProviderAliases::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

std::string ProviderAliases::display_name(const ProviderId& id) const {
  auto it = names_.find(id.value());
  return it == names_.end() ? id.value() : it->second;
}

CaDirectory CaDirectory::parse(std::string_view text) {
  CaDirectory dir;
  for (auto& [org, host] : parse_tab_file(text, "CA directory")) {
    dir.hosts_[ascii_lower(org)] = normalize_dns_name(host);
  }
  return dir;
}

CaDirectory CaDirectory::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

std::optional<std::string> CaDirectory::ca_url(std::string_view issuer_organization) const {
  auto it = hosts_.find(ascii_lower(trim(issuer_organization)));
  if (it == hosts_.end()) return std::nullopt;
  return it->second;
}

}  // namespace webdep
