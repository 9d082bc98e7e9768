#include "webdep/dns_name.hpp"

#include <unicode/uidna.h>

#include <memory>
#include <optional>

#include "webdep/error.hpp"

namespace webdep {
namespace {

bool valid_label_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
}

bool has_non_ascii(std::string_view s) {
  for (unsigned char c : s) {
    if (c >= 0x80) return true;
  }
  return false;
}

struct IdnaCloser {
  void operator()(UIDNA* idna) const { uidna_close(idna); }
};

const UIDNA* uts46() {
  static const std::unique_ptr<UIDNA, IdnaCloser> idna = [] {
    UErrorCode status = U_ZERO_ERROR;
    UIDNA* p = uidna_openUTS46(UIDNA_NONTRANSITIONAL_TO_ASCII, &status);
    return std::unique_ptr<UIDNA, IdnaCloser>(U_FAILURE(status) ? nullptr : p);
  }();
  return idna.get();
}

// A-label form of a name holding UTF-8 labels; nullopt when IDNA rejects it.
std::optional<std::string> to_ascii(std::string_view name) {
  const UIDNA* idna = uts46();
  if (idna == nullptr) return std::nullopt;
  std::string out(kMaxNameLength * 4, '\0');
  UIDNAInfo info = UIDNA_INFO_INITIALIZER;
  UErrorCode status = U_ZERO_ERROR;
  const int32_t n = uidna_nameToASCII_UTF8(idna, name.data(), static_cast<int32_t>(name.size()),
                                           out.data(), static_cast<int32_t>(out.size()), &info,
                                           &status);
  if (U_FAILURE(status) || info.errors != 0) return std::nullopt;
  out.resize(static_cast<std::size_t>(n));
  return out;
}

// Folds ASCII, strips a trailing dot and converts UTF-8 labels to A-labels.
std::optional<std::string> canonical(std::string_view name) {
  std::string folded = fold_dns_name(name);
  if (!has_non_ascii(folded)) return folded;
  return to_ascii(folded);
}

// Returns an empty string on success, else the reason.
std::string check_folded(std::string_view name) {
  if (name.empty()) return "empty name";
  if (name.size() > kMaxNameLength) return "name longer than 253 octets";
  std::size_t start = 0;
  while (true) {
    std::size_t dot = name.find('.', start);
    std::string_view label =
        name.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (label.empty()) return "empty label";
    if (label.size() > kMaxLabelLength) return "label longer than 63 octets";
    for (unsigned char c : label) {
      if (!valid_label_byte(c)) return "illegal character in label";
    }
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return {};
}

}  // namespace

std::string fold_dns_name(std::string_view name) {
  std::string out(name);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  if (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

std::string normalize_dns_name(std::string_view name) {
  const auto folded = canonical(name);
  if (!folded) {
    throw Error(ErrorCode::kMalformedHostname,
                "malformed hostname '" + std::string(name) + "': invalid IDN label");
  }
  if (std::string reason = check_folded(*folded); !reason.empty()) {
    throw Error(ErrorCode::kMalformedHostname,
                "malformed hostname '" + std::string(name) + "': " + reason);
  }
  return *folded;
}

bool is_valid_dns_name(std::string_view name) {
  const auto folded = canonical(name);
  return folded && check_folded(*folded).empty();
}

std::string normalize_dns_pattern(std::string_view pattern) {
  std::string_view rest = pattern;
  const bool wildcard = rest.starts_with("*.");
  if (wildcard) rest.remove_prefix(2);
  return (wildcard ? "*." : "") + normalize_dns_name(rest);
}

bool is_valid_dns_pattern(std::string_view pattern) {
  std::string_view rest = pattern;
  if (rest.starts_with("*.")) rest.remove_prefix(2);
  return is_valid_dns_name(rest);
}

std::vector<std::string_view> split_labels(std::string_view name) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (start <= name.size()) {
    std::size_t dot = name.find('.', start);
    if (dot == std::string_view::npos) {
      labels.push_back(name.substr(start));
      break;
    }
    labels.push_back(name.substr(start, dot - start));
    start = dot + 1;
  }
  return labels;
}

bool ends_with_label_suffix(std::string_view name, std::string_view suffix) {
  if (suffix.empty() || name.size() < suffix.size()) return false;
  if (name.size() == suffix.size()) return name == suffix;
  return name.ends_with(suffix) && name[name.size() - suffix.size() - 1] == '.';
}

}  // namespace webdep
