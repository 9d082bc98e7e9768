#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace webdep {

inline constexpr std::size_t kMaxLabelLength = 63;
inline constexpr std::size_t kMaxNameLength = 253;

// Lowercases ASCII, strips one trailing dot and converts UTF-8 labels to
// A-labels (UTS #46). Throws MalformedHostname when the result is empty, has
// an empty label, a label over 63 octets, or a byte outside [a-z0-9-_].
std::string normalize_dns_name(std::string_view name);

// Non-throwing variant of normalize_dns_name.
bool is_valid_dns_name(std::string_view name);

// Like normalize_dns_name but additionally permits a leading "*." label, as
// found in certificate Subject Alternative Names.
std::string normalize_dns_pattern(std::string_view pattern);
bool is_valid_dns_pattern(std::string_view pattern);

// Lowercase and strip a trailing dot without validation.
std::string fold_dns_name(std::string_view name);

std::vector<std::string_view> split_labels(std::string_view name);

// True when `name` equals `suffix` or ends with "." + suffix.
bool ends_with_label_suffix(std::string_view name, std::string_view suffix);

}  // namespace webdep
