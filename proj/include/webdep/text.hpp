#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace webdep {

// Strips spaces, tabs and carriage returns from both ends.
std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Calls fn(line, line_number) for each line; accepts \n, \r\n and \r endings.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find_first_of("\r\n", start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    fn(text.substr(start, end - start), line_no);
    start = end + 1;
    if (end < text.size() && text[end] == '\r' && start < text.size() && text[start] == '\n') {
      ++start;
    }
  }
}

}  // namespace webdep
