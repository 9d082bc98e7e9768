#include <algorithm>
#include <set>

#include "json.hpp"

#include "webdep/error.hpp"
#include "webdep/probe.hpp"
#include "webdep/url.hpp"

namespace webdep {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

char lower_char(char c) { return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_resource_tag(const std::string& tag) {
  return tag == "script" || tag == "img" || tag == "link" || tag == "iframe" || tag == "source";
}

std::string decode_entities(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] == '&') {
      if (value.substr(i).starts_with("&amp;")) {
        out += '&';
        i += 4;
        continue;
      }
      if (value.substr(i).starts_with("&#38;")) {
        out += '&';
        i += 4;
        continue;
      }
    }
    out += value[i];
  }
  return out;
}

}  // namespace

ResourceSet parse_har(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedHar, std::string("HAR is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("log") || !doc["log"].is_object()) {
    throw Error(ErrorCode::kMalformedHar, "HAR has no 'log' object");
  }
  const auto& log = doc["log"];
  if (!log.contains("entries") || !log["entries"].is_array()) {
    throw Error(ErrorCode::kMalformedHar, "HAR has no 'log.entries' array");
  }
  ResourceSet set;
  set.source = ResourceSource::kHarImport;
  for (const auto& entry : log["entries"]) {
    const auto* request = entry.is_object() && entry.contains("request") ? &entry["request"] : nullptr;
    if (!request || !request->is_object() || !request->contains("url") ||
        !(*request)["url"].is_string()) {
      throw Error(ErrorCode::kMalformedHar, "HAR entry without request.url");
    }
    std::string url = (*request)["url"].get<std::string>();
    // Keep only absolute URLs with a hostname; data: and blob: entries are
    // browser-internal.
    if (url_host(url)) set.resources.push_back(std::move(url));
  }
  return set;
}

ResourceSet ingest_har(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedHar, e.what());
  }
  return parse_har(text);
}

std::vector<std::string> extract_resource_urls(std::string_view html, std::string_view page_url) {
  std::vector<std::string> urls;
  std::size_t i = 0;
  const std::size_t n = html.size();
  while (i < n) {
    const std::size_t lt = html.find('<', i);
    if (lt == std::string_view::npos) break;
    if (html.substr(lt).starts_with("<!--")) {
      const std::size_t end = html.find("-->", lt + 4);
      i = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    std::size_t p = lt + 1;
    std::string tag;
    while (p < n && (std::isalnum(static_cast<unsigned char>(html[p])))) {
      tag += lower_char(html[p++]);
    }
    if (tag.empty()) {
      i = lt + 1;
      continue;
    }
    // Attributes up to the closing '>', honoring quotes.
    std::vector<std::pair<std::string, std::string>> attrs;
    while (p < n && html[p] != '>') {
      while (p < n && (is_space(html[p]) || html[p] == '/')) ++p;
      std::string name;
      while (p < n && !is_space(html[p]) && html[p] != '=' && html[p] != '>' && html[p] != '/') {
        name += lower_char(html[p++]);
      }
      while (p < n && is_space(html[p])) ++p;
      std::string value;
      if (p < n && html[p] == '=') {
        ++p;
        while (p < n && is_space(html[p])) ++p;
        if (p < n && (html[p] == '"' || html[p] == '\'')) {
          const char quote = html[p++];
          const std::size_t close = html.find(quote, p);
          const std::size_t stop = close == std::string_view::npos ? n : close;
          value = std::string(html.substr(p, stop - p));
          p = stop == n ? n : stop + 1;
        } else {
          while (p < n && !is_space(html[p]) && html[p] != '>') value += html[p++];
        }
      }
      if (!name.empty()) attrs.emplace_back(std::move(name), std::move(value));
      else if (p < n && html[p] != '>') ++p;
    }
    i = p < n ? p + 1 : n;
    if (!is_resource_tag(tag)) {
      // Raw-text elements: skip their body so embedded markup is not scanned.
      if (tag == "style" || tag == "textarea") {
        const std::string close = "</" + tag;
        std::size_t j = i;
        while (j < n) {
          j = html.find("</", j);
          if (j == std::string_view::npos) break;
          std::string probe;
          for (std::size_t k = j; k < std::min(n, j + close.size()); ++k) probe += lower_char(html[k]);
          if (probe == close) break;
          j += 2;
        }
        i = j == std::string_view::npos ? n : j;
      }
      continue;
    }
    for (const auto& [name, value] : attrs) {
      if (name != "src" && name != "href") continue;
      if (auto resolved = resolve_url(page_url, decode_entities(value))) {
        urls.push_back(std::move(*resolved));
      }
    }
  }
  return urls;
}

}  // namespace webdep
