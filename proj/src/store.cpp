#include "webdep/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json_convert.hpp"
#include "webdep/error.hpp"
#include "webdep/text.hpp"

namespace webdep {

void to_json(json& j, const HostFacts& v) {
  j = json{{"host", v.host}, {"dns", v.dns}, {"chain", v.chain}, {"soa", v.soa}};
}
void from_json(const json& j, HostFacts& v) {
  j.at("host").get_to(v.host);
  j.at("dns").get_to(v.dns);
  j.at("chain").get_to(v.chain);
  j.at("soa").get_to(v.soa);
}

namespace {

constexpr const char* kMeta = "meta.json";
constexpr const char* kSites = "sites.csv";
constexpr const char* kProbes = "probes.jsonl";
constexpr const char* kReports = "reports.jsonl";
constexpr const char* kHostFacts = "host_facts.jsonl";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStoreWriteFailed, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path, bool tolerate_truncated_tail) {
  std::vector<T> out;
  if (!std::filesystem::exists(path)) return out;
  const std::string text = read_file(path);
  const bool ends_clean = text.empty() || text.back() == '\n';
  std::vector<std::pair<std::string_view, std::size_t>> lines;
  for_each_line(text, [&](std::string_view line, std::size_t no) {
    if (!trim(line).empty()) lines.emplace_back(line, no);
  });
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(json::parse(lines[i].first).get<T>());
    } catch (const json::exception& e) {
      if (tolerate_truncated_tail && !ends_clean && i + 1 == lines.size()) break;
      throw Error(ErrorCode::kMalformedDataFile,
                  path.string() + ":" + std::to_string(lines[i].second) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedDataFile,
                  path.string() + ":" + std::to_string(lines[i].second) + ": " + e.what());
    }
  }
  return out;
}

template <typename Range>
std::string to_jsonl(const Range& items) {
  std::string out;
  for (const auto& item : items) {
    out += json(item).dump();
    out += '\n';
  }
  return out;
}

}  // namespace

void validate_snapshot_id(const std::string& id) {
  const bool ok = !id.empty() && id != "." && id != ".." &&
                  std::all_of(id.begin(), id.end(), [](unsigned char c) {
                    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
                  });
  if (!ok) throw Error(ErrorCode::kUsage, "invalid snapshot id '" + id + "'");
}

SnapshotStore::SnapshotStore(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path SnapshotStore::dir(const std::string& id) const {
  validate_snapshot_id(id);
  return root_ / id;
}

bool SnapshotStore::exists(const std::string& id) const {
  return std::filesystem::is_regular_file(dir(id) / kMeta);
}

std::vector<std::string> SnapshotStore::list() const {
  std::vector<std::string> ids;
  std::error_code ec;
  if (!std::filesystem::is_directory(root_, ec)) return ids;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (std::filesystem::is_regular_file(entry.path() / kMeta)) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void SnapshotStore::require(const std::string& id) const {
  if (!exists(id)) {
    throw Error(ErrorCode::kSnapshotNotFound,
                "snapshot '" + id + "' not found in " + root_.string());
  }
}

void SnapshotStore::write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) {
    throw Error(ErrorCode::kStoreWriteFailed,
                "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::kStoreWriteFailed, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kStoreWriteFailed, "cannot rename " + tmp + ": " + ec.message());
}

SnapshotMeta SnapshotStore::create(const std::string& id, const std::string& config_digest) {
  if (exists(id)) return read_meta(id);
  SnapshotMeta meta{id, utc_timestamp_now(), config_digest};
  std::lock_guard lock(mu_);
  write_file(dir(id) / kMeta,
             json{{"snapshot_id", meta.snapshot_id},
                  {"created", meta.created},
                  {"config_digest", meta.config_digest}}
                     .dump(2) +
                 "\n");
  return meta;
}

SnapshotMeta SnapshotStore::read_meta(const std::string& id) const {
  require(id);
  const json j = parse_json(read_file(dir(id) / kMeta), ErrorCode::kMalformedDataFile, "meta.json");
  try {
    return {j.at("snapshot_id").get<std::string>(), j.at("created").get<std::string>(),
            j.at("config_digest").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDataFile, "meta.json: " + std::string(e.what()));
  }
}

void SnapshotStore::write_sites(const std::string& id, std::span<const SiteRecord> sites) {
  require(id);
  std::vector<SiteRecord> sorted(sites.begin(), sites.end());
  std::sort(sorted.begin(), sorted.end(), site_order);
  std::string text = "rank,domain,country\n";
  for (const auto& s : sorted) {
    text += std::to_string(s.rank) + "," + s.domain + "," + s.country + "\n";
  }
  std::lock_guard lock(mu_);
  write_file(dir(id) / kSites, text);
}

std::vector<SiteRecord> SnapshotStore::read_sites(const std::string& id) const {
  require(id);
  const auto path = dir(id) / kSites;
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kMissingPrerequisite, "ingest: snapshot '" + id + "' has no site list");
  }
  std::vector<SiteRecord> out;
  for_each_line(read_file(path), [&](std::string_view line, std::size_t no) {
    if (no == 1 || trim(line).empty()) return;
    const auto f = split(line, ',');
    if (f.size() != 3) {
      throw Error(ErrorCode::kMalformedDataFile, path.string() + ":" + std::to_string(no));
    }
    out.push_back({std::string(f[1]), std::string(f[2]), std::stoi(std::string(f[0]))});
  });
  return out;
}

void SnapshotStore::append_probe(const std::string& id, const ProbeResult& result) {
  const std::string line = json(result).dump() + "\n";
  std::lock_guard lock(mu_);
  const auto path = dir(id) / kProbes;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out << line;
  out.flush();
  if (!out) throw Error(ErrorCode::kStoreWriteFailed, "cannot append to " + path.string());
}

void SnapshotStore::write_probes(const std::string& id, std::span<const ProbeResult> results) {
  require(id);
  std::vector<ProbeResult> sorted(results.begin(), results.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ProbeResult& a, const ProbeResult& b) { return site_order(a.site, b.site); });
  const std::string text = to_jsonl(sorted);
  std::lock_guard lock(mu_);
  write_file(dir(id) / kProbes, text);
}

std::vector<ProbeResult> SnapshotStore::read_probes(const std::string& id) const {
  require(id);
  return read_jsonl<ProbeResult>(dir(id) / kProbes, true);
}

bool SnapshotStore::has_reports(const std::string& id) const {
  return exists(id) && std::filesystem::exists(dir(id) / kReports);
}

void SnapshotStore::write_reports(const std::string& id,
                                  std::span<const SiteDependencyReport> reports) {
  require(id);
  std::vector<SiteDependencyReport> sorted(reports.begin(), reports.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return site_order(a.site, b.site); });
  const std::string text = to_jsonl(sorted);
  std::lock_guard lock(mu_);
  write_file(dir(id) / kReports, text);
}

std::vector<SiteDependencyReport> SnapshotStore::read_reports(const std::string& id) const {
  require(id);
  if (!has_reports(id)) {
    throw Error(ErrorCode::kMissingPrerequisite, "classify: snapshot '" + id + "' has no reports");
  }
  return read_jsonl<SiteDependencyReport>(dir(id) / kReports, false);
}

void SnapshotStore::write_host_facts(const std::string& id,
                                     const std::map<std::string, HostFacts>& facts) {
  require(id);
  std::string text;
  for (const auto& [_, f] : facts) text += json(f).dump() + "\n";
  std::lock_guard lock(mu_);
  write_file(dir(id) / kHostFacts, text);
}

std::map<std::string, HostFacts> SnapshotStore::read_host_facts(const std::string& id) const {
  require(id);
  std::map<std::string, HostFacts> out;
  for (auto& f : read_jsonl<HostFacts>(dir(id) / kHostFacts, false)) {
    std::string host = f.host;
    out.emplace(std::move(host), std::move(f));
  }
  return out;
}

Snapshot SnapshotStore::load(const std::string& id) const {
  Snapshot s;
  s.meta = read_meta(id);
  if (std::filesystem::exists(dir(id) / kSites)) s.sites = read_sites(id);
  s.probe_results = read_probes(id);
  if (has_reports(id)) s.reports = read_reports(id);
  return s;
}

}  // namespace webdep
