#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "webdep/classify.hpp"
#include "webdep/probe.hpp"

namespace webdep {

struct SnapshotMeta {
  std::string snapshot_id;
  std::string created;  // UTC, ISO 8601
  std::string config_digest;

  friend bool operator==(const SnapshotMeta&, const SnapshotMeta&) = default;
};

// Cached network facts about one non-site host (CDN CNAME, CA host or a name
// in a CA host's CNAME chain), gathered for the indirect analysis.
struct HostFacts {
  std::string host;
  std::optional<DnsFacts> dns;
  std::optional<CnameChain> chain;
  std::optional<RegistrableDomain> soa;

  friend bool operator==(const HostFacts&, const HostFacts&) = default;
};

struct Snapshot {
  SnapshotMeta meta;
  std::vector<SiteRecord> sites;
  std::vector<ProbeResult> probe_results;
  std::optional<std::vector<SiteDependencyReport>> reports;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

// Directory-per-snapshot store:
//   <root>/<id>/meta.json, sites.csv, probes.jsonl, reports.jsonl,
//   host_facts.jsonl
// Whole-file writes go through a temporary file and rename. Writes are
// serialized by one mutex per store instance.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path dir(const std::string& id) const;
  bool exists(const std::string& id) const;
  std::vector<std::string> list() const;

  // Creates the snapshot, or returns the existing meta unchanged.
  SnapshotMeta create(const std::string& id, const std::string& config_digest);
  // Throws SnapshotNotFound.
  SnapshotMeta read_meta(const std::string& id) const;

  void write_sites(const std::string& id, std::span<const SiteRecord> sites);
  // Throws MissingPrerequisite("ingest") when no site list was stored.
  std::vector<SiteRecord> read_sites(const std::string& id) const;

  // Appends one line and flushes, so an interrupted run keeps finished sites.
  void append_probe(const std::string& id, const ProbeResult& result);
  // Rewrites the file with results sorted by site order.
  void write_probes(const std::string& id, std::span<const ProbeResult> results);
  // Empty when nothing was probed yet. A truncated final line (interrupted
  // append) is ignored.
  std::vector<ProbeResult> read_probes(const std::string& id) const;

  bool has_reports(const std::string& id) const;
  void write_reports(const std::string& id, std::span<const SiteDependencyReport> reports);
  // Throws MissingPrerequisite("classify").
  std::vector<SiteDependencyReport> read_reports(const std::string& id) const;

  void write_host_facts(const std::string& id, const std::map<std::string, HostFacts>& facts);
  std::map<std::string, HostFacts> read_host_facts(const std::string& id) const;

  Snapshot load(const std::string& id) const;

 private:
  void require(const std::string& id) const;
  void write_file(const std::filesystem::path& path, const std::string& content);

  std::filesystem::path root_;
  std::mutex mu_;
};

// Snapshot ids are [A-Za-z0-9._-]+ and not "." or "..". Throws Usage.
void validate_snapshot_id(const std::string& id);

}  // namespace webdep
