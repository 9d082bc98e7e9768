#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "webdep/classify.hpp"
#include "webdep/config.hpp"
#include "webdep/metrics.hpp"
#include "webdep/probe.hpp"
#include "webdep/store.hpp"

namespace webdep {

// --- Ingest ------------------------------------------------------------------

enum class ListFormat { kAuto, kCsv, kPlain };
ListFormat parse_list_format(std::string_view text);

struct IngestResult {
  std::vector<SiteRecord> records;  // site order
  std::size_t unique_domains = 0;
  std::map<std::string, std::size_t> per_country;
};

// CSV rows are `rank,domain,country` (optional header). Plain files hold one
// domain per line, ranked by line order, with the country taken from the
// file name ("us.txt", "US_top500.txt"). kAuto picks CSV for ".csv" files.
// Repeated (country, domain) pairs keep the first occurrence.
// Throws MalformedRow or DuplicateRank.
IngestResult ingest_site_lists(std::span<const std::filesystem::path> paths, ListFormat format);
IngestResult ingest_csv_text(std::string_view text, std::string_view source);

// --- Probe -------------------------------------------------------------------

using ProbeFunction = std::function<ProbeResult(const SiteRecord&)>;
using HostFactsFunction = std::function<HostFacts(const std::string&)>;

struct ProbeRunSummary {
  std::size_t sites = 0;
  std::size_t already_done = 0;
  std::size_t probed = 0;
  std::size_t total_failures = 0;  // newly probed sites where every stage failed
  std::size_t host_facts = 0;      // hosts cached for the indirect analysis
};

// True when the DNS, TLS and resource stages all failed.
bool is_total_failure(const ProbeResult& result);

// Probes every site of the snapshot that has no stored result yet, using at
// most `parallelism` workers. Each result is appended as soon as it is ready;
// at the end the file is rewritten in site order. When `host_facts` is set,
// facts for every CDN CNAME, CA host and CA CNAME-chain name not yet cached
// are gathered afterwards. In offline mode nothing is probed and the snapshot
// must already hold probe results.
ProbeRunSummary run_probe(SnapshotStore& store, const std::string& id, std::size_t parallelism,
                          bool offline, const ProbeFunction& probe,
                          const HostFactsFunction& host_facts, const DataFiles& data);

// Live HostFacts lookup through the prober's resolver.
HostFactsFunction live_host_facts(const Prober& prober);

// Hosts the indirect analysis needs facts for and `known` lacks: every CNAME
// that maps to a CDN, every CA host, and the CNAME-chain names of CA hosts
// already in `known`.
std::vector<std::string> indirect_hosts(std::span<const ProbeResult> probes,
                                        const std::map<std::string, HostFacts>& known,
                                        const DataFiles& data);

// --- Classify ----------------------------------------------------------------

// Concentration over the whole snapshot, then every site. Deterministic.
std::vector<SiteDependencyReport> classify_corpus(std::span<const ProbeResult> probes,
                                                  const DataFiles& data,
                                                  const ClassifyOptions& options);

// Throws SnapshotNotFound, MissingPrerequisite("probe").
std::vector<SiteDependencyReport> run_classify(SnapshotStore& store, const std::string& id,
                                               const DataFiles& data,
                                               const ClassifyOptions& options);

// --- Indirect ----------------------------------------------------------------

// Fact source backed by cached HostFacts. Unknown hosts throw
// ProbeUnavailable.
class CachedFactSource : public IndirectFactSource {
 public:
  explicit CachedFactSource(std::map<std::string, HostFacts> facts) : facts_(std::move(facts)) {}

  std::optional<DnsFacts> nameservers(const std::string& host) override;
  std::optional<CnameChain> cname_chain(const std::string& host) override;
  std::optional<RegistrableDomain> soa(const std::string& host) override;

 private:
  const HostFacts& at(const std::string& host) const;

  std::map<std::string, HostFacts> facts_;
};

// Reports grouped by country code, each group in site order.
std::map<std::string, std::vector<SiteDependencyReport>> by_country(
    std::span<const SiteDependencyReport> reports);

}  // namespace webdep
