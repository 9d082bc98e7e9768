#include "webdep/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <mutex>
#include <set>
#include <thread>

#include "webdep/dns_name.hpp"
#include "webdep/error.hpp"
#include "webdep/text.hpp"

namespace webdep {
namespace {

[[noreturn]] void malformed(std::string_view source, std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::kMalformedRow,
              std::string(source) + ":" + std::to_string(line_no) + ": " + why);
}

int parse_rank(std::string_view text, std::string_view source, std::size_t line_no) {
  int rank = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), rank);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    malformed(source, line_no, "rank '" + std::string(text) + "' is not an integer");
  }
  if (rank < 1) malformed(source, line_no, "rank must be >= 1, got " + std::to_string(rank));
  return rank;
}

std::string parse_country(std::string_view text, std::string_view source, std::size_t line_no) {
  std::string code(text);
  for (auto& c : code) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (code.size() != 2 || !std::isalpha(static_cast<unsigned char>(code[0])) ||
      !std::isalpha(static_cast<unsigned char>(code[1]))) {
    malformed(source, line_no, "bad country code '" + std::string(text) + "'");
  }
  return code;
}

std::string parse_domain(std::string_view text, std::string_view source, std::size_t line_no) {
  if (!is_valid_dns_name(text) || split_labels(fold_dns_name(text)).size() < 2) {
    malformed(source, line_no, "invalid domain '" + std::string(text) + "'");
  }
  return normalize_dns_name(text);
}

std::string country_from_filename(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();
  const std::size_t end = stem.find_first_of("_-. ");
  return parse_country(stem.substr(0, end), path.string(), 0);
}

// Adds rows while enforcing per-(country, domain) dedup and (country, rank)
// uniqueness.
class RecordSet {
 public:
  void add(SiteRecord rec, std::string_view source, std::size_t line_no) {
    if (!domains_.insert({rec.country, rec.domain}).second) return;
    if (!ranks_.insert({rec.country, rec.rank}).second) {
      throw Error(ErrorCode::kDuplicateRank, std::string(source) + ":" + std::to_string(line_no) +
                                                 ": rank " + std::to_string(rec.rank) +
                                                 " already used in " + rec.country);
    }
    records_.push_back(std::move(rec));
  }

  IngestResult finish() && {
    IngestResult out;
    std::sort(records_.begin(), records_.end(), site_order);
    std::set<std::string> unique;
    for (const auto& r : records_) {
      unique.insert(r.domain);
      ++out.per_country[r.country];
    }
    out.unique_domains = unique.size();
    out.records = std::move(records_);
    return out;
  }

 private:
  std::vector<SiteRecord> records_;
  std::set<std::pair<std::string, std::string>> domains_;
  std::set<std::pair<std::string, int>> ranks_;
};

void add_csv(RecordSet& set, std::string_view text, std::string_view source) {
  bool first = true;
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto fields = split(line, ',');
    if (fields.size() != 3) malformed(source, line_no, "expected rank,domain,country");
    if (first) {
      first = false;
      if (ascii_lower(trim(fields[0])) == "rank") return;
    }
    SiteRecord rec;
    rec.rank = parse_rank(trim(fields[0]), source, line_no);
    rec.domain = parse_domain(trim(fields[1]), source, line_no);
    rec.country = parse_country(trim(fields[2]), source, line_no);
    set.add(std::move(rec), source, line_no);
  });
}

void add_plain(RecordSet& set, std::string_view text, const std::filesystem::path& path) {
  const std::string country = country_from_filename(path);
  const std::string source = path.string();
  int rank = 0;
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    SiteRecord rec;
    rec.rank = ++rank;
    rec.domain = parse_domain(line, source, line_no);
    rec.country = country;
    set.add(std::move(rec), source, line_no);
  });
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::pair<std::string, std::string> site_key(const SiteRecord& s) { return {s.country, s.domain}; }

}  // namespace

ListFormat parse_list_format(std::string_view text) {
  if (text == "auto") return ListFormat::kAuto;
  if (text == "csv") return ListFormat::kCsv;
  if (text == "plain") return ListFormat::kPlain;
  throw Error(ErrorCode::kUsage, "unknown list format '" + std::string(text) + "'");
}

IngestResult ingest_csv_text(std::string_view text, std::string_view source) {
  RecordSet set;
  add_csv(set, text, source);
  return std::move(set).finish();
}

IngestResult ingest_site_lists(std::span<const std::filesystem::path> paths, ListFormat format) {
  RecordSet set;
  for (const auto& path : paths) {
    const std::string text = read_text_file(path);
    const bool csv = format == ListFormat::kCsv ||
                     (format == ListFormat::kAuto && ascii_lower(path.extension().string()) == ".csv");
    if (csv) {
      add_csv(set, text, path.string());
    } else {
      add_plain(set, text, path);
    }
  }
  return std::move(set).finish();
}

bool is_total_failure(const ProbeResult& result) {
  std::set<std::string> failed;
  for (const auto& e : result.errors) failed.insert(e.stage);
  return failed.count("dns") && failed.count("tls") && failed.count("resources");
}

std::vector<std::string> indirect_hosts(std::span<const ProbeResult> probes,
                                        const std::map<std::string, HostFacts>& known,
                                        const DataFiles& data) {
  std::set<std::string> hosts;
  for (const auto& p : probes) {
    for (const auto& [_, chain] : p.cnames) {
      for (const auto& name : chain.chain) {
        if (data.cdn_map.lookup(name)) hosts.insert(name);
      }
    }
    if (p.tls.ca_url) {
      hosts.insert(*p.tls.ca_url);
      if (auto it = known.find(*p.tls.ca_url); it != known.end() && it->second.chain) {
        hosts.insert(it->second.chain->chain.begin(), it->second.chain->chain.end());
      }
    }
  }
  std::vector<std::string> out;
  for (const auto& h : hosts) {
    if (!known.count(h)) out.push_back(h);
  }
  return out;
}

HostFactsFunction live_host_facts(const Prober& prober) {
  return [&prober](const std::string& host) {
    HostFacts f;
    f.host = host;
    try {
      f.dns = probe_dns(host, prober.resolver(), prober.data().psl);
    } catch (const Error&) {
    }
    try {
      f.chain = resolve_cname_chain(host, prober.resolver(), prober.config().cname_depth);
    } catch (const Error&) {
    }
    try {
      f.soa = soa_authority(host, prober.resolver(), prober.data().psl);
    } catch (const Error&) {
    }
    return f;
  };
}

ProbeRunSummary run_probe(SnapshotStore& store, const std::string& id, std::size_t parallelism,
                          bool offline, const ProbeFunction& probe,
                          const HostFactsFunction& host_facts, const DataFiles& data) {
  if (parallelism < 1) throw Error(ErrorCode::kConfigError, "parallelism must be at least 1");
  if (offline) {
    if (!store.exists(id) || store.read_probes(id).empty()) {
      throw Error(ErrorCode::kSnapshotNotFound,
                  "offline mode needs an existing snapshot with probe results ('" + id + "')");
    }
  }
  const auto sites = store.read_sites(id);
  ProbeRunSummary summary;
  summary.sites = sites.size();

  std::map<std::pair<std::string, std::string>, ProbeResult> done;
  for (auto& r : store.read_probes(id)) done[site_key(r.site)] = std::move(r);

  std::vector<SiteRecord> pending;
  for (const auto& s : sites) {
    if (done.count(site_key(s))) {
      ++summary.already_done;
    } else {
      pending.push_back(s);
    }
  }
  if (offline) return summary;

  std::mutex mu;
  parallel_for(pending.size(), parallelism, [&](std::size_t i) {
    ProbeResult r;
    try {
      r = probe(pending[i]);
    } catch (const std::exception& e) {
      r = ProbeResult{};
      r.site = pending[i];
      r.probe_time = utc_timestamp_now();
      for (const char* stage : {"dns", "tls", "resources"}) r.errors.push_back({stage, e.what()});
    }
    r.site = pending[i];
    store.append_probe(id, r);
    std::lock_guard lock(mu);
    if (is_total_failure(r)) ++summary.total_failures;
    ++summary.probed;
    done[site_key(r.site)] = std::move(r);
  });

  std::vector<ProbeResult> all;
  for (auto& [_, r] : done) all.push_back(std::move(r));
  store.write_probes(id, all);

  if (host_facts) {
    auto known = store.read_host_facts(id);
    // Two rounds: CA chains become known only after the CA hosts are fetched.
    for (int round = 0; round < 2; ++round) {
      const auto hosts = indirect_hosts(all, known, data);
      if (hosts.empty()) break;
      std::vector<HostFacts> fetched(hosts.size());
      parallel_for(hosts.size(), parallelism, [&](std::size_t i) { fetched[i] = host_facts(hosts[i]); });
      for (std::size_t i = 0; i < hosts.size(); ++i) {
        fetched[i].host = hosts[i];
        known[hosts[i]] = std::move(fetched[i]);
      }
      store.write_host_facts(id, known);
    }
    summary.host_facts = known.size();
  }
  return summary;
}

std::vector<SiteDependencyReport> classify_corpus(std::span<const ProbeResult> probes,
                                                  const DataFiles& data,
                                                  const ClassifyOptions& options) {
  const ConcentrationMap concentration = compute_concentration(probes, data.psl);
  std::vector<SiteDependencyReport> reports;
  reports.reserve(probes.size());
  for (const auto& p : probes) reports.push_back(classify_site(p, data, concentration, options));
  std::sort(reports.begin(), reports.end(),
            [](const auto& a, const auto& b) { return site_order(a.site, b.site); });
  return reports;
}

std::vector<SiteDependencyReport> run_classify(SnapshotStore& store, const std::string& id,
                                               const DataFiles& data,
                                               const ClassifyOptions& options) {
  const auto probes = store.read_probes(id);
  if (probes.empty()) {
    throw Error(ErrorCode::kMissingPrerequisite, "probe: snapshot '" + id + "' has no probe results");
  }
  auto reports = classify_corpus(probes, data, options);
  store.write_reports(id, reports);
  return reports;
}

const HostFacts& CachedFactSource::at(const std::string& host) const {
  auto it = facts_.find(host);
  if (it == facts_.end()) {
    throw Error(ErrorCode::kProbeUnavailable, "no cached facts for " + host);
  }
  return it->second;
}

std::optional<DnsFacts> CachedFactSource::nameservers(const std::string& host) {
  return at(host).dns;
}

std::optional<CnameChain> CachedFactSource::cname_chain(const std::string& host) {
  return at(host).chain;
}

std::optional<RegistrableDomain> CachedFactSource::soa(const std::string& host) {
  return at(host).soa;
}

std::map<std::string, std::vector<SiteDependencyReport>> by_country(
    std::span<const SiteDependencyReport> reports) {
  std::map<std::string, std::vector<SiteDependencyReport>> out;
  for (const auto& r : reports) out[r.site.country].push_back(r);
  for (auto& [_, rs] : out) {
    std::sort(rs.begin(), rs.end(),
              [](const auto& a, const auto& b) { return site_order(a.site, b.site); });
  }
  return out;
}

}  // namespace webdep
