// webdep command line: ingest -> probe -> classify -> report / trends.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "webdep/config.hpp"
#include "webdep/error.hpp"
#include "webdep/export.hpp"
#include "webdep/pipeline.hpp"
#include "webdep/store.hpp"

namespace {

using namespace webdep;

struct CommonOptions {
  std::string config;
  std::string snapshot;
  std::string out = "-";
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "key = value configuration file");
  cmd->add_option("--snapshot", opts.snapshot, "snapshot id")->required();
  cmd->add_option("--out", opts.out, "output file, '-' for stdout");
}

RunConfig load_run_config(const CommonOptions& opts) {
  return opts.config.empty() ? default_config() : load_config(opts.config);
}

void write_output(const std::string& out, const std::string& text) {
  if (out == "-" || out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const std::filesystem::path path(out);
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file << text;
  if (!file) throw Error(ErrorCode::kStoreWriteFailed, "cannot write " + out);
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int fail(ErrorCode code, const std::string& message) {
  std::fprintf(stderr, "error: %s: %s\n", std::string(error_code_name(code)).c_str(),
               one_line(message).c_str());
  return exit_code_for(code);
}

}  // namespace

int main(int argc, char** argv) {
  // Peers that close mid-write surface as I/O errors, not as a fatal signal.
  std::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"Third-party DNS, CA and CDN dependency measurement"};
  app.require_subcommand(1);

  // ingest
  CommonOptions ingest_opts;
  std::vector<std::string> list_paths;
  std::string list_format = "auto";
  auto* ingest = app.add_subcommand("ingest", "Load ranked site lists into a snapshot");
  add_common(ingest, ingest_opts);
  ingest->add_option("--format", list_format, "auto, csv or plain")
      ->check(CLI::IsMember({"auto", "csv", "plain"}));
  ingest->add_option("lists", list_paths, "site list files")->required();

  // probe
  CommonOptions probe_opts;
  std::optional<std::size_t> parallelism;
  bool offline_flag = false;
  std::string har_dir;
  std::string resolver;
  auto* probe = app.add_subcommand("probe", "Collect DNS, TLS and resource facts");
  add_common(probe, probe_opts);
  probe->add_option("--parallelism", parallelism, "concurrent site probes")
      ->check(CLI::PositiveNumber);
  probe->add_flag("--offline", offline_flag, "use cached results only");
  probe->add_option("--har-dir", har_dir, "directory of <domain>.har files");
  probe->add_option("--resolver", resolver, "recursive resolver ip[:port]");

  // classify
  CommonOptions classify_opts;
  std::optional<std::uint64_t> threshold;
  auto* classify = app.add_subcommand("classify", "Classify services as private or third-party");
  add_common(classify, classify_opts);
  classify->add_option("--concentration-threshold", threshold,
                       "promote unknown nameservers above this many sites");

  // report
  CommonOptions report_opts;
  std::string report_what;
  std::string report_format = "csv";
  std::size_t top_k = 3;
  auto* report = app.add_subcommand("report", "Export reports and statistics");
  add_common(report, report_opts);
  report->add_option("--what", report_what, "export kind")
      ->required()
      ->check(CLI::IsMember({"site-reports", "country-aggregates", "centralization", "indirect",
                             "overlap", "correlations", "group-summaries"}));
  report->add_option("--format", report_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--top-k", top_k, "providers in the centralization table")
      ->check(CLI::PositiveNumber);

  // trends
  CommonOptions trends_opts;
  std::string trends_what;
  std::string trends_format = "csv";
  std::string dependency = "mean";
  std::string indicators;
  std::string groupings;
  std::string global_list;
  auto* trends = app.add_subcommand("trends", "Overlap, correlation and grouping analyses");
  add_common(trends, trends_opts);
  trends->add_option("--what", trends_what, "overlap, correlations or group-summaries")
      ->required()
      ->check(CLI::IsMember({"overlap", "correlations", "group-summaries"}));
  trends->add_option("--format", trends_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  trends->add_option("--dependency", dependency, "mean, DNS, CA or CDN (group summaries)");
  trends->add_option("--indicators", indicators, "indicator CSV");
  trends->add_option("--groupings", groupings, "grouping CSV");
  trends->add_option("--global-list", global_list, "global ranking, one domain per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::kUsage, e.what());
  }

  try {
    if (*ingest) {
      RunConfig cfg = load_run_config(ingest_opts);
      validate_snapshot_id(ingest_opts.snapshot);
      std::vector<std::filesystem::path> paths(list_paths.begin(), list_paths.end());
      const IngestResult result = ingest_site_lists(paths, parse_list_format(list_format));
      SnapshotStore store(cfg.store);
      store.create(ingest_opts.snapshot, cfg.digest());
      store.write_sites(ingest_opts.snapshot, result.records);
      nlohmann::ordered_json summary{{"snapshot", ingest_opts.snapshot},
                                     {"records", result.records.size()},
                                     {"unique_domains", result.unique_domains},
                                     {"per_country", result.per_country}};
      write_output(ingest_opts.out, summary.dump(2) + "\n");
      return 0;
    }

    if (*probe) {
      RunConfig cfg = load_run_config(probe_opts);
      if (parallelism) cfg.parallelism = *parallelism;
      if (offline_flag) cfg.offline = true;
      if (!har_dir.empty()) cfg.har_dir = har_dir;
      if (!resolver.empty()) cfg.resolver = resolver;
      cfg.validate();
      auto data = load_data_files(cfg);
      SnapshotStore store(cfg.store);
      const Prober prober(make_probe_config(cfg), data);
      const ProbeRunSummary s = run_probe(
          store, probe_opts.snapshot, cfg.parallelism, cfg.offline,
          [&prober](const SiteRecord& site) { return prober.probe_site(site); },
          cfg.offline ? HostFactsFunction{} : live_host_facts(prober), *data);
      nlohmann::ordered_json summary{{"snapshot", probe_opts.snapshot},
                                     {"sites", s.sites},
                                     {"already_done", s.already_done},
                                     {"probed", s.probed},
                                     {"total_failures", s.total_failures},
                                     {"host_facts", s.host_facts}};
      write_output(probe_opts.out, summary.dump(2) + "\n");
      if (s.probed > 0 && s.total_failures == s.probed) {
        return fail(ErrorCode::kNetworkTotalFailure,
                    "every probed site failed all stages; results kept in the snapshot");
      }
      return 0;
    }

    if (*classify) {
      RunConfig cfg = load_run_config(classify_opts);
      if (threshold) cfg.concentration_threshold = *threshold;
      cfg.validate();
      auto data = load_data_files(cfg);
      SnapshotStore store(cfg.store);
      const auto reports = run_classify(store, classify_opts.snapshot, *data,
                                        ClassifyOptions{cfg.concentration_threshold});
      nlohmann::ordered_json summary{{"snapshot", classify_opts.snapshot},
                                     {"reports", reports.size()},
                                     {"concentration_threshold", cfg.concentration_threshold}};
      write_output(classify_opts.out, summary.dump(2) + "\n");
      return 0;
    }

    if (*report) {
      RunConfig cfg = load_run_config(report_opts);
      cfg.validate();
      auto data = load_data_files(cfg);
      SnapshotStore store(cfg.store);
      ExportOptions eo;
      eo.top_k = top_k;
      write_output(report_opts.out,
                   export_report(store, report_opts.snapshot, parse_export_kind(report_what),
                                 parse_export_format(report_format), cfg, *data, eo));
      return 0;
    }

    if (*trends) {
      RunConfig cfg = load_run_config(trends_opts);
      if (!indicators.empty()) cfg.indicators = indicators;
      if (!groupings.empty()) cfg.groupings = groupings;
      if (!global_list.empty()) cfg.global_list = global_list;
      cfg.validate();
      auto data = load_data_files(cfg);
      SnapshotStore store(cfg.store);
      ExportOptions eo;
      eo.dependency = parse_dependency_variable(dependency);
      write_output(trends_opts.out,
                   export_report(store, trends_opts.snapshot, parse_export_kind(trends_what),
                                 parse_export_format(trends_format), cfg, *data, eo));
      return 0;
    }
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::kStoreWriteFailed, std::string("unexpected: ") + e.what());
  }
  return fail(ErrorCode::kUsage, "no subcommand");
}
