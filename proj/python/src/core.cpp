// Python bindings: the CLI stages plus a few pure helpers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "webdep/config.hpp"
#include "webdep/dns_name.hpp"
#include "webdep/error.hpp"
#include "webdep/export.hpp"
#include "webdep/foundation.hpp"
#include "webdep/pipeline.hpp"
#include "webdep/store.hpp"
#include "webdep/trends.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace webdep;

namespace {

RunConfig config_from(const std::optional<fs::path>& path) {
  return path ? load_config(*path) : default_config();
}

py::dict ingest(const std::string& snapshot, const std::vector<fs::path>& lists,
                const std::optional<fs::path>& config, const std::string& format) {
  RunConfig cfg = config_from(config);
  validate_snapshot_id(snapshot);
  IngestResult result;
  {
    py::gil_scoped_release release;
    result = ingest_site_lists(lists, parse_list_format(format));
    SnapshotStore store(cfg.store);
    store.create(snapshot, cfg.digest());
    store.write_sites(snapshot, result.records);
  }
  py::dict out;
  out["snapshot"] = snapshot;
  out["records"] = result.records.size();
  out["unique_domains"] = result.unique_domains;
  out["per_country"] = result.per_country;
  return out;
}

py::dict probe(const std::string& snapshot, const std::optional<fs::path>& config,
               std::optional<std::size_t> parallelism, bool offline,
               const std::optional<fs::path>& har_dir, const std::optional<std::string>& resolver) {
  RunConfig cfg = config_from(config);
  if (parallelism) cfg.parallelism = *parallelism;
  if (offline) cfg.offline = true;
  if (har_dir) cfg.har_dir = *har_dir;
  if (resolver) cfg.resolver = *resolver;
  cfg.validate();
  ProbeRunSummary s;
  {
    py::gil_scoped_release release;
    auto data = load_data_files(cfg);
    SnapshotStore store(cfg.store);
    const Prober prober(make_probe_config(cfg), data);
    s = run_probe(
        store, snapshot, cfg.parallelism, cfg.offline,
        [&prober](const SiteRecord& site) { return prober.probe_site(site); },
        cfg.offline ? HostFactsFunction{} : live_host_facts(prober), *data);
  }
  py::dict out;
  out["snapshot"] = snapshot;
  out["sites"] = s.sites;
  out["already_done"] = s.already_done;
  out["probed"] = s.probed;
  out["total_failures"] = s.total_failures;
  out["host_facts"] = s.host_facts;
  return out;
}

std::size_t classify(const std::string& snapshot, const std::optional<fs::path>& config,
                     std::optional<std::uint64_t> threshold) {
  RunConfig cfg = config_from(config);
  if (threshold) cfg.concentration_threshold = *threshold;
  cfg.validate();
  py::gil_scoped_release release;
  auto data = load_data_files(cfg);
  SnapshotStore store(cfg.store);
  return run_classify(store, snapshot, *data, ClassifyOptions{cfg.concentration_threshold}).size();
}

std::string report(const std::string& snapshot, const std::string& what,
                   const std::optional<fs::path>& config, const std::string& format,
                   std::size_t top_k, const std::string& dependency) {
  const RunConfig cfg = config_from(config);
  cfg.validate();
  ExportOptions eo;
  eo.top_k = top_k;
  eo.dependency = parse_dependency_variable(dependency);
  const ExportKind kind = parse_export_kind(what);
  const ExportFormat fmt = parse_export_format(format);
  py::gil_scoped_release release;
  auto data = load_data_files(cfg);
  const SnapshotStore store(cfg.store);
  return export_report(store, snapshot, kind, fmt, cfg, *data, eo);
}

std::vector<std::string> snapshots(const std::optional<fs::path>& config) {
  return SnapshotStore(config_from(config).store).list();
}

py::dict five_numbers(const std::vector<double>& values) {
  const FiveNumberSummary s = five_number_summary(values);
  py::dict out;
  out["min"] = s.min;
  out["q1"] = s.q1;
  out["median"] = s.median;
  out["q3"] = s.q3;
  out["max"] = s.max;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Third-party DNS, CA and CDN dependency measurement";

  // Released on purpose: the type must outlive module teardown.
  static const py::handle error =
      py::exception<Error>(m, "WebdepError", PyExc_RuntimeError).release();
  // args == (code, message); `code` is the CLI's error token.
  error.attr("code") = py::module_::import("builtins").attr("property")(
      py::cpp_function([](py::object self) { return self.attr("args")[py::int_(0)]; }));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::tuple args =
          py::make_tuple(std::string(error_code_name(e.code())), std::string(e.what()));
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  m.def("ingest", &ingest, py::arg("snapshot"), py::arg("lists"), py::arg("config") = py::none(),
        py::arg("format") = "auto", "Load ranked site lists into a snapshot.");
  m.def("probe", &probe, py::arg("snapshot"), py::arg("config") = py::none(),
        py::arg("parallelism") = py::none(), py::arg("offline") = false,
        py::arg("har_dir") = py::none(), py::arg("resolver") = py::none(),
        "Probe every site of the snapshot not probed yet.");
  m.def("classify", &classify, py::arg("snapshot"), py::arg("config") = py::none(),
        py::arg("concentration_threshold") = py::none(),
        "Classify the probed snapshot; returns the number of site reports.");
  m.def("report", &report, py::arg("snapshot"), py::arg("what"), py::arg("config") = py::none(),
        py::arg("format") = "csv", py::arg("top_k") = 3, py::arg("dependency") = "mean",
        "Render one export (site-reports, country-aggregates, centralization, indirect, "
        "overlap, correlations, group-summaries) as CSV or JSON text.");
  m.def("snapshots", &snapshots, py::arg("config") = py::none());
  m.def("default_data_dir", &default_data_dir);
  m.def("config_digest",
        [](const std::optional<fs::path>& config) { return config_from(config).digest(); },
        py::arg("config") = py::none());

  m.def("normalize_dns_name", [](const std::string& name) { return normalize_dns_name(name); });

  py::class_<PublicSuffixList>(m, "PublicSuffixList")
      .def_static("load", &PublicSuffixList::load, py::arg("path"))
      .def_static("parse", [](const std::string& text) { return PublicSuffixList::parse(text); })
      .def_static("shipped", [] { return PublicSuffixList::load(default_config().psl); })
      .def(
          "registrable_domain",
          [](const PublicSuffixList& psl, const std::string& host) {
            return psl.registrable_domain(host).value();
          },
          py::arg("host"))
      .def(
          "public_suffix",
          [](const PublicSuffixList& psl, const std::string& host) {
            return psl.public_suffix(host);
          },
          py::arg("host"))
      .def("__len__", &PublicSuffixList::rule_count);

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(x, y);
  });
  m.def("strength_label", &strength_label, py::arg("r"));
  m.def("five_number_summary", &five_numbers, py::arg("values"));
  m.def("overlap_fraction",
        [](const std::vector<std::string>& regional, const std::vector<std::string>& global) {
          return overlap_fraction(make_ranked_list("regional", regional),
                                  make_ranked_list("global", global));
        });
}
