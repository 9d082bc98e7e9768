#include "webdep/export.hpp"

#include <cstdio>
#include <map>
#include <set>

#include "json.hpp"
#include "webdep/error.hpp"
#include "webdep/pipeline.hpp"

namespace webdep {
namespace {

constexpr ExportKind kExportKinds[] = {
    ExportKind::kSiteReports, ExportKind::kCountryAggregates, ExportKind::kCentralization,
    ExportKind::kIndirect,    ExportKind::kOverlap,           ExportKind::kCorrelations,
    ExportKind::kGroupSummaries};

constexpr ServiceKind kKinds[] = {ServiceKind::kDns, ServiceKind::kCa, ServiceKind::kCdn};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const { return csv_field(s); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const Decimal& d) const { return d.text; }
  };
  return std::visit(Visitor{}, cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(bool v) const { return v; }
    nlohmann::ordered_json operator()(const Decimal& d) const {
      return nlohmann::ordered_json::parse(d.text);
    }
  };
  return std::visit(Visitor{}, cell);
}

Cell int_cell(std::uint64_t v) { return static_cast<std::int64_t>(v); }

Cell fixed_cell(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string text = buf;
  if (text.starts_with('-') && text.find_first_not_of("0.", 1) == std::string::npos) {
    text.erase(0, 1);
  }
  return Decimal{text};
}

}  // namespace

std::string_view to_string(ExportKind kind) {
  switch (kind) {
    case ExportKind::kSiteReports: return "site-reports";
    case ExportKind::kCountryAggregates: return "country-aggregates";
    case ExportKind::kCentralization: return "centralization";
    case ExportKind::kIndirect: return "indirect";
    case ExportKind::kOverlap: return "overlap";
    case ExportKind::kCorrelations: return "correlations";
    case ExportKind::kGroupSummaries: return "group-summaries";
  }
  return "?";
}

ExportKind parse_export_kind(std::string_view text) {
  for (ExportKind k : kExportKinds) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::kUsage, "unknown export '" + std::string(text) + "'");
}

ExportFormat parse_export_format(std::string_view text) {
  if (text == "csv") return ExportFormat::kCsv;
  if (text == "json") return ExportFormat::kJson;
  throw Error(ErrorCode::kUsage, "unknown format '" + std::string(text) + "'");
}

Cell percent_cell(const Rate& rate) {
  if (rate.denominator == 0) return std::monostate{};
  const std::uint64_t tenths = (rate.numerator * 2000 + rate.denominator) / (2 * rate.denominator);
  return Decimal{std::to_string(tenths / 10) + "." + std::to_string(tenths % 10)};
}

Cell percent_cell(double fraction) { return fixed_cell(fraction * 100.0, 1); }

std::string render(const Table& table, ExportFormat format) {
  if (format == ExportFormat::kCsv) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      out += (i ? "," : "") + csv_field(table.columns[i]);
    }
    out += "\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_text(row[i]);
      out += "\n";
    }
    return out;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = cell_json(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

Table site_reports_table(std::span<const SiteDependencyReport> reports) {
  Table t;
  t.columns = {"country", "rank",    "domain",     "kind",           "service_host", "provider",
               "cdn_name", "verdict", "rule_fired", "https_supported", "ocsp_stapled"};
  for (const auto& r : reports) {
    auto row_for = [&](const ServiceClassification* sc) {
      std::vector<Cell> row{r.site.country, static_cast<std::int64_t>(r.site.rank), r.site.domain};
      if (sc) {
        row.push_back(std::string(to_string(sc->kind)));
        row.push_back(sc->service_host.empty() ? Cell{} : Cell{sc->service_host});
        row.push_back(sc->provider ? Cell{sc->provider->value()} : Cell{});
        row.push_back(sc->cdn_name ? Cell{*sc->cdn_name} : Cell{});
        row.push_back(std::string(to_string(sc->verdict)));
        row.push_back(std::string(to_string(sc->rule_fired)));
      } else {
        row.insert(row.end(), 6, Cell{});
      }
      row.push_back(r.https_supported);
      row.push_back(r.ocsp_stapled);
      t.rows.push_back(std::move(row));
    };
    const std::size_t before = t.rows.size();
    for (const auto& sc : r.dns) row_for(&sc);
    if (r.ca) row_for(&*r.ca);
    for (const auto& sc : r.cdns) row_for(&sc);
    if (t.rows.size() == before) row_for(nullptr);
  }
  return t;
}

Table country_aggregates_table(std::span<const CountryAggregate> aggregates) {
  Table t;
  t.columns = {"country",
               "n_sites",
               "dns_third_party_pct",
               "dns_critical_pct",
               "dns_unknown_pct",
               "dns_redundant_pct",
               "dns_multi_third_pct",
               "dns_mixed_pct",
               "ca_third_party_pct",
               "ca_critical_pct",
               "ca_unknown_pct",
               "https_pct",
               "ocsp_pct",
               "cdn_third_party_pct",
               "cdn_critical_pct",
               "cdn_unknown_pct",
               "cdn_redundant_pct",
               "cdn_multi_third_pct",
               "cdn_mixed_pct",
               "mean_third_party_pct"};
  for (const auto& a : aggregates) {
    t.rows.push_back({a.country,
                      int_cell(a.n_sites),
                      percent_cell(a.dns.third_party),
                      percent_cell(a.dns.critical),
                      percent_cell(a.dns.unknown),
                      percent_cell(a.dns_redundancy.redundant),
                      percent_cell(a.dns_redundancy.multi_third),
                      percent_cell(a.dns_redundancy.mixed),
                      percent_cell(a.ca.third_party),
                      percent_cell(a.ca.critical),
                      percent_cell(a.ca.unknown),
                      percent_cell(a.https),
                      percent_cell(a.ocsp),
                      percent_cell(a.cdn.third_party),
                      percent_cell(a.cdn.critical),
                      percent_cell(a.cdn.unknown),
                      percent_cell(a.cdn_redundancy.redundant),
                      percent_cell(a.cdn_redundancy.multi_third),
                      percent_cell(a.cdn_redundancy.mixed),
                      percent_cell(a.mean_third_party())});
  }
  return t;
}

Table centralization_table(std::span<const SiteDependencyReport> reports, std::size_t k,
                           const ProviderAliases& aliases) {
  if (k == 0) throw Error(ErrorCode::kUsage, "k must be at least 1");
  Table t;
  t.columns = {"country", "kind", "coverage_pct"};
  for (std::size_t i = 1; i <= k; ++i) t.columns.push_back("provider_" + std::to_string(i));
  for (const auto& [country, rs] : by_country(reports)) {
    for (ServiceKind kind : kKinds) {
      std::vector<Cell> row{country, std::string(to_string(kind))};
      std::vector<ProviderCount> top;
      if (rank_providers(rs, kind).empty()) {
        row.push_back(std::monostate{});
      } else {
        const TopKCoverage cov = top_k_coverage(rs, kind, k);
        row.push_back(percent_cell(cov.coverage));
        top = cov.providers;
      }
      for (std::size_t i = 0; i < k; ++i) {
        if (i >= top.size()) {
          row.push_back(std::monostate{});
        } else if (kind == ServiceKind::kCdn) {
          row.push_back(top[i].provider);
        } else {
          row.push_back(aliases.display_name(ProviderId(top[i].provider)));
        }
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table indirect_table(std::span<const IndirectDependencyReport> reports) {
  Table t;
  t.columns = {"country", "n_sites"};
  for (const char* edge : {"cdn_to_dns", "ca_to_dns", "ca_to_cdn"}) {
    t.columns.push_back(std::string(edge) + "_providers");
    t.columns.push_back(std::string(edge) + "_third_party_pct");
    t.columns.push_back(std::string(edge) + "_newly_dependent");
  }
  for (const auto& r : reports) {
    std::vector<Cell> row{r.country, int_cell(r.n_sites)};
    for (const IndirectEdge* e : {&r.cdn_to_dns, &r.ca_to_dns, &r.ca_to_cdn}) {
      row.push_back(int_cell(e->n_providers));
      row.push_back(percent_cell(e->third_party_fraction));
      row.push_back(int_cell(e->newly_dependent_sites));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table overlap_table(std::span<const OverlapRow> rows, std::span<const std::string> subset_labels) {
  Table t;
  t.columns = {"country", "n_sites"};
  for (const auto& label : subset_labels) t.columns.push_back("overlap_pct_" + label);
  t.columns.push_back("overlap_class");
  for (const auto& r : rows) {
    std::vector<Cell> row{r.country, int_cell(r.n_sites)};
    for (double v : r.overlaps) row.push_back(percent_cell(v));
    row.push_back(r.overlap_class ? Cell{std::string(to_string(*r.overlap_class))} : Cell{});
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table correlations_table(std::span<const CorrelationRow> rows) {
  Table t;
  t.columns = {"indicator", "dependency", "scheme", "scope", "n", "r", "strength", "error"};
  for (const auto& row : rows) {
    const auto& c = row.result;
    t.rows.push_back({std::string(to_string(c.indicator)), std::string(to_string(c.dependency)),
                      row.scheme, c.scope, int_cell(c.n),
                      c.error ? Cell{} : fixed_cell(c.r, 6),
                      c.error ? Cell{} : Cell{strength_label(c.r)},
                      c.error ? Cell{*c.error} : Cell{}});
  }
  return t;
}

Table group_summaries_table(std::span<const GroupSummary> summaries) {
  Table t;
  t.columns = {"scheme", "group",  "n",       "min_pct",     "q1_pct",
               "median_pct", "q3_pct", "max_pct", "mean_pct", "std_dev_pct"};
  for (const auto& g : summaries) {
    t.rows.push_back({std::string(to_string(g.scheme)), g.group_name, int_cell(g.n),
                      percent_cell(g.summary.min), percent_cell(g.summary.q1),
                      percent_cell(g.summary.median), percent_cell(g.summary.q3),
                      percent_cell(g.summary.max), percent_cell(g.mean),
                      g.std_dev ? percent_cell(*g.std_dev) : Cell{}});
  }
  return t;
}

std::string export_report(const SnapshotStore& store, const std::string& id, ExportKind kind,
                          ExportFormat format, const RunConfig& config, const DataFiles& data,
                          const ExportOptions& options) {
  store.read_meta(id);
  auto reports = [&] { return store.read_reports(id); };
  auto aggregates = [&] { return aggregate_by_country(reports()); };
  auto groupings = [&] {
    if (!config.groupings) {
      throw Error(ErrorCode::kMissingPrerequisite, "groupings: no grouping file configured");
    }
    return load_groupings(*config.groupings);
  };

  switch (kind) {
    case ExportKind::kSiteReports:
      return render(site_reports_table(reports()), format);
    case ExportKind::kCountryAggregates:
      return render(country_aggregates_table(aggregates()), format);
    case ExportKind::kCentralization:
      return render(centralization_table(reports(), options.top_k, data.aliases), format);
    case ExportKind::kIndirect: {
      CachedFactSource facts(store.read_host_facts(id));
      std::vector<IndirectDependencyReport> out;
      for (const auto& [country, rs] : by_country(reports())) {
        out.push_back(indirect_dependencies(country, rs, facts, data));
      }
      return render(indirect_table(out), format);
    }
    case ExportKind::kOverlap: {
      if (!config.global_list) {
        throw Error(ErrorCode::kMissingPrerequisite, "global_list: no global ranking configured");
      }
      const RankedList global = load_ranked_list(*config.global_list, "global");
      std::map<std::string, std::vector<SiteRecord>> lists;
      for (const auto& s : store.read_sites(id)) lists[s.country].push_back(s);
      std::vector<std::string> labels;
      for (std::size_t n : config.overlap_subsets) labels.push_back("top" + std::to_string(n));
      labels.push_back("full");
      std::vector<OverlapRow> rows;
      std::map<std::string, double> full;
      for (auto& [country, sites] : lists) {
        std::sort(sites.begin(), sites.end(), site_order);
        std::vector<std::string> domains;
        for (const auto& s : sites) domains.push_back(s.domain);
        const RankedList regional = make_ranked_list(country, domains);
        OverlapRow row;
        row.country = country;
        row.n_sites = sites.size();
        for (std::size_t n : config.overlap_subsets) {
          row.overlaps.push_back(overlap_fraction(regional, prefix(global, n)));
        }
        row.overlaps.push_back(overlap_fraction(regional, global));
        full[country] = row.overlaps.back();
        rows.push_back(std::move(row));
      }
      if (full.size() >= 3) {
        const auto classes = overlap_class(full);
        for (auto& row : rows) row.overlap_class = classes.at(row.country);
      }
      return render(overlap_table(rows, labels), format);
    }
    case ExportKind::kCorrelations: {
      if (!config.indicators) {
        throw Error(ErrorCode::kMissingPrerequisite, "indicators: no indicator file configured");
      }
      const auto indicators = load_indicators(*config.indicators);
      const auto aggs = aggregates();
      const auto groups = config.groupings ? load_groupings(*config.groupings)
                                           : std::vector<CountryGroup>{};
      std::set<Indicator> present;
      for (const auto& ci : indicators) present.insert(ci.indicator);
      std::vector<CorrelationRow> rows;
      for (Indicator ind : present) {
        for (DependencyVariable dep : {DependencyVariable::kMean, DependencyVariable::kDns,
                                       DependencyVariable::kCa, DependencyVariable::kCdn}) {
          rows.push_back({"overall", correlate(aggs, indicators, ind, {}, dep).front()});
          for (GroupScheme scheme : {GroupScheme::kRegion, GroupScheme::kLanguage,
                                     GroupScheme::kTradingBloc, GroupScheme::kOverlapClass}) {
            const auto scoped = groups_of(groups, scheme);
            const auto results = correlate(aggs, indicators, ind, scoped, dep);
            for (std::size_t i = 1; i < results.size(); ++i) {
              rows.push_back({std::string(to_string(scheme)), results[i]});
            }
          }
        }
      }
      return render(correlations_table(rows), format);
    }
    case ExportKind::kGroupSummaries: {
      const auto groups = groupings();
      return render(group_summaries_table(group_summary(aggregates(), groups, options.dependency)),
                    format);
    }
  }
  throw Error(ErrorCode::kUsage, "unhandled export kind");
}

}  // namespace webdep
