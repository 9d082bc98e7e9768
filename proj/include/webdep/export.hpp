#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "webdep/classify.hpp"
#include "webdep/config.hpp"
#include "webdep/metrics.hpp"
#include "webdep/store.hpp"
#include "webdep/trends.hpp"

namespace webdep {

enum class ExportKind {
  kSiteReports,
  kCountryAggregates,
  kCentralization,
  kIndirect,
  kOverlap,
  kCorrelations,
  kGroupSummaries,
};
std::string_view to_string(ExportKind kind);
ExportKind parse_export_kind(std::string_view text);

enum class ExportFormat { kCsv, kJson };
ExportFormat parse_export_format(std::string_view text);

// A decimal rendered identically in CSV and JSON ("68.6").
struct Decimal {
  std::string text;
  friend bool operator==(const Decimal&, const Decimal&) = default;
};

using Cell = std::variant<std::monostate, std::string, std::int64_t, bool, Decimal>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Rate as a percentage rounded half-up to one decimal, computed exactly from
// the fraction. Null when the denominator is zero.
Cell percent_cell(const Rate& rate);
// value * 100 to one decimal.
Cell percent_cell(double fraction);

// CSV: header line plus one line per row; null cells are empty. JSON: an array
// of objects keyed by column name, in column order.
std::string render(const Table& table, ExportFormat format);

Table site_reports_table(std::span<const SiteDependencyReport> reports);
// The 20-column per-country table.
Table country_aggregates_table(std::span<const CountryAggregate> aggregates);
// country, kind, coverage_pct, provider_1..k (display names).
Table centralization_table(std::span<const SiteDependencyReport> reports, std::size_t k,
                           const ProviderAliases& aliases);
Table indirect_table(std::span<const IndirectDependencyReport> reports);

struct OverlapRow {
  std::string country;
  std::size_t n_sites = 0;
  std::vector<double> overlaps;          // one per subset size
  std::optional<OverlapClass> overlap_class;  // absent with fewer than 3 countries
};
// `subset_labels` name the overlap columns (overlap_pct_<label>).
Table overlap_table(std::span<const OverlapRow> rows, std::span<const std::string> subset_labels);

struct CorrelationRow {
  std::string scheme;  // "overall" for the overall scope
  CorrelationResult result;
};
Table correlations_table(std::span<const CorrelationRow> rows);
Table group_summaries_table(std::span<const GroupSummary> summaries);

struct ExportOptions {
  std::size_t top_k = 3;
  DependencyVariable dependency = DependencyVariable::kMean;
};

// Reads what `kind` needs from the snapshot and renders it. Throws
// MissingPrerequisite naming the missing stage or config key.
std::string export_report(const SnapshotStore& store, const std::string& id, ExportKind kind,
                          ExportFormat format, const RunConfig& config, const DataFiles& data,
                          const ExportOptions& options = {});

}  // namespace webdep
