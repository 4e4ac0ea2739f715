#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "safex/campaign.hpp"

namespace safex {

inline constexpr int kCsvSchemaVersion = 1;

/// Column order of run CSVs.
const std::vector<std::string>& run_csv_columns();

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_run_csv(const std::string& path, const std::vector<RunRecord>& records);

/// Groups rows by run_id, in order of first appearance. Throws ConfigError on
/// a missing or unknown schema version or a malformed row.
std::vector<RunRecord> read_run_csv(std::istream& in);
std::vector<RunRecord> read_run_csv(const std::string& path);

struct SummaryRow {
  std::string method;
  std::size_t n = 0;
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single value.
  double stddev = 0.0;
  double stderr_mean = 0.0;
  double median = 0.0;
};

/// Per method and iteration: coverage_pct, true_safe_coverage_pct,
/// info_gain_sum, regret (probe rows only) and the cumulative violation_pct.
/// Methods appear in order of first appearance.
std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records);

/// One summary row; nullptr if absent.
const SummaryRow* find_summary(const std::vector<SummaryRow>& rows, const std::string& method,
                               std::size_t n, const std::string& metric);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

/// One line per run: run_id, method, replication, rows, complete,
/// violation_pct, error.
void write_manifest_csv(const std::string& path, const std::vector<RunRecord>& records);

/// Lowercase alphanumerics, '-', '_' and '.'; anything else becomes '_'.
std::string file_stem(const std::string& run_id);

}  // namespace safex
