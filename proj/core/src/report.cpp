#include "safex/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace safex {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("line " + std::to_string(line) + ": bad count '" + s + "'");
  }
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

struct Stats {
  std::vector<double> values;

  void add(double v) { values.push_back(v); }

  SummaryRow row(const std::string& method, std::size_t n, const std::string& metric) {
    SummaryRow r{method, n, metric, values.size(), 0.0, 0.0, 0.0, 0.0};
    const auto k = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / k;
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - r.mean) * (v - r.mean);
      r.stddev = std::sqrt(ss / (k - 1.0));
      r.stderr_mean = r.stddev / std::sqrt(k);
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    r.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return r;
  }
};

}  // namespace

const std::vector<std::string>& run_csv_columns() {
  static const std::vector<std::string> cols = {
      "schema_version", "run_id",       "n",           "x",
      "y",              "f_true",       "violated",    "score",
      "coverage_pct",   "true_safe_coverage_pct",      "info_gain_sum",
      "regret",         "wall_ms"};
  return cols;
}

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  const auto& cols = run_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const RunRecord& rec : records) {
    for (const RunRow& r : rec.rows) {
      out << kCsvSchemaVersion << ',' << rec.run_id << ',' << r.n << ',' << format_point(r.x)
          << ',' << format_double(r.y) << ',' << format_double(r.f_true) << ','
          << (r.violated ? 1 : 0) << ',' << format_double(r.score) << ','
          << format_double(r.coverage_pct) << ',' << format_double(r.true_safe_coverage_pct)
          << ',' << format_double(r.info_gain_sum) << ',' << format_double(r.regret) << ','
          << format_double(r.wall_ms) << '\n';
    }
  }
}

void write_run_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out = open_out(path);
  write_run_csv(out, records);
}

std::vector<RunRecord> read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto& cols = run_csv_columns();
  if (split(line, ',') != cols) throw ConfigError("unexpected CSV header");
  std::vector<RunRecord> out;
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != cols.size()) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(cols.size()) + " cells");
    }
    if (cells[0] != std::to_string(kCsvSchemaVersion)) {
      throw ConfigError("unsupported schema_version '" + cells[0] + "'");
    }
    auto [it, fresh] = index.try_emplace(cells[1], out.size());
    if (fresh) {
      RunRecord rec;
      rec.run_id = cells[1];
      const auto hash = rec.run_id.rfind('#');
      rec.method = hash == std::string::npos ? rec.run_id : rec.run_id.substr(0, hash);
      if (hash != std::string::npos) rec.replication = parse_count(rec.run_id.substr(hash + 1), lineno);
      out.push_back(std::move(rec));
    }
    RunRow r;
    r.n = parse_count(cells[2], lineno);
    const auto coords = split(cells[3], ';');
    r.x.resize(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) {
      r.x[static_cast<Eigen::Index>(i)] = parse_double(coords[i], lineno);
    }
    r.y = parse_double(cells[4], lineno);
    r.f_true = parse_double(cells[5], lineno);
    if (cells[6] != "0" && cells[6] != "1") {
      throw ConfigError("line " + std::to_string(lineno) + ": violated must be 0 or 1");
    }
    r.violated = cells[6] == "1";
    r.score = parse_double(cells[7], lineno);
    r.coverage_pct = parse_double(cells[8], lineno);
    r.true_safe_coverage_pct = parse_double(cells[9], lineno);
    r.info_gain_sum = parse_double(cells[10], lineno);
    r.regret = parse_double(cells[11], lineno);
    r.wall_ms = parse_double(cells[12], lineno);
    out[it->second].rows.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> read_run_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_run_csv(in);
}

std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records) {
  static const char* kMetrics[] = {"coverage_pct", "true_safe_coverage_pct", "info_gain_sum",
                                   "regret", "violation_pct"};
  std::vector<std::string> methods;
  // method -> n -> metric index -> values
  std::map<std::string, std::map<std::size_t, std::map<int, Stats>>> acc;
  for (const RunRecord& rec : records) {
    if (std::find(methods.begin(), methods.end(), rec.method) == methods.end()) {
      methods.push_back(rec.method);
    }
    auto& per_n = acc[rec.method];
    std::size_t violations = 0;
    std::size_t seen = 0;
    for (const RunRow& r : rec.rows) {
      ++seen;
      if (r.violated) ++violations;
      auto& m = per_n[r.n];
      m[0].add(r.coverage_pct);
      m[1].add(r.true_safe_coverage_pct);
      m[2].add(r.info_gain_sum);
      if (std::isfinite(r.regret)) m[3].add(r.regret);
      m[4].add(100.0 * static_cast<double>(violations) / static_cast<double>(seen));
    }
  }
  std::vector<SummaryRow> out;
  for (const std::string& method : methods) {
    for (auto& [n, metrics] : acc[method]) {
      for (auto& [k, stats] : metrics) out.push_back(stats.row(method, n, kMetrics[k]));
    }
  }
  return out;
}

const SummaryRow* find_summary(const std::vector<SummaryRow>& rows, const std::string& method,
                               std::size_t n, const std::string& metric) {
  for (const SummaryRow& r : rows) {
    if (r.method == method && r.n == n && r.metric == metric) return &r;
  }
  return nullptr;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "schema_version,method,n,metric,count,mean,std,stderr,median\n";
  for (const SummaryRow& r : rows) {
    out << kCsvSchemaVersion << ',' << r.method << ',' << r.n << ',' << r.metric << ','
        << r.count << ',' << format_double(r.mean) << ',' << format_double(r.stddev) << ','
        << format_double(r.stderr_mean) << ',' << format_double(r.median) << '\n';
  }
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out = open_out(path);
  write_summary_csv(out, rows);
}

void write_manifest_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out = open_out(path);
  out << "schema_version,run_id,method,replication,rows,complete,violation_pct,error\n";
  for (const RunRecord& r : records) {
    out << kCsvSchemaVersion << ',' << r.run_id << ',' << r.method << ',' << r.replication << ','
        << r.rows.size() << ',' << (r.complete ? 1 : 0) << ',' << format_double(r.violation_pct())
        << ',' << quote(r.error) << '\n';
  }
}

std::string file_stem(const std::string& run_id) {
  std::string s;
  for (char c : run_id) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                      c == '.';
    if (c >= 'A' && c <= 'Z') {
      s += static_cast<char>(c - 'A' + 'a');
    } else {
      s += keep ? c : '_';
    }
  }
  return s;
}

}  // namespace safex
