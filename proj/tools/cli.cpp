#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "safex/campaign.hpp"
#include "safex/config.hpp"
#include "safex/report.hpp"

namespace safex::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::vector<std::string> methods;
  std::optional<std::size_t> iterations;
  std::size_t replication = 0;
  unsigned threads = 1;
  std::vector<std::string> inputs;
};

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SAFE_EXPLORE_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("SAFE_EXPLORE_SEED is not an unsigned integer: '") + s + "'");
  }
}

ExperimentConfig prepare(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
  } else if (const auto s = env_seed()) {
    cfg.seed = *s;
  }
  if (o.iterations) cfg.iterations = *o.iterations;
  if (!o.methods.empty()) {
    std::vector<MethodSpec> chosen;
    for (const std::string& name : o.methods) {
      const auto found = find_method(cfg, name);
      chosen.push_back(found ? *found : parse_method(name));
    }
    cfg.methods = chosen;
  }
  validate(cfg);
  return cfg;
}

int finish(const std::vector<RunRecord>& records, std::ostream& err) {
  int code = kExitOk;
  for (const RunRecord& r : records) {
    if (r.complete) continue;
    err << "run " << r.run_id << " aborted after " << r.rows.size() << " rows: " << r.error << '\n';
    code = kExitAbort;
  }
  return code;
}

int run(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = prepare(o);
  fs::create_directories(o.out);
  const RunRecord rec = run_campaign(cfg, cfg.methods.front(), o.replication);
  const std::string path = (fs::path(o.out) / "run.csv").string();
  write_run_csv(path, {rec});
  out << path << '\n';
  return finish({rec}, err);
}

int sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = prepare(o);
  fs::create_directories(o.out);
  const std::vector<RunRecord> records = run_sweep(cfg, o.threads);
  for (const RunRecord& r : records) {
    const std::string path = (fs::path(o.out) / (file_stem(r.run_id) + ".csv")).string();
    write_run_csv(path, {r});
    out << path << '\n';
  }
  write_manifest_csv((fs::path(o.out) / "runs.csv").string(), records);
  const std::string summary = (fs::path(o.out) / "summary.csv").string();
  write_summary_csv(summary, aggregate(records));
  out << summary << '\n';
  return finish(records, err);
}

int report(const Options& o, std::ostream& out) {
  std::vector<RunRecord> records;
  for (const std::string& p : o.inputs) {
    auto part = read_run_csv(p);
    records.insert(records.end(), part.begin(), part.end());
  }
  fs::path target(o.out);
  if (fs::is_directory(target)) target /= "summary.csv";
  write_summary_csv(target.string(), aggregate(records));
  out << target.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safe exploration campaigns with GP constraint models", "safex"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "Global seed; overrides SAFE_EXPLORE_SEED and the config");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--method", o.methods, "Method label or spec such as stageopt:5");
    sub->add_option("--iterations", o.iterations, "Iterations per run");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "Run one campaign and write run.csv");
  add_common(run_cmd);
  run_cmd->add_option("--replication", o.replication, "Replication index");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run replications x methods");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  CLI::App* report_cmd = app.add_subcommand("report", "Aggregate run CSVs into summary.csv");
  report_cmd->add_option("inputs", o.inputs, "Run CSV files")->required();
  report_cmd->add_option("--out", o.out, "Output file or directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return run(o, out, err);
    if (sweep_cmd->parsed()) return sweep(o, out, err);
    return report(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitAbort;
  } catch (const EnvironmentError& e) {
    err << "environment error: " << e.what() << '\n';
    return kExitAbort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace safex::cli
