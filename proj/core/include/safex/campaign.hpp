#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "safex/config.hpp"
#include "safex/environments.hpp"
#include "safex/metrics.hpp"

namespace safex {

struct RunRow {
  std::size_t n = 0;
  Point x;
  double y = 0.0;
  double f_true = 0.0;
  bool violated = false;
  /// MI value for ISE, posterior standard deviation for the baselines.
  double score = 0.0;
  double coverage_pct = 0.0;
  double true_safe_coverage_pct = 0.0;
  double info_gain_sum = 0.0;
  /// NaN away from probe iterations.
  double regret = 0.0;
  double wall_ms = 0.0;
};

struct RunRecord {
  std::string run_id;
  std::string method;
  std::size_t replication = 0;
  std::vector<RunRow> rows;
  bool complete = true;
  /// Set when the run aborted on a numerical error rather than an
  /// environment error.
  bool numerical_abort = false;
  std::string error;

  /// Evaluations with f < 0 as a percentage of the rows.
  double violation_pct() const;
};

/// Environment seed for a replication; shared by all methods so that their
/// runs are paired.
std::uint64_t replication_seed(std::uint64_t base, std::size_t replication);

std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg,
                                              std::uint64_t replication_seed);

RbfKernel make_kernel(const ExperimentConfig& cfg);

/// Ground truth shared by the runs of one replication.
struct Scenario {
  std::unique_ptr<Environment> env;
  ReferenceSet reference;
  double f_star = 0.0;
  std::uint64_t seed = 0;
};

Scenario make_scenario(const ExperimentConfig& cfg, std::size_t replication);

/// One evaluate-condition loop. Environment and numerical errors end the run
/// early with `complete` cleared. Observation noise comes from a stream
/// seeded by the scenario, so paired runs see the same noise sequence.
RunRecord run_campaign(const ExperimentConfig& cfg, const MethodSpec& method,
                       std::size_t replication, const Scenario& scenario);
RunRecord run_campaign(const ExperimentConfig& cfg, const MethodSpec& method,
                       std::size_t replication = 0);

/// Every method on every replication, replications spread over `threads`.
std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg, unsigned threads = 1);

}  // namespace safex
