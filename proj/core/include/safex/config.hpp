#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "safex/acquisition.hpp"
#include "safex/dynamics.hpp"
#include "safex/types.hpp"

namespace safex {

inline constexpr int kConfigSchemaVersion = 1;

enum class EnvironmentKind { gp_sample, exponential, bump5, heteroskedastic, pendulum, cartpole };

std::string to_string(EnvironmentKind kind);

struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::exponential;
  Box domain;
  Point seed_point;
  /// Homoskedastic variance; for the heteroskedastic kind, the variance on
  /// the half-space x[0] >= 0.
  double noise_variance = 0.05;
  /// Heteroskedastic kind only: variance on x[0] < 0.
  double noise_variance_below = 0.5;
  /// gp_sample: lattice points per dimension for the prior draw.
  std::size_t sample_grid = 51;
  PendulumParams pendulum;
  CartPoleParams cartpole;
};

struct GpSpec {
  Eigen::VectorXd lengthscales;
  double outputscale = 1.0;
};

struct MethodSpec {
  enum class Kind { ise, stageopt, heuristic, uncertainty };
  Kind kind = Kind::ise;
  /// Restrict each iteration to random lines through the anchor.
  bool line = false;
  double L = 1.0;
  std::size_t lines = 4;
  std::size_t line_points = 201;
  std::string label;
};

std::string default_label(const MethodSpec& m);

struct CoverageSpec {
  /// Points per dimension of the reference grid (d <= 2).
  std::size_t grid = 200;
  /// Monte Carlo reference points (d >= 3).
  std::size_t monte_carlo = 10000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  EnvironmentSpec environment;
  GpSpec gp;
  std::vector<MethodSpec> methods;
  std::size_t iterations = 50;
  double beta = 2.0;
  OptimizerSettings optimizer;
  /// Grid points per dimension for the grid-based baselines.
  std::size_t baseline_grid = 201;
  CoverageSpec coverage;
  std::uint64_t seed = 0;
  std::size_t replications = 1;
  /// Regret probe every this many iterations; 0 disables.
  std::size_t regret_probe_period = 10;
  bool record_timing = false;
};

/// Parses a JSON document; missing fields take the environment's defaults.
/// Throws ConfigError on malformed input.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Defaults for an environment kind in `dimension` dimensions (0 picks the
/// kind's natural dimension).
ExperimentConfig default_config(EnvironmentKind kind, std::size_t dimension = 0);

/// Throws ConfigError if counts are invalid or a grid method is paired with
/// an environment that cannot be discretized.
void validate(const ExperimentConfig& cfg);

/// Method whose label (or kind name) matches `name`.
std::optional<MethodSpec> find_method(const ExperimentConfig& cfg, const std::string& name);
/// Parses "ise", "stageopt:5", "line-stageopt:1", "heuristic", "uncertainty".
MethodSpec parse_method(const std::string& text);

}  // namespace safex
