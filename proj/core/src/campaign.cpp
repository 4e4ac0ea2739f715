#include "safex/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <utility>

#include "safex/acquisition.hpp"
#include "safex/baselines.hpp"
#include "safex/entropy.hpp"
#include "safex/lattice.hpp"
#include "safex/posterior_cache.hpp"
#include "safex/subspace.hpp"

namespace safex {

namespace {

enum SeedTag : std::uint64_t {
  kSampleTag = 1,
  kNoiseTag = 2,
  kReferenceTag = 3,
  kOptimizerTag = 4,
  kRegretTag = 5,
  kLinesTag = 6,
};

BaselineKind baseline_kind(MethodSpec::Kind k) {
  switch (k) {
    case MethodSpec::Kind::stageopt:
      return BaselineKind::stageopt;
    case MethodSpec::Kind::heuristic:
      return BaselineKind::heuristic;
    default:
      return BaselineKind::uncertainty;
  }
}

NoiseModel make_noise(const EnvironmentSpec& e) {
  if (e.kind == EnvironmentKind::heteroskedastic) {
    return NoiseModel::half_space(0, 0.0, e.noise_variance, e.noise_variance_below);
  }
  return NoiseModel::homoskedastic(e.noise_variance);
}

struct Selection {
  Point x;
  double score = 0.0;
};

class Selector {
 public:
  Selector(const ExperimentConfig& cfg, const MethodSpec& method, Box domain, std::uint64_t seed)
      : cfg_(cfg), method_(method), domain_(std::move(domain)), seed_(seed) {
    if (!method_.line && method_.kind != MethodSpec::Kind::ise) {
      grid_.emplace(GridDomain::box(domain_, cfg.baseline_grid));
      cache_.emplace(grid_->points());
    }
  }

  /// Safety model as seen by this method; grid baselines snap the seed.
  SafetyModel safety(const SafetyModel& base) const {
    return grid_ ? snap_seed(base, *grid_) : base;
  }

  Selection next(const GpState& gp, const SafetyModel& safety, std::size_t n) const {
    OptimizerSettings opt = cfg_.optimizer;
    opt.seed = mix_seed(mix_seed(seed_, kOptimizerTag), n);
    if (method_.line) {
      LineMethod lm;
      lm.kind = method_.kind == MethodSpec::Kind::ise ? LineMethod::Kind::ise
                                                      : LineMethod::Kind::baseline;
      lm.baseline = baseline_kind(method_.kind);
      lm.lipschitz.L = method_.L;
      lm.optimizer = opt;
      lm.lattice_points = method_.line_points;
      const Point anchor = line_anchor(gp, safety, n);
      const auto lines = sample_lines(anchor, method_.lines, domain_,
                                      mix_seed(mix_seed(seed_, kLinesTag), n));
      const LineChoice c = select_next_on_lines(lm, gp, safety, n, lines);
      return {c.choice.x, c.choice.value};
    }
    if (method_.kind == MethodSpec::Kind::ise) {
      const AcquisitionChoice c = select_next(gp, safety, n, domain_, opt);
      return {c.x, c.value};
    }
    LipschitzConfig lc;
    lc.L = method_.L;
    const GridState state = grid_state(cache_->update(gp), safety, n, *grid_);
    const BaselineChoice c =
        select_next_baseline(baseline_kind(method_.kind), gp, safety, *grid_, state, lc);
    return {c.x, c.score};
  }

 private:
  const ExperimentConfig& cfg_;
  const MethodSpec& method_;
  Box domain_;
  std::uint64_t seed_;
  std::optional<GridDomain> grid_;
  mutable std::optional<PosteriorCache> cache_;
};

}  // namespace

double RunRecord::violation_pct() const {
  if (rows.empty()) return 0.0;
  const auto v = std::count_if(rows.begin(), rows.end(), [](const RunRow& r) { return r.violated; });
  return 100.0 * static_cast<double>(v) / static_cast<double>(rows.size());
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t replication) {
  return mix_seed(base, replication);
}

RbfKernel make_kernel(const ExperimentConfig& cfg) {
  return RbfKernel(cfg.gp.lengthscales, cfg.gp.outputscale);
}

std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg, std::uint64_t seed) {
  const EnvironmentSpec& e = cfg.environment;
  const std::uint64_t noise_seed = mix_seed(seed, kNoiseTag);
  switch (e.kind) {
    case EnvironmentKind::gp_sample:
      return std::make_unique<GpSampleEnvironment>(
          make_kernel(cfg), GridDomain::box(e.domain, e.sample_grid), e.domain, e.seed_point,
          make_noise(e), mix_seed(seed, kSampleTag), noise_seed);
    case EnvironmentKind::exponential:
      return std::make_unique<ExponentialEnvironment>(e.domain, e.seed_point, e.noise_variance,
                                                      noise_seed);
    case EnvironmentKind::bump5:
      return std::make_unique<BumpEnvironment>(BumpKind::fived, e.domain, e.seed_point,
                                               make_noise(e), noise_seed);
    case EnvironmentKind::heteroskedastic:
      return std::make_unique<BumpEnvironment>(BumpKind::heteroskedastic, e.domain, e.seed_point,
                                               make_noise(e), noise_seed);
    case EnvironmentKind::pendulum:
      return std::make_unique<PendulumEnvironment>(e.pendulum, e.domain, e.seed_point,
                                                   e.noise_variance, noise_seed);
    case EnvironmentKind::cartpole:
      return std::make_unique<CartPoleEnvironment>(e.cartpole, e.domain, e.seed_point,
                                                   e.noise_variance, noise_seed);
  }
  throw ConfigError("unknown environment kind");
}

Scenario make_scenario(const ExperimentConfig& cfg, std::size_t replication) {
  Scenario s;
  s.seed = replication_seed(cfg.seed, replication);
  s.env = make_environment(cfg, s.seed);
  s.reference = default_reference(*s.env, cfg.coverage.grid, cfg.coverage.monte_carlo,
                                  mix_seed(s.seed, kReferenceTag));
  s.f_star = cfg.regret_probe_period > 0 ? true_safe_optimum(*s.env, s.reference)
                                         : std::numeric_limits<double>::quiet_NaN();
  return s;
}

RunRecord run_campaign(const ExperimentConfig& cfg, const MethodSpec& method,
                       std::size_t replication, const Scenario& scenario) {
  using Clock = std::chrono::steady_clock;
  const Environment& env = *scenario.env;
  RunRecord rec;
  rec.method = method.label.empty() ? default_label(method) : method.label;
  rec.replication = replication;
  rec.run_id = rec.method + "#" + std::to_string(replication);

  const Selector selector(cfg, method, env.domain(), scenario.seed);
  const SafetyModel safety = selector.safety(SafetyModel(env.seed(), cfg.beta));
  GpState gp(make_kernel(cfg), env.noise());
  std::mt19937_64 noise_rng(mix_seed(scenario.seed, kNoiseTag));
  PosteriorCache reference_cache(scenario.reference.points);
  double info_gain = 0.0;

  for (std::size_t n = 0; n < cfg.iterations; ++n) {
    const auto start = Clock::now();
    RunRow row;
    row.n = n + 1;
    try {
      const Selection sel = selector.next(gp, safety, n);
      row.x = sel.x;
      row.score = sel.score;
      row.f_true = env.constraint(row.x);
      row.y = env.observe(row.x, noise_rng);
      const double var_x = gp.posterior(row.x).variance;
      const double nv = env.noise().variance_at(row.x);
      info_gain += info_gain_term(var_x, nv);
      gp = gp.condition(row.x, row.y, nv);
    } catch (const EnvironmentError& e) {
      rec.complete = false;
      rec.error = e.what();
      break;
    } catch (const NumericalError& e) {
      rec.complete = false;
      rec.numerical_abort = true;
      rec.error = e.what();
      break;
    }
    row.violated = !(row.f_true >= 0.0);
    const Coverage cov = coverage(reference_cache.update(gp), safety, n + 1, scenario.reference);
    row.coverage_pct = cov.safe_pct;
    row.true_safe_coverage_pct = cov.true_safe_pct;
    row.info_gain_sum = info_gain;
    row.regret = std::numeric_limits<double>::quiet_NaN();
    if (cfg.regret_probe_period > 0 && row.n % cfg.regret_probe_period == 0) {
      RegretSettings rs;
      rs.seed = mix_seed(mix_seed(scenario.seed, kRegretTag), n);
      row.regret = regret_probe(gp, safety, n + 1, env, scenario.f_star, scenario.reference, rs);
    }
    if (cfg.record_timing) {
      row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
    rec.rows.push_back(std::move(row));
  }
  return rec;
}

RunRecord run_campaign(const ExperimentConfig& cfg, const MethodSpec& method,
                       std::size_t replication) {
  const Scenario s = make_scenario(cfg, replication);
  return run_campaign(cfg, method, replication, s);
}

std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg, unsigned threads) {
  const std::size_t reps = cfg.replications;
  const std::size_t methods = cfg.methods.size();
  std::vector<RunRecord> out(reps * methods);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        const Scenario s = make_scenario(cfg, r);
        for (std::size_t m = 0; m < methods; ++m) {
          out[r * methods + m] = run_campaign(cfg, cfg.methods[m], r, s);
        }
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace safex
