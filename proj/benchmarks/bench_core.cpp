#include <benchmark/benchmark.h>

#include <random>

#include "safex/acquisition.hpp"
#include "safex/entropy.hpp"
#include "safex/gp.hpp"
#include "safex/safety.hpp"

namespace {

using namespace safex;

// Data scattered around the origin of [-2.5, 2.5]^d with f = 1 - |x|^2 / 4.
GpState make_gp(std::size_t dim, std::size_t n) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 0.4);
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    Point x(static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = normal(rng);
    data.observations.push_back(1.0 - x.squaredNorm() / 4.0);
    data.points.push_back(std::move(x));
  }
  return GpState::fit(RbfKernel::isotropic(dim, 0.5, 1.0), NoiseModel::homoskedastic(0.01),
                      std::move(data));
}

void BM_MutualInfo(benchmark::State& state) {
  const GpState gp = make_gp(2, static_cast<std::size_t>(state.range(0)));
  const Point x = Point::Constant(2, 0.3);
  const Point z = Point::Constant(2, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(mutual_info(gp, x, z));
}
BENCHMARK(BM_MutualInfo)->Arg(10)->Arg(100)->Arg(400);

void BM_MiGradient(benchmark::State& state) {
  const GpState gp = make_gp(2, static_cast<std::size_t>(state.range(0)));
  const Box box = Box::cube(2, -2.5, 2.5);
  const JointSearchSpace space = JointSearchSpace::full(box);
  Eigen::VectorXd u(4);
  u << 0.55, 0.5, 0.7, 0.6;
  for (auto _ : state) benchmark::DoNotOptimize(mi_gradient(gp, space, u).value);
}
BENCHMARK(BM_MiGradient)->Arg(10)->Arg(100)->Arg(400);

void BM_SelectNext(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  const GpState gp = make_gp(dim, 50);
  const SafetyModel safety(Point::Zero(static_cast<Eigen::Index>(dim)));
  const Box box = Box::cube(dim, -2.5, 2.5);
  OptimizerSettings settings;
  settings.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(select_next(gp, safety, 51, box, settings).value);
}
BENCHMARK(BM_SelectNext)->Arg(1)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_BatchPosterior(benchmark::State& state) {
  const GpState gp = make_gp(2, static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-2.5, 2.5);
  Eigen::MatrixXd points(2, 10000);
  for (Eigen::Index j = 0; j < points.cols(); ++j) points.col(j) << unif(rng), unif(rng);
  for (auto _ : state) benchmark::DoNotOptimize(gp.marginals(points).mean.data());
  state.SetItemsProcessed(state.iterations() * points.cols());
}
BENCHMARK(BM_BatchPosterior)->Arg(10)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_Condition(benchmark::State& state) {
  const GpState gp = make_gp(2, static_cast<std::size_t>(state.range(0)));
  const Point x = Point::Constant(2, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(gp.condition(x, 0.9).size());
}
BENCHMARK(BM_Condition)->Arg(10)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
