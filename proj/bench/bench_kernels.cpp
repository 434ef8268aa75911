// Serial reference vs OpenMP kernels on the reference two-state system.

#include <benchmark/benchmark.h>

#include "lticert/kernels.hpp"

using namespace lticert;

namespace {

Mat m(std::initializer_list<std::initializer_list<double>> rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) out(i, j++) = v;
    ++i;
  }
  return out;
}

struct Fixture {
  Generator g;
  Predictor f;
  ParamBox box;
  FeatureConstants features;
  Trajectory traj;
  Mat thetas;

  Fixture()
      : g{m({{0.16, -0.3}, {0.0, -0.05}}), m({{0.33, -0.75}, {0.0, -0.09}}),
          m({{1.0, 1.0}, {0.0, 1.0}}), m({{0.9, 0.3}, {0.3, 4.15}}), 1, 1},
        f{m({{0.16, 0.43}, {0.0, 0.04}}), m({{-0.72}, {-0.09}}), m({{1.0, 0.92}}), m({{0.07}}),
          FeatureMode::InputOnly},
        box(f, {{'A', 0, 0}}, Vec::Constant(1, -0.5), Vec::Constant(1, 0.5), 1, 1),
        features(feature_constants(g, FeatureMode::InputOnly, KwMethod::ExactLagCovariance)),
        traj(simulate(g, 1000, 1)),
        thetas(sample_uniform_box(box, 2000, 2)) {}
};

const Fixture& fixture() {
  static const Fixture fx;
  return fx;
}

void BM_EmpiricalLosses(benchmark::State& state) {
  const auto& fx = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(state.range(0) ? batch_empirical_losses(fx.box, fx.thetas, fx.traj)
                                            : batch_empirical_losses_serial(fx.box, fx.thetas, fx.traj));
  }
}

void BM_ErrorGains(benchmark::State& state) {
  const auto& fx = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(state.range(0) ? batch_error_gains(fx.g, fx.box, fx.thetas)
                                            : batch_error_gains_serial(fx.g, fx.box, fx.thetas));
  }
}

void BM_PredictorStats(benchmark::State& state) {
  const auto& fx = fixture();
  const Mat t = fx.thetas.leftCols(500);
  for (auto _ : state) {
    auto s = state.range(0) ? batch_predictor_stats(fx.g, fx.box, t, fx.features)
                            : batch_predictor_stats_serial(fx.g, fx.box, t, fx.features);
    benchmark::DoNotOptimize(s.G.data());
  }
}

void BM_ReplicateLosses(benchmark::State& state) {
  const auto& fx = fixture();
  for (auto _ : state) {
    auto r = state.range(0) ? replicate_losses(fx.g, fx.f, 200, 3, 500)
                            : replicate_losses_serial(fx.g, fx.f, 200, 3, 500);
    benchmark::DoNotOptimize(r.empirical.data());
  }
}

}  // namespace

// Argument 0: serial reference, 1: OpenMP.
BENCHMARK(BM_EmpiricalLosses)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ErrorGains)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictorStats)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicateLosses)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
