#include "lticert/kernels.hpp"

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lticert/loss.hpp"
#include "lticert/rng.hpp"

namespace lticert {

namespace {

// Runs body(i) for i in [0, count). The first exception thrown by any
// iteration (lowest index wins) is rethrown after the loop.
template <class Body>
void parallel_for(long count, Body&& body) {
  std::exception_ptr error;
  long error_index = count;
  std::mutex guard;
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

template <class Body>
void serial_for(long count, Body&& body) {
  for (long i = 0; i < count; ++i) body(i);
}

std::span<const double> column(const Mat& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

template <class Loop>
Mat empirical_losses_impl(const ParamBox& box, const Mat& thetas, const Trajectory& traj,
                          Loop loop) {
  Mat out(traj.n_y(), thetas.cols());
  loop(thetas.cols(), [&](long i) {
    out.col(i) = empirical_loss_per_output(box.predictor(column(thetas, i)), traj);
  });
  return out;
}

template <class Loop>
Mat error_gains_impl(const Generator& g, const ParamBox& box, const Mat& thetas, double tol,
                     Loop loop) {
  Mat out(g.n_y, thetas.cols());
  loop(thetas.cols(), [&](long i) {
    const ErrorSystem es = build_error_system(g, box.predictor(column(thetas, i)));
    for (int p = 0; p < g.n_y; ++p) {
      out(p, i) = g.n_y == 1 ? error_gain(es, tol) : error_gain(es.output_row(p), tol);
    }
  });
  return out;
}

template <class Loop>
PredictorStats predictor_stats_impl(const Generator& g, const ParamBox& box, const Mat& thetas,
                                    const FeatureConstants& features, double tol, Loop loop) {
  PredictorStats out{Mat(g.n_y, thetas.cols()), Mat(g.n_y, thetas.cols())};
  loop(thetas.cols(), [&](long i) {
    const Predictor f = box.predictor(column(thetas, i));
    for (int p = 0; p < g.n_y; ++p) {
      out.G(p, i) = compute_constants(g, f, features, tol, g.n_y == 1 ? -1 : p).G;
    }
    out.generalization.col(i) = generalization_loss_per_output(g, f);
  });
  return out;
}

template <class Loop>
ReplicateLosses replicate_impl(const Generator& g, const Predictor& f, long N,
                               std::uint64_t base_seed, long count, Loop loop) {
  ReplicateLosses out{std::vector<double>(count), std::vector<double>(count)};
  loop(count, [&](long i) {
    const Trajectory traj = simulate(g, N, derive_seed(base_seed, i), f);
    out.empirical[i] = empirical_loss(f, traj);
    out.infinite_past[i] = infinite_past_loss(f, traj);
  });
  return out;
}

}  // namespace

Mat batch_empirical_losses(const ParamBox& box, const Mat& thetas, const Trajectory& traj) {
  return empirical_losses_impl(box, thetas, traj,
                               [](long n, auto&& body) { parallel_for(n, body); });
}

Mat batch_empirical_losses_serial(const ParamBox& box, const Mat& thetas,
                                  const Trajectory& traj) {
  return empirical_losses_impl(box, thetas, traj,
                               [](long n, auto&& body) { serial_for(n, body); });
}

Mat batch_error_gains(const Generator& g, const ParamBox& box, const Mat& thetas, double tol) {
  return error_gains_impl(g, box, thetas, tol,
                          [](long n, auto&& body) { parallel_for(n, body); });
}

Mat batch_error_gains_serial(const Generator& g, const ParamBox& box, const Mat& thetas,
                             double tol) {
  return error_gains_impl(g, box, thetas, tol, [](long n, auto&& body) { serial_for(n, body); });
}

PredictorStats batch_predictor_stats(const Generator& g, const ParamBox& box, const Mat& thetas,
                                     const FeatureConstants& features, double tol) {
  return predictor_stats_impl(g, box, thetas, features, tol,
                              [](long n, auto&& body) { parallel_for(n, body); });
}

PredictorStats batch_predictor_stats_serial(const Generator& g, const ParamBox& box,
                                            const Mat& thetas, const FeatureConstants& features,
                                            double tol) {
  return predictor_stats_impl(g, box, thetas, features, tol,
                              [](long n, auto&& body) { serial_for(n, body); });
}

ReplicateLosses replicate_losses(const Generator& g, const Predictor& f, long N,
                                 std::uint64_t base_seed, long count) {
  return replicate_impl(g, f, N, base_seed, count,
                        [](long n, auto&& body) { parallel_for(n, body); });
}

ReplicateLosses replicate_losses_serial(const Generator& g, const Predictor& f, long N,
                                        std::uint64_t base_seed, long count) {
  return replicate_impl(g, f, N, base_seed, count,
                        [](long n, auto&& body) { serial_for(n, body); });
}

int kernel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace lticert
