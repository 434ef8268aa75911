#pragma once

// Data-parallel Monte-Carlo kernels. Each kernel has an OpenMP version and a
// `_serial` reference with identical results: every index writes its own
// output slot and no floating-point reduction crosses threads, so the two
// agree bit for bit regardless of thread count.

#include <cstdint>
#include <vector>

#include "lticert/bounds.hpp"
#include "lticert/posterior.hpp"

namespace lticert {

/// Empirical loss per output for each column of `thetas` (n_y x count).
Mat batch_empirical_losses(const ParamBox& box, const Mat& thetas, const Trajectory& traj);
Mat batch_empirical_losses_serial(const ParamBox& box, const Mat& thetas, const Trajectory& traj);

/// G_e of each output's error system for each column of `thetas` (n_y x count).
Mat batch_error_gains(const Generator& g, const ParamBox& box, const Mat& thetas,
                      double tol = kDefaultSeriesTol);
Mat batch_error_gains_serial(const Generator& g, const ParamBox& box, const Mat& thetas,
                             double tol = kDefaultSeriesTol);

struct PredictorStats {
  Mat G;               // n_y x count, gap constant G(f) per output
  Mat generalization;  // n_y x count, L_p(f)
};

PredictorStats batch_predictor_stats(const Generator& g, const ParamBox& box, const Mat& thetas,
                                     const FeatureConstants& features,
                                     double tol = kDefaultSeriesTol);
PredictorStats batch_predictor_stats_serial(const Generator& g, const ParamBox& box,
                                            const Mat& thetas, const FeatureConstants& features,
                                            double tol = kDefaultSeriesTol);

struct ReplicateLosses {
  std::vector<double> empirical;      // L^_N per replicate
  std::vector<double> infinite_past;  // V_N per replicate
};

/// Simulates `count` joint trajectories of length N, replicate i seeded with
/// derive_seed(base_seed, i), and records L^_N and V_N of f on each.
ReplicateLosses replicate_losses(const Generator& g, const Predictor& f, long N,
                                 std::uint64_t base_seed, long count);
ReplicateLosses replicate_losses_serial(const Generator& g, const Predictor& f, long N,
                                        std::uint64_t base_seed, long count);

/// Worker threads OpenMP will use (1 without OpenMP).
int kernel_threads();

}  // namespace lticert
