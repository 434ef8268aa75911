#pragma once

// Empirical loss, infinite-past loss V_N, and the exact generalization loss.

#include <string>

#include "lticert/constants.hpp"
#include "lticert/lti.hpp"

namespace lticert {

struct LossReport {
  double empirical = 0.0;
  double infinite_past = 0.0;
  double generalization = 0.0;
  long N = 0;
  std::uint64_t seed = 0;

  static std::string csv_header();  // N,empirical,infinite_past,generalization,seed
  std::string to_csv_row() const;
};

/// y^_f(t|0): the predictor run from zero state over w(0..t).
Vec finite_past_predict(const Predictor& f, const Mat& w, long t);

/// Per-output sums of squared residuals y(t) - y^(t) over the trajectory,
/// running the predictor from state x0. One forward pass.
Vec residual_square_sums(const Predictor& f, const Trajectory& traj, const Vec& x0);

/// (1/N) sum ||y^_f(i|0) - y(i)||^2.
double empirical_loss(const Predictor& f, const Trajectory& traj);
Vec empirical_loss_per_output(const Predictor& f, const Trajectory& traj);

/// V_N: same average with the stationary (infinite-past) predictor state.
/// Needs a trajectory simulated jointly with a predictor of the same shape.
double infinite_past_loss(const Predictor& f, const Trajectory& traj);
Vec infinite_past_loss_per_output(const Predictor& f, const Trajectory& traj);

/// Stationary E||y - y^_f||^2 = trace(C_e P C_e^T + D_e Q_e D_e^T) with
/// P = A_e P A_e^T + K_e Q_e K_e^T.
double generalization_loss(const Generator& g, const Predictor& f);
Vec generalization_loss_per_output(const Generator& g, const Predictor& f);

/// Bound on E|V_N - L^_N|: 2 G / N.
double loss_gap_bound(const BoundConstants& constants, long N);
double loss_gap_bound(double G, long N);

LossReport make_loss_report(const Generator& g, const Predictor& f, const Trajectory& traj);

}  // namespace lticert
