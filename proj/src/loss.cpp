#include "lticert/loss.hpp"

#include <vector>

#include "lticert/csv.hpp"

namespace lticert {

std::string LossReport::csv_header() { return "N,empirical,infinite_past,generalization,seed"; }

std::string LossReport::to_csv_row() const {
  return csv::join({std::to_string(N), csv::num(empirical), csv::num(infinite_past),
                    csv::num(generalization), std::to_string(seed)});
}

Vec finite_past_predict(const Predictor& f, const Mat& w, long t) {
  if (t < 0 || t >= w.cols()) throw InputError("prediction time outside the feature record");
  if (w.rows() != f.n_w()) throw DimensionError("feature width does not match predictor");
  Vec x = Vec::Zero(f.n_hat());
  for (long s = 0; s < t; ++s) x = (f.A * x + f.B * w.col(s)).eval();
  return f.C * x + f.D * w.col(t);
}

namespace {

void check_trajectory(const Predictor& f, const Trajectory& traj) {
  if (f.n_y() != traj.n_y()) throw InputError("predictor output width differs from trajectory");
  if (f.n_w() != feature_dim(f.mode, traj.n_y(), traj.n_u())) {
    throw InputError("predictor feature mode/width does not match trajectory");
  }
}

}  // namespace

Vec residual_square_sums(const Predictor& f, const Trajectory& traj, const Vec& x0) {
  check_trajectory(f, traj);
  const int nh = f.n_hat();
  const int ny = f.n_y();
  const int nu = traj.n_u();
  const int nw = f.n_w();
  const bool with_y = f.mode == FeatureMode::InputOutput;
  if (x0.size() != nh) throw DimensionError("initial predictor state has wrong size");

  // Row-major copies so each step walks contiguous rows.
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat a = f.A, b = f.B, c = f.C, d = f.D;
  std::vector<double> x(x0.data(), x0.data() + nh), xn(nh), w(nw);
  Vec sums = Vec::Zero(ny);
  const long N = traj.N();
  const double* yp = traj.y.data();
  const double* up = traj.u.data();

  for (long t = 0; t < N; ++t) {
    const double* yt = yp + t * ny;
    const double* ut = up + t * nu;
    if (with_y) {
      for (int i = 0; i < ny; ++i) w[i] = yt[i];
      for (int i = 0; i < nu; ++i) w[ny + i] = ut[i];
    } else {
      for (int i = 0; i < nu; ++i) w[i] = ut[i];
    }
    for (int p = 0; p < ny; ++p) {
      double pred = 0.0;
      const double* crow = c.data() + p * nh;
      const double* drow = d.data() + p * nw;
      for (int j = 0; j < nh; ++j) pred += crow[j] * x[j];
      for (int j = 0; j < nw; ++j) pred += drow[j] * w[j];
      const double r = yt[p] - pred;
      sums[p] += r * r;
    }
    for (int i = 0; i < nh; ++i) {
      double acc = 0.0;
      const double* arow = a.data() + i * nh;
      const double* brow = b.data() + i * nw;
      for (int j = 0; j < nh; ++j) acc += arow[j] * x[j];
      for (int j = 0; j < nw; ++j) acc += brow[j] * w[j];
      xn[i] = acc;
    }
    x.swap(xn);
  }
  return sums;
}

Vec empirical_loss_per_output(const Predictor& f, const Trajectory& traj) {
  return residual_square_sums(f, traj, Vec::Zero(f.n_hat())) / static_cast<double>(traj.N());
}

double empirical_loss(const Predictor& f, const Trajectory& traj) {
  return empirical_loss_per_output(f, traj).sum();
}

Vec infinite_past_loss_per_output(const Predictor& f, const Trajectory& traj) {
  if (!traj.predictor_state0) {
    throw InputError("trajectory was not simulated jointly with a predictor");
  }
  if (traj.predictor_state0->size() != f.n_hat() || traj.predictor_mode != f.mode) {
    throw InputError("trajectory's joint predictor state does not match this predictor");
  }
  return residual_square_sums(f, traj, *traj.predictor_state0) / static_cast<double>(traj.N());
}

double infinite_past_loss(const Predictor& f, const Trajectory& traj) {
  return infinite_past_loss_per_output(f, traj).sum();
}

Vec generalization_loss_per_output(const Generator& g, const Predictor& f) {
  const ErrorSystem es = build_error_system(g, f);
  const Mat p = solve_discrete_lyapunov(es.A, es.K * g.Qe * es.K.transpose());
  const Mat cov = es.C * p * es.C.transpose() + es.D * g.Qe * es.D.transpose();
  return cov.diagonal().cwiseMax(0.0);
}

double generalization_loss(const Generator& g, const Predictor& f) {
  return generalization_loss_per_output(g, f).sum();
}

double loss_gap_bound(double G, long N) {
  if (N < 1) throw InputError("N must be at least 1");
  return 2.0 * G / static_cast<double>(N);
}

double loss_gap_bound(const BoundConstants& constants, long N) {
  return loss_gap_bound(constants.G, N);
}

LossReport make_loss_report(const Generator& g, const Predictor& f, const Trajectory& traj) {
  LossReport r;
  r.N = traj.N();
  r.seed = traj.seed;
  r.empirical = empirical_loss(f, traj);
  r.infinite_past = infinite_past_loss(f, traj);
  r.generalization = generalization_loss(g, f);
  return r;
}

}  // namespace lticert
