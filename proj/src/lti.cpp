#include "lticert/lti.hpp"

#include "lticert/rng.hpp"

namespace lticert {

namespace {

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void expect_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, std::string_view name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(name) + " must be " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + shape(m));
  }
}

bool is_psd(const Mat& q) {
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + q.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly);
  const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  return eig.eigenvalues().minCoeff() >= -1e-8 * norm;
}

}  // namespace

std::string_view to_string(FeatureMode mode) {
  return mode == FeatureMode::InputOnly ? "input-only" : "input-output";
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "input-only" || text == "InputOnly" || text == "u") return FeatureMode::InputOnly;
  if (text == "input-output" || text == "InputOutput" || text == "yu") {
    return FeatureMode::InputOutput;
  }
  throw InputError("unknown feature mode '" + std::string(text) +
                   "' (expected input-only or input-output)");
}

ErrorSystem ErrorSystem::output_row(int p) const {
  if (p < 0 || p >= C.rows()) throw DimensionError("output index out of range");
  return ErrorSystem{A, K, C.row(p), D.row(p)};
}

Mat Trajectory::features(FeatureMode mode) const {
  if (mode == FeatureMode::InputOnly) return u;
  Mat w(y.rows() + u.rows(), y.cols());
  w.topRows(y.rows()) = y;
  w.bottomRows(u.rows()) = u;
  return w;
}

GeneratorReport validate_generator(const Generator& g) {
  if (g.n_y < 1 || g.n_u < 1) throw DimensionError("generator needs n_y >= 1 and n_u >= 1");
  require_square(g.A, "A_g");
  const auto n = g.A.rows();
  const int m = g.m();
  expect_shape(g.K, n, m, "K_g");
  expect_shape(g.C, m, n, "C_g");
  expect_shape(g.Qe, m, m, "Q_e");
  require_finite(g.A, "A_g");
  require_finite(g.K, "K_g");
  require_finite(g.C, "C_g");
  require_finite(g.Qe, "Q_e");

  GeneratorReport report;
  report.rho_Ag = spectral_radius(g.A, "A_g");
  report.rho_closed = spectral_radius(g.A - g.K * g.C, "A_g - K_g C_g");
  report.qe_psd = is_psd(g.Qe);
  report.ok = report.rho_Ag < 1.0 && report.rho_closed < 1.0 && report.qe_psd;
  return report;
}

void require_valid_generator(const Generator& g) {
  const auto r = validate_generator(g);
  if (r.rho_Ag >= 1.0) {
    throw InputError("A_g is not Schur (spectral radius " + std::to_string(r.rho_Ag) + ")");
  }
  if (r.rho_closed >= 1.0) {
    throw InputError("A_g - K_g C_g is not Schur (spectral radius " +
                     std::to_string(r.rho_closed) + ")");
  }
  if (!r.qe_psd) throw InputError("Q_e is not symmetric positive semidefinite");
}

void validate_predictor(const Predictor& f, int n_y, int n_u) {
  require_square(f.A, "predictor A");
  const auto nh = f.A.rows();
  const int nw = feature_dim(f.mode, n_y, n_u);
  expect_shape(f.B, nh, nw, "predictor B");
  expect_shape(f.C, n_y, nh, "predictor C");
  expect_shape(f.D, n_y, nw, "predictor D");
  if (f.mode == FeatureMode::InputOutput && f.D.leftCols(n_y).cwiseAbs().maxCoeff() != 0.0) {
    throw InputError("predictor D must have zero y-columns under input-output features");
  }
  const double rho = spectral_radius(f.A, "predictor A");
  if (!(rho < 1.0)) {
    throw StabilityError("predictor A is not Schur (spectral radius " + std::to_string(rho) +
                         ")");
  }
}

Mat feature_output_matrix(const Generator& g, FeatureMode mode) {
  return mode == FeatureMode::InputOnly ? g.C2() : g.C;
}

Mat feature_selector(const Generator& g, FeatureMode mode) {
  const int m = g.m();
  if (mode == FeatureMode::InputOutput) return Mat::Identity(m, m);
  Mat s = Mat::Zero(g.n_u, m);
  s.rightCols(g.n_u).setIdentity();
  return s;
}

ErrorSystem build_error_system(const Generator& g, const Predictor& f) {
  validate_generator(g);
  validate_predictor(f, g.n_y, g.n_u);
  const int n = g.n();
  const int nh = f.n_hat();
  const int m = g.m();
  const Mat cw = feature_output_matrix(g, f.mode);
  const Mat s = feature_selector(g, f.mode);

  ErrorSystem es;
  es.A = Mat::Zero(n + nh, n + nh);
  es.A.topLeftCorner(n, n) = g.A;
  es.A.bottomLeftCorner(nh, n) = f.B * cw;
  es.A.bottomRightCorner(nh, nh) = f.A;

  es.K.resize(n + nh, m);
  es.K.topRows(n) = g.K;
  es.K.bottomRows(nh) = f.B * s;

  es.C.resize(g.n_y, n + nh);
  es.C.leftCols(n) = g.C1() - f.D * cw;
  es.C.rightCols(nh) = -f.C;

  es.D = Mat::Zero(g.n_y, m);
  es.D.leftCols(g.n_y).setIdentity();
  es.D -= f.D * s;
  return es;
}

Trajectory simulate(const Generator& g, long N, std::uint64_t seed,
                    const std::optional<Predictor>& predictor) {
  if (N < 1) throw InputError("trajectory length must be at least 1");
  require_valid_generator(g);
  const int n = g.n();
  const int m = g.m();
  CounterRng rng(seed);

  Trajectory traj;
  traj.seed = seed;
  traj.y.resize(g.n_y, N);
  traj.u.resize(g.n_u, N);
  traj.e.resize(m, N);

  Vec x(n);
  if (predictor) {
    const ErrorSystem es = build_error_system(g, *predictor);
    const Mat pe = solve_discrete_lyapunov(es.A, es.K * g.Qe * es.K.transpose());
    Vec xi(es.A.rows());
    rng.normals(xi);
    const Vec z0 = cholesky_psd(pe) * xi;
    x = z0.head(n);
    traj.predictor_state0 = z0.tail(predictor->n_hat());
    traj.joint_initial_state = z0;
    traj.predictor_mode = predictor->mode;
  } else {
    const Mat px = solve_discrete_lyapunov(g.A, g.K * g.Qe * g.K.transpose());
    Vec xi(n);
    rng.normals(xi);
    x = cholesky_psd(px) * xi;
  }

  const Mat lq = cholesky_psd(g.Qe);
  const Mat c1 = g.C1();
  const Mat c2 = g.C2();
  Vec xi(m);
  Vec e(m);
  Vec next(n);
  for (long t = 0; t < N; ++t) {
    rng.normals(xi);
    e.noalias() = lq * xi;
    traj.e.col(t) = e;
    traj.y.col(t).noalias() = c1 * x + e.head(g.n_y);
    traj.u.col(t).noalias() = c2 * x + e.tail(g.n_u);
    next.noalias() = g.A * x + g.K * e;
    x.swap(next);
  }
  return traj;
}

Predictor predictor_from_innovation_form(const Mat& a, const Mat& b, const Mat& c,
                                         const Mat& d, const Mat& k, FeatureMode mode) {
  require_square(a, "innovation A");
  const auto n = a.rows();
  const auto ny = c.rows();
  const auto nu = b.cols();
  expect_shape(c, ny, n, "innovation C");
  expect_shape(d, ny, nu, "innovation D");
  const double rho = spectral_radius(a, "innovation A");
  if (!(rho < 1.0)) throw StabilityError("innovation-form A is not Schur");

  if (mode == FeatureMode::InputOnly) return Predictor{a, b, c, d, mode};

  expect_shape(k, n, ny, "innovation K");
  Predictor f;
  f.mode = mode;
  f.A = a - k * c;
  const double rho_closed = spectral_radius(f.A, "A - K C");
  if (!(rho_closed < 1.0)) {
    throw StabilityError("A - K C is not Schur (spectral radius " +
                         std::to_string(rho_closed) + ")");
  }
  f.B.resize(n, ny + nu);
  f.B.leftCols(ny) = k;
  f.B.rightCols(nu) = b - k * d;
  f.C = c;
  f.D = Mat::Zero(ny, ny + nu);
  f.D.rightCols(nu) = d;
  return f;
}

InnovationForm invert_predictor_to_innovation_form(const Predictor& f) {
  const int ny = f.n_y();
  if (f.mode == FeatureMode::InputOnly) {
    return InnovationForm{f.A, f.B, f.C, f.D, Mat::Zero(f.n_hat(), ny)};
  }
  const int nu = f.n_w() - ny;
  if (nu < 0) throw DimensionError("predictor features narrower than its output");
  InnovationForm s;
  s.K = f.B.leftCols(ny);
  s.A = f.A + s.K * f.C;
  s.B = f.B.rightCols(nu) + s.K * f.D.rightCols(nu);
  s.C = f.C;
  s.D = f.D.rightCols(nu);
  return s;
}

CasePredictors derive_case_predictors(const Generator& g) {
  require_valid_generator(g);
  const int n = g.n();
  const int ny = g.n_y;
  const int nu = g.n_u;

  // Find a state split x = [x1; x2] with u driven by x2 only.
  int n1 = -1;
  for (int n2 = 1; n2 < n && n1 < 0; ++n2) {
    const int cand = n - n2;
    const bool zero_a = g.A.bottomLeftCorner(n2, cand).cwiseAbs().maxCoeff() == 0.0;
    const bool zero_k = g.K.bottomLeftCorner(n2, ny).cwiseAbs().maxCoeff() == 0.0;
    const bool zero_c = g.C.bottomLeftCorner(nu, cand).cwiseAbs().maxCoeff() == 0.0;
    if (zero_a && zero_k && zero_c) n1 = cand;
  }
  if (n1 < 0) {
    throw UnsupportedStructureError(
        "generator is not block upper triangular in (A_g, K_g, C_g); the case predictors "
        "need a feedback-free input");
  }
  const int n2 = n - n1;

  const Mat q12 = g.Qe.topRightCorner(ny, nu);
  const Mat q22 = g.Qe.bottomRightCorner(nu, nu);
  Eigen::FullPivLU<Mat> lu(q22);
  if (!lu.isInvertible()) throw InputError("input innovation covariance Q_e,22 is singular");
  const Mat d0 = lu.solve(q12.transpose()).transpose();

  const Mat a11 = g.A.topLeftCorner(n1, n1);
  const Mat a12 = g.A.topRightCorner(n1, n2);
  const Mat a22 = g.A.bottomRightCorner(n2, n2);
  const Mat k11 = g.K.topLeftCorner(n1, ny);
  const Mat k12 = g.K.topRightCorner(n1, nu);
  const Mat k22 = g.K.bottomRightCorner(n2, nu);
  const Mat c11 = g.C.topLeftCorner(ny, n1);
  const Mat c12 = g.C.topRightCorner(ny, n2);
  const Mat c22 = g.C.bottomRightCorner(nu, n2);

  Mat a_bar = Mat::Zero(n, n);
  a_bar.topLeftCorner(n1, n1) = a11;
  a_bar.topRightCorner(n1, n2) = a12 - k12 * c22 - k11 * d0 * c22;
  a_bar.bottomRightCorner(n2, n2) = a22 - k22 * c22;

  Mat k_u(n, nu);
  k_u.topRows(n1) = k12 + k11 * d0;
  k_u.bottomRows(n2) = k22;

  Mat k_y = Mat::Zero(n, ny);
  k_y.topRows(n1) = k11;

  Mat c_bar(ny, n);
  c_bar.leftCols(n1) = c11;
  c_bar.rightCols(n2) = c12 - d0 * c22;

  CasePredictors out;
  out.d0 = d0;
  out.input_only = predictor_from_innovation_form(a_bar, k_u, c_bar, d0, Mat::Zero(n, ny),
                                                  FeatureMode::InputOnly);
  out.input_output =
      predictor_from_innovation_form(a_bar, k_u, c_bar, d0, k_y, FeatureMode::InputOutput);
  return out;
}

double h2_distance(const StateSpace& s1, const StateSpace& s2, double tol) {
  require_square(s1.A, "system 1 A");
  require_square(s2.A, "system 2 A");
  if (s1.B.cols() != s2.B.cols() || s1.C.rows() != s2.C.rows() ||
      s1.D.rows() != s2.D.rows() || s1.D.cols() != s2.D.cols()) {
    throw DimensionError("h2_distance: input/output sizes differ");
  }
  expect_shape(s1.B, s1.A.rows(), s1.D.cols(), "system 1 B");
  expect_shape(s2.B, s2.A.rows(), s2.D.cols(), "system 2 B");
  expect_shape(s1.C, s1.D.rows(), s1.A.rows(), "system 1 C");
  expect_shape(s2.C, s2.D.rows(), s2.A.rows(), "system 2 C");
  const auto n1 = s1.A.rows();
  const auto n2 = s2.A.rows();
  if (!(spectral_radius(s1.A) < 1.0) || !(spectral_radius(s2.A) < 1.0)) {
    throw StabilityError("h2_distance needs two Schur systems");
  }

  // Difference system: Markov parameters C1 A1^k B1 - C2 A2^k B2.
  Mat a = Mat::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = s1.A;
  a.bottomRightCorner(n2, n2) = s2.A;
  Mat b(n1 + n2, s1.B.cols());
  b.topRows(n1) = s1.B;
  b.bottomRows(n2) = s2.B;
  Mat c(s1.C.rows(), n1 + n2);
  c.leftCols(n1) = s1.C;
  c.rightCols(n2) = -s2.C;

  const double scale = c.squaredNorm() * b.squaredNorm();
  const auto series = certified_power_series(
      a, 2, scale, tol, [&](long, const Mat& ak, double) { return (c * ak * b).squaredNorm(); });
  return std::sqrt((s1.D - s2.D).squaredNorm() + series.value);
}

}  // namespace lticert
