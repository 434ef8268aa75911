#pragma once

// Shared test fixtures: the reference two-state generator, its hypothesis
// classes, and hand-rolled random generators for property tests.

#include <cmath>
#include <random>

#include "lticert/lti.hpp"
#include "lticert/posterior.hpp"

namespace fx {

using lticert::FeatureMode;
using lticert::Generator;
using lticert::Mat;
using lticert::Predictor;
using lticert::Vec;

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Generator reference_generator() {
  Generator g;
  g.A = mat({{0.16, -0.3}, {0.0, -0.05}});
  g.K = mat({{0.33, -0.75}, {0.0, -0.09}});
  g.C = mat({{1.0, 1.0}, {0.0, 1.0}});
  g.Qe = mat({{0.9, 0.3}, {0.3, 4.15}});
  g.n_y = 1;
  g.n_u = 1;
  return g;
}

/// Case-1 class member (w = u) at theta.
inline Predictor case1(double theta) {
  return Predictor{mat({{theta, 0.43}, {0.0, 0.04}}), mat({{-0.72}, {-0.09}}),
                   mat({{1.0, 0.92}}), mat({{0.07}}), FeatureMode::InputOnly};
}

/// Case-2 class member (w = [y; u]) at theta.
inline Predictor case2(double theta) {
  return Predictor{mat({{theta, 0.12}, {0.0, 0.04}}), mat({{0.33, -0.73}, {0.0, -0.09}}),
                   mat({{1.0, 0.92}}), mat({{0.0, 0.07}}), FeatureMode::InputOutput};
}

inline lticert::ParamBox case_box(int which, double lo = -0.5, double hi = 0.5) {
  const Generator g = reference_generator();
  Predictor t = which == 1 ? case1(0.0) : case2(0.0);
  return lticert::ParamBox(t, {{'A', 0, 0}}, Vec::Constant(1, lo), Vec::Constant(1, hi), g.n_y,
                           g.n_u);
}

/// Hand-rolled random generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }

  Mat gaussian(int r, int c) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  }

  /// Random square matrix rescaled to spectral radius `rho`.
  Mat stable(int n, double rho) {
    Mat m = gaussian(n, n);
    const double r = lticert::spectral_radius(m);
    if (r > 0.0) m *= rho / r;
    return m;
  }

  Mat psd(int n, double ridge = 0.05) {
    const Mat l = gaussian(n, n);
    return l * l.transpose() + ridge * Mat::Identity(n, n);
  }

  /// Random valid generator: A Schur and A - K C Schur.
  Generator generator(int n_y = -1, int n_u = -1) {
    Generator g;
    g.n_y = n_y > 0 ? n_y : integer(1, 2);
    g.n_u = n_u > 0 ? n_u : integer(1, 2);
    const int n = integer(1, 3);
    const int m = g.n_y + g.n_u;
    g.A = stable(n, uniform(0.1, 0.85));
    g.C = gaussian(m, n);
    g.K = 0.5 * gaussian(n, m);
    while (lticert::spectral_radius(g.A - g.K * g.C) >= 0.9) g.K *= 0.5;
    g.Qe = psd(m);
    return g;
  }

  Predictor predictor(const Generator& g, FeatureMode mode) {
    const int nh = integer(1, 3);
    const int nw = lticert::feature_dim(mode, g.n_y, g.n_u);
    Predictor f;
    f.A = stable(nh, uniform(0.05, 0.85));
    f.B = 0.5 * gaussian(nh, nw);
    f.C = 0.5 * gaussian(g.n_y, nh);
    f.D = 0.3 * gaussian(g.n_y, nw);
    if (mode == FeatureMode::InputOutput) f.D.leftCols(g.n_y).setZero();
    f.mode = mode;
    return f;
  }

  FeatureMode mode() { return integer(0, 1) == 0 ? FeatureMode::InputOnly : FeatureMode::InputOutput; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace fx
