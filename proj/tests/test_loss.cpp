#include <doctest.h>

#include <vector>

#include "fixtures.hpp"
#include "lticert/bounds.hpp"
#include "lticert/loss.hpp"

using namespace lticert;
using fx::mat;

namespace {

// Independent plain-loop implementation of the finite-past empirical loss.
double direct_empirical_loss(const Predictor& f, const Mat& y, const Mat& w) {
  const long n = f.A.rows();
  const long nw = f.B.cols();
  const long ny = f.C.rows();
  std::vector<double> x(n, 0.0), next(n, 0.0);
  double total = 0.0;
  for (long t = 0; t < y.cols(); ++t) {
    for (long p = 0; p < ny; ++p) {
      double yh = 0.0;
      for (long j = 0; j < n; ++j) yh += f.C(p, j) * x[j];
      for (long j = 0; j < nw; ++j) yh += f.D(p, j) * w(j, t);
      total += (y(p, t) - yh) * (y(p, t) - yh);
    }
    for (long i = 0; i < n; ++i) {
      double v = 0.0;
      for (long j = 0; j < n; ++j) v += f.A(i, j) * x[j];
      for (long j = 0; j < nw; ++j) v += f.B(i, j) * w(j, t);
      next[i] = v;
    }
    x.swap(next);
  }
  return total / static_cast<double>(y.cols());
}

Predictor similar(const Predictor& f, const Mat& t) {
  const Mat ti = t.inverse();
  return Predictor{ti * f.A * t, ti * f.B, f.C * t, f.D, f.mode};
}

}  // namespace

TEST_CASE("finite_past_predict examples") {
  const Predictor scalar{mat({{0.5}}), mat({{1.0}}), mat({{1.0}}), mat({{0.0}}),
                         FeatureMode::InputOnly};
  const Mat w = mat({{1.0, 0.0, 0.0}});
  CHECK(finite_past_predict(scalar, w, 0)(0) == 0.0);
  CHECK(finite_past_predict(scalar, w, 1)(0) == 1.0);
  CHECK(finite_past_predict(scalar, w, 2)(0) == 0.5);

  Predictor zero = scalar;
  zero.C.setZero();
  for (long t = 0; t < 3; ++t) CHECK(finite_past_predict(zero, w, t)(0) == 0.0);

  const auto f = fx::case2(0.1);
  const Mat w2 = mat({{0.3, 1.0}, {-2.0, 0.5}});
  CHECK((finite_past_predict(f, w2, 0) - f.D * w2.col(0)).norm() == 0.0);
}

TEST_CASE("empirical_loss examples") {
  const auto g = fx::reference_generator();
  const auto traj = simulate(g, 500, 3);
  Predictor zero = fx::case1(0.0);
  zero.C.setZero();
  zero.D.setZero();
  CHECK(empirical_loss(zero, traj) ==
        doctest::Approx(traj.y.squaredNorm() / 500.0).epsilon(1e-13));

  // Noiseless: y is produced by an exact deterministic model of u.
  const Predictor model{mat({{0.6, 0.1}, {0.0, -0.3}}), mat({{1.0}, {0.5}}), mat({{1.0, -1.0}}),
                        mat({{0.2}}), FeatureMode::InputOnly};
  Trajectory t;
  t.u = Mat::Zero(1, 100);
  for (long i = 0; i < 100; ++i) t.u(0, i) = std::sin(0.3 * i);
  t.y = Mat::Zero(1, 100);
  for (long i = 0; i < 100; ++i) t.y.col(i) = finite_past_predict(model, t.u, i);
  t.e = Mat::Zero(2, 100);
  CHECK(empirical_loss(model, t) < 1e-25);
}

TEST_CASE("empirical_loss matches an independent implementation at N = 1e5") {
  const auto g = fx::reference_generator();
  const auto f = fx::case1(0.16);
  const auto traj = simulate(g, 100000, 2024);
  const double direct = direct_empirical_loss(f, traj.y, traj.features(f.mode));
  CHECK(std::abs(empirical_loss(f, traj) - direct) <= 1e-12 * direct);

  const auto f2 = fx::case2(-0.1);
  const double direct2 = direct_empirical_loss(f2, traj.y, traj.features(f2.mode));
  CHECK(std::abs(empirical_loss(f2, traj) - direct2) <= 1e-12 * direct2);
}

TEST_CASE("property: empirical loss is nonnegative and matches the finite-past recursion") {
  fx::Gen gen(31);
  for (int i = 0; i < 50; ++i) {
    const auto g = gen.generator();
    const auto f = gen.predictor(g, gen.mode());
    const auto traj = simulate(g, 40, 900 + i);
    const double l = empirical_loss(f, traj);
    CHECK(l >= 0.0);
    const Mat w = traj.features(f.mode);
    double s = 0.0;
    for (long t = 0; t < traj.N(); ++t)
      s += (traj.y.col(t) - finite_past_predict(f, w, t)).squaredNorm();
    CHECK(l == doctest::Approx(s / 40.0).epsilon(1e-12));
    CHECK(empirical_loss_per_output(f, traj).sum() == doctest::Approx(l).epsilon(1e-12));
  }
}

TEST_CASE("infinite_past_loss") {
  const auto g = fx::reference_generator();
  const auto f = fx::case1(0.16);
  CHECK_THROWS_AS(infinite_past_loss(f, simulate(g, 10, 1)), InputError);

  auto quiet = g;
  quiet.Qe.setZero();
  CHECK(infinite_past_loss(f, simulate(quiet, 20, 1, f)) == 0.0);

  const auto one = simulate(g, 1, 8, f);
  const auto es = build_error_system(g, f);
  const double r = (es.C * *one.joint_initial_state + es.D * one.e.col(0))(0);
  CHECK(infinite_past_loss(f, one) == doctest::Approx(r * r).epsilon(1e-12));

  const auto rep = make_loss_report(g, f, simulate(g, 100, 4, f));
  CHECK(rep.N == 100);
  CHECK(rep.seed == 4);
  CHECK(rep.empirical >= 0.0);
  CHECK(rep.infinite_past >= 0.0);
  CHECK(rep.generalization == doctest::Approx(generalization_loss(g, f)));
  CHECK(LossReport::csv_header() == "N,empirical,infinite_past,generalization,seed");
}

TEST_CASE("generalization loss examples") {
  const auto g = fx::reference_generator();
  const auto f2 = derive_case_predictors(g).input_output;
  CHECK(std::abs(generalization_loss(g, f2) - (0.9 - 0.09 / 4.15)) < 1e-10);
  // The rounded class member omits the -K_y D_0 input correction, so it sits above the optimum.
  CHECK(generalization_loss(g, fx::case2(-0.17)) > generalization_loss(g, f2));

  auto quiet = g;
  quiet.Qe.setZero();
  CHECK(generalization_loss(quiet, fx::case1(0.2)) == 0.0);
}

TEST_CASE("property: generalization loss is invariant under similarity transforms") {
  fx::Gen gen(32);
  for (int i = 0; i < 100; ++i) {
    const auto g = gen.generator();
    const auto f = gen.predictor(g, gen.mode());
    const int n = f.n_hat();
    const Mat t = gen.gaussian(n, n) + 3.0 * Mat::Identity(n, n);
    const double a = generalization_loss(g, f);
    const double b = generalization_loss(g, similar(f, t));
    CHECK(std::abs(a - b) <= 1e-10 * (1.0 + a));
    CHECK(generalization_loss_per_output(g, f).sum() == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("loss_gap_bound arithmetic") {
  CHECK(loss_gap_bound(10.0, 100) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(loss_gap_bound(10.0, 200) == doctest::Approx(0.1).epsilon(1e-15));
  BoundConstants c;
  c.G = 3.0;
  CHECK(loss_gap_bound(c, 3) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("property: mean |V_N - L^_N| decreases with N and stays under 2G/N") {
  const auto g = fx::reference_generator();
  const auto f = fx::case1(0.16);
  const double G = compute_constants(g, f).G;
  double prev = 1e300;
  for (long N : {20L, 50L, 200L}) {
    double mean_gap = 0.0;
    const int seeds = 400;
    for (int s = 0; s < seeds; ++s) {
      const auto traj = simulate(g, N, 10'000 + s, f);
      mean_gap += std::abs(infinite_past_loss(f, traj) - empirical_loss(f, traj)) / seeds;
    }
    CHECK(mean_gap <= loss_gap_bound(G, N));
    CHECK(mean_gap < prev);
    prev = mean_gap;
  }
}
