#pragma once

// Dense real-matrix numerics shared by every other module.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string_view>

#include "lticert/errors.hpp"

namespace lticert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kDefaultSeriesTol = 1e-12;
inline constexpr long kMaxSeriesIterations = 1'000'000;

/// Truncated evaluation of a nonnegative series with a certified tail bound.
struct SeriesResult {
  double value = 0.0;
  long terms_used = 0;
  double truncation_bound = 0.0;
};

/// Throws InputError if any entry of `m` is NaN or infinite.
void require_finite(const Mat& m, std::string_view name);

/// Throws DimensionError unless `m` is square.
void require_square(const Mat& m, std::string_view name);

/// Largest eigenvalue modulus. Throws NumericError if the eigensolver fails.
double spectral_radius(const Mat& m, std::string_view name = "matrix");

/// Largest singular value.
double operator_norm_2(const Mat& m);

/// Largest eigenvalue of a symmetric matrix.
double max_eigenvalue_symmetric(const Mat& m);

bool is_schur(const Mat& m);

/// Sum over k >= 0 of ||M^k||_2^power, truncated once the certified tail is
/// below `tol`. The tail is bounded through the first power q with
/// ||M^q||_2 < 1: ||M^(k0 + l q)|| <= ||M^k0|| ||M^q||^l.
SeriesResult geometric_norm_sum(const Mat& m, int power, double tol = kDefaultSeriesTol);

/// Solves P = A P A^T + Q by the doubling iteration.
Mat solve_discrete_lyapunov(const Mat& a, const Mat& q, double tol = kDefaultSeriesTol);

/// Lower-triangular L with L L^T = Q for symmetric positive semidefinite Q.
/// Zero pivots produce zero columns, so singular covariances are accepted.
Mat cholesky_psd(const Mat& q);

/// Generic certified power series: sum over k of term(k, A^k, ||A^k||_2),
/// where every term must satisfy term_k <= tail_scale * ||A^k||_2^power.
/// Stops as soon as the certified tail falls below `tol`.
template <class Term>
SeriesResult certified_power_series(const Mat& a, int power, double tail_scale,
                                    double tol, Term&& term);

}  // namespace lticert

#include "lticert/detail/series_impl.hpp"
