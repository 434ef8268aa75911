#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace lticert {

template <class Term>
SeriesResult certified_power_series(const Mat& a, int power, double tail_scale,
                                    double tol, Term&& term) {
  require_square(a, "series matrix");
  if (power != 1 && power != 2) throw InputError("series power must be 1 or 2");
  if (!(tol > 0.0)) throw InputError("series tolerance must be positive");
  const double rho = spectral_radius(a, "series matrix");
  if (!(rho < 1.0)) {
    throw StabilityError("series matrix is not Schur (spectral radius " +
                         std::to_string(rho) + ")");
  }

  const auto n = a.rows();
  Mat ak = Mat::Identity(n, n);
  Mat next(n, n);
  // ||A^k||^power for every k seen; the last q of them form the tail window.
  std::vector<double> norms_p;
  long q = 0;
  double contraction_p = 0.0;
  double sum = 0.0;

  for (long k = 0; k < kMaxSeriesIterations; ++k) {
    const double nk = (k == 0) ? 1.0 : operator_norm_2(ak);
    sum += term(k, static_cast<const Mat&>(ak), nk);
    norms_p.push_back(power == 1 ? nk : nk * nk);

    if (q == 0 && k >= 1 && nk < 1.0) {
      q = k;
      contraction_p = norms_p.back();
    }
    if (q > 0) {
      const double window = std::accumulate(norms_p.end() - q, norms_p.end(), 0.0);
      const double tail = contraction_p == 0.0
                              ? 0.0
                              : tail_scale * window * contraction_p / (1.0 - contraction_p);
      if (tail <= tol) return SeriesResult{sum, k + 1, tail};
    }
    next.noalias() = a * ak;
    ak.swap(next);
  }
  throw ConvergenceError("power series did not reach tolerance within " +
                         std::to_string(kMaxSeriesIterations) + " terms");
}

}  // namespace lticert
