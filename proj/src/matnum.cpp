#include "lticert/matnum.hpp"

#include <algorithm>
#include <string>

namespace lticert {

void require_finite(const Mat& m, std::string_view name) {
  if (!m.allFinite()) throw InputError(std::string(name) + " has non-finite entries");
}

void require_square(const Mat& m, std::string_view name) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(name) + " must be square and non-empty, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

double spectral_radius(const Mat& m, std::string_view name) {
  require_square(m, name);
  require_finite(m, name);
  if (m.rows() == 1) return std::abs(m(0, 0));
  if (m.rows() == 2) {
    // Closed form keeps the hot 2x2 path away from the Hessenberg QR.
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = 0.25 * tr * tr - det;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      return std::max(std::abs(0.5 * tr + s), std::abs(0.5 * tr - s));
    }
    return std::sqrt(det);  // complex pair, |lambda|^2 = det
  }
  Eigen::EigenSolver<Mat> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalue iteration did not converge for " + std::string(name));
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm_2(const Mat& m) {
  if (m.size() == 0) return 0.0;
  require_finite(m, "matrix");
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double max_eigenvalue_symmetric(const Mat& m) {
  require_square(m, "symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Mat> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge");
  }
  return solver.eigenvalues().maxCoeff();
}

bool is_schur(const Mat& m) { return spectral_radius(m) < 1.0; }

SeriesResult geometric_norm_sum(const Mat& m, int power, double tol) {
  return certified_power_series(m, power, 1.0, tol, [power](long, const Mat&, double nk) {
    return power == 1 ? nk : nk * nk;
  });
}

namespace {

void require_symmetric(const Mat& q, std::string_view name) {
  const double scale = 1.0 + q.cwiseAbs().maxCoeff();
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InputError(std::string(name) + " is not symmetric");
  }
}

}  // namespace

Mat solve_discrete_lyapunov(const Mat& a, const Mat& q, double tol) {
  require_square(a, "Lyapunov A");
  require_square(q, "Lyapunov Q");
  if (a.rows() != q.rows()) throw DimensionError("Lyapunov A and Q sizes differ");
  require_finite(q, "Lyapunov Q");
  require_symmetric(q, "Lyapunov Q");
  const double rho = spectral_radius(a, "Lyapunov A");
  if (!(rho < 1.0)) {
    throw StabilityError("Lyapunov A is not Schur (spectral radius " + std::to_string(rho) +
                         ")");
  }

  const double target = tol * (1.0 + operator_norm_2(q));
  Mat p = q;
  Mat ak = a;
  for (int it = 0; it < 200; ++it) {
    p += ak * p * ak.transpose();
    p = 0.5 * (p + p.transpose()).eval();
    ak = (ak * ak).eval();
    const Mat residual = p - a * p * a.transpose() - q;
    if (operator_norm_2(residual) <= target) return p;
  }
  throw ConvergenceError("Lyapunov doubling iteration did not reach tolerance");
}

Mat cholesky_psd(const Mat& q) {
  require_square(q, "covariance");
  require_finite(q, "covariance");
  require_symmetric(q, "covariance");
  const Mat qs = 0.5 * (q + q.transpose());
  const auto n = qs.rows();

  Eigen::SelfAdjointEigenSolver<Mat> eig(qs, Eigen::EigenvaluesOnly);
  const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-8 * norm) {
    throw InputError("covariance is indefinite (min eigenvalue " +
                     std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }

  const double pivot_floor = 1e-13 * std::max(norm, std::numeric_limits<double>::min());
  Mat l = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = qs(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= pivot_floor) continue;  // zero column
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (qs(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

}  // namespace lticert
