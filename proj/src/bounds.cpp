#include "lticert/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lticert/csv.hpp"

namespace lticert {

std::string_view to_string(KwMethod method) {
  return method == KwMethod::LemmaBound ? "lemma-bound" : "exact-lag-covariance";
}

KwMethod parse_kw_method(std::string_view text) {
  if (text == "lemma-bound" || text == "LemmaBound" || text == "lemma") return KwMethod::LemmaBound;
  if (text == "exact-lag-covariance" || text == "ExactLagCovariance" || text == "exact") {
    return KwMethod::ExactLagCovariance;
  }
  throw InputError("unknown kw_method '" + std::string(text) +
                   "' (expected lemma-bound or exact-lag-covariance)");
}

double log_factorial(int n) {
  if (n < 0) throw InputError("factorial of a negative number");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

namespace {

// sup_{k >= 0} ||C A^k M||_2, certified through a contracting power of A.
double sup_lag_norm(const Mat& a, const Mat& c, const Mat& m, double tol) {
  const double scale = operator_norm_2(c) * operator_norm_2(m);
  const auto n = a.rows();
  Mat ak = Mat::Identity(n, n);
  std::vector<double> norms;
  long q = 0;
  double contraction = 0.0;
  double sup = 0.0;
  for (long k = 0; k < kMaxSeriesIterations; ++k) {
    const double nk = (k == 0) ? 1.0 : operator_norm_2(ak);
    norms.push_back(nk);
    sup = std::max(sup, operator_norm_2(c * ak * m));
    if (q == 0 && k >= 1 && nk < 1.0) {
      q = k;
      contraction = nk;
    }
    if (q > 0) {
      const double window = *std::max_element(norms.end() - q, norms.end());
      const double tail = scale * window * contraction;
      if (tail <= std::max(tol, sup)) return sup;
    }
    ak = (a * ak).eval();
  }
  throw ConvergenceError("lag covariance supremum did not converge");
}

}  // namespace

double compute_Kw(const Generator& g, FeatureMode mode, KwMethod method, double tol) {
  require_valid_generator(g);
  const Mat cw = feature_output_matrix(g, mode);
  const double mu = max_eigenvalue_symmetric(g.Qe);

  if (method == KwMethod::LemmaBound) {
    const double s1 = geometric_norm_sum(g.A, 1, tol).value;
    const double cn = operator_norm_2(cw);
    const double kn = operator_norm_2(g.K);
    const double kw1 = (cn * cn * kn * kn + cn * kn) * s1 * s1 * s1 * mu;
    const double kw2 = (cn * cn * kn * kn + 1.0) * s1 * s1 * mu;
    return std::max(kw1, kw2);
  }

  const Mat s = feature_selector(g, mode);
  const Mat pg = solve_discrete_lyapunov(g.A, g.K * g.Qe * g.K.transpose(), tol);
  const Mat lag0 = cw * pg * cw.transpose() + s * g.Qe * s.transpose();
  // Lag k > 0: C_w A^(k-1) (A P C_w^T + K Q_e S^T).
  const Mat m = g.A * pg * cw.transpose() + g.K * g.Qe * s.transpose();
  return std::max(operator_norm_2(lag0), sup_lag_norm(g.A, cw, m, tol));
}

FeatureConstants feature_constants(const Generator& g, FeatureMode mode, KwMethod method,
                                   double tol) {
  FeatureConstants fc;
  fc.Kw = compute_Kw(g, mode, method, tol);
  fc.mu_max = max_eigenvalue_symmetric(g.Qe);
  fc.m = g.m();
  fc.mode = mode;
  fc.method = method;
  return fc;
}

double error_gain(const ErrorSystem& es, double tol) {
  const double scale = operator_norm_2(es.C) * operator_norm_2(es.K);
  const auto series =
      certified_power_series(es.A, 1, scale, tol, [&](long, const Mat& ak, double) {
        return operator_norm_2(es.C * ak * es.K);
      });
  return operator_norm_2(es.D) + series.value;
}

BoundConstants compute_constants(const Generator& g, const Predictor& f,
                                 const FeatureConstants& features, double tol, int output) {
  if (features.mode != f.mode) throw InputError("feature constants were computed for another mode");
  ErrorSystem es = build_error_system(g, f);
  Mat c_hat = f.C;
  Mat d_hat = f.D;
  if (output >= 0) {
    es = es.output_row(output);
    c_hat = f.C.row(output);
    d_hat = f.D.row(output);
  }
  // Series tolerances are tightened so the products below stay within tol.
  const double inner_tol = 1e-3 * tol;

  const double ce = operator_norm_2(es.C);
  const double ke = operator_norm_2(es.K);
  const double de = operator_norm_2(es.D);
  const double sum_ae_sq =
      geometric_norm_sum(es.A, 2, inner_tol / (1.0 + ce * ce * ke * ke)).value;
  const double ch = operator_norm_2(c_hat);
  const double bh = operator_norm_2(f.B);
  const double sum_ah = geometric_norm_sum(f.A, 1, inner_tol / (1.0 + ch * bh)).value;

  BoundConstants k;
  k.Ge = error_gain(es, inner_tol);
  k.Gm1 = std::sqrt(2.0 * sum_ae_sq + 4.0);
  k.G0 = sum_ah;
  k.G1 = std::sqrt(de * de + ce * ce * ke * ke * sum_ae_sq);
  k.G2 = operator_norm_2(d_hat) + ch * bh * sum_ah;
  k.G3 = std::sqrt(features.mu_max * features.Kw);
  k.G = k.Gm1 * k.G0 * k.G1 * k.G2 * k.G3;
  k.Kw = features.Kw;
  k.mu_max = features.mu_max;
  k.m = features.m;
  k.kw_method = features.method;
  return k;
}

BoundConstants compute_constants(const Generator& g, const Predictor& f, KwMethod method,
                                 double tol, int output) {
  return compute_constants(g, f, feature_constants(g, f.mode, method, tol), tol, output);
}

double lambda_max(double Ge_sup, double mu_max, int m) {
  if (!(Ge_sup > 0.0) || !(mu_max > 0.0) || m < 1) {
    throw InputError("lambda_max needs positive Ge_sup, mu_max and m");
  }
  return 1.0 / (3.0 * (m + 1) * mu_max * Ge_sup * Ge_sup);
}

namespace {

void check_common(long N, double delta) {
  if (N < 1) throw InputError("N must be at least 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
}

// (m+1)! (3 K)^2 / (1 - 3 (m+1) K) with K = lambda mu_max Ge^2.
double mgf_term(double lambda, double Ge, double mu_max, int m) {
  const double k_mu = lambda * mu_max * Ge * Ge;
  const double denom = 1.0 - 3.0 * (m + 1) * k_mu;
  if (!(denom > 0.0)) {
    throw ConstraintError("lambda = " + csv::num(lambda) + " violates lambda < lambda_max = " +
                          csv::num(lambda_max(Ge, mu_max, m)));
  }
  return std::exp(log_factorial(m + 1)) * 9.0 * k_mu * k_mu / denom;
}

}  // namespace

double psi_hat(const PsiSource& source, double lambda, long N, double mu_max, int m) {
  if (!(lambda > 0.0)) throw ConstraintError("lambda must be positive");
  double expectation = 0.0;
  if (const auto* prior = std::get_if<PsiFromPriorSamples>(&source)) {
    if (prior->Ge.empty()) throw InputError("Psi^ needs at least one prior sample");
    for (double ge : prior->Ge) expectation += mgf_term(lambda, ge, mu_max, m);
    expectation /= static_cast<double>(prior->Ge.size());
  } else {
    expectation = mgf_term(lambda, std::get<PsiFromGeSup>(source).Ge_sup, mu_max, m);
  }
  return std::log1p(4.0 / static_cast<double>(N) * expectation);
}

KlBoundResult kl_bound(long N, double delta, double lambda, double EG_rho, double KL,
                       const PsiSource& psi, double mu_max, int m) {
  check_common(N, delta);
  KlBoundResult b;
  b.N = N;
  b.delta = delta;
  b.lambda = lambda;
  b.confidence = 1.0 - 2.0 * delta;
  b.gap_term = 2.0 / (delta * static_cast<double>(N)) * EG_rho;
  b.kl_term = KL;
  b.psi_hat = psi_hat(psi, lambda, N, mu_max, m);
  b.r_hat = b.gap_term + (b.kl_term + std::log(1.0 / delta) + b.psi_hat) / lambda;
  return b;
}

double renyi_phi(int r, double Dr, double EGe2r_pi, double mu_max, int m) {
  if (r < 2 || r % 2 != 0) throw InputError("Renyi order r must be an even integer >= 2");
  const double log_coef = (log_factorial(m + r - 1) + std::log(static_cast<double>(r - 1))) / r;
  return 3.0 * mu_max * std::exp(log_coef) * Dr * std::pow(EGe2r_pi, 1.0 / r);
}

RenyiBoundResult renyi_bound(long N, double delta, int r, double EG_rho, double Dr,
                             double EGe2r_pi, double mu_max, int m) {
  check_common(N, delta);
  RenyiBoundResult b;
  b.N = N;
  b.delta = delta;
  b.r = r;
  b.divergence = Dr;
  b.confidence = 1.0 - 2.0 * delta;
  b.gap_term = 2.0 / (delta * static_cast<double>(N)) * EG_rho;
  b.phi = renyi_phi(r, Dr, EGe2r_pi, mu_max, m);
  b.r_hat = b.gap_term + std::pow(4.0 / (delta * static_cast<double>(N)), 1.0 / r) * b.phi;
  return b;
}

MomentDiagnostics moment_diagnostics(int r, double Ge, double mu_max, int m, long N,
                                     std::optional<double> lambda) {
  if (r < 2 || r % 2 != 0) throw InputError("moment order r must be an even integer >= 2");
  if (N < 1) throw InputError("N must be at least 1");
  MomentDiagnostics d;
  d.sigma_r = std::exp(r * std::log(3.0 * mu_max) + log_factorial(m + r - 1));
  d.raw_moment_bound = d.sigma_r * 4.0 * (r - 1) * std::pow(Ge, 2.0 * r) / static_cast<double>(N);
  if (lambda) {
    const double k_mu = *lambda * mu_max * Ge * Ge;
    const double denom = 1.0 - 3.0 * (m + 1) * k_mu;
    if (!(denom > 0.0)) {
      throw ConstraintError("lambda = " + csv::num(*lambda) +
                            " violates the moment generating function condition");
    }
    d.mgf_bound = 1.0 + 2.0 / static_cast<double>(N) * std::exp(log_factorial(m + 1)) * 9.0 *
                            k_mu * k_mu / denom;
  }
  return d;
}

MultiOutputBound multi_output_bound(std::span<const OutputBound> per_output, double delta,
                                    int n_y) {
  if (n_y < 1 || static_cast<int>(per_output.size()) != n_y) {
    throw InputError("multi_output_bound needs one entry per output");
  }
  MultiOutputBound out;
  for (const auto& p : per_output) out.total_bound += p.empirical + p.r_hat;
  out.confidence = 1.0 - 2.0 * n_y * delta;
  out.vacuous = 2.0 * n_y * delta >= 1.0;
  return out;
}

std::string bound_csv_header() {
  return "N,delta,lambda_or_r,gap_term,divergence_term,psi_or_phi,r_hat,confidence,kind";
}

std::string to_csv_row(const KlBoundResult& b) {
  return csv::join({std::to_string(b.N), csv::num(b.delta), csv::num(b.lambda),
                    csv::num(b.gap_term), csv::num(b.kl_term), csv::num(b.psi_hat),
                    csv::num(b.r_hat), csv::num(b.confidence), "KL"});
}

std::string to_csv_row(const RenyiBoundResult& b) {
  return csv::join({std::to_string(b.N), csv::num(b.delta), std::to_string(b.r),
                    csv::num(b.gap_term), csv::num(b.divergence), csv::num(b.phi),
                    csv::num(b.r_hat), csv::num(b.confidence), "Renyi"});
}

}  // namespace lticert
