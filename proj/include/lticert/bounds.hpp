#pragma once

// Bound constants and the two PAC-Bayesian-like generalization bounds
// (KL-divergence and Renyi-divergence forms) for LTI predictors.
//
// Constant bookkeeping differs between the bound formulas and the moment
// estimates behind them: Psi^ carries 4/N where the MGF estimate has 2/N, and
// the Renyi Phi carries (r-1) where the raw-moment estimate has 4(r-1).
// kl_bound/renyi_bound use the bound formulas, moment_diagnostics the moment
// estimates; neither is adjusted to agree with the other.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lticert/constants.hpp"
#include "lticert/lti.hpp"

namespace lticert {

/// Feature-process quantities shared by every predictor of a class.
struct FeatureConstants {
  double Kw = 0.0;
  double mu_max = 0.0;
  int m = 0;
  FeatureMode mode = FeatureMode::InputOnly;
  KwMethod method = KwMethod::ExactLagCovariance;
};

/// Upper bound on ||E[w(t) w(t-k)^T]||_2 over all lags k.
double compute_Kw(const Generator& g, FeatureMode mode, KwMethod method,
                  double tol = kDefaultSeriesTol);

FeatureConstants feature_constants(const Generator& g, FeatureMode mode, KwMethod method,
                                   double tol = kDefaultSeriesTol);

/// ||D_e||_2 + sum_k ||C_e A_e^k K_e||_2.
double error_gain(const ErrorSystem& es, double tol = kDefaultSeriesTol);

/// All predictor constants. `output` selects one output row (multi-output
/// decomposition); -1 uses the full output.
BoundConstants compute_constants(const Generator& g, const Predictor& f,
                                 const FeatureConstants& features,
                                 double tol = kDefaultSeriesTol, int output = -1);
BoundConstants compute_constants(const Generator& g, const Predictor& f,
                                 KwMethod method = KwMethod::ExactLagCovariance,
                                 double tol = kDefaultSeriesTol, int output = -1);

/// Largest admissible lambda for the KL bound: (3(m+1) mu_max Ge_sup^2)^-1.
double lambda_max(double Ge_sup, double mu_max, int m);

struct KlBoundResult {
  double r_hat = 0.0;
  double gap_term = 0.0;
  double kl_term = 0.0;
  double psi_hat = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  long N = 0;
  double confidence = 0.0;
};

struct RenyiBoundResult {
  double r_hat = 0.0;
  double gap_term = 0.0;
  double phi = 0.0;
  double divergence = 0.0;  // D_r
  int r = 2;
  double delta = 0.0;
  long N = 0;
  double confidence = 0.0;
};

/// Psi^ from G_e values of prior samples (average form).
struct PsiFromPriorSamples {
  std::span<const double> Ge;
};
/// Psi^ from the class supremum G_e(Theta) (upper form).
struct PsiFromGeSup {
  double Ge_sup = 0.0;
};
using PsiSource = std::variant<PsiFromPriorSamples, PsiFromGeSup>;

double psi_hat(const PsiSource& source, double lambda, long N, double mu_max, int m);

KlBoundResult kl_bound(long N, double delta, double lambda, double EG_rho, double KL,
                       const PsiSource& psi, double mu_max, int m);

/// Phi(pi, r) = 3 mu_max [(m+r-1)! (r-1)]^(1/r) D_r (E_pi G_e^2r)^(1/r).
double renyi_phi(int r, double Dr, double EGe2r_pi, double mu_max, int m);

RenyiBoundResult renyi_bound(long N, double delta, int r, double EG_rho, double Dr,
                             double EGe2r_pi, double mu_max, int m);

struct MomentDiagnostics {
  double sigma_r = 0.0;
  double raw_moment_bound = 0.0;
  std::optional<double> mgf_bound;
};

MomentDiagnostics moment_diagnostics(int r, double Ge, double mu_max, int m, long N,
                                     std::optional<double> lambda = std::nullopt);

struct OutputBound {
  double empirical = 0.0;
  double r_hat = 0.0;
};

struct MultiOutputBound {
  double total_bound = 0.0;
  double confidence = 0.0;
  bool vacuous = false;  // 2 n_y delta >= 1
};

MultiOutputBound multi_output_bound(std::span<const OutputBound> per_output, double delta,
                                    int n_y);

/// ln((n)!) for n >= 0.
double log_factorial(int n);

std::string bound_csv_header();  // N,delta,lambda_or_r,gap_term,divergence_term,psi_or_phi,r_hat,confidence,kind
std::string to_csv_row(const KlBoundResult& b);
std::string to_csv_row(const RenyiBoundResult& b);

}  // namespace lticert
