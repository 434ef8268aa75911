#pragma once

// Priors and Gibbs posteriors over a box of predictor parameters,
// random-walk Metropolis sampling, and the Monte-Carlo estimators that feed
// the bounds (log Z, D_r, KL, G_e sup, plain expectations).
//
// Densities stay in log space throughout; ratios rho/pi are log differences.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lticert/lti.hpp"

namespace lticert {

using ThetaFn = std::function<double(std::span<const double>)>;

/// One predictor entry driven by a parameter component.
struct VaryingEntry {
  char matrix = 'A';  // one of A, B, C, D
  int row = 0;
  int col = 0;
};

/// Box Theta = [lower, upper] mapped onto a predictor template. Zero-width
/// components are allowed and act as fixed parameters.
class ParamBox {
 public:
  /// Validates the template and probes Schur stability of the mapped A on
  /// `probes_per_dim` points per dimension (a full grid up to two free
  /// dimensions, seeded random points beyond). Throws InputError on failure.
  ParamBox(Predictor tmpl, std::vector<VaryingEntry> entries, Vec lower, Vec upper, int n_y,
           int n_u, int probes_per_dim = 101);

  int dim() const { return static_cast<int>(lower_.size()); }
  /// Indices of components with upper > lower.
  const std::vector<int>& free_dims() const { return free_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Predictor& templ() const { return tmpl_; }
  const std::vector<VaryingEntry>& entries() const { return entries_; }
  FeatureMode mode() const { return tmpl_.mode; }
  /// Lebesgue volume over the free components (1 when none are free).
  double volume() const;
  bool contains(std::span<const double> theta) const;
  Vec center() const { return 0.5 * (lower_ + upper_); }
  Predictor predictor(std::span<const double> theta) const;

 private:
  Predictor tmpl_;
  std::vector<VaryingEntry> entries_;
  Vec lower_;
  Vec upper_;
  std::vector<int> free_;
};

/// Possibly unnormalized log density with box support.
struct LogDensity {
  ThetaFn eval;
  Vec lower;
  Vec upper;

  /// -infinity outside [lower, upper].
  double operator()(std::span<const double> theta) const;
};

LogDensity uniform_prior(const ParamBox& box);

/// i.i.d. uniform draws from the box, one column per sample.
Mat sample_uniform_box(const ParamBox& box, long count, std::uint64_t seed);

/// Optional G(f) penalty of the modified Gibbs posterior, weighted 2/(delta N).
struct GibbsPenalty {
  ThetaFn G;
  double delta = 0.1;
  long N = 1;
};

/// log pi(theta) - lambda loss(theta) [- lambda 2/(delta N) G(theta)].
double log_gibbs_density(std::span<const double> theta, double lambda, const ThetaFn& loss,
                         const LogDensity& prior,
                         const std::optional<GibbsPenalty>& penalty = std::nullopt);

/// Normalized Gibbs posterior log density given log Z.
LogDensity gibbs_posterior(const ThetaFn& loss, const LogDensity& prior, double lambda,
                           double log_z);

struct PosteriorChain {
  Mat samples;                        // d x retained
  std::vector<double> log_density;    // per retained sample
  std::vector<double> losses;         // per retained sample (Gibbs chains only)
  std::vector<std::uint8_t> accepted; // proposal outcome that produced each sample
  long proposals = 0;
  long acceptances = 0;
  double accept_rate = 0.0;
  bool accept_rate_warning = false;   // outside [0.1, 0.6]
  std::uint64_t seed = 0;
  long burn_in = 0;
  int thinning = 1;

  long size() const { return static_cast<long>(samples.cols()); }
  std::string to_csv() const;  // index,theta_1..theta_d,loss,accepted
};

struct MhSettings {
  long steps = 0;          // total iterations, burn-in included
  long burn_in = -1;       // -1: 10% of steps
  int thinning = 1;
  double proposal_std = 0.1;
  std::uint64_t seed = 0;
};

/// Random-walk Metropolis with isotropic Gaussian proposals. Proposals
/// outside the support have log density -infinity and are rejected.
PosteriorChain mh_sample(const LogDensity& target, std::span<const double> init,
                         const MhSettings& settings);

/// Metropolis chain on the Gibbs posterior that also records each sample's loss.
PosteriorChain sample_gibbs_posterior(const ThetaFn& loss, const LogDensity& prior,
                                      double lambda, std::span<const double> init,
                                      const MhSettings& settings,
                                      const std::optional<GibbsPenalty>& penalty = std::nullopt);

/// max(x) + ln sum exp(x_i - max(x)).
double log_sum_exp(std::span<const double> xs);

/// ln Z ~ lse(-lambda L) - ln N_f over prior-sample losses.
double estimate_logZ(std::span<const double> prior_losses, double lambda);

/// D_r(rho^ || pi) of the Gibbs posterior from prior-sample losses:
/// exp((1/a)(lse(-a lambda L) - ln N_f) - ln Z) with a = r/(r-1); r = 2 gives
/// exp(0.5 lse(-2 lambda L) - lse(-lambda L) + 0.5 ln N_f).
double estimate_Dr(std::span<const double> prior_losses, double lambda, int r = 2);

/// KL(rho || pi). One free dimension: midpoint Riemann sum over
/// `grid_points` cells. More free dimensions: Monte-Carlo mean of
/// ln(rho/pi) over `posterior_samples` (required then). No free dimension: 0.
double estimate_KL_grid(const LogDensity& posterior, const LogDensity& prior, long grid_points,
                        const Mat* posterior_samples = nullptr);

/// E_rho ln(rho/pi) over posterior samples.
double estimate_KL_mc(const LogDensity& posterior, const LogDensity& prior, const Mat& samples);

struct SupEstimate {
  double value = 0.0;
  long count = 0;
};

SupEstimate estimate_Ge_sup(std::span<const double> ge_values);
SupEstimate estimate_Ge_sup(const Mat& prior_samples, const ThetaFn& ge);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

McEstimate mc_expectation(std::span<const double> values);
McEstimate mc_expectation(const Mat& samples, const ThetaFn& g);

}  // namespace lticert
