#pragma once

// Config-driven certification: per hypothesis class, a uniform prior over the
// parameter box, Gibbs posteriors at the KL and Renyi temperatures, both
// bounds per output, and the report files.
//
// The bounds certify the specific data-dependent Gibbs posterior that is
// reported; they are not simultaneous over every posterior.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lticert/bounds.hpp"
#include "lticert/config.hpp"

namespace lticert {

/// N-independent quantities of one hypothesis class.
struct ClassPrior {
  std::string name;
  FeatureMode mode = FeatureMode::InputOnly;
  ParamBox box;
  LogDensity prior;
  FeatureConstants features;
  Mat samples;                      // d x N_f
  Mat ge;                           // n_y x N_f, G_e per output
  std::vector<double> ge_sup;       // per output
  std::vector<double> EGe2r;        // per output, E_pi G_e^(2r)
  std::vector<double> lambda_max;   // per output
  std::uint64_t seed = 0;
};

ClassPrior prepare_class(const RunConfig& cfg, const HypothesisSpec& h, long prior_samples,
                         std::uint64_t seed);

/// Configured lambda, or lambda_fraction x the smallest lambda_max over all
/// classes and outputs.
double resolve_lambda_kl(const RunConfig& cfg, const std::vector<ClassPrior>& classes);

struct PosteriorSummary {
  double lambda = 0.0;
  double log_z = 0.0;
  Vec E_empirical;       // per output
  Vec E_generalization;  // per output
  Vec E_G;               // per output
  double accept_rate = 0.0;
  bool accept_rate_warning = false;
  long samples = 0;
};

struct CertRow {
  std::string class_name;
  FeatureMode mode = FeatureMode::InputOnly;
  long N = 0;
  std::uint64_t data_seed = 0;
  PosteriorSummary kl_post;
  PosteriorSummary renyi_post;
  double KL = 0.0;
  double Dr = 1.0;
  std::vector<KlBoundResult> kl;        // per output
  std::vector<RenyiBoundResult> renyi;  // per output
  MultiOutputBound kl_total;
  MultiOutputBound renyi_total;
  std::string flag;  // nonempty when a constraint failed; bounds are then NaN

  double kl_r_hat() const;     // sum over outputs
  double renyi_r_hat() const;  // sum over outputs
};

struct CertifyOptions {
  long posterior_samples = 0;  // 0: config value
  /// Chain and trajectory CSVs go here when set.
  std::optional<std::filesystem::path> export_dir;
};

CertRow certify_class(const RunConfig& cfg, const ClassPrior& cls, long N,
                      std::uint64_t data_seed, double lambda_kl, const CertifyOptions& opts = {});

struct CertReport {
  double lambda_kl = 0.0;
  std::vector<ClassPrior> classes;
  std::vector<CertRow> rows;  // sorted by N, then class order
  std::vector<std::string> warnings;
};

/// Runs every class of `cfg` over N_grid.
CertReport run_certify(const RunConfig& cfg, const CertifyOptions& opts = {});

/// Data seed of the training trajectory at N.
std::uint64_t data_seed_for(const RunConfig& cfg, long N);

std::string certificate_csv_header();
std::string certificate_csv(const CertReport& report);
/// Per-output bound rows: the bounds CSV columns followed by class,output.
std::string bounds_csv(const CertReport& report);
std::string summary_text(const RunConfig& cfg, const CertReport& report);
std::string metadata_json(const RunConfig& cfg, const CertReport& report);

/// Writes certificate.csv, bounds.csv, summary.txt and metadata.json.
void write_report(const RunConfig& cfg, const CertReport& report,
                  const std::filesystem::path& out_dir);

struct CoverageTrial {
  std::string class_name;
  long trial = 0;
  std::uint64_t data_seed = 0;
  double kl_E_generalization = 0.0;
  double kl_bound = 0.0;
  bool kl_covered = false;
  double renyi_E_generalization = 0.0;
  double renyi_bound = 0.0;
  bool renyi_covered = false;
  std::string flag;
};

struct CoverageSummary {
  std::string class_name;
  long N = 0;
  long trials = 0;
  double delta = 0.0;
  double confidence = 0.0;  // 1 - 2 n_y delta
  double kl_fraction = 0.0;
  double renyi_fraction = 0.0;
  bool pass = false;  // both fractions >= max(confidence, 0)
};

struct CoverageReport {
  double lambda_kl = 0.0;
  std::vector<CoverageTrial> trials;
  std::vector<CoverageSummary> summaries;
};

/// Certifies `trials` independent trajectories of length coverage.N per
/// class and counts trials with E_rho L <= E_rho L^_N + r^. Needs trials >= 50.
CoverageReport run_coverage(const RunConfig& cfg, long trials);

std::string coverage_csv(const CoverageReport& report);
std::string coverage_summary_csv(const CoverageReport& report);

/// Bound-versus-N curves: one row per (mode, N).
std::string fig1_csv(const CertReport& report);
std::string fig1_plot_script();

/// The built-in reference run config (two-state generator, one class per feature mode).
std::string_view reference_config_json();
std::string_view reference_system_json();

}  // namespace lticert
