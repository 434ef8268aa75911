#pragma once

// JSON run configuration and system-definition files.
//
// A system file holds n_y, n_u, A_g, K_g, C_g, Q_e (nested row-major arrays)
// and an optional "predictor" {A, B, C, D, mode}. A run config embeds the
// system under "system" or points at a file through "system_file" (relative
// to the config's directory).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lticert/constants.hpp"
#include "lticert/posterior.hpp"

namespace lticert {

struct SystemSpec {
  Generator generator;
  std::optional<Predictor> predictor;
};

struct HypothesisSpec {
  std::string name;
  Predictor templ;
  std::vector<VaryingEntry> varying;
  Vec lower;
  Vec upper;
};

struct McmcConfig {
  long prior_samples = 100000;
  long posterior_samples = 10000;  // retained, summed over chains
  long burn_in = -1;               // per chain; -1: 10% of the chain
  int thinning = 1;
  double proposal_std = -1.0;      // -1: 0.1 x widest free box side
  int chains = 1;
  long kl_grid_points = 2000;
};

struct SeedConfig {
  std::uint64_t data_seed = 20240611;
  std::uint64_t mcmc_seed = 7;
  bool shared_data_seed = false;  // same trajectory for every N
};

struct CoverageConfig {
  long N = 200;
  long trials = 200;
  long prior_samples = 10000;
  long posterior_samples = 2000;
};

struct RunConfig {
  SystemSpec system;
  std::vector<HypothesisSpec> hypotheses;
  std::vector<long> N_grid;
  double delta = 0.1;
  std::optional<double> lambda;  // empty: auto
  double lambda_fraction = 0.99;
  double lambda_renyi = 10.0;
  int r = 2;
  McmcConfig mcmc;
  SeedConfig seeds;
  KwMethod kw_method = KwMethod::ExactLagCovariance;
  double series_tol = kDefaultSeriesTol;
  CoverageConfig coverage;
  std::string out_dir = "lticert-out";
  /// Canonical JSON of the resolved config (system inlined); input of the hash.
  std::string canonical;
};

/// Parses a system definition. ParseError carries the 1-based line.
SystemSpec parse_system(std::string_view text);
SystemSpec load_system_file(const std::filesystem::path& path);

/// Parses and validates a run config. `base_dir` resolves "system_file".
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// Recomputes RunConfig::canonical after in-code edits (CLI overrides).
void refresh_canonical(RunConfig& cfg);

/// Builds the box for a hypothesis (probes stability; throws InputError).
ParamBox make_param_box(const HypothesisSpec& h, const Generator& g);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// t,y_1..y_ny,u_1..u_nu
std::string trajectory_csv(const Trajectory& traj);

}  // namespace lticert
