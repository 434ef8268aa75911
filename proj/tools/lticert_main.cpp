// lticert: certification CLI.
//   validate | certify | coverage | reproduce-fig1
// Exit codes: 0 success, 1 validation/input failure, 2 runtime numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lticert/certify.hpp"
#include "lticert/csv.hpp"
#include "lticert/kernels.hpp"
#include "lticert/rng.hpp"

namespace fs = std::filesystem;
using namespace lticert;

namespace {

struct Common {
  std::string config;
  std::string out_dir;
  std::string mode = "both";
  std::optional<std::uint64_t> seed;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? parse_run_config(reference_config_json())
                                   : load_run_config(c.config);
  if (c.mode != "both") {
    const FeatureMode keep = parse_feature_mode(c.mode);
    std::erase_if(cfg.hypotheses, [&](const HypothesisSpec& h) { return h.templ.mode != keep; });
    if (cfg.hypotheses.empty()) throw InputError("no hypothesis class has mode " + c.mode);
  }
  if (c.seed) {
    cfg.seeds.data_seed = *c.seed;
    cfg.seeds.mcmc_seed = derive_seed(*c.seed, 0x6d636d63);
  }
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  refresh_canonical(cfg);
  return cfg;
}

void add_common(CLI::App* sub, Common& c, bool with_out) {
  sub->add_option("--config", c.config, "run config (JSON); default: built-in reference preset");
  if (with_out) sub->add_option("--out-dir", c.out_dir, "output directory (overrides config)");
  sub->add_option("--mode", c.mode, "input-only | input-output | both")
      ->check(CLI::IsMember({"input-only", "input-output", "both"}));
  sub->add_option("--seed", c.seed, "base seed (data seed; MCMC seed derived from it)");
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

int cmd_validate(const Common& c) {
  const RunConfig cfg = load(c);
  const Generator& g = cfg.system.generator;
  const GeneratorReport rep = validate_generator(g);
  std::printf("generator: n=%d n_y=%d n_u=%d m=%d\n", g.n(), g.n_y, g.n_u, g.m());
  std::printf("  rho(A_g)         = %.6g\n", rep.rho_Ag);
  std::printf("  rho(A_g - K_g C_g) = %.6g\n", rep.rho_closed);
  std::printf("  Q_e PSD          = %s\n", rep.qe_psd ? "yes" : "no");
  if (!rep.ok) {
    if (!(rep.rho_Ag < 1.0)) std::fprintf(stderr, "error: A_g is not Schur\n");
    else if (!(rep.rho_closed < 1.0)) std::fprintf(stderr, "error: A_g - K_g C_g is not Schur\n");
    else std::fprintf(stderr, "error: Q_e is not positive semidefinite\n");
    return 1;
  }
  std::vector<ClassPrior> classes;
  for (std::size_t i = 0; i < cfg.hypotheses.size(); ++i) {
    classes.push_back(prepare_class(cfg, cfg.hypotheses[i], cfg.mcmc.prior_samples,
                                    derive_seed(cfg.seeds.mcmc_seed, i)));
    const ClassPrior& cl = classes.back();
    std::printf("class %s (%s): box stable at all probes\n", cl.name.c_str(),
                std::string(to_string(cl.mode)).c_str());
    std::printf("  mu_max(Q_e) = %.6g\n", cl.features.mu_max);
    std::printf("  K_w (%s) = %.6g\n", std::string(to_string(cfg.kw_method)).c_str(),
                cl.features.Kw);
    for (std::size_t p = 0; p < cl.ge_sup.size(); ++p) {
      std::printf("  output %zu: G_e(Theta) ~ %.6g over %ld prior samples, lambda_max = %.6g\n",
                  p + 1, cl.ge_sup[p], static_cast<long>(cl.samples.cols()), cl.lambda_max[p]);
    }
  }
  double joint = std::numeric_limits<double>::infinity();
  for (const auto& cl : classes) {
    for (double l : cl.lambda_max) joint = std::min(joint, l);
  }
  const double lambda = resolve_lambda_kl(cfg, classes);
  std::printf("lambda_max = %.6g\n", joint);
  std::printf("lambda (KL) = %.6g (%s)\n", lambda, cfg.lambda ? "configured" : "auto");
  if (!(lambda < joint)) {
    std::fprintf(stderr, "error: lambda = %.6g violates lambda < lambda_max = %.6g\n", lambda, joint);
    return 1;
  }
  std::printf("ok\n");
  return 0;
}

int cmd_certify(const Common& c, bool export_chains) {
  const RunConfig cfg = load(c);
  CertifyOptions opts;
  if (export_chains) opts.export_dir = fs::path(cfg.out_dir) / "exports";
  const CertReport report = run_certify(cfg, opts);
  write_report(cfg, report, cfg.out_dir);
  std::cout << summary_text(cfg, report);
  std::printf("wrote %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_coverage(const Common& c, std::optional<long> trials) {
  const RunConfig cfg = load(c);
  const CoverageReport report = run_coverage(cfg, trials.value_or(cfg.coverage.trials));
  fs::create_directories(cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "coverage.csv", coverage_csv(report));
  write_file(fs::path(cfg.out_dir) / "coverage_summary.csv", coverage_summary_csv(report));
  std::cout << coverage_summary_csv(report);
  std::printf("wrote %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_fig1(const Common& c) {
  const RunConfig cfg = load(c);
  int n_in = 0, n_io = 0;
  for (const auto& h : cfg.hypotheses) (h.templ.mode == FeatureMode::InputOnly ? n_in : n_io)++;
  if (n_in > 1 || n_io > 1 || n_in + n_io == 0) {
    throw InputError("reproduce-fig1 needs at most one hypothesis class per feature mode");
  }
  const CertReport report = run_certify(cfg);
  write_report(cfg, report, cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "fig1.csv", fig1_csv(report));
  write_file(fs::path(cfg.out_dir) / "plot_fig1.py", fig1_plot_script());
  std::cout << fig1_csv(report);
  std::printf("wrote %s (plot with: python3 plot_fig1.py fig1.csv)\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lticert: generalization certificates for LTI predictors"};
  app.require_subcommand(1);

  Common validate_opts, certify_opts, coverage_opts, fig1_opts;
  bool export_chains = false;
  std::optional<long> trials;

  auto* validate = app.add_subcommand("validate", "check the system, boxes and lambda");
  add_common(validate, validate_opts, false);
  auto* certify = app.add_subcommand("certify", "compute KL and Renyi certificates over N_grid");
  add_common(certify, certify_opts, true);
  certify->add_flag("--export", export_chains, "also write chains and trajectories as CSV");
  auto* coverage = app.add_subcommand("coverage", "empirical coverage over independent trials");
  add_common(coverage, coverage_opts, true);
  coverage->add_option("--trials", trials, "number of trials (>= 50)");
  auto* fig1 = app.add_subcommand("reproduce-fig1", "emit loss and bound curves over N for both feature modes");
  add_common(fig1, fig1_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(validate_opts);
    if (*certify) return cmd_certify(certify_opts, export_chains);
    if (*coverage) return cmd_coverage(coverage_opts, trials);
    if (*fig1) return cmd_fig1(fig1_opts);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ConstraintError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
