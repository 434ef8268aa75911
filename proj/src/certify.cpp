#include "lticert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lticert/csv.hpp"
#include "lticert/kernels.hpp"
#include "lticert/loss.hpp"
#include "lticert/rng.hpp"

namespace lticert {

using json = nlohmann::json;

namespace {

// The output directory does not influence any number, so it is left out of the hash.
std::string config_hash(const RunConfig& cfg) {
  json c = json::parse(cfg.canonical);
  c.erase("out_dir");
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(c.dump())));
  return hash;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> row_of(const Mat& m, Eigen::Index r) {
  std::vector<double> out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[j] = m(r, j);
  return out;
}

std::vector<double> column_sums(const Mat& m) {
  std::vector<double> out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[j] = m.col(j).sum();
  return out;
}

double widest_free_side(const ParamBox& box) {
  double w = 0.0;
  for (int j : box.free_dims()) w = std::max(w, box.upper()[j] - box.lower()[j]);
  return w;
}

std::string file_safe(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  }
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

// Runs `chains` Metropolis chains of the Gibbs posterior from `init` and
// concatenates the retained samples.
PosteriorChain run_chains(const RunConfig& cfg, const ClassPrior& cls, const ThetaFn& loss,
                          double lambda, std::span<const double> init, long retained,
                          std::uint64_t seed) {
  const int chains = static_cast<int>(std::min<long>(cfg.mcmc.chains, retained));
  const double proposal =
      cfg.mcmc.proposal_std > 0.0 ? cfg.mcmc.proposal_std : 0.1 * widest_free_side(cls.box);
  PosteriorChain all;
  all.seed = seed;
  all.thinning = cfg.mcmc.thinning;
  all.samples.resize(cls.box.dim(), 0);
  for (int c = 0; c < chains; ++c) {
    const long keep = retained / chains + (c < retained % chains ? 1 : 0);
    MhSettings s;
    const long kept_steps = keep * cfg.mcmc.thinning;
    s.burn_in = cfg.mcmc.burn_in >= 0 ? cfg.mcmc.burn_in : std::max<long>(1, kept_steps / 9);
    s.steps = s.burn_in + kept_steps;
    s.thinning = cfg.mcmc.thinning;
    s.proposal_std = proposal;
    s.seed = derive_seed(seed, static_cast<std::uint64_t>(c));
    PosteriorChain ch = sample_gibbs_posterior(loss, cls.prior, lambda, init, s);
    const auto offset = all.samples.cols();
    all.samples.conservativeResize(Eigen::NoChange, offset + ch.samples.cols());
    all.samples.rightCols(ch.samples.cols()) = ch.samples;
    all.log_density.insert(all.log_density.end(), ch.log_density.begin(), ch.log_density.end());
    all.losses.insert(all.losses.end(), ch.losses.begin(), ch.losses.end());
    all.accepted.insert(all.accepted.end(), ch.accepted.begin(), ch.accepted.end());
    all.proposals += ch.proposals;
    all.acceptances += ch.acceptances;
    all.burn_in = s.burn_in;
  }
  all.accept_rate = static_cast<double>(all.acceptances) / static_cast<double>(all.proposals);
  all.accept_rate_warning = all.accept_rate < 0.1 || all.accept_rate > 0.6;
  return all;
}

// Posterior means of per-output L^_N, L and G. Rejected proposals repeat the
// previous sample, so runs of equal samples are evaluated once and weighted.
PosteriorSummary summarize(const RunConfig& cfg, const ClassPrior& cls, const Trajectory& traj,
                           const PosteriorChain& chain, double lambda, double log_z) {
  const Mat& s = chain.samples;
  std::vector<Eigen::Index> firsts;
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < s.cols(); ++i) {
    if (i > 0 && s.col(i) == s.col(i - 1)) {
      weights.back() += 1.0;
    } else {
      firsts.push_back(i);
      weights.push_back(1.0);
    }
  }
  Mat unique(s.rows(), static_cast<Eigen::Index>(firsts.size()));
  for (std::size_t k = 0; k < firsts.size(); ++k) unique.col(k) = s.col(firsts[k]);

  const Mat emp = batch_empirical_losses(cls.box, unique, traj);
  const PredictorStats st =
      batch_predictor_stats(cfg.system.generator, cls.box, unique, cls.features, cfg.series_tol);
  const double total = static_cast<double>(s.cols());
  const Eigen::Map<const Vec> w(weights.data(), static_cast<Eigen::Index>(weights.size()));

  PosteriorSummary out;
  out.lambda = lambda;
  out.log_z = log_z;
  out.E_empirical = emp * w / total;
  out.E_generalization = st.generalization * w / total;
  out.E_G = st.G * w / total;
  out.accept_rate = chain.accept_rate;
  out.accept_rate_warning = chain.accept_rate_warning;
  out.samples = static_cast<long>(s.cols());
  return out;
}

}  // namespace

double CertRow::kl_r_hat() const {
  double s = 0.0;
  for (const auto& b : kl) s += b.r_hat;
  return s;
}

double CertRow::renyi_r_hat() const {
  double s = 0.0;
  for (const auto& b : renyi) s += b.r_hat;
  return s;
}

ClassPrior prepare_class(const RunConfig& cfg, const HypothesisSpec& h, long prior_samples,
                         std::uint64_t seed) {
  const Generator& g = cfg.system.generator;
  require_valid_generator(g);
  ParamBox box = make_param_box(h, g);
  LogDensity prior = uniform_prior(box);
  ClassPrior cls{h.name, h.templ.mode, std::move(box), std::move(prior), {}, {}, {}, {}, {}, {},
                 seed};
  cls.features = feature_constants(g, cls.mode, cfg.kw_method, cfg.series_tol);
  cls.samples = sample_uniform_box(cls.box, prior_samples, seed);
  cls.ge = batch_error_gains(g, cls.box, cls.samples, cfg.series_tol);
  for (int p = 0; p < g.n_y; ++p) {
    const std::vector<double> ge = row_of(cls.ge, p);
    const double sup = estimate_Ge_sup(ge).value;
    std::vector<double> powered(ge.size());
    for (std::size_t i = 0; i < ge.size(); ++i) powered[i] = std::pow(ge[i], 2.0 * cfg.r);
    cls.ge_sup.push_back(sup);
    cls.EGe2r.push_back(mc_expectation(powered).mean);
    cls.lambda_max.push_back(lambda_max(sup, cls.features.mu_max, cls.features.m));
  }
  return cls;
}

double resolve_lambda_kl(const RunConfig& cfg, const std::vector<ClassPrior>& classes) {
  if (cfg.lambda) return *cfg.lambda;
  double lmax = std::numeric_limits<double>::infinity();
  for (const auto& c : classes) {
    for (double l : c.lambda_max) lmax = std::min(lmax, l);
  }
  if (!std::isfinite(lmax)) throw InputError("lambda auto needs at least one hypothesis class");
  return cfg.lambda_fraction * lmax;
}

std::uint64_t data_seed_for(const RunConfig& cfg, long N) {
  return cfg.seeds.shared_data_seed ? cfg.seeds.data_seed
                                    : cfg.seeds.data_seed ^ static_cast<std::uint64_t>(N);
}

CertRow certify_class(const RunConfig& cfg, const ClassPrior& cls, long N,
                      std::uint64_t data_seed, double lambda_kl, const CertifyOptions& opts) {
  const Generator& g = cfg.system.generator;
  const long retained = opts.posterior_samples > 0 ? opts.posterior_samples
                                                   : cfg.mcmc.posterior_samples;
  CertRow row;
  row.class_name = cls.name;
  row.mode = cls.mode;
  row.N = N;
  row.data_seed = data_seed;

  const Trajectory traj = simulate(g, N, data_seed);
  const std::vector<double> prior_losses =
      column_sums(batch_empirical_losses(cls.box, cls.samples, traj));
  const ThetaFn loss = [&](std::span<const double> theta) {
    return empirical_loss(cls.box.predictor(theta), traj);
  };

  // Chains start at the best prior sample.
  const auto best = std::distance(prior_losses.begin(),
                                  std::min_element(prior_losses.begin(), prior_losses.end()));
  const Vec init = cls.samples.col(best);
  const std::span<const double> init_view(init.data(), static_cast<std::size_t>(init.size()));
  const std::uint64_t chain_seed =
      derive_seed(cfg.seeds.mcmc_seed ^ fnv1a(cls.name), data_seed ^ static_cast<std::uint64_t>(N));

  const double log_z_kl = estimate_logZ(prior_losses, lambda_kl);
  const double log_z_r = estimate_logZ(prior_losses, cfg.lambda_renyi);
  const PosteriorChain kl_chain =
      run_chains(cfg, cls, loss, lambda_kl, init_view, retained, derive_seed(chain_seed, 1));
  const PosteriorChain r_chain = run_chains(cfg, cls, loss, cfg.lambda_renyi, init_view, retained,
                                            derive_seed(chain_seed, 2));
  row.kl_post = summarize(cfg, cls, traj, kl_chain, lambda_kl, log_z_kl);
  row.renyi_post = summarize(cfg, cls, traj, r_chain, cfg.lambda_renyi, log_z_r);

  if (cls.box.free_dims().size() == 1) {
    const LogDensity post = gibbs_posterior(loss, cls.prior, lambda_kl, log_z_kl);
    row.KL = estimate_KL_grid(post, cls.prior, cfg.mcmc.kl_grid_points);
  } else if (!cls.box.free_dims().empty()) {
    // ln(rho/pi) = -lambda L^_N - ln Z along the chain.
    double sum = 0.0;
    for (double l : kl_chain.losses) sum += -lambda_kl * l - log_z_kl;
    row.KL = sum / static_cast<double>(kl_chain.losses.size());
  }
  // KL >= 0; Monte-Carlo noise can undershoot.
  row.KL = std::max(row.KL, 0.0);
  row.Dr = estimate_Dr(prior_losses, cfg.lambda_renyi, cfg.r);

  std::vector<OutputBound> kl_parts, r_parts;
  try {
    for (int p = 0; p < g.n_y; ++p) {
      const std::vector<double> ge = row_of(cls.ge, p);
      row.kl.push_back(kl_bound(N, cfg.delta, lambda_kl, row.kl_post.E_G[p], row.KL,
                                PsiFromPriorSamples{ge}, cls.features.mu_max, cls.features.m));
      row.renyi.push_back(renyi_bound(N, cfg.delta, cfg.r, row.renyi_post.E_G[p], row.Dr,
                                      cls.EGe2r[p], cls.features.mu_max, cls.features.m));
      kl_parts.push_back({row.kl_post.E_empirical[p], row.kl.back().r_hat});
      r_parts.push_back({row.renyi_post.E_empirical[p], row.renyi.back().r_hat});
    }
    row.kl_total = multi_output_bound(kl_parts, cfg.delta, g.n_y);
    row.renyi_total = multi_output_bound(r_parts, cfg.delta, g.n_y);
  } catch (const ConstraintError& e) {
    row.flag = e.what();
    row.kl.clear();
    row.renyi.clear();
    row.kl_total = {kNaN, 1.0 - 2.0 * g.n_y * cfg.delta, 2.0 * g.n_y * cfg.delta >= 1.0};
    row.renyi_total = row.kl_total;
  }

  if (opts.export_dir) {
    std::filesystem::create_directories(*opts.export_dir);
    const std::string stem = file_safe(cls.name) + "_N" + std::to_string(N);
    write_text(*opts.export_dir / ("trajectory_" + stem + ".csv"), trajectory_csv(traj));
    write_text(*opts.export_dir / ("chain_" + stem + "_kl.csv"), kl_chain.to_csv());
    write_text(*opts.export_dir / ("chain_" + stem + "_renyi.csv"), r_chain.to_csv());
  }
  return row;
}

CertReport run_certify(const RunConfig& cfg, const CertifyOptions& opts) {
  CertReport report;
  for (std::size_t i = 0; i < cfg.hypotheses.size(); ++i) {
    report.classes.push_back(prepare_class(cfg, cfg.hypotheses[i], cfg.mcmc.prior_samples,
                                           derive_seed(cfg.seeds.mcmc_seed, i)));
  }
  report.lambda_kl = resolve_lambda_kl(cfg, report.classes);
  for (long N : cfg.N_grid) {
    for (const auto& cls : report.classes) {
      CertRow row = certify_class(cfg, cls, N, data_seed_for(cfg, N), report.lambda_kl, opts);
      const std::string where = cls.name + " N=" + std::to_string(N);
      if (row.kl_post.accept_rate_warning) {
        report.warnings.push_back(where + ": KL-posterior accept rate " +
                                  csv::num(row.kl_post.accept_rate) + " outside [0.1, 0.6]");
      }
      if (row.renyi_post.accept_rate_warning) {
        report.warnings.push_back(where + ": Renyi-posterior accept rate " +
                                  csv::num(row.renyi_post.accept_rate) + " outside [0.1, 0.6]");
      }
      if (!row.flag.empty()) report.warnings.push_back(where + ": " + row.flag);
      if (row.kl_total.vacuous) report.warnings.push_back(where + ": confidence 1-2*n_y*delta <= 0");
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string certificate_csv_header() {
  return "N,E_rho_empirical,E_rho_generalization,kl_r_hat,renyi_r_hat,gap_term,confidence,"
         "class,mode,data_seed,kl_E_rho_empirical,kl_E_rho_generalization,kl_gap_term,"
         "lambda_kl,lambda_renyi,KL,D_r,kl_bound,renyi_bound,E_rho_G_kl,E_rho_G_renyi,"
         "accept_rate_kl,accept_rate_renyi,flag";
}

std::string certificate_csv(const CertReport& report) {
  std::string out = certificate_csv_header() + "\n";
  for (const auto& r : report.rows) {
    double gap_r = 0.0, gap_kl = 0.0;
    for (const auto& b : r.renyi) gap_r += b.gap_term;
    for (const auto& b : r.kl) gap_kl += b.gap_term;
    const bool bad = !r.flag.empty();
    out += csv::join({std::to_string(r.N), csv::num(r.renyi_post.E_empirical.sum()),
                      csv::num(r.renyi_post.E_generalization.sum()),
                      csv::num(bad ? kNaN : r.kl_r_hat()), csv::num(bad ? kNaN : r.renyi_r_hat()),
                      csv::num(bad ? kNaN : gap_r), csv::num(r.renyi_total.confidence),
                      r.class_name, std::string(to_string(r.mode)), std::to_string(r.data_seed),
                      csv::num(r.kl_post.E_empirical.sum()),
                      csv::num(r.kl_post.E_generalization.sum()), csv::num(bad ? kNaN : gap_kl),
                      csv::num(r.kl_post.lambda), csv::num(r.renyi_post.lambda), csv::num(r.KL),
                      csv::num(r.Dr), csv::num(r.kl_total.total_bound),
                      csv::num(r.renyi_total.total_bound), csv::num(r.kl_post.E_G.sum()),
                      csv::num(r.renyi_post.E_G.sum()), csv::num(r.kl_post.accept_rate),
                      csv::num(r.renyi_post.accept_rate), bad ? "constraint" : ""});
    out += '\n';
  }
  return out;
}

std::string bounds_csv(const CertReport& report) {
  std::string out = bound_csv_header() + ",class,output\n";
  for (const auto& r : report.rows) {
    for (std::size_t p = 0; p < r.kl.size(); ++p) {
      out += to_csv_row(r.kl[p]) + "," + r.class_name + "," + std::to_string(p + 1) + "\n";
    }
    for (std::size_t p = 0; p < r.renyi.size(); ++p) {
      out += to_csv_row(r.renyi[p]) + "," + r.class_name + "," + std::to_string(p + 1) + "\n";
    }
  }
  return out;
}

std::string summary_text(const RunConfig& cfg, const CertReport& report) {
  std::ostringstream out;
  out << "lticert certification summary\n";
  out << "config hash      " << config_hash(cfg) << "\n";
  out << "delta            " << csv::num(cfg.delta) << "\n";
  out << "lambda (KL)      " << csv::num(report.lambda_kl)
      << (cfg.lambda ? " (configured)" : " (auto)") << "\n";
  out << "lambda (Renyi)   " << csv::num(cfg.lambda_renyi) << "\n";
  out << "Renyi order r    " << cfg.r << "\n";
  out << "K_w method       " << to_string(cfg.kw_method) << "\n\n";
  for (const auto& c : report.classes) {
    out << "class " << c.name << " (" << to_string(c.mode) << ")\n";
    out << "  mu_max(Q_e) = " << csv::num(c.features.mu_max) << ", K_w = " << csv::num(c.features.Kw)
        << ", m = " << c.features.m << ", prior samples = " << c.samples.cols() << "\n";
    for (std::size_t p = 0; p < c.ge_sup.size(); ++p) {
      out << "  output " << (p + 1) << ": G_e(Theta) ~ " << csv::num(c.ge_sup[p])
          << ", lambda_max = " << csv::num(c.lambda_max[p])
          << ", E_pi G_e^2r = " << csv::num(c.EGe2r[p]) << "\n";
    }
  }
  out << "\n";
  char line[512];
  std::snprintf(line, sizeof line, "%-16s %8s %12s %12s %14s %14s %10s\n", "class", "N",
                "E_rho L^_N", "E_rho L", "KL bound", "Renyi bound", "conf");
  out << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-16s %8ld %12.6g %12.6g %14.6g %14.6g %10.4g%s\n",
                  r.class_name.c_str(), r.N, r.renyi_post.E_empirical.sum(),
                  r.renyi_post.E_generalization.sum(), r.kl_total.total_bound,
                  r.renyi_total.total_bound, r.renyi_total.confidence,
                  r.flag.empty() ? "" : "  [constraint violated]");
    out << line;
  }
  if (!report.warnings.empty()) {
    out << "\nwarnings:\n";
    for (const auto& w : report.warnings) out << "  " << w << "\n";
  }
  out << "\nEach bound holds with probability >= confidence for the reported Gibbs posterior;\n"
         "it is not a statement uniform over all posteriors.\n";
  return out.str();
}

std::string metadata_json(const RunConfig& cfg, const CertReport& report) {
  const std::string hash = config_hash(cfg);
  json classes = json::array();
  for (const auto& c : report.classes) {
    classes.push_back(json{{"name", c.name},
                           {"mode", std::string(to_string(c.mode))},
                           {"mu_max", c.features.mu_max},
                           {"Kw", c.features.Kw},
                           {"m", c.features.m},
                           {"prior_samples", c.samples.cols()},
                           {"prior_seed", c.seed},
                           {"Ge_sup", c.ge_sup},
                           {"lambda_max", c.lambda_max},
                           {"E_pi_Ge_2r", c.EGe2r}});
  }
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(json{{"class", r.class_name}, {"N", r.N},
                                                        {"data_seed", r.data_seed}});
  const json meta{{"config_hash", hash},
                  {"seeds",
                   {{"data_seed", cfg.seeds.data_seed},
                    {"mcmc_seed", cfg.seeds.mcmc_seed},
                    {"shared_data_seed", cfg.seeds.shared_data_seed}}},
                  {"delta", cfg.delta},
                  {"lambda_kl", report.lambda_kl},
                  {"lambda_kl_source", cfg.lambda ? "configured" : "auto"},
                  {"lambda_fraction", cfg.lambda_fraction},
                  {"lambda_renyi", cfg.lambda_renyi},
                  {"r", cfg.r},
                  {"kw_method", std::string(to_string(cfg.kw_method))},
                  {"tolerances", {{"series_tol", cfg.series_tol}}},
                  {"classes", classes},
                  {"rows", rows},
                  {"config", json::parse(cfg.canonical)}};
  return meta.dump(2) + "\n";
}

void write_report(const RunConfig& cfg, const CertReport& report,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "certificate.csv", certificate_csv(report));
  write_text(out_dir / "bounds.csv", bounds_csv(report));
  write_text(out_dir / "summary.txt", summary_text(cfg, report));
  write_text(out_dir / "metadata.json", metadata_json(cfg, report));
}

CoverageReport run_coverage(const RunConfig& cfg, long trials) {
  if (trials < 50) throw InputError("coverage needs at least 50 trials");
  CoverageReport report;
  std::vector<ClassPrior> classes;
  for (std::size_t i = 0; i < cfg.hypotheses.size(); ++i) {
    classes.push_back(prepare_class(cfg, cfg.hypotheses[i], cfg.coverage.prior_samples,
                                    derive_seed(cfg.seeds.mcmc_seed, i)));
  }
  report.lambda_kl = resolve_lambda_kl(cfg, classes);
  CertifyOptions opts;
  opts.posterior_samples = cfg.coverage.posterior_samples;
  const int n_y = cfg.system.generator.n_y;

  for (const auto& cls : classes) {
    long kl_hits = 0, r_hits = 0;
    for (long t = 0; t < trials; ++t) {
      const std::uint64_t seed = derive_seed(cfg.seeds.data_seed, static_cast<std::uint64_t>(t));
      const CertRow row = certify_class(cfg, cls, cfg.coverage.N, seed, report.lambda_kl, opts);
      CoverageTrial tr;
      tr.class_name = cls.name;
      tr.trial = t;
      tr.data_seed = seed;
      tr.flag = row.flag;
      tr.kl_E_generalization = row.kl_post.E_generalization.sum();
      tr.kl_bound = row.kl_total.total_bound;
      tr.renyi_E_generalization = row.renyi_post.E_generalization.sum();
      tr.renyi_bound = row.renyi_total.total_bound;
      // A flagged row has no valid bound and counts as a miss.
      tr.kl_covered = row.flag.empty() && tr.kl_E_generalization <= tr.kl_bound;
      tr.renyi_covered = row.flag.empty() && tr.renyi_E_generalization <= tr.renyi_bound;
      kl_hits += tr.kl_covered;
      r_hits += tr.renyi_covered;
      report.trials.push_back(tr);
    }
    CoverageSummary s;
    s.class_name = cls.name;
    s.N = cfg.coverage.N;
    s.trials = trials;
    s.delta = cfg.delta;
    s.confidence = 1.0 - 2.0 * n_y * cfg.delta;
    s.kl_fraction = static_cast<double>(kl_hits) / trials;
    s.renyi_fraction = static_cast<double>(r_hits) / trials;
    const double need = std::max(s.confidence, 0.0);
    s.pass = s.kl_fraction >= need && s.renyi_fraction >= need;
    report.summaries.push_back(s);
  }
  return report;
}

std::string coverage_csv(const CoverageReport& report) {
  std::string out =
      "class,trial,data_seed,kl_E_rho_generalization,kl_bound,kl_covered,"
      "renyi_E_rho_generalization,renyi_bound,renyi_covered,flag\n";
  for (const auto& t : report.trials) {
    out += csv::join({t.class_name, std::to_string(t.trial), std::to_string(t.data_seed),
                      csv::num(t.kl_E_generalization), csv::num(t.kl_bound),
                      t.kl_covered ? "1" : "0", csv::num(t.renyi_E_generalization),
                      csv::num(t.renyi_bound), t.renyi_covered ? "1" : "0",
                      t.flag.empty() ? "" : "constraint"});
    out += '\n';
  }
  return out;
}

std::string coverage_summary_csv(const CoverageReport& report) {
  std::string out = "class,N,trials,delta,confidence,kl_coverage,renyi_coverage,pass\n";
  for (const auto& s : report.summaries) {
    out += csv::join({s.class_name, std::to_string(s.N), std::to_string(s.trials),
                      csv::num(s.delta), csv::num(s.confidence), csv::num(s.kl_fraction),
                      csv::num(s.renyi_fraction), s.pass ? "1" : "0"});
    out += '\n';
  }
  return out;
}

std::string fig1_csv(const CertReport& report) {
  std::string out =
      "mode,class,N,E_rho_empirical,E_rho_generalization,kl_bound,renyi_bound,"
      "kl_E_rho_empirical,kl_E_rho_generalization,kl_r_hat,renyi_r_hat\n";
  for (const auto& r : report.rows) {
    out += csv::join({std::string(to_string(r.mode)), r.class_name, std::to_string(r.N),
                      csv::num(r.renyi_post.E_empirical.sum()),
                      csv::num(r.renyi_post.E_generalization.sum()),
                      csv::num(r.kl_total.total_bound), csv::num(r.renyi_total.total_bound),
                      csv::num(r.kl_post.E_empirical.sum()),
                      csv::num(r.kl_post.E_generalization.sum()),
                      csv::num(r.flag.empty() ? r.kl_r_hat() : kNaN),
                      csv::num(r.flag.empty() ? r.renyi_r_hat() : kNaN)});
    out += '\n';
  }
  return out;
}

std::string fig1_plot_script() {
  return R"py(#!/usr/bin/env python3
# Plots fig1.csv: solid lines w = u, dashed lines w = [y; u].
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "fig1.csv"
out = sys.argv[2] if len(sys.argv) > 2 else "fig1.png"
rows = list(csv.DictReader(open(path)))
styles = {"input-only": "-", "input-output": "--"}
curves = [
    ("E_rho_empirical", "E_rho empirical loss", "C0"),
    ("E_rho_generalization", "E_rho generalization loss", "C1"),
    ("kl_bound", "KL bound", "C2"),
    ("renyi_bound", "Renyi bound", "C3"),
]
fig, ax = plt.subplots(figsize=(8, 5))
for mode, style in styles.items():
    sel = [r for r in rows if r["mode"] == mode]
    if not sel:
        continue
    n = [float(r["N"]) for r in sel]
    for key, label, color in curves:
        ax.plot(n, [float(r[key]) for r in sel], style, color=color,
                label=f"{label} ({mode})")
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel("N")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(out, dpi=150)
)py";
}

}  // namespace lticert
