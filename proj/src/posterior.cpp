#include "lticert/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lticert/csv.hpp"
#include "lticert/rng.hpp"

namespace lticert {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Mat& entry_matrix(Predictor& f, char which) {
  switch (which) {
    case 'A': return f.A;
    case 'B': return f.B;
    case 'C': return f.C;
    case 'D': return f.D;
    default: throw InputError(std::string("varying entry names unknown matrix '") + which + "'");
  }
}

std::string theta_text(std::span<const double> theta) {
  std::string s = "[";
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (i) s += ", ";
    s += csv::num(theta[i]);
  }
  return s + "]";
}

}  // namespace

ParamBox::ParamBox(Predictor tmpl, std::vector<VaryingEntry> entries, Vec lower, Vec upper,
                   int n_y, int n_u, int probes_per_dim)
    : tmpl_(std::move(tmpl)),
      entries_(std::move(entries)),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  const auto d = static_cast<Eigen::Index>(entries_.size());
  if (d == 0) throw InputError("parameter box needs at least one varying entry");
  if (lower_.size() != d || upper_.size() != d) {
    throw DimensionError("box bounds must have one entry per varying parameter");
  }
  if (!lower_.allFinite() || !upper_.allFinite()) throw InputError("box bounds must be finite");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (lower_[i] > upper_[i]) throw InputError("box lower bound exceeds upper bound");
    if (upper_[i] > lower_[i]) free_.push_back(static_cast<int>(i));
  }
  for (const auto& e : entries_) {
    const Mat& m = entry_matrix(tmpl_, e.matrix);
    if (e.row < 0 || e.col < 0 || e.row >= m.rows() || e.col >= m.cols()) {
      throw InputError(std::string("varying entry ") + e.matrix + "(" + std::to_string(e.row) +
                       "," + std::to_string(e.col) + ") is outside the template matrix");
    }
    if (e.matrix == 'D' && tmpl_.mode == FeatureMode::InputOutput && e.col < n_y) {
      throw InputError("varying entry touches the y-columns of D under input-output features");
    }
  }

  // Stability probing.
  const int k = static_cast<int>(free_.size());
  const int per_dim = std::max(2, probes_per_dim);
  std::vector<Vec> probes;
  if (k == 0) {
    probes.push_back(lower_);
  } else if (k <= 2) {
    long total = 1;
    for (int i = 0; i < k; ++i) total *= per_dim;
    for (long idx = 0; idx < total; ++idx) {
      Vec theta = lower_;
      long rem = idx;
      for (int i = 0; i < k; ++i) {
        const int j = free_[i];
        const double frac = static_cast<double>(rem % per_dim) / (per_dim - 1);
        rem /= per_dim;
        theta[j] = lower_[j] + frac * (upper_[j] - lower_[j]);
      }
      probes.push_back(theta);
    }
  } else {
    probes.push_back(lower_);
    probes.push_back(upper_);
    CounterRng rng(0x5eed);
    for (long s = 0; s < static_cast<long>(per_dim) * k; ++s) {
      Vec theta = lower_;
      for (int j : free_) theta[j] = lower_[j] + rng.uniform() * (upper_[j] - lower_[j]);
      probes.push_back(theta);
    }
  }
  for (const Vec& theta : probes) {
    const std::span<const double> view(theta.data(), static_cast<std::size_t>(theta.size()));
    try {
      validate_predictor(predictor(view), n_y, n_u);
    } catch (const StabilityError& e) {
      throw InputError("predictor at theta = " + theta_text(view) + " is unstable: " + e.what());
    }
  }
}

double ParamBox::volume() const {
  double v = 1.0;
  for (int j : free_) v *= upper_[j] - lower_[j];
  return v;
}

bool ParamBox::contains(std::span<const double> theta) const {
  if (static_cast<Eigen::Index>(theta.size()) != lower_.size()) return false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= lower_[i] && theta[i] <= upper_[i])) return false;
  }
  return true;
}

Predictor ParamBox::predictor(std::span<const double> theta) const {
  if (static_cast<Eigen::Index>(theta.size()) != lower_.size()) {
    throw DimensionError("theta has the wrong dimension");
  }
  Predictor f = tmpl_;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    entry_matrix(f, e.matrix)(e.row, e.col) = theta[i];
  }
  return f;
}

double LogDensity::operator()(std::span<const double> theta) const {
  if (static_cast<Eigen::Index>(theta.size()) != lower.size()) {
    throw DimensionError("theta has the wrong dimension");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= lower[i] && theta[i] <= upper[i])) return kNegInf;
  }
  return eval(theta);
}

LogDensity uniform_prior(const ParamBox& box) {
  const double log_density = -std::log(box.volume());
  return LogDensity{[log_density](std::span<const double>) { return log_density; }, box.lower(),
                    box.upper()};
}

Mat sample_uniform_box(const ParamBox& box, long count, std::uint64_t seed) {
  if (count < 1) throw InputError("sample count must be positive");
  CounterRng rng(seed);
  Mat out(box.dim(), count);
  for (long s = 0; s < count; ++s) {
    out.col(s) = box.lower();
    for (int j : box.free_dims()) {
      out(j, s) = box.lower()[j] + rng.uniform() * (box.upper()[j] - box.lower()[j]);
    }
  }
  return out;
}

double log_gibbs_density(std::span<const double> theta, double lambda, const ThetaFn& loss,
                         const LogDensity& prior, const std::optional<GibbsPenalty>& penalty) {
  const double lp = prior(theta);
  if (lp == kNegInf) return kNegInf;
  double value = lp;
  if (lambda != 0.0) value -= lambda * loss(theta);
  if (penalty) {
    value -= lambda * 2.0 / (penalty->delta * static_cast<double>(penalty->N)) * penalty->G(theta);
  }
  return value;
}

LogDensity gibbs_posterior(const ThetaFn& loss, const LogDensity& prior, double lambda,
                           double log_z) {
  return LogDensity{[=](std::span<const double> theta) {
                      return prior.eval(theta) - lambda * loss(theta) - log_z;
                    },
                    prior.lower, prior.upper};
}

namespace {

struct Evaluation {
  double log_density;
  double loss;
};

template <class Eval>
PosteriorChain run_metropolis(const Vec& lower, const Vec& upper, std::span<const double> init,
                              const MhSettings& s, bool record_loss, Eval&& eval) {
  const auto d = lower.size();
  if (static_cast<Eigen::Index>(init.size()) != d) throw DimensionError("init has wrong dimension");
  if (s.steps < 1) throw InputError("MH needs at least one step");
  if (s.thinning < 1) throw InputError("thinning must be at least 1");
  if (!(s.proposal_std >= 0.0)) throw InputError("proposal_std must be nonnegative");
  const long burn_in = s.burn_in < 0 ? s.steps / 10 : s.burn_in;
  if (burn_in >= s.steps) throw InputError("burn-in consumes every MH step");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(init[i] >= lower[i] && init[i] <= upper[i])) {
      throw InputError("MH initial point lies outside the support");
    }
  }

  Vec current = Eigen::Map<const Vec>(init.data(), d);
  Evaluation cur = eval(std::span<const double>(current.data(), d));
  if (!std::isfinite(cur.log_density)) {
    throw InputError("MH initial point has zero target density");
  }

  PosteriorChain chain;
  chain.seed = s.seed;
  chain.burn_in = burn_in;
  chain.thinning = s.thinning;
  const long retained = (s.steps - burn_in + s.thinning - 1) / s.thinning;
  chain.samples.resize(d, retained);
  chain.log_density.reserve(retained);
  chain.accepted.reserve(retained);
  if (record_loss) chain.losses.reserve(retained);

  CounterRng rng(s.seed);
  Vec proposal(d);
  long kept = 0;
  for (long it = 0; it < s.steps; ++it) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const bool free = upper[i] > lower[i];
      const double z = rng.normal();
      proposal[i] = free ? current[i] + s.proposal_std * z : current[i];
    }
    const double log_u = std::log(rng.uniform());
    bool accept = false;
    Evaluation prop{kNegInf, 0.0};
    bool inside = true;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!(proposal[i] >= lower[i] && proposal[i] <= upper[i])) inside = false;
    }
    if (inside) {
      prop = eval(std::span<const double>(proposal.data(), d));
      accept = log_u < prop.log_density - cur.log_density;
    }
    ++chain.proposals;
    if (accept) {
      ++chain.acceptances;
      current = proposal;
      cur = prop;
    }
    if (it >= burn_in && (it - burn_in) % s.thinning == 0) {
      chain.samples.col(kept++) = current;
      chain.log_density.push_back(cur.log_density);
      chain.accepted.push_back(accept ? 1 : 0);
      if (record_loss) chain.losses.push_back(cur.loss);
    }
  }
  chain.accept_rate = static_cast<double>(chain.acceptances) / chain.proposals;
  chain.accept_rate_warning = chain.accept_rate < 0.1 || chain.accept_rate > 0.6;
  return chain;
}

}  // namespace

PosteriorChain mh_sample(const LogDensity& target, std::span<const double> init,
                         const MhSettings& settings) {
  return run_metropolis(target.lower, target.upper, init, settings, false,
                        [&](std::span<const double> theta) {
                          return Evaluation{target(theta), 0.0};
                        });
}

PosteriorChain sample_gibbs_posterior(const ThetaFn& loss, const LogDensity& prior,
                                      double lambda, std::span<const double> init,
                                      const MhSettings& settings,
                                      const std::optional<GibbsPenalty>& penalty) {
  return run_metropolis(prior.lower, prior.upper, init, settings, true,
                        [&](std::span<const double> theta) {
                          const double l = loss(theta);
                          double value = prior(theta) - lambda * l;
                          if (penalty) {
                            value -= lambda * 2.0 /
                                     (penalty->delta * static_cast<double>(penalty->N)) *
                                     penalty->G(theta);
                          }
                          return Evaluation{value, l};
                        });
}

std::string PosteriorChain::to_csv() const {
  std::ostringstream out;
  out << "index";
  for (Eigen::Index j = 0; j < samples.rows(); ++j) out << ",theta_" << (j + 1);
  out << ",loss,accepted\n";
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < samples.rows(); ++j) out << ',' << csv::num(samples(j, i));
    out << ',' << (losses.empty() ? std::string("nan") : csv::num(losses[i]));
    out << ',' << static_cast<int>(accepted[i]) << '\n';
  }
  return out.str();
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) throw InputError("log_sum_exp of an empty sequence");
  const double mx = *std::max_element(xs.begin(), xs.end());
  if (std::isinf(mx)) return mx;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

namespace {

std::vector<double> scaled(std::span<const double> xs, double factor) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = factor * xs[i];
  return out;
}

}  // namespace

double estimate_logZ(std::span<const double> prior_losses, double lambda) {
  if (prior_losses.empty()) throw InputError("estimate_logZ needs prior samples");
  if (lambda == 0.0) return 0.0;
  return log_sum_exp(scaled(prior_losses, -lambda)) -
         std::log(static_cast<double>(prior_losses.size()));
}

double estimate_Dr(std::span<const double> prior_losses, double lambda, int r) {
  if (prior_losses.empty()) throw InputError("estimate_Dr needs prior samples");
  if (r < 2) throw InputError("Renyi order must be at least 2");
  if (lambda == 0.0) return 1.0;
  const double alpha = static_cast<double>(r) / (r - 1);
  const double log_nf = std::log(static_cast<double>(prior_losses.size()));
  const double log_z = estimate_logZ(prior_losses, lambda);
  const double log_moment = log_sum_exp(scaled(prior_losses, -alpha * lambda)) - log_nf;
  return std::exp(log_moment / alpha - log_z);
}

double estimate_KL_mc(const LogDensity& posterior, const LogDensity& prior, const Mat& samples) {
  if (samples.cols() == 0) throw InputError("KL estimate needs posterior samples");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    const Vec theta = samples.col(i);
    const std::span<const double> view(theta.data(), static_cast<std::size_t>(theta.size()));
    sum += posterior(view) - prior(view);
  }
  return sum / static_cast<double>(samples.cols());
}

double estimate_KL_grid(const LogDensity& posterior, const LogDensity& prior, long grid_points,
                        const Mat* posterior_samples) {
  std::vector<int> free;
  for (Eigen::Index i = 0; i < prior.lower.size(); ++i) {
    if (prior.upper[i] > prior.lower[i]) free.push_back(static_cast<int>(i));
  }
  if (free.empty()) return 0.0;
  if (free.size() > 1) {
    if (!posterior_samples) {
      throw InputError("KL over more than one free dimension needs posterior samples");
    }
    return estimate_KL_mc(posterior, prior, *posterior_samples);
  }
  if (grid_points < 2) throw InputError("KL grid needs at least two points");

  const int j = free.front();
  const double lo = prior.lower[j];
  const double h = (prior.upper[j] - lo) / static_cast<double>(grid_points);
  Vec theta = prior.lower;
  const std::span<const double> view(theta.data(), static_cast<std::size_t>(theta.size()));
  double kl = 0.0;
  for (long i = 0; i < grid_points; ++i) {
    theta[j] = lo + (static_cast<double>(i) + 0.5) * h;
    const double lp = posterior(view);
    if (lp == kNegInf) continue;
    kl += h * std::exp(lp) * (lp - prior(view));
  }
  return kl;
}

SupEstimate estimate_Ge_sup(std::span<const double> ge_values) {
  if (ge_values.empty()) throw InputError("G_e supremum needs samples");
  return SupEstimate{*std::max_element(ge_values.begin(), ge_values.end()),
                     static_cast<long>(ge_values.size())};
}

SupEstimate estimate_Ge_sup(const Mat& prior_samples, const ThetaFn& ge) {
  std::vector<double> values(prior_samples.cols());
  for (Eigen::Index i = 0; i < prior_samples.cols(); ++i) {
    const Vec theta = prior_samples.col(i);
    values[i] = ge(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
  }
  return estimate_Ge_sup(values);
}

McEstimate mc_expectation(std::span<const double> values) {
  if (values.empty()) throw InputError("Monte-Carlo expectation needs samples");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return McEstimate{mean, se};
}

McEstimate mc_expectation(const Mat& samples, const ThetaFn& g) {
  std::vector<double> values(samples.cols());
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    const Vec theta = samples.col(i);
    values[i] = g(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
  }
  return mc_expectation(values);
}

}  // namespace lticert
