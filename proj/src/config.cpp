#include "lticert/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lticert/csv.hpp"

namespace lticert {

using json = nlohmann::json;

namespace {

int line_at(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

// Line of the first occurrence of "key" in the text, 0 when absent.
int line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 0 : line_at(text, pos);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const int line = line_at(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(e.what(), line);
  }
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    throw ParseError("'" + std::string(key) + "': " + message, line_of_key(text_, key));
  }

  void reject_unknown(const json& obj, std::string_view context,
                      std::initializer_list<std::string_view> allowed) const {
    for (const auto& [k, v] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        fail(k, "unknown key in " + std::string(context));
      }
    }
  }

  const json& require(const json& obj, std::string_view key) const {
    if (!obj.is_object()) fail(key, "expected an object holding this key");
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) {
      throw ParseError("missing required key '" + std::string(key) + "'", 0);
    }
    return *it;
  }

  double number(const json& v, std::string_view key) const {
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  long integer(const json& v, std::string_view key) const {
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long>();
  }

  std::uint64_t u64(const json& v, std::string_view key) const {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(key, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const json& v, std::string_view key) const {
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const json& v, std::string_view key) const {
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  Mat matrix(const json& v, std::string_view key) const {
    if (v.is_number()) return Mat::Constant(1, 1, v.get<double>());
    if (!v.is_array() || v.empty()) fail(key, "malformed numeric array (expected [[...], ...])");
    const auto rows = static_cast<Eigen::Index>(v.size());
    if (!v[0].is_array() || v[0].empty()) {
      fail(key, "malformed numeric array (expected nested rows)");
    }
    const auto cols = static_cast<Eigen::Index>(v[0].size());
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const json& row = v[i];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
        fail(key, "malformed numeric array (ragged rows)");
      }
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!row[j].is_number()) fail(key, "malformed numeric array (non-numeric entry)");
        m(i, j) = row[j].get<double>();
      }
    }
    return m;
  }

  Vec vector(const json& v, std::string_view key) const {
    if (v.is_number()) return Vec::Constant(1, v.get<double>());
    if (!v.is_array() || v.empty()) fail(key, "expected a nonempty numeric array");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, "malformed numeric array (non-numeric entry)");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  FeatureMode mode(const json& v, std::string_view key) const {
    try {
      return parse_feature_mode(string(v, key));
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      fail(key, e.what());
    }
  }

 private:
  std::string_view text_;
};

Predictor read_predictor(const Reader& rd, const json& obj, std::string_view context) {
  rd.reject_unknown(obj, context, {"A", "B", "C", "D", "mode", "name", "varying", "lower",
                                   "upper"});
  Predictor f;
  f.A = rd.matrix(rd.require(obj, "A"), "A");
  f.B = rd.matrix(rd.require(obj, "B"), "B");
  f.C = rd.matrix(rd.require(obj, "C"), "C");
  f.D = rd.matrix(rd.require(obj, "D"), "D");
  f.mode = rd.mode(rd.require(obj, "mode"), "mode");
  return f;
}

SystemSpec read_system(const Reader& rd, const json& root) {
  if (!root.is_object()) throw ParseError("system definition must be a JSON object", 1);
  rd.reject_unknown(root, "system", {"n_y", "n_u", "A_g", "K_g", "C_g", "Q_e", "predictor"});
  SystemSpec s;
  Generator& g = s.generator;
  g.n_y = static_cast<int>(rd.integer(rd.require(root, "n_y"), "n_y"));
  g.n_u = static_cast<int>(rd.integer(rd.require(root, "n_u"), "n_u"));
  g.A = rd.matrix(rd.require(root, "A_g"), "A_g");
  g.K = rd.matrix(rd.require(root, "K_g"), "K_g");
  g.C = rd.matrix(rd.require(root, "C_g"), "C_g");
  g.Qe = rd.matrix(rd.require(root, "Q_e"), "Q_e");
  validate_generator(g);  // dimension errors surface here
  if (root.contains("predictor")) {
    s.predictor = read_predictor(rd, root.at("predictor"), "predictor");
    try {
      validate_predictor(*s.predictor, g.n_y, g.n_u);
    } catch (const StabilityError& e) {
      throw InputError(std::string("system predictor: ") + e.what());
    }
  }
  return s;
}

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json predictor_json(const Predictor& f) {
  return json{{"A", matrix_json(f.A)},
              {"B", matrix_json(f.B)},
              {"C", matrix_json(f.C)},
              {"D", matrix_json(f.D)},
              {"mode", std::string(to_string(f.mode))}};
}

std::string canonical_json(const RunConfig& c) {
  json sys{{"n_y", c.system.generator.n_y},
           {"n_u", c.system.generator.n_u},
           {"A_g", matrix_json(c.system.generator.A)},
           {"K_g", matrix_json(c.system.generator.K)},
           {"C_g", matrix_json(c.system.generator.C)},
           {"Q_e", matrix_json(c.system.generator.Qe)}};
  if (c.system.predictor) sys["predictor"] = predictor_json(*c.system.predictor);
  json hyps = json::array();
  for (const auto& h : c.hypotheses) {
    json entry = predictor_json(h.templ);
    entry["name"] = h.name;
    json varying = json::array();
    for (const auto& v : h.varying) {
      varying.push_back(json{{"matrix", std::string(1, v.matrix)}, {"row", v.row}, {"col", v.col}});
    }
    entry["varying"] = varying;
    entry["lower"] = vector_json(h.lower);
    entry["upper"] = vector_json(h.upper);
    hyps.push_back(entry);
  }
  json root{{"system", sys},
            {"hypotheses", hyps},
            {"N_grid", c.N_grid},
            {"delta", c.delta},
            {"lambda", c.lambda ? json(*c.lambda) : json("auto")},
            {"lambda_fraction", c.lambda_fraction},
            {"lambda_renyi", c.lambda_renyi},
            {"r", c.r},
            {"mcmc",
             {{"prior_samples", c.mcmc.prior_samples},
              {"posterior_samples", c.mcmc.posterior_samples},
              {"burn_in", c.mcmc.burn_in},
              {"thinning", c.mcmc.thinning},
              {"proposal_std", c.mcmc.proposal_std > 0.0 ? json(c.mcmc.proposal_std) : json("auto")},
              {"chains", c.mcmc.chains},
              {"kl_grid_points", c.mcmc.kl_grid_points}}},
            {"seeds",
             {{"data_seed", c.seeds.data_seed},
              {"mcmc_seed", c.seeds.mcmc_seed},
              {"shared_data_seed", c.seeds.shared_data_seed}}},
            {"kw_method", std::string(to_string(c.kw_method))},
            {"series_tol", c.series_tol},
            {"coverage",
             {{"N", c.coverage.N},
              {"trials", c.coverage.trials},
              {"prior_samples", c.coverage.prior_samples},
              {"posterior_samples", c.coverage.posterior_samples}}},
            {"out_dir", c.out_dir}};
  return root.dump(2);
}

void require_positive(const Reader& rd, long v, std::string_view key) {
  if (v < 1) rd.fail(key, "must be at least 1");
}

}  // namespace

SystemSpec parse_system(std::string_view text) {
  const Reader rd(text);
  return read_system(rd, parse_json(text));
}

SystemSpec load_system_file(const std::filesystem::path& path) {
  return parse_system(read_file(path));
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  const Reader rd(text);
  const json root = parse_json(text);
  if (!root.is_object()) throw ParseError("run config must be a JSON object", 1);
  rd.reject_unknown(root, "run config",
                    {"system", "system_file", "hypotheses", "N_grid", "delta", "lambda",
                     "lambda_fraction", "lambda_renyi", "r", "mcmc", "seeds", "kw_method",
                     "series_tol", "coverage", "out_dir"});
  RunConfig c;

  if (root.contains("system") == root.contains("system_file")) {
    throw ParseError("exactly one of 'system' or 'system_file' is required", 1);
  }
  if (root.contains("system")) {
    c.system = read_system(rd, root.at("system"));
  } else {
    c.system = load_system_file(base_dir / rd.string(root.at("system_file"), "system_file"));
  }
  const Generator& g = c.system.generator;

  const json& hyps = rd.require(root, "hypotheses");
  if (!hyps.is_array() || hyps.empty()) rd.fail("hypotheses", "expected a nonempty array");
  std::set<std::string> names;
  for (const json& h : hyps) {
    HypothesisSpec spec;
    spec.templ = read_predictor(rd, h, "hypothesis");
    spec.name = h.contains("name") ? rd.string(h.at("name"), "name")
                                   : std::string(to_string(spec.templ.mode));
    if (!names.insert(spec.name).second) rd.fail("name", "duplicate hypothesis name");
    const json& varying = rd.require(h, "varying");
    if (!varying.is_array() || varying.empty()) rd.fail("varying", "expected a nonempty array");
    for (const json& v : varying) {
      rd.reject_unknown(v, "varying entry", {"matrix", "row", "col"});
      const std::string which = rd.string(rd.require(v, "matrix"), "matrix");
      if (which.size() != 1 || std::string("ABCD").find(which[0]) == std::string::npos) {
        rd.fail("matrix", "must be one of A, B, C, D");
      }
      spec.varying.push_back(VaryingEntry{which[0],
                                          static_cast<int>(rd.integer(rd.require(v, "row"), "row")),
                                          static_cast<int>(rd.integer(rd.require(v, "col"), "col"))});
    }
    spec.lower = rd.vector(rd.require(h, "lower"), "lower");
    spec.upper = rd.vector(rd.require(h, "upper"), "upper");
    c.hypotheses.push_back(std::move(spec));
  }

  const json& grid = rd.require(root, "N_grid");
  if (!grid.is_array() || grid.empty()) rd.fail("N_grid", "expected a nonempty array");
  for (const json& n : grid) {
    const long v = rd.integer(n, "N_grid");
    if (v < 1) rd.fail("N_grid", "entries must be at least 1");
    if (!c.N_grid.empty() && v <= c.N_grid.back()) rd.fail("N_grid", "must be strictly increasing");
    c.N_grid.push_back(v);
  }

  if (root.contains("delta")) c.delta = rd.number(root.at("delta"), "delta");
  if (!(c.delta > 0.0 && c.delta <= 0.5)) rd.fail("delta", "must lie in (0, 0.5]");
  if (root.contains("lambda")) {
    const json& l = root.at("lambda");
    if (l.is_string()) {
      if (l.get<std::string>() != "auto") rd.fail("lambda", "expected a number or \"auto\"");
    } else {
      c.lambda = rd.number(l, "lambda");
      if (!(*c.lambda > 0.0)) rd.fail("lambda", "must be positive");
    }
  }
  if (root.contains("lambda_fraction")) {
    c.lambda_fraction = rd.number(root.at("lambda_fraction"), "lambda_fraction");
  }
  if (!(c.lambda_fraction > 0.0 && c.lambda_fraction < 1.0)) {
    rd.fail("lambda_fraction", "must lie in (0, 1)");
  }
  if (root.contains("lambda_renyi")) c.lambda_renyi = rd.number(root.at("lambda_renyi"), "lambda_renyi");
  if (!(c.lambda_renyi >= 0.0)) rd.fail("lambda_renyi", "must be nonnegative");
  if (root.contains("r")) c.r = static_cast<int>(rd.integer(root.at("r"), "r"));
  if (c.r < 2 || c.r % 2 != 0) rd.fail("r", "must be an even integer >= 2");

  if (root.contains("mcmc")) {
    const json& m = root.at("mcmc");
    rd.reject_unknown(m, "mcmc", {"prior_samples", "posterior_samples", "burn_in", "thinning",
                                  "proposal_std", "chains", "kl_grid_points"});
    if (m.contains("prior_samples")) c.mcmc.prior_samples = rd.integer(m.at("prior_samples"), "prior_samples");
    if (m.contains("posterior_samples")) {
      c.mcmc.posterior_samples = rd.integer(m.at("posterior_samples"), "posterior_samples");
    }
    if (m.contains("burn_in")) c.mcmc.burn_in = rd.integer(m.at("burn_in"), "burn_in");
    if (m.contains("thinning")) c.mcmc.thinning = static_cast<int>(rd.integer(m.at("thinning"), "thinning"));
    if (m.contains("proposal_std")) {
      const json& p = m.at("proposal_std");
      if (p.is_string()) {
        if (p.get<std::string>() != "auto") rd.fail("proposal_std", "expected a number or \"auto\"");
        c.mcmc.proposal_std = -1.0;
      } else {
        c.mcmc.proposal_std = rd.number(p, "proposal_std");
        if (!(c.mcmc.proposal_std > 0.0)) rd.fail("proposal_std", "must be positive");
      }
    }
    if (m.contains("chains")) c.mcmc.chains = static_cast<int>(rd.integer(m.at("chains"), "chains"));
    if (m.contains("kl_grid_points")) {
      c.mcmc.kl_grid_points = rd.integer(m.at("kl_grid_points"), "kl_grid_points");
    }
  }
  require_positive(rd, c.mcmc.prior_samples, "prior_samples");
  require_positive(rd, c.mcmc.posterior_samples, "posterior_samples");
  require_positive(rd, c.mcmc.thinning, "thinning");
  require_positive(rd, c.mcmc.chains, "chains");
  if (c.mcmc.chains > c.mcmc.posterior_samples) rd.fail("chains", "exceeds posterior_samples");
  if (c.mcmc.kl_grid_points < 2) rd.fail("kl_grid_points", "must be at least 2");

  if (root.contains("seeds")) {
    const json& s = root.at("seeds");
    rd.reject_unknown(s, "seeds", {"data_seed", "mcmc_seed", "shared_data_seed"});
    if (s.contains("data_seed")) c.seeds.data_seed = rd.u64(s.at("data_seed"), "data_seed");
    if (s.contains("mcmc_seed")) c.seeds.mcmc_seed = rd.u64(s.at("mcmc_seed"), "mcmc_seed");
    if (s.contains("shared_data_seed")) {
      c.seeds.shared_data_seed = rd.boolean(s.at("shared_data_seed"), "shared_data_seed");
    }
  }
  if (root.contains("kw_method")) {
    try {
      c.kw_method = parse_kw_method(rd.string(root.at("kw_method"), "kw_method"));
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      rd.fail("kw_method", e.what());
    }
  }
  if (root.contains("series_tol")) c.series_tol = rd.number(root.at("series_tol"), "series_tol");
  if (!(c.series_tol > 0.0)) rd.fail("series_tol", "must be positive");

  if (root.contains("coverage")) {
    const json& cv = root.at("coverage");
    rd.reject_unknown(cv, "coverage", {"N", "trials", "prior_samples", "posterior_samples"});
    if (cv.contains("N")) c.coverage.N = rd.integer(cv.at("N"), "N");
    if (cv.contains("trials")) c.coverage.trials = rd.integer(cv.at("trials"), "trials");
    if (cv.contains("prior_samples")) {
      c.coverage.prior_samples = rd.integer(cv.at("prior_samples"), "prior_samples");
    }
    if (cv.contains("posterior_samples")) {
      c.coverage.posterior_samples = rd.integer(cv.at("posterior_samples"), "posterior_samples");
    }
  }
  require_positive(rd, c.coverage.N, "N");
  require_positive(rd, c.coverage.prior_samples, "prior_samples");
  require_positive(rd, c.coverage.posterior_samples, "posterior_samples");

  if (root.contains("out_dir")) c.out_dir = rd.string(root.at("out_dir"), "out_dir");

  for (const auto& h : c.hypotheses) {
    if (h.templ.n_y() != g.n_y || h.templ.D.rows() != g.n_y) {
      throw InputError("hypothesis '" + h.name + "' output width differs from the system");
    }
  }
  c.canonical = canonical_json(c);
  return c;
}

void refresh_canonical(RunConfig& cfg) { cfg.canonical = canonical_json(cfg); }

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

ParamBox make_param_box(const HypothesisSpec& h, const Generator& g) {
  try {
    return ParamBox(h.templ, h.varying, h.lower, h.upper, g.n_y, g.n_u);
  } catch (const InputError& e) {
    throw InputError("hypothesis '" + h.name + "': " + e.what());
  }
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << 't';
  for (int i = 0; i < traj.n_y(); ++i) out << ",y_" << (i + 1);
  for (int i = 0; i < traj.n_u(); ++i) out << ",u_" << (i + 1);
  out << '\n';
  for (long t = 0; t < traj.N(); ++t) {
    out << t;
    for (int i = 0; i < traj.n_y(); ++i) out << ',' << csv::num(traj.y(i, t));
    for (int i = 0; i < traj.n_u(); ++i) out << ',' << csv::num(traj.u(i, t));
    out << '\n';
  }
  return out.str();
}

}  // namespace lticert
