#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "lticert/certify.hpp"
#include "lticert/config.hpp"

using namespace lticert;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::filesystem::path kSource = LTICERT_SOURCE_DIR;

// Replaces the first occurrence of `from` in the reference config.
std::string edited(std::string_view from, std::string_view to) {
  std::string text(reference_config_json());
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

int parse_error_line(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

int line_of(const std::string& text, std::string_view needle) {
  const auto pos = text.find(needle);
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

}  // namespace

TEST_CASE("shipped preset files match the embedded presets byte for byte") {
  CHECK(slurp(kSource / "configs/reference.json") == reference_config_json());
  CHECK(slurp(kSource / "configs/reference_system.json") == reference_system_json());
}

TEST_CASE("reference config parses to the reference system and classes") {
  const auto cfg = parse_run_config(reference_config_json());
  const auto g = fx::reference_generator();
  CHECK((cfg.system.generator.A - g.A).norm() == 0.0);
  CHECK((cfg.system.generator.K - g.K).norm() == 0.0);
  CHECK((cfg.system.generator.C - g.C).norm() == 0.0);
  CHECK((cfg.system.generator.Qe - g.Qe).norm() == 0.0);
  REQUIRE(cfg.hypotheses.size() == 2);
  CHECK(cfg.hypotheses[0].name == "case1");
  CHECK(cfg.hypotheses[0].templ.mode == FeatureMode::InputOnly);
  CHECK(cfg.hypotheses[1].templ.mode == FeatureMode::InputOutput);
  CHECK((cfg.hypotheses[1].templ.B - fx::case2(0.0).B).norm() == 0.0);
  CHECK(cfg.N_grid == std::vector<long>{100, 200, 500, 1000, 2000, 5000, 10000});
  CHECK(cfg.delta == 0.1);
  CHECK_FALSE(cfg.lambda.has_value());
  CHECK(cfg.lambda_renyi == 10.0);
  CHECK(cfg.r == 2);
  CHECK(cfg.mcmc.prior_samples == 100000);
  CHECK(cfg.kw_method == KwMethod::ExactLagCovariance);
  CHECK(cfg.seeds.data_seed == 20240611);

  const auto box = make_param_box(cfg.hypotheses[0], cfg.system.generator);
  CHECK(box.lower()[0] == -0.5);
  CHECK(box.upper()[0] == 0.5);
}

TEST_CASE("system_file resolves relative to the config directory") {
  const auto dir = std::filesystem::temp_directory_path() / "lticert_test_config";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "sys.json") << reference_system_json();
  }
  std::string text(reference_config_json());
  const auto start = text.find("\"system\": {");
  const auto end = text.find("},", start) + 2;
  text.replace(start, end - start, "\"system_file\": \"sys.json\",");
  {
    std::ofstream(dir / "run.json") << text;
  }
  const auto cfg = load_run_config(dir / "run.json");
  const auto direct = parse_run_config(reference_config_json());
  CHECK(cfg.canonical == direct.canonical);

  const auto sys = load_system_file(kSource / "configs/reference_system.json");
  CHECK((sys.generator.Qe - fx::reference_generator().Qe).norm() == 0.0);
  CHECK_FALSE(sys.predictor.has_value());
  std::filesystem::remove_all(dir);
}

TEST_CASE("parse errors carry the offending line") {
  const std::string broken = edited("[[0.9, 0.3], [0.3, 4.15]]", "[[0.9, 0.3], [0.3 4.15]]");
  CHECK(parse_error_line(broken) == line_of(broken, "\"Q_e\""));

  const std::string ragged = edited("[[0.9, 0.3], [0.3, 4.15]]", "[[0.9, 0.3], [0.3]]");
  CHECK(parse_error_line(ragged) == line_of(ragged, "\"Q_e\""));
  try {
    parse_run_config(ragged);
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("malformed numeric array") != std::string::npos);
    CHECK(msg.rfind("line " + std::to_string(e.line()) + ": ", 0) == 0);
    CHECK(msg.find("line", 5) == std::string::npos);
  }

  const std::string text_entry = edited("[[0.16, -0.3]", "[[\"x\", -0.3]");
  CHECK(parse_error_line(text_entry) == line_of(text_entry, "\"A_g\""));

  const std::string bad_delta = edited("\"delta\": 0.1", "\"delta\": 0.7");
  CHECK(parse_error_line(bad_delta) == line_of(bad_delta, "\"delta\""));

  const std::string bad_grid = edited("[100, 200,", "[200, 100,");
  CHECK(parse_error_line(bad_grid) == line_of(bad_grid, "\"N_grid\""));

  const std::string odd_r = edited("\"r\": 2", "\"r\": 3");
  CHECK(parse_error_line(odd_r) == line_of(odd_r, "\"r\""));

  const std::string unknown = edited("\"delta\": 0.1", "\"delta\": 0.1, \"detla\": 1");
  CHECK(parse_error_line(unknown) == line_of(unknown, "\"detla\""));

  const std::string lam = edited("\"lambda\": \"auto\"", "\"lambda\": \"max\"");
  CHECK(parse_error_line(lam) == line_of(lam, "\"lambda\""));

  CHECK_THROWS_AS(parse_run_config("[1, 2]"), ParseError);
  CHECK_THROWS_AS(parse_run_config(edited("\"N_grid\"", "\"N_grid_x\"")), ParseError);
}

TEST_CASE("semantic config errors") {
  // Unstable probes surface when the box is built.
  const auto wide = parse_run_config(edited("\"lower\": [-0.5]", "\"lower\": [-2]"));
  CHECK_THROWS_AS(make_param_box(wide.hypotheses[0], wide.system.generator), InputError);

  const std::string unstable = edited("[[0.16, -0.3]", "[[1.16, -0.3]");
  CHECK_FALSE(validate_generator(parse_run_config(unstable).system.generator).ok);

  CHECK_THROWS_AS(parse_run_config(edited("\"chains\": 1", "\"chains\": 20000")), ParseError);
  CHECK_THROWS_AS(parse_run_config(edited("\"kw_method\": \"exact-lag-covariance\"",
                                          "\"kw_method\": \"guess\"")),
                  ParseError);
  CHECK_THROWS_AS(parse_run_config(edited("\"C\": [[1.0, 0.92]],", "\"C\": [[1.0, 0.92], [0, 1]],")),
                  InputError);
}

TEST_CASE("explicit lambda and seeds round-trip through the canonical form") {
  const auto cfg = parse_run_config(edited("\"lambda\": \"auto\"", "\"lambda\": 0.004"));
  REQUIRE(cfg.lambda.has_value());
  CHECK(*cfg.lambda == 0.004);
  const auto again = parse_run_config(cfg.canonical);
  CHECK(again.canonical == cfg.canonical);
  CHECK(*again.lambda == 0.004);

  auto edited_cfg = cfg;
  edited_cfg.seeds.data_seed = 1;
  refresh_canonical(edited_cfg);
  CHECK(edited_cfg.canonical != cfg.canonical);
}

TEST_CASE("system definitions with a predictor") {
  std::string text(reference_system_json());
  const auto pos = text.rfind('}');
  text.insert(pos, ",\n  \"predictor\": {\"A\": [[0.5]], \"B\": [[1.0]], \"C\": [[1.0]], "
                   "\"D\": [[0.0]], \"mode\": \"input-only\"}\n");
  const auto sys = parse_system(text);
  REQUIRE(sys.predictor.has_value());
  CHECK(sys.predictor->A(0, 0) == 0.5);

  std::string bad = text;
  bad.replace(bad.find("[[0.5]]"), 7, "[[1.5]]");
  CHECK_THROWS_AS(parse_system(bad), InputError);
}

TEST_CASE("fnv1a and trajectory CSV") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  const auto traj = simulate(fx::reference_generator(), 3, 1);
  const std::string csv = trajectory_csv(traj);
  CHECK(csv.rfind("t,y_1,u_1\n0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
