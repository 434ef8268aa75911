#include "lticert/certify.hpp"

// Kept byte-identical with configs/reference.json and
// configs/reference_system.json (checked by the test suite).

namespace lticert {

std::string_view reference_config_json() {
  return R"json({
  "system": {
    "n_y": 1,
    "n_u": 1,
    "A_g": [[0.16, -0.3], [0.0, -0.05]],
    "K_g": [[0.33, -0.75], [0.0, -0.09]],
    "C_g": [[1.0, 1.0], [0.0, 1.0]],
    "Q_e": [[0.9, 0.3], [0.3, 4.15]]
  },
  "hypotheses": [
    {
      "name": "case1",
      "mode": "input-only",
      "A": [[0.0, 0.43], [0.0, 0.04]],
      "B": [[-0.72], [-0.09]],
      "C": [[1.0, 0.92]],
      "D": [[0.07]],
      "varying": [{"matrix": "A", "row": 0, "col": 0}],
      "lower": [-0.5],
      "upper": [0.5]
    },
    {
      "name": "case2",
      "mode": "input-output",
      "A": [[0.0, 0.12], [0.0, 0.04]],
      "B": [[0.33, -0.73], [0.0, -0.09]],
      "C": [[1.0, 0.92]],
      "D": [[0.0, 0.07]],
      "varying": [{"matrix": "A", "row": 0, "col": 0}],
      "lower": [-0.5],
      "upper": [0.5]
    }
  ],
  "N_grid": [100, 200, 500, 1000, 2000, 5000, 10000],
  "delta": 0.1,
  "lambda": "auto",
  "lambda_fraction": 0.99,
  "lambda_renyi": 10,
  "r": 2,
  "mcmc": {
    "prior_samples": 100000,
    "posterior_samples": 10000,
    "burn_in": -1,
    "thinning": 1,
    "chains": 1,
    "kl_grid_points": 2000
  },
  "seeds": {"data_seed": 20240611, "mcmc_seed": 7, "shared_data_seed": false},
  "kw_method": "exact-lag-covariance",
  "series_tol": 1e-12,
  "coverage": {"N": 200, "trials": 200, "prior_samples": 10000, "posterior_samples": 2000},
  "out_dir": "lticert-out"
}
)json";
}

std::string_view reference_system_json() {
  return R"json({
  "n_y": 1,
  "n_u": 1,
  "A_g": [[0.16, -0.3], [0.0, -0.05]],
  "K_g": [[0.33, -0.75], [0.0, -0.09]],
  "C_g": [[1.0, 1.0], [0.0, 1.0]],
  "Q_e": [[0.9, 0.3], [0.3, 4.15]]
}
)json";
}

}  // namespace lticert
