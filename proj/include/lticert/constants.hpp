#pragma once

#include <string_view>

namespace lticert {

/// How the lag-covariance bound K_w is obtained.
enum class KwMethod { LemmaBound, ExactLagCovariance };

std::string_view to_string(KwMethod method);
KwMethod parse_kw_method(std::string_view text);

/// Per-predictor constants entering both generalization bounds.
struct BoundConstants {
  double Ge = 0.0;   // l1 gain of the error system
  double Gm1 = 0.0;  // (2 sum ||A_e^k||^2 + 4)^(1/2)
  double G0 = 0.0;   // sum ||A^^k||
  double G1 = 0.0;   // H2-type bound of the error system
  double G2 = 0.0;   // l1-type bound of the predictor
  double G3 = 0.0;   // (mu_max K_w)^(1/2)
  double G = 0.0;    // Gm1 G0 G1 G2 G3
  double Kw = 0.0;
  double mu_max = 0.0;
  int m = 0;
  KwMethod kw_method = KwMethod::ExactLagCovariance;
};

}  // namespace lticert
