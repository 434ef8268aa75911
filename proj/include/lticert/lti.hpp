#pragma once

// System models: the innovation-form data generator, LTI predictors, the
// stacked error system, and trajectory simulation.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "lticert/matnum.hpp"

namespace lticert {

/// Which signals the predictor sees: w = u, or w = [y; u].
enum class FeatureMode { InputOnly, InputOutput };

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

inline int feature_dim(FeatureMode mode, int n_y, int n_u) {
  return mode == FeatureMode::InputOnly ? n_u : n_y + n_u;
}

/// Innovation-form generator of the joint process [y; u]:
///   x(t+1) = A x(t) + K e(t),  [y(t); u(t)] = C x(t) + e(t),  e ~ N(0, Qe).
struct Generator {
  Mat A;
  Mat K;
  Mat C;
  Mat Qe;
  int n_y = 1;
  int n_u = 1;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return n_y + n_u; }
  Mat C1() const { return C.topRows(n_y); }
  Mat C2() const { return C.bottomRows(n_u); }
};

/// Deterministic predictor x^(t+1) = A x^ + B w, y^(t) = C x^ + D w.
struct Predictor {
  Mat A;
  Mat B;
  Mat C;
  Mat D;
  FeatureMode mode = FeatureMode::InputOnly;

  int n_hat() const { return static_cast<int>(A.rows()); }
  int n_w() const { return static_cast<int>(B.cols()); }
  int n_y() const { return static_cast<int>(C.rows()); }
};

/// Stacked system driven by e whose output is y - y^_f (infinite past).
struct ErrorSystem {
  Mat A;
  Mat K;
  Mat C;
  Mat D;

  /// The scalar-output error system of output component p.
  ErrorSystem output_row(int p) const;
};

/// Plain (A, B, C, D) quadruple.
struct StateSpace {
  Mat A;
  Mat B;
  Mat C;
  Mat D;
};

/// Innovation form (A, B, C, D, K) of an output y driven by input u.
struct InnovationForm {
  Mat A;
  Mat B;
  Mat C;
  Mat D;
  Mat K;
};

struct GeneratorReport {
  double rho_Ag = 0.0;
  double rho_closed = 0.0;
  bool qe_psd = false;
  bool ok = false;
};

/// Samples of one simulated data record. Column t of y/u/e holds time t.
struct Trajectory {
  Mat y;
  Mat u;
  Mat e;
  /// Stationary predictor state x^(0) when simulated jointly with a predictor.
  std::optional<Vec> predictor_state0;
  /// Full stacked state [x(0); x^(0)] of the joint simulation.
  std::optional<Vec> joint_initial_state;
  std::optional<FeatureMode> predictor_mode;
  std::uint64_t seed = 0;

  long N() const { return static_cast<long>(y.cols()); }
  int n_y() const { return static_cast<int>(y.rows()); }
  int n_u() const { return static_cast<int>(u.rows()); }
  /// Feature sequence w(t) for the given mode (n_w x N).
  Mat features(FeatureMode mode) const;
};

/// Checks dimensions (throws DimensionError) and reports Schur/PSD status.
GeneratorReport validate_generator(const Generator& g);

/// Throws InputError when validate_generator is not ok.
void require_valid_generator(const Generator& g);

/// Checks predictor dimensions against (n_y, n_u), the zero y-block of D under
/// InputOutput, and that A is Schur.
void validate_predictor(const Predictor& f, int n_y, int n_u);

/// Feature read-out matrix C_w and selector S (w = C_w x + S e).
Mat feature_output_matrix(const Generator& g, FeatureMode mode);
Mat feature_selector(const Generator& g, FeatureMode mode);

/// Simulates N samples. The generator state (or, with a predictor, the
/// stacked state [x; x^]) starts from its stationary Gaussian law, so the
/// predictor state carries the infinite past exactly. Draws are consumed in
/// order: initial state first, then e(0), e(1), ...
Trajectory simulate(const Generator& g, long N, std::uint64_t seed,
                    const std::optional<Predictor>& predictor = std::nullopt);

ErrorSystem build_error_system(const Generator& g, const Predictor& f);

/// Maps an innovation-form realization of y (input u) to a predictor.
Predictor predictor_from_innovation_form(const Mat& a, const Mat& b, const Mat& c,
                                         const Mat& d, const Mat& k, FeatureMode mode);

/// Inverse of predictor_from_innovation_form: A = A^ + K C^, B = B^_u + K D^_u.
InnovationForm invert_predictor_to_innovation_form(const Predictor& f);

struct CasePredictors {
  Predictor input_only;
  Predictor input_output;
  Mat d0;  // Qe_12 Qe_22^{-1}
};

/// Optimal predictors of y from u (input_only) and from [y; u] (input_output)
/// for generators whose u-part is feedback free, i.e. A, K, C are block upper
/// triangular for some state split. Throws UnsupportedStructureError otherwise.
CasePredictors derive_case_predictors(const Generator& g);

/// H2 distance between two systems with matching input/output sizes.
double h2_distance(const StateSpace& s1, const StateSpace& s2,
                   double tol = kDefaultSeriesTol);

}  // namespace lticert
