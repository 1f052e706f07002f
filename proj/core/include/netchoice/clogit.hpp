#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "netchoice/choices.hpp"

namespace netchoice {

// Restricts an event's alternatives to a subset; alternatives outside the
// support get probability zero, and an event whose chosen alternative is
// outside the support has likelihood zero (reported, never thrown).
struct Support {
  enum class Kind { All, FofOnly, ColumnAtLeast, AllowedLevels };
  Kind kind = Kind::All;
  int column = -1;        // ColumnAtLeast / AllowedLevels level carrier
  double threshold = 1.0; // ColumnAtLeast
  std::vector<std::uint8_t> allowed;  // AllowedLevels, indexed by level

  static Support all() { return {}; }
  static Support fof_only() { return {Kind::FofOnly, -1, 1.0, {}}; }
  static Support column_at_least(int column, double threshold) {
    return {Kind::ColumnAtLeast, column, threshold, {}};
  }
  static Support allowed_levels(int column, std::vector<std::uint8_t> mask) {
    return {Kind::AllowedLevels, column, 1.0, std::move(mask)};
  }
};

// Maps choice data onto a parameter vector: a set of dense feature columns
// plus at most one categorical column whose integer values index per-level
// coefficients (used for per-degree and per-node fixed effects). Parameters
// are laid out [dense..., level 0..n_levels-1]; the pinned level is fixed at
// zero for identification.
struct Design {
  const ChoiceData* data = nullptr;
  std::vector<int> dense_cols;
  int level_col = -1;
  int n_levels = 0;
  int pin_level = -1;
  Support support;
  int threads = 1;

  static Design dense(const ChoiceData& data);  // all columns as dense features
  static Design columns(const ChoiceData& data, const std::vector<std::string>& names);

  int n_dense() const { return static_cast<int>(dense_cols.size()); }
  int n_params() const { return n_dense() + n_levels; }
  int level_of(const ChoiceEvent& ev, std::int32_t alt) const;
  bool in_support(const ChoiceEvent& ev, std::int32_t alt) const;
  std::vector<std::string> param_names() const;
  std::vector<std::uint8_t> base_frozen() const;  // pinned level marked frozen
  void validate() const;
};

struct EvalDiagnostics {
  std::int64_t zero_probability_events = 0;
};

// Softmax choice probabilities over one event's alternatives (zeros outside
// the support). Computed with max subtraction.
Eigen::VectorXd choice_prob(const Design& design, const Eigen::VectorXd& theta,
                            std::size_t event_index);

// Sum over events of the log probability of the chosen alternative, weighted
// by event weights times the optional extra weights (used by EM). Events with
// zero-probability chosen alternatives contribute -inf and are counted in the
// diagnostics.
double log_likelihood(const Design& design, const Eigen::VectorXd& theta,
                      const double* extra_weights = nullptr, EvalDiagnostics* diag = nullptr);

void log_likelihood_gradient(const Design& design, const Eigen::VectorXd& theta, double& loglik,
                             Eigen::VectorXd& gradient, const double* extra_weights = nullptr,
                             EvalDiagnostics* diag = nullptr);

// Hessian of the log-likelihood (negative semidefinite).
Eigen::MatrixXd hessian(const Design& design, const Eigen::VectorXd& theta,
                        const double* extra_weights = nullptr);

// Per-event log likelihood under theta (-inf where the chosen alternative is
// unsupported); the event's own weight is not applied.
std::vector<double> per_event_log_likelihood(const Design& design, const Eigen::VectorXd& theta);

struct FitOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;   // max-norm
  double relative_tolerance = 1e-10;  // |delta loglik| / (1 + |loglik|)
  double ridge = 0.0;                 // optional L2 penalty to tame separation
  bool compute_se = true;
  int threads = 1;
};

struct LogitFit {
  std::vector<std::string> names;
  Eigen::VectorXd theta;
  Eigen::VectorXd se;  // NaN where undefined (frozen coordinates, singular Hessian)
  double loglik = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool se_defined = false;
  bool ridge_active = false;
  std::int64_t n_events = 0;
  std::int64_t skipped_zero_probability_events = 0;
  std::vector<std::uint8_t> frozen;
  std::string diagnostic;  // non-empty on suspected separation / collinearity
};

// Maximizes the (concave) log-likelihood with BFGS and a backtracking line
// search, starting from zero unless theta0 is given. Frozen coordinates keep
// their starting values. Standard errors come from the inverse negative
// Hessian at the optimum (unpenalized even when ridge is active, flagged).
LogitFit fit(const Design& design, const FitOptions& options = {},
             const double* extra_weights = nullptr, const Eigen::VectorXd* theta0 = nullptr,
             const std::vector<std::uint8_t>* frozen = nullptr);

struct DegreeCoefficient {
  int degree = 0;
  double theta = 0.0;
  double se = 0.0;
  std::int64_t chosen_count = 0;
  std::int64_t exposure_count = 0;
  bool estimated = false;  // false: pinned, never exposed, or never chosen
  bool pinned = false;
};

struct NonparametricPaFit {
  std::vector<DegreeCoefficient> coefficients;  // indexed by degree, 0..max_degree
  int pin_degree = 1;
  LogitFit fit;
};

// Per-degree attachment coefficients theta_k relative to the pinned level
// (degree 1 by default). Degrees above max_degree share the top bucket.
// Degrees that are exposed but never chosen have a divergent MLE; they are
// excluded from the support and reported with their counts, not estimated.
NonparametricPaFit fit_nonparametric_pa(const ChoiceData& data, int max_degree,
                                        const FitOptions& options = {},
                                        const std::string& degree_column = "degree",
                                        int pin_degree = 1);

}  // namespace netchoice
