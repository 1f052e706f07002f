#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netchoice/clogit.hpp"

namespace netchoice {

// One mixture component: a conditional logit over the shared choice data with
// its own coefficients, choice-set restriction, and frozen-coefficient mask.
// A mode with every coefficient frozen (e.g. the uniform mode, all zeros)
// never runs an M-step refit.
struct MixtureMode {
  std::string name;
  Design design;
  Eigen::VectorXd theta;
  std::vector<std::uint8_t> frozen;

  static MixtureMode uniform(const ChoiceData& data, Support support = Support::all(),
                             const std::string& name = "uniform");
  // Single log-degree coefficient; freeze it to pin alpha (e.g. at 1).
  static MixtureMode log_degree(const ChoiceData& data, double alpha0, bool frozen_alpha,
                                Support support = Support::all(),
                                const std::string& name = "pa");
};

struct MixtureModel {
  std::vector<MixtureMode> modes;
  Eigen::VectorXd pi;  // class probabilities, sum to 1

  int n_modes() const { return static_cast<int>(modes.size()); }
  void validate() const;
};

struct MixDiagnostics {
  std::int64_t minus_inf_events = 0;  // events with zero likelihood under every mode
};

// Total log-likelihood sum_k log sum_m pi_m L^m_k.
double mixture_loglik(const MixtureModel& model, MixDiagnostics* diag = nullptr);

// Posterior mode responsibilities, one row per event (rows sum to 1).
Eigen::MatrixXd responsibilities(const MixtureModel& model);

struct EmOptions {
  double tolerance = 1e-7;  // |delta total loglik|
  int max_iterations = 1000;
  int starts = 5;  // multi-start on perturbed responsibilities; best fit wins
  std::uint64_t seed = 0;
  FitOptions inner;  // M-step refit options
};

struct EmIterate {
  int iteration = 0;
  double loglik = 0.0;
  Eigen::VectorXd pi;
  std::vector<Eigen::VectorXd> thetas;
};

struct EmResult {
  MixtureModel model;
  std::vector<EmIterate> trajectory;  // of the winning start
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<int> degenerate_modes;  // modes whose class probability collapsed
};

// Expectation-maximization for the latent-class mixture: E-step computes
// responsibilities, the class probabilities update to their column means, and
// each free mode refits its coefficients by a responsibility-weighted logit
// fit. The total log-likelihood is non-decreasing across iterations (checked
// every iteration). Events with zero likelihood under every mode are
// rejected up front with their indices.
EmResult em_fit(const MixtureModel& init, const EmOptions& options = {});

// Dense log-likelihood grid over (alpha, pi1) for the two-mode family
// {alpha * log-degree, uniform}; pi1 weights the degree mode.
struct SurfaceResult {
  std::vector<double> alphas;
  std::vector<double> pis;
  Eigen::MatrixXd loglik;  // alphas x pis
};
SurfaceResult copy_model_surface(const ChoiceData& data, const std::vector<double>& alphas,
                                 const std::vector<double>& pis,
                                 const std::string& logdeg_column = "log_degree", int threads = 1);

// One-dimensional profile fit of a two-mode mixture with frozen modes:
// maximizes sum_k log(pi * exp(ll_a_k) + (1-pi) * exp(ll_b_k)) over pi.
struct ProfileFit {
  double pi = 0.0;  // weight of mode A at the maximum
  double loglik = 0.0;
  std::vector<std::pair<double, double>> curve;  // (pi, loglik) profile
};
ProfileFit fit_two_mode_profile(const std::vector<double>& ll_a, const std::vector<double>& ll_b,
                                int curve_points = 101);

// Local-search model: uniform over all nodes w.p. r, uniform over
// friends-of-friends w.p. 1-r. Uses the stored full-set and FoF-set counts,
// so the profile likelihood is exact even on negatively sampled events.
// Returns r as ProfileFit::pi.
ProfileFit fit_local_search(const ChoiceData& data);

// Copy model: uniform w.p. p, linear preferential attachment w.p. 1-p. PA
// weights equal the attachment degree, evaluated exactly from the chosen
// degree and the stored full-set degree sum. Returns p as ProfileFit::pi.
ProfileFit fit_copy(const ChoiceData& data, const std::string& degree_column = "degree");

}  // namespace netchoice
