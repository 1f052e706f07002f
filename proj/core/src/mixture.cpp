#include "netchoice/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "netchoice/rng.hpp"

namespace netchoice {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum_m pi_m exp(ll_m)) with -inf safety.
double log_mix(const Eigen::VectorXd& log_pi, const Eigen::VectorXd& ll) {
  double max_term = kNegInf;
  for (int m = 0; m < ll.size(); ++m) {
    const double term = log_pi[m] + ll[m];
    max_term = std::max(max_term, term);
  }
  if (max_term == kNegInf) return kNegInf;
  double z = 0.0;
  for (int m = 0; m < ll.size(); ++m) {
    const double term = log_pi[m] + ll[m];
    if (term != kNegInf) z += std::exp(term - max_term);
  }
  return max_term + std::log(z);
}

Eigen::VectorXd log_of_pi(const Eigen::VectorXd& pi) {
  Eigen::VectorXd log_pi(pi.size());
  for (int m = 0; m < pi.size(); ++m) log_pi[m] = pi[m] > 0.0 ? std::log(pi[m]) : kNegInf;
  return log_pi;
}

// Per-event log-likelihood of every mode: n_events x n_modes.
Eigen::MatrixXd mode_loglik_matrix(const MixtureModel& model) {
  const auto n = static_cast<Eigen::Index>(model.modes[0].design.data->events.size());
  Eigen::MatrixXd ll(n, model.n_modes());
  for (int m = 0; m < model.n_modes(); ++m) {
    const auto col = per_event_log_likelihood(model.modes[m].design, model.modes[m].theta);
    for (Eigen::Index k = 0; k < n; ++k) ll(k, m) = col[static_cast<std::size_t>(k)];
  }
  return ll;
}

}  // namespace

MixtureMode MixtureMode::uniform(const ChoiceData& data, Support support,
                                 const std::string& name) {
  MixtureMode mode;
  mode.name = name;
  mode.design.data = &data;
  mode.design.support = std::move(support);
  mode.theta = Eigen::VectorXd::Zero(0);
  return mode;
}

MixtureMode MixtureMode::log_degree(const ChoiceData& data, double alpha0, bool frozen_alpha,
                                    Support support, const std::string& name) {
  MixtureMode mode;
  mode.name = name;
  mode.design = Design::columns(data, {"log_degree"});
  mode.design.support = std::move(support);
  mode.theta = Eigen::VectorXd::Constant(1, alpha0);
  if (frozen_alpha) mode.frozen.assign(1, 1);
  return mode;
}

void MixtureModel::validate() const {
  if (modes.empty()) throw ConfigError("mixture model has no modes");
  if (pi.size() != n_modes()) throw ConfigError("pi dimension does not match the modes");
  double total = 0.0;
  for (int m = 0; m < pi.size(); ++m) {
    if (pi[m] < -1e-12) throw ConfigError("mixture class probabilities must be >= 0");
    total += pi[m];
  }
  if (std::abs(total - 1.0) > 1e-8) throw ConfigError("mixture class probabilities must sum to 1");
  const ChoiceData* data = modes[0].design.data;
  for (const auto& mode : modes) {
    if (mode.design.data != data) throw ConfigError("all modes must share one choice data set");
    mode.design.validate();
    if (mode.theta.size() != mode.design.n_params()) {
      throw ConfigError("mode '" + mode.name + "': theta dimension mismatch");
    }
    if (!mode.frozen.empty() && mode.frozen.size() != static_cast<std::size_t>(mode.theta.size())) {
      throw ConfigError("mode '" + mode.name + "': frozen mask dimension mismatch");
    }
  }
}

double mixture_loglik(const MixtureModel& model, MixDiagnostics* diag) {
  model.validate();
  const Eigen::MatrixXd ll = mode_loglik_matrix(model);
  const Eigen::VectorXd log_pi = log_of_pi(model.pi);
  double total = 0.0;
  std::int64_t bad = 0;
  for (Eigen::Index k = 0; k < ll.rows(); ++k) {
    const double weight = model.modes[0].design.data->events[static_cast<std::size_t>(k)].weight;
    const double event_ll = log_mix(log_pi, ll.row(k).transpose());
    if (event_ll == kNegInf) {
      ++bad;
    } else {
      total += weight * event_ll;
    }
  }
  if (diag) diag->minus_inf_events = bad;
  return bad > 0 ? kNegInf : total;
}

Eigen::MatrixXd responsibilities(const MixtureModel& model) {
  model.validate();
  const Eigen::MatrixXd ll = mode_loglik_matrix(model);
  const Eigen::VectorXd log_pi = log_of_pi(model.pi);
  const int M = model.n_modes();
  Eigen::MatrixXd gamma(ll.rows(), M);
  for (Eigen::Index k = 0; k < ll.rows(); ++k) {
    const double denom = log_mix(log_pi, ll.row(k).transpose());
    if (denom == kNegInf) {
      gamma.row(k).setConstant(1.0 / M);  // callers reject these events up front
      continue;
    }
    for (int m = 0; m < M; ++m) {
      const double term = log_pi[m] + ll(k, m);
      gamma(k, m) = term == kNegInf ? 0.0 : std::exp(term - denom);
    }
  }
  return gamma;
}

namespace {

struct EmRun {
  MixtureModel model;
  std::vector<EmIterate> trajectory;
  double loglik = kNegInf;
  int iterations = 0;
  bool converged = false;
  std::vector<int> degenerate_modes;
};

EmRun run_em(MixtureModel model, const Eigen::MatrixXd* gamma0, const EmOptions& options) {
  const auto& events = model.modes[0].design.data->events;
  const auto n = static_cast<Eigen::Index>(events.size());
  const int M = model.n_modes();

  Eigen::MatrixXd gamma;
  if (gamma0) {
    gamma = *gamma0;
    // M-step from the supplied responsibilities seeds pi and the thetas.
    model.pi = gamma.colwise().mean();
  }

  EmRun run;
  run.trajectory.reserve(16);
  double prev_ll = kNegInf;

  std::vector<double> weights(static_cast<std::size_t>(n));
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    // M-step (skipped on the first iteration unless responsibilities were
    // supplied): refit each free mode with responsibility weights.
    if (iter > 1 || gamma0) {
      model.pi = gamma.colwise().mean();
      for (int m = 0; m < M; ++m) {
        MixtureMode& mode = model.modes[m];
        const bool all_frozen =
            mode.theta.size() == 0 ||
            (!mode.frozen.empty() &&
             std::all_of(mode.frozen.begin(), mode.frozen.end(), [](std::uint8_t f) { return f != 0; }));
        if (all_frozen) continue;
        if (model.pi[m] < 1e-10) continue;  // degenerate mode, leave as is
        for (Eigen::Index k = 0; k < n; ++k) weights[static_cast<std::size_t>(k)] = gamma(k, m);
        FitOptions inner = options.inner;
        inner.compute_se = false;
        const LogitFit refit = fit(mode.design, inner, weights.data(), &mode.theta,
                                   mode.frozen.empty() ? nullptr : &mode.frozen);
        mode.theta = refit.theta;
      }
    }

    // E-step quantities at the current parameters.
    const Eigen::MatrixXd ll = mode_loglik_matrix(model);
    const Eigen::VectorXd log_pi = log_of_pi(model.pi);
    double total = 0.0;
    gamma.resize(n, M);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double denom = log_mix(log_pi, ll.row(k).transpose());
      if (denom == kNegInf) {
        std::stringstream message;
        message << "em_fit: events with zero likelihood under every mode:";
        int listed = 0;
        for (Eigen::Index j = 0; j < n && listed < 10; ++j) {
          if (log_mix(log_pi, ll.row(j).transpose()) == kNegInf) {
            message << ' ' << events[static_cast<std::size_t>(j)].event;
            ++listed;
          }
        }
        throw DataError(message.str());
      }
      total += events[static_cast<std::size_t>(k)].weight * denom;
      for (int m = 0; m < M; ++m) {
        const double term = log_pi[m] + ll(k, m);
        gamma(k, m) = term == kNegInf ? 0.0 : std::exp(term - denom);
      }
    }

    EmIterate snapshot;
    snapshot.iteration = iter;
    snapshot.loglik = total;
    snapshot.pi = model.pi;
    for (const auto& mode : model.modes) snapshot.thetas.push_back(mode.theta);
    run.trajectory.push_back(std::move(snapshot));

    if (prev_ll != kNegInf && total < prev_ll - 1e-6 * (1.0 + std::abs(prev_ll))) {
      throw ConvergenceError("em_fit: total log-likelihood decreased, from " +
                             std::to_string(prev_ll) + " to " + std::to_string(total));
    }
    run.iterations = iter;
    if (prev_ll != kNegInf && std::abs(total - prev_ll) < options.tolerance) {
      run.converged = true;
      prev_ll = total;
      break;
    }
    prev_ll = total;
  }

  run.loglik = prev_ll;
  run.model = std::move(model);
  for (int m = 0; m < M; ++m) {
    if (run.model.pi[m] < 1e-10) run.degenerate_modes.push_back(m);
  }
  return run;
}

}  // namespace

EmResult em_fit(const MixtureModel& init, const EmOptions& options) {
  MixtureModel base = init;
  base.validate();
  const auto n =
      static_cast<Eigen::Index>(base.modes[0].design.data->events.size());
  const int M = base.n_modes();
  if (n == 0) throw DataError("em_fit: no events");

  // Baseline start: uniform class probabilities and the caller's thetas.
  Eigen::VectorXd uniform_pi = Eigen::VectorXd::Constant(M, 1.0 / M);

  EmRun best;
  bool have_best = false;
  const int starts = std::max(1, options.starts);
  for (int s = 0; s < starts; ++s) {
    MixtureModel model = base;
    EmRun run;
    if (s == 0) {
      model.pi = uniform_pi;
      run = run_em(std::move(model), nullptr, options);
    } else {
      Rng rng(splitmix64(options.seed + static_cast<std::uint64_t>(s)));
      Eigen::MatrixXd gamma0(n, M);
      for (Eigen::Index k = 0; k < n; ++k) {
        double row_sum = 0.0;
        for (int m = 0; m < M; ++m) {
          gamma0(k, m) = 0.25 + rng.next_double();
          row_sum += gamma0(k, m);
        }
        gamma0.row(k) /= row_sum;
      }
      model.pi = uniform_pi;
      run = run_em(std::move(model), &gamma0, options);
    }
    if (!have_best || run.loglik > best.loglik) {
      best = std::move(run);
      have_best = true;
    }
  }

  EmResult result;
  result.model = std::move(best.model);
  result.trajectory = std::move(best.trajectory);
  result.loglik = best.loglik;
  result.iterations = best.iterations;
  result.converged = best.converged;
  result.degenerate_modes = std::move(best.degenerate_modes);
  return result;
}

SurfaceResult copy_model_surface(const ChoiceData& data, const std::vector<double>& alphas,
                                 const std::vector<double>& pis, const std::string& logdeg_column,
                                 int threads) {
  if (alphas.empty() || pis.empty()) throw ConfigError("copy_model_surface: empty grid");
  Design degree_design = Design::columns(data, {logdeg_column});
  degree_design.threads = threads;
  Design uniform_design;
  uniform_design.data = &data;
  uniform_design.threads = threads;

  const Eigen::VectorXd no_params(0);
  const std::vector<double> uniform_ll = per_event_log_likelihood(uniform_design, no_params);

  SurfaceResult result;
  result.alphas = alphas;
  result.pis = pis;
  result.loglik.resize(static_cast<Eigen::Index>(alphas.size()),
                       static_cast<Eigen::Index>(pis.size()));

  const auto n = data.events.size();
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    Eigen::VectorXd alpha(1);
    alpha[0] = alphas[ai];
    const std::vector<double> degree_ll = per_event_log_likelihood(degree_design, alpha);
    for (std::size_t pi_i = 0; pi_i < pis.size(); ++pi_i) {
      const double p1 = pis[pi_i];
      const double lp1 = p1 > 0.0 ? std::log(p1) : kNegInf;
      const double lp2 = 1.0 - p1 > 0.0 ? std::log1p(-p1) : kNegInf;
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double a = lp1 == kNegInf ? kNegInf : lp1 + degree_ll[k];
        const double b = lp2 == kNegInf ? kNegInf : lp2 + uniform_ll[k];
        double event_ll;
        if (a == kNegInf && b == kNegInf) {
          event_ll = kNegInf;
        } else if (a >= b) {
          event_ll = a + std::log1p(b == kNegInf ? 0.0 : std::exp(b - a));
        } else {
          event_ll = b + std::log1p(a == kNegInf ? 0.0 : std::exp(a - b));
        }
        total += data.events[k].weight * event_ll;
      }
      result.loglik(static_cast<Eigen::Index>(ai), static_cast<Eigen::Index>(pi_i)) = total;
    }
  }
  return result;
}

ProfileFit fit_two_mode_profile(const std::vector<double>& ll_a, const std::vector<double>& ll_b,
                                int curve_points) {
  if (ll_a.size() != ll_b.size() || ll_a.empty()) {
    throw ConfigError("fit_two_mode_profile: per-event likelihood vectors must match");
  }
  const std::size_t n = ll_a.size();
  std::vector<double> la(n), lb(n);
  for (std::size_t k = 0; k < n; ++k) {
    la[k] = ll_a[k] == kNegInf ? 0.0 : std::exp(ll_a[k]);
    lb[k] = ll_b[k] == kNegInf ? 0.0 : std::exp(ll_b[k]);
    if (la[k] == 0.0 && lb[k] == 0.0) {
      throw DataError("fit_two_mode_profile: event " + std::to_string(k) +
                      " has zero likelihood under both modes");
    }
  }

  auto value = [&](double pi) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double mix = pi * la[k] + (1.0 - pi) * lb[k];
      total += mix > 0.0 ? std::log(mix) : kNegInf;
    }
    return total;
  };
  // The objective is concave in pi; bisect on its derivative.
  auto derivative = [&](double pi) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double mix = pi * la[k] + (1.0 - pi) * lb[k];
      total += (la[k] - lb[k]) / mix;
    }
    return total;
  };

  const double eps = 1e-12;
  double lo = eps, hi = 1.0 - eps;
  double pi_hat;
  if (derivative(lo) <= 0.0) {
    pi_hat = value(0.0) == kNegInf ? lo : 0.0;
  } else if (derivative(hi) >= 0.0) {
    pi_hat = value(1.0) == kNegInf ? hi : 1.0;
  } else {
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
      const double mid = 0.5 * (lo + hi);
      (derivative(mid) > 0.0 ? lo : hi) = mid;
    }
    pi_hat = 0.5 * (lo + hi);
  }

  ProfileFit result;
  result.pi = pi_hat;
  result.loglik = value(pi_hat);
  if (curve_points > 1) {
    result.curve.reserve(static_cast<std::size_t>(curve_points));
    for (int i = 0; i < curve_points; ++i) {
      const double pi = static_cast<double>(i) / (curve_points - 1);
      result.curve.emplace_back(pi, value(pi));
    }
  }
  return result;
}

ProfileFit fit_local_search(const ChoiceData& data) {
  std::vector<double> ll_all, ll_fof;
  ll_all.reserve(data.events.size());
  ll_fof.reserve(data.events.size());
  for (const ChoiceEvent& ev : data.events) {
    if (ev.full_size <= 0) {
      throw ConfigError("fit_local_search: events lack full choice-set counts");
    }
    ll_all.push_back(-std::log(static_cast<double>(ev.full_size)));
    ll_fof.push_back(ev.chosen_in_fof && ev.full_fof_size > 0
                         ? -std::log(static_cast<double>(ev.full_fof_size))
                         : kNegInf);
  }
  return fit_two_mode_profile(ll_all, ll_fof);
}

ProfileFit fit_copy(const ChoiceData& data, const std::string& degree_column) {
  const int deg_col = data.require_column(degree_column);
  const int F = data.n_features();
  std::vector<double> ll_all, ll_pa;
  ll_all.reserve(data.events.size());
  ll_pa.reserve(data.events.size());
  for (const ChoiceEvent& ev : data.events) {
    if (ev.full_size <= 0) {
      throw ConfigError("fit_copy: events lack full choice-set counts");
    }
    ll_all.push_back(-std::log(static_cast<double>(ev.full_size)));
    const double chosen_degree = ev.row(ev.chosen, F)[deg_col];
    ll_pa.push_back(chosen_degree > 0.0 && ev.full_degree_sum > 0.0
                        ? std::log(chosen_degree) - std::log(ev.full_degree_sum)
                        : kNegInf);
  }
  return fit_two_mode_profile(ll_all, ll_pa);
}

}  // namespace netchoice
