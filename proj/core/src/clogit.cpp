#include "netchoice/clogit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netchoice/parallel.hpp"

namespace netchoice {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

Design Design::dense(const ChoiceData& data) {
  Design d;
  d.data = &data;
  d.dense_cols.resize(data.feature_names.size());
  for (std::size_t i = 0; i < data.feature_names.size(); ++i) d.dense_cols[i] = static_cast<int>(i);
  return d;
}

Design Design::columns(const ChoiceData& data, const std::vector<std::string>& names) {
  Design d;
  d.data = &data;
  for (const auto& name : names) d.dense_cols.push_back(data.require_column(name));
  return d;
}

int Design::level_of(const ChoiceEvent& ev, std::int32_t alt) const {
  const double raw = ev.row(alt, data->n_features())[level_col];
  auto lv = static_cast<long>(std::llround(raw));
  if (lv < 0) lv = 0;
  if (lv >= n_levels) lv = n_levels - 1;
  return static_cast<int>(lv);
}

bool Design::in_support(const ChoiceEvent& ev, std::int32_t alt) const {
  switch (support.kind) {
    case Support::Kind::All:
      return true;
    case Support::Kind::FofOnly:
      if (ev.fof.empty()) throw ConfigError("FoF support requires stored FoF flags");
      return ev.fof[static_cast<std::size_t>(alt)] != 0;
    case Support::Kind::ColumnAtLeast:
      return ev.row(alt, data->n_features())[support.column] >= support.threshold;
    case Support::Kind::AllowedLevels: {
      const double raw = ev.row(alt, data->n_features())[support.column];
      auto lv = static_cast<long>(std::llround(raw));
      if (lv < 0) lv = 0;
      if (lv >= static_cast<long>(support.allowed.size())) {
        lv = static_cast<long>(support.allowed.size()) - 1;
      }
      return support.allowed[static_cast<std::size_t>(lv)] != 0;
    }
  }
  return true;
}

std::vector<std::string> Design::param_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n_params()));
  for (int c : dense_cols) names.push_back(data->feature_names[static_cast<std::size_t>(c)]);
  for (int lv = 0; lv < n_levels; ++lv) {
    names.push_back(data->feature_names[static_cast<std::size_t>(level_col)] + "=" +
                    std::to_string(lv));
  }
  return names;
}

std::vector<std::uint8_t> Design::base_frozen() const {
  std::vector<std::uint8_t> frozen(static_cast<std::size_t>(n_params()), 0);
  if (n_levels > 0 && pin_level >= 0) {
    frozen[static_cast<std::size_t>(n_dense() + pin_level)] = 1;
  }
  return frozen;
}

void Design::validate() const {
  if (data == nullptr) throw ConfigError("design has no data");
  const int F = data->n_features();
  for (int c : dense_cols) {
    if (c < 0 || c >= F) throw ConfigError("design references a feature column out of range");
  }
  if (level_col >= 0) {
    if (level_col >= F) throw ConfigError("level column out of range");
    if (n_levels < 1) throw ConfigError("categorical design needs n_levels >= 1");
    if (pin_level >= n_levels) throw ConfigError("pin level out of range");
  }
  if (support.kind == Support::Kind::ColumnAtLeast &&
      (support.column < 0 || support.column >= F)) {
    throw ConfigError("support column out of range");
  }
}

namespace {

// Scratch space reused across events by one worker.
struct Workspace {
  std::vector<std::int32_t> alts;  // supported alternative positions
  std::vector<double> util;
  std::vector<double> prob;
};

// Computes softmax probabilities of one event's supported alternatives.
// Returns false when the chosen alternative is outside the support.
bool event_probs(const Design& design, const Eigen::VectorXd& theta, const ChoiceEvent& ev,
                 Workspace& ws, double& chosen_loglik) {
  const int F = design.data->n_features();
  const int d = design.n_dense();
  ws.alts.clear();
  ws.util.clear();

  double max_util = kNegInf;
  int chosen_slot = -1;
  for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
    if (!design.in_support(ev, a)) continue;
    const double* row = ev.row(a, F);
    double u = 0.0;
    for (int c = 0; c < d; ++c) u += theta[c] * row[design.dense_cols[static_cast<std::size_t>(c)]];
    if (design.level_col >= 0) u += theta[d + design.level_of(ev, a)];
    if (a == ev.chosen) chosen_slot = static_cast<int>(ws.alts.size());
    ws.alts.push_back(a);
    ws.util.push_back(u);
    max_util = std::max(max_util, u);
  }
  ws.prob.assign(ws.util.size(), 0.0);
  if (ws.alts.empty()) return false;

  double z = 0.0;
  for (std::size_t i = 0; i < ws.util.size(); ++i) {
    ws.prob[i] = std::exp(ws.util[i] - max_util);
    z += ws.prob[i];
  }
  const double log_z = std::log(z) + max_util;
  for (double& p : ws.prob) p /= z;
  if (chosen_slot < 0) return false;
  chosen_loglik = ws.util[static_cast<std::size_t>(chosen_slot)] - log_z;
  return true;
}

struct LlGradPartial {
  double ll = 0.0;
  Eigen::VectorXd grad;
  std::int64_t unusable = 0;
};

void check_theta(const Design& design, const Eigen::VectorXd& theta) {
  if (theta.size() != design.n_params()) {
    throw ConfigError("theta dimension does not match the design");
  }
  if (!theta.allFinite()) throw ConfigError("theta has non-finite entries");
}

}  // namespace

Eigen::VectorXd choice_prob(const Design& design, const Eigen::VectorXd& theta,
                            std::size_t event_index) {
  design.validate();
  check_theta(design, theta);
  const ChoiceEvent& ev = design.data->events.at(event_index);
  for (double x : ev.features) {
    if (!std::isfinite(x)) throw DataError("choice_prob: non-finite feature value");
  }
  Workspace ws;
  double chosen_ll = 0.0;
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(ev.n_alternatives());
  // When the chosen alternative is outside the support the probabilities
  // over the supported subset still sum to one; the chosen slot stays zero.
  event_probs(design, theta, ev, ws, chosen_ll);
  for (std::size_t i = 0; i < ws.alts.size(); ++i) {
    probs[ws.alts[i]] = ws.prob[i];
  }
  return probs;
}

double log_likelihood(const Design& design, const Eigen::VectorXd& theta,
                      const double* extra_weights, EvalDiagnostics* diag) {
  design.validate();
  check_theta(design, theta);
  const auto& events = design.data->events;

  auto partials = blocked_map(
      events.size(), design.threads, [] { return LlGradPartial{}; },
      [&](LlGradPartial& p, std::size_t begin, std::size_t end) {
        Workspace ws;
        double chosen_ll;
        for (std::size_t k = begin; k < end; ++k) {
          const ChoiceEvent& ev = events[k];
          const double w = ev.weight * (extra_weights ? extra_weights[k] : 1.0);
          if (w == 0.0) continue;
          if (event_probs(design, theta, ev, ws, chosen_ll)) {
            p.ll += w * chosen_ll;
          } else {
            ++p.unusable;
          }
        }
      });

  double ll = 0.0;
  std::int64_t unusable = 0;
  for (const auto& p : partials) {
    ll += p.ll;
    unusable += p.unusable;
  }
  if (diag) diag->zero_probability_events = unusable;
  return unusable > 0 ? kNegInf : ll;
}

void log_likelihood_gradient(const Design& design, const Eigen::VectorXd& theta, double& loglik,
                             Eigen::VectorXd& gradient, const double* extra_weights,
                             EvalDiagnostics* diag) {
  design.validate();
  check_theta(design, theta);
  const auto& events = design.data->events;
  const int F = design.data->n_features();
  const int d = design.n_dense();
  const int D = design.n_params();

  auto partials = blocked_map(
      events.size(), design.threads,
      [&] {
        LlGradPartial p;
        p.grad = Eigen::VectorXd::Zero(D);
        return p;
      },
      [&](LlGradPartial& p, std::size_t begin, std::size_t end) {
        Workspace ws;
        double chosen_ll;
        for (std::size_t k = begin; k < end; ++k) {
          const ChoiceEvent& ev = events[k];
          const double w = ev.weight * (extra_weights ? extra_weights[k] : 1.0);
          if (w == 0.0) continue;
          if (!event_probs(design, theta, ev, ws, chosen_ll)) {
            ++p.unusable;
            continue;
          }
          p.ll += w * chosen_ll;
          const double* chosen_row = ev.row(ev.chosen, F);
          for (int c = 0; c < d; ++c) {
            p.grad[c] += w * chosen_row[design.dense_cols[static_cast<std::size_t>(c)]];
          }
          if (design.level_col >= 0) p.grad[d + design.level_of(ev, ev.chosen)] += w;
          for (std::size_t i = 0; i < ws.alts.size(); ++i) {
            const double wp = w * ws.prob[i];
            const double* row = ev.row(ws.alts[i], F);
            for (int c = 0; c < d; ++c) {
              p.grad[c] -= wp * row[design.dense_cols[static_cast<std::size_t>(c)]];
            }
            if (design.level_col >= 0) p.grad[d + design.level_of(ev, ws.alts[i])] -= wp;
          }
        }
      });

  loglik = 0.0;
  gradient = Eigen::VectorXd::Zero(D);
  std::int64_t unusable = 0;
  for (const auto& p : partials) {
    loglik += p.ll;
    gradient += p.grad;
    unusable += p.unusable;
  }
  if (diag) diag->zero_probability_events = unusable;
}

Eigen::MatrixXd hessian(const Design& design, const Eigen::VectorXd& theta,
                        const double* extra_weights) {
  design.validate();
  check_theta(design, theta);
  const auto& events = design.data->events;
  const int F = design.data->n_features();
  const int d = design.n_dense();
  const int D = design.n_params();

  auto partials = blocked_map(
      events.size(), design.threads, [&] { return Eigen::MatrixXd(Eigen::MatrixXd::Zero(D, D)); },
      [&](Eigen::MatrixXd& H, std::size_t begin, std::size_t end) {
        Workspace ws;
        std::vector<int> touched;                 // level indices present in the event
        std::vector<int> slot_of_level(design.n_levels, -1);
        std::vector<double> level_p;              // probability mass per touched level
        std::vector<Eigen::VectorXd> level_x;     // sum of p * x per touched level
        Eigen::VectorXd x(d);
        Eigen::VectorXd m1_dense(d);
        Eigen::MatrixXd s_dd(d, d);
        double chosen_ll;
        for (std::size_t k = begin; k < end; ++k) {
          const ChoiceEvent& ev = events[k];
          const double w = ev.weight * (extra_weights ? extra_weights[k] : 1.0);
          if (w == 0.0) continue;
          if (!event_probs(design, theta, ev, ws, chosen_ll)) continue;

          m1_dense.setZero();
          s_dd.setZero();
          for (const int lv : touched) slot_of_level[static_cast<std::size_t>(lv)] = -1;
          touched.clear();
          level_p.clear();
          for (std::size_t i = 0; i < ws.alts.size(); ++i) {
            const double p = ws.prob[i];
            const double* row = ev.row(ws.alts[i], F);
            for (int c = 0; c < d; ++c) x[c] = row[design.dense_cols[static_cast<std::size_t>(c)]];
            m1_dense += p * x;
            s_dd += p * x * x.transpose();
            if (design.level_col >= 0) {
              const int lv = design.level_of(ev, ws.alts[i]);
              int slot = slot_of_level[static_cast<std::size_t>(lv)];
              if (slot < 0) {
                slot = static_cast<int>(touched.size());
                slot_of_level[static_cast<std::size_t>(lv)] = slot;
                touched.push_back(lv);
                level_p.push_back(0.0);
                if (level_x.size() < touched.size()) level_x.emplace_back(d);
                level_x[static_cast<std::size_t>(slot)].setZero();
              }
              level_p[static_cast<std::size_t>(slot)] += p;
              level_x[static_cast<std::size_t>(slot)] += p * x;
            }
          }

          // H -= w * (S - m1 m1^T), written out block by block over the
          // dense coordinates and the levels touched by this event.
          H.topLeftCorner(d, d) -= w * (s_dd - m1_dense * m1_dense.transpose());
          for (std::size_t s = 0; s < touched.size(); ++s) {
            const int row_idx = d + touched[s];
            H(row_idx, row_idx) -= w * (level_p[s] - level_p[s] * level_p[s]);
            for (std::size_t s2 = 0; s2 < s; ++s2) {
              const int col_idx = d + touched[s2];
              const double value = w * level_p[s] * level_p[s2];
              H(row_idx, col_idx) += value;
              H(col_idx, row_idx) += value;
            }
            const Eigen::VectorXd dl = level_x[s] - level_p[s] * m1_dense;
            H.block(0, row_idx, d, 1) -= w * dl;
            H.block(row_idx, 0, 1, d) -= w * dl.transpose();
          }
        }
      });

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);
  for (const auto& p : partials) H += p;
  H = 0.5 * (H + H.transpose()).eval();  // enforce exact symmetry
  return H;
}

std::vector<double> per_event_log_likelihood(const Design& design, const Eigen::VectorXd& theta) {
  design.validate();
  check_theta(design, theta);
  const auto& events = design.data->events;
  std::vector<double> result(events.size(), kNegInf);

  auto partials = blocked_map(
      events.size(), design.threads, [] { return 0; },
      [&](int&, std::size_t begin, std::size_t end) {
        Workspace ws;
        double chosen_ll;
        for (std::size_t k = begin; k < end; ++k) {
          if (event_probs(design, theta, events[k], ws, chosen_ll)) result[k] = chosen_ll;
        }
      });
  (void)partials;
  return result;
}

namespace {

// Penalized objective used inside the optimizer; the likelihood itself is
// reported unpenalized.
struct Objective {
  const Design& design;
  const FitOptions& options;
  const double* extra_weights;
  const std::vector<std::uint8_t>& frozen;
  std::int64_t unusable = 0;

  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd& grad_out, double& raw_ll) {
    EvalDiagnostics diag;
    double ll;
    log_likelihood_gradient(design, theta, ll, grad_out, extra_weights, &diag);
    unusable = diag.zero_probability_events;
    raw_ll = ll;
    double penalized = ll;
    if (options.ridge > 0.0) {
      for (int i = 0; i < theta.size(); ++i) {
        if (frozen[static_cast<std::size_t>(i)]) continue;
        penalized -= 0.5 * options.ridge * theta[i] * theta[i];
        grad_out[i] -= options.ridge * theta[i];
      }
    }
    for (int i = 0; i < theta.size(); ++i) {
      if (frozen[static_cast<std::size_t>(i)]) grad_out[i] = 0.0;
    }
    return penalized;
  }
};

}  // namespace

LogitFit fit(const Design& design, const FitOptions& options, const double* extra_weights,
             const Eigen::VectorXd* theta0, const std::vector<std::uint8_t>* frozen_in) {
  design.validate();
  Design d = design;
  d.threads = options.threads > 0 ? options.threads : design.threads;
  const int D = d.n_params();

  std::vector<std::uint8_t> frozen = d.base_frozen();
  if (frozen_in) {
    if (frozen_in->size() != static_cast<std::size_t>(D)) {
      throw ConfigError("frozen mask dimension mismatch");
    }
    for (int i = 0; i < D; ++i) frozen[static_cast<std::size_t>(i)] |= (*frozen_in)[static_cast<std::size_t>(i)];
  }
  std::vector<int> free_idx;
  for (int i = 0; i < D; ++i) {
    if (!frozen[static_cast<std::size_t>(i)]) free_idx.push_back(i);
  }
  const int nf = static_cast<int>(free_idx.size());

  Eigen::VectorXd theta = theta0 ? *theta0 : Eigen::VectorXd::Zero(D);
  if (theta.size() != D) throw ConfigError("theta0 dimension mismatch");

  LogitFit result;
  result.names = d.param_names();
  result.frozen = frozen;
  result.ridge_active = options.ridge > 0.0;
  result.n_events = static_cast<std::int64_t>(d.data->events.size());

  Objective objective{d, options, extra_weights, frozen, 0};
  Eigen::VectorXd grad(D);
  double raw_ll;
  double f = objective.eval(theta, grad, raw_ll);
  result.skipped_zero_probability_events = objective.unusable;

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(nf, nf);
  Eigen::VectorXd g_free(nf), p_free(nf), s(nf), y(nf);
  for (int i = 0; i < nf; ++i) g_free[i] = grad[free_idx[static_cast<std::size_t>(i)]];

  int it = 0;
  bool converged = nf == 0;
  for (; it < options.max_iterations && !converged; ++it) {
    if (g_free.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      converged = true;
      break;
    }
    p_free = h_inv * g_free;  // ascent direction
    double slope = g_free.dot(p_free);
    if (!(slope > 0.0)) {
      h_inv.setIdentity();
      p_free = g_free;
      slope = g_free.squaredNorm();
      if (!(slope > 0.0)) {
        converged = true;
        break;
      }
    }

    double step = 1.0;
    Eigen::VectorXd theta_new = theta;
    double f_new = f, raw_new = raw_ll;
    Eigen::VectorXd grad_new(D);
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      theta_new = theta;
      for (int i = 0; i < nf; ++i) {
        theta_new[free_idx[static_cast<std::size_t>(i)]] += step * p_free[i];
      }
      f_new = objective.eval(theta_new, grad_new, raw_new);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * slope) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      // No ascent step found; the gradient tolerance decides convergence.
      converged = g_free.lpNorm<Eigen::Infinity>() < 1e-5;
      break;
    }

    Eigen::VectorXd g_free_new(nf);
    for (int i = 0; i < nf; ++i) g_free_new[i] = grad_new[free_idx[static_cast<std::size_t>(i)]];
    s = step * p_free;
    y = g_free - g_free_new;  // gradient change of the negated objective
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd outer = Eigen::MatrixXd::Identity(nf, nf) - rho * s * y.transpose();
      h_inv = outer * h_inv * outer.transpose() + rho * s * s.transpose();
    }

    const double rel_change = std::abs(f_new - f) / (1.0 + std::abs(f_new));
    theta = theta_new;
    f = f_new;
    raw_ll = raw_new;
    g_free = g_free_new;
    if (rel_change < options.relative_tolerance) {
      converged = true;
      break;
    }
  }

  result.theta = theta;
  result.loglik = raw_ll;
  result.gradient_norm = nf > 0 ? g_free.lpNorm<Eigen::Infinity>() : 0.0;
  result.iterations = it;
  result.converged = converged;
  if (!converged) {
    int worst = 0;
    for (int i = 0; i < theta.size(); ++i) {
      if (std::abs(theta[i]) > std::abs(theta[worst])) worst = i;
    }
    if (std::abs(theta[worst]) > 25.0) {
      result.diagnostic = "possible separation or collinearity along '" +
                          result.names[static_cast<std::size_t>(worst)] +
                          "' (coefficient diverging)";
    } else {
      result.diagnostic = "optimizer hit the iteration limit";
    }
  }

  result.se = Eigen::VectorXd::Constant(D, kNaN);
  if (options.compute_se && nf > 0) {
    const Eigen::MatrixXd H = hessian(d, theta, extra_weights);
    Eigen::MatrixXd neg_h_free(nf, nf);
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nf; ++j) {
        neg_h_free(i, j) = -H(free_idx[static_cast<std::size_t>(i)], free_idx[static_cast<std::size_t>(j)]);
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h_free);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(nf, nf));
      bool ok = true;
      for (int i = 0; i < nf; ++i) ok = ok && cov(i, i) > 0.0 && std::isfinite(cov(i, i));
      if (ok) {
        for (int i = 0; i < nf; ++i) {
          result.se[free_idx[static_cast<std::size_t>(i)]] = std::sqrt(cov(i, i));
        }
        result.se_defined = true;
      }
    }
  }
  return result;
}

NonparametricPaFit fit_nonparametric_pa(const ChoiceData& data, int max_degree,
                                        const FitOptions& options,
                                        const std::string& degree_column, int pin_degree) {
  if (max_degree < 1) throw ConfigError("fit_nonparametric_pa: max_degree must be >= 1");
  const int degree_col = data.require_column(degree_column);
  const int L = max_degree + 1;

  std::vector<std::int64_t> chosen(static_cast<std::size_t>(L), 0);
  std::vector<std::int64_t> exposure(static_cast<std::size_t>(L), 0);
  const int F = data.n_features();
  auto level_of = [&](const ChoiceEvent& ev, std::int32_t a) {
    auto lv = static_cast<long>(std::llround(ev.row(a, F)[degree_col]));
    return static_cast<int>(std::clamp<long>(lv, 0, L - 1));
  };
  for (const ChoiceEvent& ev : data.events) {
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      ++exposure[static_cast<std::size_t>(level_of(ev, a))];
    }
    ++chosen[static_cast<std::size_t>(level_of(ev, ev.chosen))];
  }

  std::vector<std::uint8_t> allowed(static_cast<std::size_t>(L), 0);
  for (int lv = 0; lv < L; ++lv) allowed[static_cast<std::size_t>(lv)] = chosen[static_cast<std::size_t>(lv)] > 0;
  int pin = pin_degree;
  if (pin < 0 || pin >= L || !allowed[static_cast<std::size_t>(pin)]) {
    pin = -1;
    for (int lv = 0; lv < L; ++lv) {
      if (allowed[static_cast<std::size_t>(lv)]) {
        pin = lv;
        break;
      }
    }
    if (pin < 0) throw DataError("fit_nonparametric_pa: no degree level was ever chosen");
  }

  Design design;
  design.data = &data;
  design.level_col = degree_col;
  design.n_levels = L;
  design.pin_level = pin;
  design.support = Support::allowed_levels(degree_col, allowed);
  design.threads = options.threads;

  std::vector<std::uint8_t> frozen(static_cast<std::size_t>(L), 0);
  for (int lv = 0; lv < L; ++lv) {
    if (!allowed[static_cast<std::size_t>(lv)]) frozen[static_cast<std::size_t>(lv)] = 1;
  }

  NonparametricPaFit result;
  result.pin_degree = pin;
  result.fit = fit(design, options, nullptr, nullptr, &frozen);
  result.coefficients.resize(static_cast<std::size_t>(L));
  for (int lv = 0; lv < L; ++lv) {
    DegreeCoefficient& c = result.coefficients[static_cast<std::size_t>(lv)];
    c.degree = lv;
    c.chosen_count = chosen[static_cast<std::size_t>(lv)];
    c.exposure_count = exposure[static_cast<std::size_t>(lv)];
    c.pinned = lv == pin;
    c.estimated = allowed[static_cast<std::size_t>(lv)] != 0;
    c.theta = c.estimated ? result.fit.theta[lv] : kNaN;
    c.se = result.fit.se[lv];
  }
  return result;
}

}  // namespace netchoice
