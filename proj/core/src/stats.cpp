#include "netchoice/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include <boost/math/special_functions/gamma.hpp>

namespace netchoice {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double chi2_survival(double x, double k) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(k / 2.0, x / 2.0);
}

LRTestResult lr_statistic(double loglik_null, double loglik_alt, int df) {
  const double raw = 2.0 * (loglik_alt - loglik_null);
  if (raw < -1e-6 * (1.0 + std::abs(loglik_alt))) {
    throw DataError("lr_statistic: alternative fits worse than the null beyond tolerance");
  }
  LRTestResult result;
  result.statistic = std::max(0.0, raw);
  result.df = df;
  result.p_value = chi2_survival(result.statistic, static_cast<double>(df));
  return result;
}

LRTestResult lr_test(const LogitFit& null_fit, const LogitFit& alt_fit, int df) {
  if (null_fit.n_events != alt_fit.n_events) {
    throw ConfigError("lr_test: fits were computed on different event counts");
  }
  std::unordered_set<std::string> alt_names(alt_fit.names.begin(), alt_fit.names.end());
  for (const auto& name : null_fit.names) {
    if (!alt_names.count(name)) {
      throw ConfigError("lr_test: null model feature '" + name +
                        "' is not part of the alternative model (not nested)");
    }
  }
  auto free_count = [](const LogitFit& f) {
    int count = 0;
    for (std::size_t i = 0; i < f.names.size(); ++i) {
      if (f.frozen.empty() || !f.frozen[i]) ++count;
    }
    return count;
  };
  if (df < 0) df = free_count(alt_fit) - free_count(null_fit);
  if (df < 1) throw ConfigError("lr_test: alternative has no extra free parameters");
  return lr_statistic(null_fit.loglik, alt_fit.loglik, df);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ConfigError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double hurwitz_zeta(double s, double a) {
  if (s <= 1.0) throw ConfigError("hurwitz_zeta: requires s > 1");
  if (a < 1.0) throw ConfigError("hurwitz_zeta: requires a >= 1");
  const double cutoff = a + 2000.0;
  double sum = 0.0;
  double k = a;
  for (; k < cutoff; ++k) sum += std::pow(k, -s);
  // Euler-Maclaurin tail from k onward.
  sum += std::pow(k, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(k, -s) + s * std::pow(k, -s - 1.0) / 12.0;
  return sum;
}

PowerLawFit powerlaw_mle(std::span<const std::int64_t> values, std::int64_t x_min) {
  if (x_min < 1) throw ConfigError("powerlaw_mle: x_min must be >= 1");
  double sum_log = 0.0;
  std::int64_t n = 0;
  for (const std::int64_t v : values) {
    if (v >= x_min) {
      sum_log += std::log(static_cast<double>(v));
      ++n;
    }
  }
  if (n == 0) throw DataError("powerlaw_mle: no observations at or above x_min");

  const double a = static_cast<double>(x_min);
  auto negative_loglik = [&](double gamma) {
    return static_cast<double>(n) * std::log(hurwitz_zeta(gamma, a)) + gamma * sum_log;
  };

  // Golden-section search on the concave likelihood.
  double lo = 1.0 + 1e-6, hi = 12.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = negative_loglik(c), fd = negative_loglik(d);
  for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = negative_loglik(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = negative_loglik(d);
    }
  }
  PowerLawFit fit;
  fit.gamma = 0.5 * (lo + hi);
  fit.n_tail = n;
  fit.x_min = x_min;
  fit.loglik = -negative_loglik(fit.gamma);
  return fit;
}

PowerLawFit powerlaw_fit_scan(std::span<const std::int64_t> values, std::int64_t x_min_lo,
                              std::int64_t x_min_hi, std::int64_t min_tail) {
  if (x_min_lo < 1 || x_min_hi < x_min_lo) throw ConfigError("powerlaw_fit_scan: bad cutoff range");
  std::vector<std::int64_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  PowerLawFit best;
  double best_ks = std::numeric_limits<double>::infinity();
  for (std::int64_t x_min = x_min_lo; x_min <= x_min_hi; ++x_min) {
    const auto begin = std::lower_bound(sorted.begin(), sorted.end(), x_min);
    const auto n = static_cast<std::int64_t>(sorted.end() - begin);
    if (n < std::max<std::int64_t>(min_tail, 2)) break;
    const PowerLawFit fit =
        powerlaw_mle(std::span<const std::int64_t>(&*begin, static_cast<std::size_t>(n)), x_min);

    // KS distance between the empirical tail CDF and the fitted one.
    const double z = hurwitz_zeta(fit.gamma, static_cast<double>(x_min));
    double ks = 0.0;
    std::int64_t seen = 0;
    for (auto it = begin; it != sorted.end();) {
      const std::int64_t value = *it;
      auto next = it;
      while (next != sorted.end() && *next == value) ++next;
      seen += next - it;
      const double empirical = static_cast<double>(seen) / static_cast<double>(n);
      const double fitted = 1.0 - hurwitz_zeta(fit.gamma, static_cast<double>(value) + 1.0) / z;
      ks = std::max(ks, std::abs(empirical - fitted));
      it = next;
    }
    if (ks < best_ks) {
      best_ks = ks;
      best = fit;
    }
  }
  if (best.n_tail == 0) throw DataError("powerlaw_fit_scan: no cutoff left enough observations");
  return best;
}

namespace {

// Wilson score interval for a binomial proportion.
void wilson_interval(std::int64_t successes, std::int64_t trials, double& lo, double& hi) {
  if (trials == 0) {
    lo = hi = kNaN;
    return;
  }
  const double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  lo = std::max(0.0, center - half);
  hi = std::min(1.0, center + half);
}

}  // namespace

KernelEstimate newman_kernel(const ChoiceData& data, int max_degree,
                             const std::string& degree_column) {
  if (max_degree < 1) throw ConfigError("newman_kernel: max_degree must be >= 1");
  const int deg_col = data.require_column(degree_column);
  const int F = data.n_features();
  const int L = max_degree + 1;
  std::vector<std::int64_t> chosen(static_cast<std::size_t>(L), 0);
  std::vector<std::int64_t> exposure(static_cast<std::size_t>(L), 0);
  auto level_of = [&](const ChoiceEvent& ev, std::int32_t a) {
    auto lv = static_cast<long>(std::llround(ev.row(a, F)[deg_col]));
    return static_cast<int>(std::clamp<long>(lv, 0, L - 1));
  };
  for (const ChoiceEvent& ev : data.events) {
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      ++exposure[static_cast<std::size_t>(level_of(ev, a))];
    }
    ++chosen[static_cast<std::size_t>(level_of(ev, ev.chosen))];
  }
  if (exposure[1] == 0 || chosen[1] == 0) {
    throw DataError("newman_kernel: degree 1 was never exposed and chosen, cannot normalize");
  }
  const double base = static_cast<double>(chosen[1]) / static_cast<double>(exposure[1]);

  KernelEstimate estimate;
  estimate.estimator = "newman";
  for (int lv = 0; lv < L; ++lv) {
    if (exposure[static_cast<std::size_t>(lv)] == 0) continue;  // never exposed: missing
    KernelPoint point;
    point.degree = lv;
    point.chosen = chosen[static_cast<std::size_t>(lv)];
    point.exposure = exposure[static_cast<std::size_t>(lv)];
    const double rate =
        static_cast<double>(point.chosen) / static_cast<double>(point.exposure);
    point.propensity = rate / base;
    double lo, hi;
    wilson_interval(point.chosen, point.exposure, lo, hi);
    point.lo = lo / base;
    point.hi = hi / base;
    estimate.points.push_back(point);
  }
  return estimate;
}

KernelEstimate kernel_from_nonparametric(const NonparametricPaFit& fit) {
  KernelEstimate estimate;
  estimate.estimator = "nonparametric-logit";
  for (const DegreeCoefficient& c : fit.coefficients) {
    if (!c.estimated) continue;
    KernelPoint point;
    point.degree = c.degree;
    point.chosen = c.chosen_count;
    point.exposure = c.exposure_count;
    point.propensity = std::exp(c.theta);
    if (std::isfinite(c.se)) {
      point.lo = std::exp(c.theta - 1.96 * c.se);
      point.hi = std::exp(c.theta + 1.96 * c.se);
    } else {
      point.lo = point.hi = point.propensity;
    }
    estimate.points.push_back(point);
  }
  return estimate;
}

double pham_ls_alpha(const NonparametricPaFit& fit) {
  // Weighted least squares of theta_k on log k with intercept; the pinned
  // level has no sampling variance and is excluded.
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  int used = 0;
  for (const DegreeCoefficient& c : fit.coefficients) {
    if (!c.estimated || c.pinned || c.degree < 1) continue;
    if (!std::isfinite(c.se) || c.se <= 0.0) continue;
    const double w = 1.0 / (c.se * c.se);
    const double x = std::log(static_cast<double>(c.degree));
    const double y = c.theta;
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
    ++used;
  }
  if (used < 2) throw DataError("pham_ls_alpha: fewer than two usable degree coefficients");
  const double denom = sw * swxx - swx * swx;
  if (std::abs(denom) < 1e-12) throw DataError("pham_ls_alpha: degenerate regression");
  return (sw * swxy - swx * swy) / denom;
}

double holdout_accuracy(const Design& design, const Eigen::VectorXd& theta) {
  design.validate();
  const auto& events = design.data->events;
  if (events.empty()) throw DataError("holdout_accuracy: no events");
  std::int64_t correct = 0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const Eigen::VectorXd probs = choice_prob(design, theta, k);
    int best = 0;
    for (int a = 1; a < probs.size(); ++a) {
      if (probs[a] > probs[best]) best = a;  // ties keep the lowest index
    }
    if (best == events[k].chosen) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(events.size());
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("spearman: need matched samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("spearman: constant ranks");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace netchoice
