#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "netchoice/clogit.hpp"

namespace netchoice {

// Survival function of the chi-squared distribution with k degrees of
// freedom, P(X > x).
double chi2_survival(double x, double k);

struct LRTestResult {
  double statistic = 0.0;  // 2 * (loglik_alt - loglik_null), clamped at 0
  int df = 0;
  double p_value = 1.0;
};

// Raw likelihood-ratio statistic and p-value; the caller vouches for nesting.
LRTestResult lr_statistic(double loglik_null, double loglik_alt, int df);

// Likelihood-ratio test between two fits on the same events. The null must be
// nested in the alternative; this is checked by feature-name subset and event
// counts. df defaults to the difference in free parameter counts.
LRTestResult lr_test(const LogitFit& null_fit, const LogitFit& alt_fit, int df = -1);

// Kolmogorov-Smirnov statistic of a sample against a reference CDF, and the
// asymptotic p-value.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_pvalue(double d, std::size_t n);

struct PowerLawFit {
  double gamma = 0.0;
  std::int64_t n_tail = 0;
  std::int64_t x_min = 1;
  double loglik = 0.0;
};

// Discrete power-law MLE p(x) proportional to x^-gamma for x >= x_min, via
// direct maximization of the zeta-normalized likelihood. Observations below
// x_min are discarded; fewer than 50 tail observations is allowed but the
// estimate is noisy.
PowerLawFit powerlaw_mle(std::span<const std::int64_t> values, std::int64_t x_min);

// Kolmogorov-Smirnov scan over x_min candidates: fits the MLE at each cutoff
// and keeps the one whose fitted tail tracks the empirical tail best. Leaves
// at least min_tail observations above the cutoff.
PowerLawFit powerlaw_fit_scan(std::span<const std::int64_t> values, std::int64_t x_min_lo,
                              std::int64_t x_min_hi, std::int64_t min_tail = 100);

// Hurwitz zeta sum_{k>=a} k^-s for s > 1, by direct summation with an
// Euler-Maclaurin tail.
double hurwitz_zeta(double s, double a);

struct KernelPoint {
  int degree = 0;
  double propensity = 0.0;  // relative to degree 1
  double lo = 0.0, hi = 0.0;
  std::int64_t chosen = 0;
  std::int64_t exposure = 0;
};

struct KernelEstimate {
  std::string estimator;  // "newman" or "nonparametric-logit"
  std::vector<KernelPoint> points;
};

// Newman-style attachment kernel: per degree, the number of times a node of
// that degree was chosen over the number of times one was exposed in a choice
// set, normalized to degree 1. Intervals are per-degree Wilson intervals
// scaled by the same normalization.
KernelEstimate newman_kernel(const ChoiceData& data, int max_degree,
                             const std::string& degree_column = "degree");

// The non-parametric logit fit expressed on the same relative-propensity
// scale, exp(theta_k), with delta-method intervals.
KernelEstimate kernel_from_nonparametric(const NonparametricPaFit& fit);

// Attachment exponent from a weighted least squares fit of theta_k on log k
// over the estimated coefficients (inverse-variance weights, intercept free).
double pham_ls_alpha(const NonparametricPaFit& fit);

// Share of events whose highest-probability alternative is the chosen one;
// ties break toward the lowest alternative index.
double holdout_accuracy(const Design& design, const Eigen::VectorXd& theta);

// Spearman rank correlation (average ranks on ties).
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace netchoice
