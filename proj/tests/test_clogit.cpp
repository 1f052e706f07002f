#include <doctest.h>

#include <numeric>
#include <random>

#include "netchoice/clogit.hpp"
#include "netchoice/generate.hpp"
#include "oracles.hpp"

using namespace netchoice;

namespace {

// Hand-rolled events with explicit feature matrices.
ChoiceData manual_data(const std::vector<std::vector<std::vector<double>>>& event_features,
                       const std::vector<int>& chosen,
                       std::vector<std::string> names) {
  ChoiceData data;
  data.feature_names = std::move(names);
  for (std::size_t k = 0; k < event_features.size(); ++k) {
    ChoiceEvent ev;
    ev.event = static_cast<EventIndex>(k);
    ev.chooser = 10000 + static_cast<NodeId>(k);
    ev.chosen = chosen[k];
    for (std::size_t a = 0; a < event_features[k].size(); ++a) {
      ev.alternatives.push_back(static_cast<NodeId>(a));
      for (const double x : event_features[k][a]) ev.features.push_back(x);
    }
    ev.full_size = ev.n_alternatives();
    data.events.push_back(std::move(ev));
  }
  return data;
}

// Attachment experiments run on undirected graphs (total degree), where
// every arrived node has positive degree; the handful of seed events whose
// chosen node still has degree zero carry no degree signal and are dropped.
ChoiceData pa_choice_data(std::int32_t n, std::uint64_t seed, GrowthModel model = GrowthModel::Pa,
                          double alpha = 1.0, bool directed = false) {
  GrowthConfig config;
  config.model = model;
  config.alpha = alpha;
  config.n = n;
  config.m = 1;
  config.seed = seed;
  config.directed = directed;
  const auto grown = generate(config);
  auto data = extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg")).data;
  if (!directed) {
    const int deg_col = data.require_column("degree");
    std::erase_if(data.events, [&](const ChoiceEvent& ev) {
      return ev.row(ev.chosen, data.n_features())[deg_col] < 1.0;
    });
  }
  return data;
}

}  // namespace

TEST_CASE("choice_prob: zero coefficients give the uniform distribution") {
  const auto data = manual_data({{{0.3}, {1.5}, {-0.7}, {0.1}}}, {2}, {"x"});
  const Design design = Design::dense(data);
  const Eigen::VectorXd probs = choice_prob(design, Eigen::VectorXd::Zero(1), 0);
  for (int a = 0; a < 4; ++a) CHECK(probs[a] == doctest::Approx(0.25));
}

TEST_CASE("choice_prob: log-degree utilities reproduce d^alpha weights") {
  const auto data =
      manual_data({{{std::log(1.0)}, {std::log(2.0)}}}, {0}, {"log_degree"});
  const Design design = Design::dense(data);
  Eigen::VectorXd theta(1);
  theta << 1.0;
  const Eigen::VectorXd probs = choice_prob(design, theta, 0);
  CHECK(probs[0] == doctest::Approx(1.0 / 3.0));
  CHECK(probs[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("choice_prob matches direct exponent-sum evaluation on random inputs") {
  std::mt19937_64 engine(55);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> alts;
    const int n_alts = 2 + static_cast<int>(engine() % 6);
    for (int a = 0; a < n_alts; ++a) alts.push_back({normal(engine), normal(engine)});
    const auto data = manual_data({alts}, {static_cast<int>(engine() % n_alts)}, {"a", "b"});
    const Design design = Design::dense(data);
    Eigen::VectorXd theta(2);
    theta << normal(engine), normal(engine);

    long double z = 0.0L;
    std::vector<long double> expected;
    for (const auto& row : alts) {
      const long double e = std::exp(static_cast<long double>(theta[0]) * row[0] +
                                     static_cast<long double>(theta[1]) * row[1]);
      expected.push_back(e);
      z += e;
    }
    const Eigen::VectorXd probs = choice_prob(design, theta, 0);
    for (int a = 0; a < n_alts; ++a) {
      CHECK(probs[a] == doctest::Approx(static_cast<double>(expected[a] / z)).epsilon(1e-12));
    }
  }
}

TEST_CASE("choice_prob rejects non-finite features") {
  auto data = manual_data({{{1.0}, {2.0}}}, {0}, {"x"});
  data.events[0].features[1] = std::numeric_limits<double>::quiet_NaN();
  const Design design = Design::dense(data);
  CHECK_THROWS_AS(choice_prob(design, Eigen::VectorXd::Zero(1), 0), DataError);
}

TEST_CASE("log_likelihood: single event with four alternatives at theta = 0") {
  const auto data = manual_data({{{0.1}, {0.2}, {0.3}, {0.4}}}, {1}, {"x"});
  const Design design = Design::dense(data);
  CHECK(log_likelihood(design, Eigen::VectorXd::Zero(1)) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("log_likelihood: all-equal utilities reduce to -sum log |C|") {
  // Fitness-style per-node effects all zero on a 3-node toy.
  ChoiceData data;
  data.feature_names = {"node_id"};
  for (int k = 0; k < 3; ++k) {
    ChoiceEvent ev;
    ev.event = k;
    ev.chooser = 100 + k;
    const int n_alts = 2 + k;
    for (int a = 0; a < n_alts; ++a) {
      ev.alternatives.push_back(a);
      ev.features.push_back(a);  // raw node id carrier
    }
    ev.chosen = k % n_alts;
    data.events.push_back(std::move(ev));
  }
  Design design;
  design.data = &data;
  design.level_col = 0;
  design.n_levels = 5;
  design.pin_level = 0;
  double expected = 0.0;
  for (const auto& ev : data.events) expected -= std::log(static_cast<double>(ev.n_alternatives()));
  CHECK(log_likelihood(design, Eigen::VectorXd::Zero(5)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("grid scan confirms the likelihood maximum sits at the fitted alpha") {
  const auto data = pa_choice_data(400, 71);
  Design design = Design::columns(data, {"log_degree"});
  design.support = Support::column_at_least(data.require_column("degree"), 1.0);

  const LogitFit fitted = fit(design);
  REQUIRE(fitted.converged);
  double best_alpha = -1.0, best_ll = -1e300;
  for (double alpha = 0.0; alpha <= 2.0; alpha += 0.01) {
    Eigen::VectorXd theta(1);
    theta << alpha;
    const double ll = log_likelihood(design, theta);
    if (ll > best_ll) {
      best_ll = ll;
      best_alpha = alpha;
    }
  }
  CHECK(std::abs(best_alpha - fitted.theta[0]) <= 0.011);
  CHECK(fitted.loglik >= best_ll - 1e-9);
}

TEST_CASE("analytic gradient and Hessian match finite differences") {
  std::mt19937_64 engine(5150);
  std::normal_distribution<double> normal(0.0, 0.7);
  const auto data = oracles::synthetic_choice_data(40, 6, Eigen::Vector2d(0.4, -0.8), 77);
  const Design design = Design::dense(data);

  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd theta(2);
    theta << normal(engine), normal(engine);

    double ll;
    Eigen::VectorXd grad;
    log_likelihood_gradient(design, theta, ll, grad);
    CHECK(ll == doctest::Approx(static_cast<double>(oracles::naive_loglik(design, theta)))
                    .epsilon(1e-12));

    const auto fd_grad = oracles::finite_difference_gradient(
        [&](const Eigen::VectorXd& t) { return log_likelihood(design, t); }, theta);
    for (int i = 0; i < 2; ++i) {
      CHECK(grad[i] == doctest::Approx(fd_grad[i]).epsilon(1e-6));
    }

    const Eigen::MatrixXd H = hessian(design, theta);
    const Eigen::MatrixXd fd_h = oracles::finite_difference_jacobian(
        [&](const Eigen::VectorXd& t) {
          double ll2;
          Eigen::VectorXd g;
          log_likelihood_gradient(design, t, ll2, g);
          return g;
        },
        theta);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(H(i, j) == doctest::Approx(fd_h(i, j)).epsilon(1e-4));
      }
    }
    // Concavity: the Hessian is negative semidefinite.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(H);
    CHECK(eigen.eigenvalues().maxCoeff() < 1e-8);
  }
}

TEST_CASE("gradient vanishes at zero for symmetric features") {
  // Two alternatives with mirrored features and both chosen equally often.
  const auto data = manual_data({{{1.0}, {-1.0}}, {{1.0}, {-1.0}}}, {0, 1}, {"x"});
  const Design design = Design::dense(data);
  double ll;
  Eigen::VectorXd grad;
  log_likelihood_gradient(design, Eigen::VectorXd::Zero(1), ll, grad);
  CHECK(grad[0] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("tiny fit matches exhaustive grid plus Newton refinement") {
  // Four events over the same three alternatives with one-hot features; the
  // saturated MLE is theta = (log(2 * 1/2) ... ) known in closed form: the
  // class probabilities must equal the empirical frequencies (1/2, 1/4, 1/4),
  // giving theta_a = theta_b = -log 2 relative to the reference class.
  const std::vector<std::vector<double>> alts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  const auto data = manual_data({alts, alts, alts, alts}, {0, 0, 1, 2}, {"a", "b"});
  const Design design = Design::dense(data);
  const LogitFit fitted = fit(design);
  REQUIRE(fitted.converged);
  CHECK(fitted.theta[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-6));
  CHECK(fitted.theta[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-6));

  // Independent route: coarse grid, then Newton steps using naive evaluation.
  double best_a = 0, best_b = 0;
  long double best_ll = -1e300L;
  for (double a = -4.0; a <= 4.0; a += 0.05) {
    for (double b = -4.0; b <= 4.0; b += 0.05) {
      Eigen::VectorXd theta(2);
      theta << a, b;
      const long double ll = oracles::naive_loglik(design, theta);
      if (ll > best_ll) {
        best_ll = ll;
        best_a = a;
        best_b = b;
      }
    }
  }
  Eigen::VectorXd theta(2);
  theta << best_a, best_b;
  for (int step = 0; step < 40; ++step) {
    const auto grad = oracles::finite_difference_gradient(
        [&](const Eigen::VectorXd& t) { return static_cast<double>(oracles::naive_loglik(design, t)); },
        theta, 1e-6);
    const auto hess = oracles::finite_difference_jacobian(
        [&](const Eigen::VectorXd& t) {
          return oracles::finite_difference_gradient(
              [&](const Eigen::VectorXd& u) {
                return static_cast<double>(oracles::naive_loglik(design, u));
              },
              t, 1e-6);
        },
        theta, 1e-4);
    theta -= hess.ldlt().solve(grad);
  }
  CHECK(fitted.theta[0] == doctest::Approx(theta[0]).epsilon(1e-4));
  CHECK(fitted.theta[1] == doctest::Approx(theta[1]).epsilon(1e-4));
}

TEST_CASE("null data recovers coefficients near zero within two standard errors") {
  const auto data = oracles::synthetic_choice_data(600, 8, Eigen::Vector2d(0.0, 0.0), 31);
  const LogitFit fitted = fit(Design::dense(data));
  REQUIRE(fitted.converged);
  REQUIRE(fitted.se_defined);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(fitted.theta[i]) < 2.0 * fitted.se[i]);
  }
}

TEST_CASE("fits from distinct starting points agree (convex problem)") {
  const auto data = oracles::synthetic_choice_data(200, 5, Eigen::Vector2d(0.7, -0.3), 47);
  const Design design = Design::dense(data);
  const LogitFit from_zero = fit(design);
  Eigen::VectorXd start(2);
  start << 3.0, -2.5;
  const LogitFit from_far = fit(design, {}, nullptr, &start);
  REQUIRE(from_zero.converged);
  REQUIRE(from_far.converged);
  CHECK(from_zero.theta[0] == doctest::Approx(from_far.theta[0]).epsilon(1e-4));
  CHECK(from_zero.theta[1] == doctest::Approx(from_far.theta[1]).epsilon(1e-4));
}

TEST_CASE("likelihood is invariant under within-event utility shifts and relabeling") {
  const auto base = oracles::synthetic_choice_data(50, 4, Eigen::Vector2d(0.5, 0.2), 91);
  Eigen::VectorXd theta(2);
  theta << 0.4, -0.9;
  const double base_ll = log_likelihood(Design::dense(base), theta);

  SUBCASE("adding a constant to every alternative's features") {
    ChoiceData shifted = base;
    for (auto& ev : shifted.events) {
      for (std::size_t i = 0; i < ev.features.size(); i += 2) ev.features[i] += 5.0;
    }
    // Shift in feature 0 adds theta0*5 to every utility in every event.
    CHECK(log_likelihood(Design::dense(shifted), theta) == doctest::Approx(base_ll).epsilon(1e-10));
  }

  SUBCASE("permuting alternatives within events") {
    ChoiceData permuted = base;
    for (auto& ev : permuted.events) {
      const int n = ev.n_alternatives();
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::rotate(perm.begin(), perm.begin() + 1, perm.end());
      ChoiceEvent copy = ev;
      for (int a = 0; a < n; ++a) {
        const int from = perm[static_cast<std::size_t>(a)];
        copy.alternatives[static_cast<std::size_t>(a)] =
            ev.alternatives[static_cast<std::size_t>(from)];
        for (int f = 0; f < 2; ++f) {
          copy.features[static_cast<std::size_t>(a) * 2 + f] =
              ev.features[static_cast<std::size_t>(from) * 2 + f];
        }
        if (from == ev.chosen) copy.chosen = a;
      }
      ev = std::move(copy);
    }
    CHECK(log_likelihood(Design::dense(permuted), theta) == doctest::Approx(base_ll).epsilon(1e-10));
  }
}

TEST_CASE("log-degree logit with min-degree support reproduces d^alpha exactly") {
  const auto data = pa_choice_data(200, 3);
  const int deg_col = data.require_column("degree");
  Design design = Design::columns(data, {"log_degree"});
  design.support = Support::column_at_least(deg_col, 1.0);
  Eigen::VectorXd alpha(1);
  alpha << 1.3;

  for (std::size_t k = 20; k < data.events.size(); k += 41) {
    const auto& ev = data.events[k];
    const Eigen::VectorXd probs = choice_prob(design, alpha, k);
    long double z = 0.0L;
    std::vector<long double> weights(static_cast<std::size_t>(ev.n_alternatives()), 0.0L);
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      const double d = ev.row(a, data.n_features())[deg_col];
      weights[static_cast<std::size_t>(a)] = std::pow(static_cast<long double>(d), 1.3L);
      z += weights[static_cast<std::size_t>(a)];
    }
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      CHECK(probs[a] ==
            doctest::Approx(static_cast<double>(weights[static_cast<std::size_t>(a)] / z))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("bit-identical results across thread counts") {
  const auto data = oracles::synthetic_choice_data(1000, 6, Eigen::Vector2d(0.3, 0.6), 12);
  Eigen::VectorXd theta(2);
  theta << 0.21, -0.35;
  Design serial = Design::dense(data);
  serial.threads = 1;
  Design parallel = Design::dense(data);
  parallel.threads = 4;

  double ll_s, ll_p;
  Eigen::VectorXd g_s, g_p;
  log_likelihood_gradient(serial, theta, ll_s, g_s);
  log_likelihood_gradient(parallel, theta, ll_p, g_p);
  CHECK(ll_s == ll_p);  // exact equality: block-structured reduction
  CHECK(g_s == g_p);
}

TEST_CASE("weighted likelihood matches the naive weighted oracle") {
  const auto data = oracles::synthetic_choice_data(60, 5, Eigen::Vector2d(0.4, 0.1), 8);
  std::vector<double> weights;
  std::mt19937_64 engine(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t k = 0; k < data.events.size(); ++k) weights.push_back(unif(engine));
  Eigen::VectorXd theta(2);
  theta << -0.2, 0.5;
  const Design design = Design::dense(data);
  CHECK(log_likelihood(design, theta, weights.data()) ==
        doctest::Approx(static_cast<double>(oracles::naive_loglik(design, theta, weights.data())))
            .epsilon(1e-12));
}

TEST_CASE("nonparametric PA: coefficients grow linearly in log degree on PA data") {
  const auto data = pa_choice_data(1500, 13);
  int max_degree = 0;
  const int deg_col = data.require_column("degree");
  for (const auto& ev : data.events) {
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      max_degree = std::max(max_degree, static_cast<int>(ev.row(a, 2)[deg_col]));
    }
  }
  const auto np = fit_nonparametric_pa(data, max_degree);
  REQUIRE(np.fit.converged);
  CHECK(np.pin_degree == 1);
  // Degree zero is never chosen under pure PA: reported missing.
  CHECK(!np.coefficients[0].estimated);

  // Inverse-variance weighted regression of theta_k on log k, computed here
  // from the coefficient table; sparse high-degree cells carry little weight.
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  int n = 0;
  for (const auto& c : np.coefficients) {
    if (!c.estimated || c.pinned || c.degree < 1) continue;
    if (!std::isfinite(c.se) || c.se <= 0) continue;
    const double w = 1.0 / (c.se * c.se);
    const double x = std::log(static_cast<double>(c.degree));
    sw += w;
    swx += w * x;
    swy += w * c.theta;
    swxx += w * x * x;
    swxy += w * x * c.theta;
    ++n;
  }
  REQUIRE(n >= 5);
  const double slope = (sw * swxy - swx * swy) / (sw * swxx - swx * swx);
  CHECK(slope > 0.85);
  CHECK(slope < 1.15);
}

TEST_CASE("nonparametric PA: uniform data leaves all degree coefficients near zero") {
  // Directed uniform attachment: zero-in-degree nodes get chosen regularly,
  // so theta_0 is identified.
  const auto data = pa_choice_data(800, 29, GrowthModel::Uniform, 1.0, true);
  const auto np = fit_nonparametric_pa(data, 12);
  REQUIRE(np.fit.converged);
  // Degree zero nodes are chosen under uniform attachment, so theta_0 exists.
  CHECK(np.coefficients[0].estimated);
  CHECK(std::isfinite(np.coefficients[0].theta));
  int checked = 0;
  for (const auto& c : np.coefficients) {
    if (!c.estimated || c.pinned) continue;
    if (!std::isfinite(c.se) || c.se <= 0) continue;
    if (c.chosen_count < 5) continue;  // very sparse cells are wide anyway
    CHECK(std::abs(c.theta) < 2.5 * c.se);
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("ridge option is reported and leaves SEs unpenalized-based") {
  const auto data = oracles::synthetic_choice_data(100, 4, Eigen::Vector2d(0.5, 0.5), 4);
  FitOptions options;
  options.ridge = 0.5;
  const LogitFit fitted = fit(Design::dense(data), options);
  CHECK(fitted.ridge_active);
  const LogitFit plain = fit(Design::dense(data));
  CHECK(std::abs(fitted.theta[0]) < std::abs(plain.theta[0]) + 1e-9);  // shrinkage
}
