#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "netchoice/generate.hpp"
#include "netchoice/rng.hpp"
#include "netchoice/stats.hpp"

using namespace netchoice;

namespace {

std::vector<std::pair<NodeId, NodeId>> edge_pairs(const TemporalGraph& g) {
  std::vector<std::pair<NodeId, NodeId>> result;
  for (const auto& e : g.edges()) result.emplace_back(e.src, e.dst);
  return result;
}

GrowthConfig base_config(GrowthModel model, std::int32_t n, std::int32_t m, std::uint64_t seed) {
  GrowthConfig config;
  config.model = model;
  config.n = n;
  config.m = m;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("first arrival with one seed node is forced") {
  auto config = base_config(GrowthModel::Uniform, 3, 1, 42);
  const auto result = generate(config);
  REQUIRE(result.graph.num_edges() >= 1);
  const auto e = result.graph.edges()[0];
  CHECK(e.src == 1);
  CHECK(e.dst == 0);  // only one alternative exists
}

TEST_CASE("edge count is (n - m) * m") {
  for (const auto& [n, m] : std::vector<std::pair<int, int>>{{2000, 1}, {50, 4}, {10, 3}}) {
    const auto result = generate(base_config(GrowthModel::Uniform, n, m, 7));
    CHECK(result.graph.num_edges() == static_cast<std::int64_t>(n - m) * m);
    CHECK(result.graph.num_nodes() == n);
  }
}

TEST_CASE("generated graphs are simple and deterministic under a seed") {
  for (const GrowthModel model : {GrowthModel::Uniform, GrowthModel::Pa, GrowthModel::Copy,
                                  GrowthModel::LocalSearch, GrowthModel::Rp,
                                  GrowthModel::Fitness, GrowthModel::Homophily,
                                  GrowthModel::Latent}) {
    auto config = base_config(model, 120, 3, 2024);
    config.alpha = 1.0;
    config.p = 0.6;
    config.r = 0.7;
    config.directed = model != GrowthModel::Rp;
    const auto a = generate(config);
    const auto b = generate(config);
    CHECK(edge_pairs(a.graph) == edge_pairs(b.graph));

    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& [s, d] : edge_pairs(a.graph)) {
      CHECK(s != d);
      CHECK(!seen.count({s, d}));
      if (!config.directed) CHECK(!seen.count({d, s}));
      seen.insert({s, d});
    }
  }
}

TEST_CASE("pa(alpha=0) emits the identical edge sequence as uniform") {
  auto uniform = base_config(GrowthModel::Uniform, 200, 2, 99);
  auto pa0 = base_config(GrowthModel::Pa, 200, 2, 99);
  pa0.alpha = 0.0;
  CHECK(edge_pairs(generate(uniform).graph) == edge_pairs(generate(pa0).graph));
}

TEST_CASE("copy(p=1) reduces to uniform, rp nests copy and local search") {
  const std::uint64_t seed = 31337;

  auto uniform = base_config(GrowthModel::Uniform, 150, 2, seed);
  auto copy1 = base_config(GrowthModel::Copy, 150, 2, seed);
  copy1.p = 1.0;
  CHECK(edge_pairs(generate(uniform).graph) == edge_pairs(generate(copy1).graph));

  auto copy = base_config(GrowthModel::Copy, 150, 2, seed);
  copy.p = 0.4;
  auto rp_copy = base_config(GrowthModel::Rp, 150, 2, seed);
  rp_copy.r = 1.0;
  rp_copy.p = 0.4;
  CHECK(edge_pairs(generate(copy).graph) == edge_pairs(generate(rp_copy).graph));

  auto local = base_config(GrowthModel::LocalSearch, 150, 2, seed);
  local.r = 0.35;
  auto rp_local = base_config(GrowthModel::Rp, 150, 2, seed);
  rp_local.r = 0.35;
  rp_local.p = 1.0;
  CHECK(edge_pairs(generate(local).graph) == edge_pairs(generate(rp_local).graph));
}

TEST_CASE("pa(alpha=0) targets are uniform over eligible nodes (chi-squared)") {
  // Freeze a prefix, then look at the distribution of the next target across
  // many seeds? Cheaper and equivalent: use sample_weighted directly on flat
  // weights and compare to the uniform distribution.
  Rng rng(4);
  const int n = 10;
  std::vector<double> weights(n, 1.0);
  std::vector<std::int64_t> counts(n, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    ++counts[sample_weighted(weights, rng)];
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(draws) / n;
  for (const auto c : counts) {
    chi2 += (c - expected) * (c - expected) / expected;
  }
  CHECK(chi2_survival(chi2, n - 1) > 1e-4);
}

TEST_CASE("sample_weighted matches stated frequencies") {
  Rng rng(11);
  SUBCASE("symmetric weights") {
    std::vector<double> w{1.0, 1.0};
    std::int64_t ones = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ones += sample_weighted(w, rng) == 1 ? 1 : 0;
    const double p = 0.5, sigma = std::sqrt(p * (1 - p) * draws);
    CHECK(std::abs(ones - p * draws) < 3 * sigma);
  }
  SUBCASE("weights 2:1") {
    std::vector<double> w{2.0, 1.0};
    std::int64_t zeros = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) zeros += sample_weighted(w, rng) == 0 ? 1 : 0;
    const double p = 2.0 / 3.0, sigma = std::sqrt(p * (1 - p) * draws);
    CHECK(std::abs(zeros - p * draws) < 3 * sigma);
  }
  SUBCASE("all-zero weights fall back to uniform") {
    std::vector<double> w{0.0, 0.0, 0.0};
    std::vector<std::int64_t> counts(3, 0);
    for (int i = 0; i < 30000; ++i) ++counts[sample_weighted(w, rng)];
    for (const auto c : counts) CHECK(std::abs(c - 10000) < 500);
  }
}

TEST_CASE("categorical sampling is indistinguishable from Gumbel-max over utilities") {
  // Random-utility oracle: argmax of u_i + Gumbel noise has softmax(u)
  // probabilities, the same law sample_weighted draws from directly.
  Rng rng(12);
  std::mt19937_64 gumbel_engine(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const std::vector<double> utilities{0.3, -0.5, 1.1, 0.0};
  std::vector<double> weights;
  for (const double u : utilities) weights.push_back(std::exp(u));

  const int draws = 100000;
  std::vector<std::int64_t> direct(4, 0), gumbel(4, 0);
  for (int i = 0; i < draws; ++i) {
    ++direct[sample_weighted(weights, rng)];
    int best = 0;
    double best_value = -1e300;
    for (int a = 0; a < 4; ++a) {
      const double noise = -std::log(-std::log(unif(gumbel_engine)));
      if (utilities[a] + noise > best_value) {
        best_value = utilities[a] + noise;
        best = a;
      }
    }
    ++gumbel[best];
  }
  double chi2 = 0.0;
  for (int a = 0; a < 4; ++a) {
    const double expected = static_cast<double>(gumbel[a]);
    chi2 += (direct[a] - expected) * (direct[a] - expected) / expected;
  }
  CHECK(chi2_survival(chi2, 3) > 1e-4);
}

TEST_CASE("fof modes revert to uniform when no friends-of-friends exist") {
  auto config = base_config(GrowthModel::LocalSearch, 100, 1, 5);
  config.r = 0.2;  // most edges want the FoF set
  const auto result = generate(config);
  CHECK(result.empty_fof_fallbacks > 0);
  CHECK(result.graph.num_edges() == 99);
}

TEST_CASE("infeasible configs are rejected") {
  CHECK_THROWS_AS(generate(base_config(GrowthModel::Uniform, 3, 3, 1)), ConfigError);
  auto bad_r = base_config(GrowthModel::Rp, 100, 2, 1);
  bad_r.r = 0.0;
  bad_r.p = 0.5;
  CHECK_THROWS_AS(generate(bad_r), ConfigError);
  auto bad_p = base_config(GrowthModel::Copy, 100, 2, 1);
  bad_p.p = 1.5;
  CHECK_THROWS_AS(generate(bad_p), ConfigError);
}

TEST_CASE("fitness and homophily metadata are populated") {
  auto fitness = base_config(GrowthModel::Fitness, 50, 2, 9);
  const auto fg = generate(fitness);
  for (NodeId v = 0; v < fg.graph.num_nodes(); ++v) {
    CHECK(std::isfinite(fg.graph.meta(v).fitness));
    CHECK(fg.graph.meta(v).fitness >= 0.0);
  }

  auto homophily = base_config(GrowthModel::Homophily, 50, 2, 9);
  homophily.groups = 3;
  const auto hg = generate(homophily);
  for (NodeId v = 0; v < hg.graph.num_nodes(); ++v) {
    CHECK(hg.graph.meta(v).group >= 0);
    CHECK(hg.graph.meta(v).group < 3);
  }

  auto latent = base_config(GrowthModel::Latent, 50, 2, 9);
  const auto lg = generate(latent);
  const int px = lg.graph.covariate_index("pos0");
  const int py = lg.graph.covariate_index("pos1");
  REQUIRE(px >= 0);
  REQUIRE(py >= 0);
  for (NodeId v = 0; v < lg.graph.num_nodes(); ++v) {
    CHECK(lg.graph.covariate(v, px) >= 0.0);
    CHECK(lg.graph.covariate(v, px) < 1.0);
    CHECK(lg.graph.covariate(v, py) >= 0.0);
  }
}

TEST_CASE("strong homophily concentrates edges within groups") {
  auto config = base_config(GrowthModel::Homophily, 400, 2, 77);
  config.homophily = 3.0;
  const auto result = generate(config);
  std::int64_t same = 0, total = 0;
  for (const auto& e : result.graph.edges()) {
    same += result.graph.meta(e.src).group == result.graph.meta(e.dst).group ? 1 : 0;
    ++total;
  }
  // exp(3) to 1 odds within a choice set that is half same-group on average.
  CHECK(static_cast<double>(same) / static_cast<double>(total) > 0.75);
}
