#include <benchmark/benchmark.h>

#include "netchoice/choices.hpp"
#include "netchoice/clogit.hpp"
#include "netchoice/generate.hpp"
#include "netchoice/mixture.hpp"

using namespace netchoice;

namespace {

GrowthResult grow_pa(std::int32_t n, std::int32_t m) {
  GrowthConfig config;
  config.model = GrowthModel::Pa;
  config.alpha = 1.0;
  config.n = n;
  config.m = m;
  config.directed = false;
  config.seed = 99;
  return generate(config);
}

void BM_GeneratePa(benchmark::State& state) {
  const auto n = static_cast<std::int32_t>(state.range(0));
  for (auto _ : state) {
    GrowthConfig config;
    config.model = GrowthModel::Pa;
    config.alpha = 1.0;
    config.n = n;
    config.m = 4;
    config.directed = false;
    config.seed = 7;
    benchmark::DoNotOptimize(generate(config));
  }
  state.SetItemsProcessed(state.iterations() * (n - 4) * 4);
}
BENCHMARK(BM_GeneratePa)->Arg(2000)->Arg(10000);

void BM_GenerateRp(benchmark::State& state) {
  for (auto _ : state) {
    GrowthConfig config;
    config.model = GrowthModel::Rp;
    config.r = 0.5;
    config.p = 0.5;
    config.n = 5000;
    config.m = 4;
    config.directed = false;
    config.seed = 7;
    benchmark::DoNotOptimize(generate(config));
  }
}
BENCHMARK(BM_GenerateRp);

void BM_FriendsOfFriends(benchmark::State& state) {
  const auto grown = grow_pa(5000, 4);
  const auto& g = grown.graph;
  NodeId v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.friends_of_friends(v, g.end_time(), Traversal::Undirected));
    v = (v + 37) % g.num_nodes();
  }
}
BENCHMARK(BM_FriendsOfFriends);

void BM_HopDistances(benchmark::State& state) {
  const auto grown = grow_pa(5000, 4);
  const auto& g = grown.graph;
  NodeId v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.hop_distances(v, g.end_time(), 6, Traversal::Undirected));
    v = (v + 101) % g.num_nodes();
  }
}
BENCHMARK(BM_HopDistances);

void BM_ExtractChoices(benchmark::State& state) {
  const auto grown = grow_pa(2000, 1);
  const auto spec = FeatureSpec::parse("deg,logdeg,hasdeg");
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_choices(grown.graph, spec));
  }
}
BENCHMARK(BM_ExtractChoices);

struct FitFixture {
  ChoiceData data;
  FitFixture() {
    const auto grown = grow_pa(2000, 1);
    data = extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg")).data;
    const int deg_col = data.require_column("degree");
    std::erase_if(data.events, [&](const ChoiceEvent& ev) {
      return ev.row(ev.chosen, data.n_features())[deg_col] < 1.0;
    });
  }
};

void BM_LogLikelihoodGradient(benchmark::State& state) {
  static const FitFixture fixture;
  Design design = Design::columns(fixture.data, {"log_degree"});
  design.support = Support::column_at_least(fixture.data.require_column("degree"), 1.0);
  design.threads = static_cast<int>(state.range(0));
  Eigen::VectorXd theta(1);
  theta << 1.0;
  double ll;
  Eigen::VectorXd grad;
  for (auto _ : state) {
    log_likelihood_gradient(design, theta, ll, grad);
    benchmark::DoNotOptimize(ll);
  }
}
BENCHMARK(BM_LogLikelihoodGradient)->Arg(1)->Arg(4);

void BM_FitLogDegree(benchmark::State& state) {
  static const FitFixture fixture;
  Design design = Design::columns(fixture.data, {"log_degree"});
  design.support = Support::column_at_least(fixture.data.require_column("degree"), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(design));
  }
}
BENCHMARK(BM_FitLogDegree);

void BM_EmIterationCopy(benchmark::State& state) {
  GrowthConfig config;
  config.model = GrowthModel::Copy;
  config.p = 0.5;
  config.n = 2000;
  config.m = 4;
  config.directed = false;
  config.seed = 5;
  const auto grown = generate(config);
  ExtractOptions options;
  options.negative_samples = 10;
  const auto data = extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg"), options).data;
  for (auto _ : state) {
    MixtureModel model;
    model.modes.push_back(MixtureMode::log_degree(data, 1.0, false));
    model.modes.push_back(MixtureMode::uniform(data));
    model.pi = Eigen::Vector2d(0.5, 0.5);
    EmOptions em_options;
    em_options.starts = 1;
    em_options.max_iterations = 5;
    benchmark::DoNotOptimize(em_fit(model, em_options));
  }
}
BENCHMARK(BM_EmIterationCopy);

}  // namespace

BENCHMARK_MAIN();
