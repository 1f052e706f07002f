#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "netchoice/choices.hpp"
#include "netchoice/generate.hpp"
#include "oracles.hpp"

using namespace netchoice;

namespace {

// Recompute one event's feature row from a graph built out of only the
// prefix edges; completely independent of the replay machinery.
std::vector<double> prefix_recount_degree_features(const TemporalGraph& g, const ChoiceEvent& ev,
                                                   NodeId alt) {
  TemporalGraph prefix(g.directed());
  for (NodeId v = 0; v < g.num_nodes(); ++v) prefix.add_node();
  for (const auto& e : g.edges()) {
    if (e.event < ev.event) prefix.add_edge(e.src, e.dst, e.event);
  }
  const auto d = static_cast<double>(prefix.attachment_degree(alt, prefix.end_time()));
  return {d, zero_safe_log(d), d > 0 ? 1.0 : 0.0};
}

}  // namespace

TEST_CASE("feature spec parsing round-trips names and rejects junk") {
  const auto spec = FeatureSpec::parse("logdeg,hasdeg,recip,fof");
  CHECK(spec.names() == std::vector<std::string>{"log_degree", "has_degree", "reciprocal", "is_fof"});
  CHECK_THROWS_AS(FeatureSpec::parse("logdeg,nonsense"), ConfigError);
  CHECK_THROWS_AS(FeatureSpec::parse("logdeg,logdeg"), ConfigError);
  CHECK_THROWS_AS(FeatureSpec::parse(""), ConfigError);
  const auto hops = FeatureSpec::parse("hops:6");
  CHECK(hops.names() ==
        std::vector<std::string>{"hop:2", "hop:3", "hop:4", "hop:5", "hop:6+"});
  CHECK(FeatureSpec::parse("cov:year").names() == std::vector<std::string>{"cov:year"});
}

TEST_CASE("zero-safe log pairs with has_degree exactly as specified") {
  CHECK(zero_safe_log(0.0) == 0.0);
  CHECK(zero_safe_log(1.0) == 0.0);
  CHECK(zero_safe_log(std::exp(1.0)) == doctest::Approx(1.0));
  CHECK(zero_safe_log(2.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("triangle-closing edge gets is_fof = 1 only for the FoF alternative") {
  // 0->1, 1->2, 1->3; then 0 closes the triangle toward 2.
  TemporalGraph g(true);
  for (int i = 0; i < 4; ++i) g.add_node();
  g.add_edge(0, 1, 0);
  g.add_edge(1, 2, 1);
  g.add_edge(1, 3, 2);
  g.add_edge(0, 2, 3);

  const auto spec = FeatureSpec::parse("fof");
  const auto extracted = extract_choices(g, spec);
  const auto& events = extracted.data.events;
  REQUIRE(!events.empty());
  const ChoiceEvent& last = events.back();
  CHECK(last.chooser == 0);
  for (std::int32_t a = 0; a < last.n_alternatives(); ++a) {
    const double value = last.row(a, 1)[0];
    const NodeId node = last.alternatives[static_cast<std::size_t>(a)];
    if (node == 2 || node == 3) {
      CHECK(value == 1.0);  // both 2 and 3 are friends of friends of 0
    } else {
      CHECK(value == 0.0);
    }
  }
  CHECK(last.chosen_in_fof);
}

TEST_CASE("degree features: (has_degree, log_degree) at degrees 0, 1, 2") {
  TemporalGraph g(true);
  for (int i = 0; i < 5; ++i) g.add_node();
  g.add_edge(1, 0, 0);
  g.add_edge(2, 0, 1);
  g.add_edge(3, 1, 2);
  g.add_edge(4, 0, 3);  // query event: degrees now 0:2(in), 1:1, 2:0, 3:0

  const auto spec = FeatureSpec::parse("hasdeg,logdeg,deg");
  const auto extracted = extract_choices(g, spec);
  const ChoiceEvent& ev = extracted.data.events.back();
  REQUIRE(ev.chooser == 4);
  for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
    const double* row = ev.row(a, 3);
    const NodeId node = ev.alternatives[static_cast<std::size_t>(a)];
    if (node == 0) {
      CHECK(row[0] == 1.0);
      CHECK(row[1] == doctest::Approx(std::log(2.0)));
      CHECK(row[2] == 2.0);
    } else if (node == 1) {
      CHECK(row[0] == 1.0);
      CHECK(row[1] == 0.0);
      CHECK(row[2] == 1.0);
    } else {
      CHECK(row[0] == 0.0);
      CHECK(row[1] == 0.0);
      CHECK(row[2] == 0.0);
    }
  }
}

TEST_CASE("no feature leakage: replayed features equal independent prefix recounts") {
  GrowthConfig config;
  config.model = GrowthModel::Pa;
  config.alpha = 1.0;
  config.n = 120;
  config.m = 2;
  config.seed = 99;
  const auto grown = generate(config);

  const auto spec = FeatureSpec::parse("deg,logdeg,hasdeg");
  const auto extracted = extract_choices(grown.graph, spec);
  REQUIRE(extracted.data.events.size() == grown.graph.edges().size());
  for (std::size_t k = 7; k < extracted.data.events.size(); k += 37) {
    const ChoiceEvent& ev = extracted.data.events[k];
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      const auto expected = prefix_recount_degree_features(
          grown.graph, ev, ev.alternatives[static_cast<std::size_t>(a)]);
      const double* row = ev.row(a, 3);
      CHECK(row[0] == expected[0]);
      CHECK(row[1] == doctest::Approx(expected[1]).epsilon(1e-12));
      CHECK(row[2] == expected[2]);
    }
  }
}

TEST_CASE("alternatives exclude the chooser and already-linked nodes") {
  GrowthConfig config;
  config.model = GrowthModel::Uniform;
  config.n = 60;
  config.m = 3;
  config.seed = 4;
  const auto grown = generate(config);
  const auto extracted = extract_choices(grown.graph, FeatureSpec::parse("deg"));

  // Replay independently to know the link state before each event.
  std::set<std::pair<NodeId, NodeId>> links;
  std::size_t k = 0;
  for (const auto& e : grown.graph.edges()) {
    const ChoiceEvent& ev = extracted.data.events[k++];
    CHECK(ev.chooser == e.src);
    for (const NodeId alt : ev.alternatives) {
      CHECK(alt != ev.chooser);
      CHECK(!links.count({e.src, alt}));
    }
    links.insert({e.src, e.dst});
  }
}

TEST_CASE("reciprocal feature marks alternatives that already link to the chooser") {
  TemporalGraph g(true);
  for (int i = 0; i < 3; ++i) g.add_node();
  g.add_edge(1, 0, 0);
  g.add_edge(0, 1, 1);  // 0 links back to 1: reciprocal
  const auto extracted = extract_choices(g, FeatureSpec::parse("recip"));
  const ChoiceEvent& ev = extracted.data.events.back();
  CHECK(ev.chooser == 0);
  for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
    const NodeId node = ev.alternatives[static_cast<std::size_t>(a)];
    CHECK(ev.row(a, 1)[0] == (node == 1 ? 1.0 : 0.0));
  }
}

TEST_CASE("hop categories are one-hot with unreachable as the reference") {
  // Chain 0->1->2->3->4 then 5 arrives and picks 0; distances from 5 are all
  // unreachable, so every hop column is zero.
  TemporalGraph g(true);
  for (int i = 0; i < 6; ++i) g.add_node();
  for (int i = 0; i < 4; ++i) g.add_edge(i, i + 1, i);
  g.add_edge(5, 0, 4);
  g.add_edge(0, 2, 5);  // chooser 0: node 3 is 3 hops, node 4 is 4 hops away

  const auto spec = FeatureSpec::parse("hops:6");
  const auto extracted = extract_choices(g, spec);
  const ChoiceEvent& five = extracted.data.events[extracted.data.events.size() - 2];
  CHECK(five.chooser == 5);
  for (std::int32_t a = 0; a < five.n_alternatives(); ++a) {
    for (int f = 0; f < 5; ++f) CHECK(five.row(a, 5)[f] == 0.0);
  }

  const ChoiceEvent& last = extracted.data.events.back();
  CHECK(last.chooser == 0);
  for (std::int32_t a = 0; a < last.n_alternatives(); ++a) {
    const NodeId node = last.alternatives[static_cast<std::size_t>(a)];
    const double* row = last.row(a, 5);
    if (node == 2) {
      CHECK(row[0] == 1.0);  // hop:2
    } else if (node == 3) {
      CHECK(row[1] == 1.0);  // hop:3
    } else if (node == 4) {
      CHECK(row[2] == 1.0);  // hop:4
    } else {
      for (int f = 0; f < 5; ++f) CHECK(row[f] == 0.0);
    }
  }
}

TEST_CASE("fof-only choice sets keep and flag outside-chosen events") {
  TemporalGraph g(true);
  for (int i = 0; i < 4; ++i) g.add_node();
  g.add_edge(0, 1, 0);
  g.add_edge(1, 2, 1);
  g.add_edge(0, 3, 2);  // 3 is NOT a friend-of-friend of 0 (only 2 is)

  ExtractOptions options;
  options.choice_set = ChoiceSetRule::FofOnly;
  const auto extracted = extract_choices(g, FeatureSpec::parse("deg"), options);
  const ChoiceEvent& last = extracted.data.events.back();
  CHECK(last.chooser == 0);
  CHECK(last.chosen_outside_rule);
  CHECK(extracted.diagnostics.flagged_chosen_outside_rule == 3);  // first edges have empty FoF too
  // Alternatives: the FoF set {2} plus the chosen node 3.
  CHECK(last.alternatives == std::vector<NodeId>{2, 3});
}

TEST_CASE("min_degree filter drops zero-degree alternatives") {
  TemporalGraph g(true);
  for (int i = 0; i < 5; ++i) g.add_node();
  g.add_edge(1, 0, 0);
  g.add_edge(2, 0, 1);
  g.add_edge(3, 0, 2);
  g.add_edge(4, 0, 3);

  ExtractOptions options;
  options.min_degree = 1;
  const auto extracted = extract_choices(g, FeatureSpec::parse("deg"), options);
  const ChoiceEvent& last = extracted.data.events.back();
  CHECK(last.chooser == 4);
  CHECK(last.alternatives == std::vector<NodeId>{0});  // 1,2,3 have in-degree 0
  CHECK(last.full_size == 4);                          // aggregates describe the unfiltered set
}

TEST_CASE("negative sampling keeps the chosen alternative and the requested size") {
  GrowthConfig config;
  config.model = GrowthModel::Uniform;
  config.n = 80;
  config.m = 1;
  config.seed = 6;
  const auto grown = generate(config);
  const auto extracted = extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg"));

  Rng rng(17);
  const auto sampled = negative_sample(extracted.data, 10, rng);
  REQUIRE(sampled.events.size() == extracted.data.events.size());
  for (std::size_t k = 0; k < sampled.events.size(); ++k) {
    const ChoiceEvent& full = extracted.data.events[k];
    const ChoiceEvent& red = sampled.events[k];
    const NodeId chosen_full = full.alternatives[static_cast<std::size_t>(full.chosen)];
    const NodeId chosen_red = red.alternatives[static_cast<std::size_t>(red.chosen)];
    CHECK(chosen_full == chosen_red);
    CHECK(red.n_alternatives() == std::min<std::int64_t>(full.n_alternatives(), 11));
    CHECK(red.full_size == full.full_size);
  }

  // s >= |C| - 1 leaves events unchanged.
  Rng rng2(18);
  const auto unchanged = negative_sample(extracted.data, 1000, rng2);
  for (std::size_t k = 0; k < unchanged.events.size(); ++k) {
    CHECK(unchanged.events[k].alternatives == extracted.data.events[k].alternatives);
    CHECK(unchanged.events[k].chosen == extracted.data.events[k].chosen);
  }
}

TEST_CASE("fused extraction sampling obeys s+1 set sizes") {
  GrowthConfig config;
  config.model = GrowthModel::Pa;
  config.n = 100;
  config.m = 1;
  config.seed = 12;
  const auto grown = generate(config);
  ExtractOptions options;
  options.negative_samples = 10;
  options.seed = 5;
  const auto extracted = extract_choices(grown.graph, FeatureSpec::parse("deg"), options);
  for (const auto& ev : extracted.data.events) {
    CHECK(ev.n_alternatives() <= 11);
    CHECK(ev.n_alternatives() == std::min<std::int64_t>(ev.full_size, 11));
  }
}

TEST_CASE("choice data JSONL round-trips losslessly") {
  GrowthConfig config;
  config.model = GrowthModel::Copy;
  config.p = 0.5;
  config.n = 40;
  config.m = 2;
  config.seed = 3;
  const auto grown = generate(config);
  ExtractOptions options;
  options.negative_samples = 5;
  const auto extracted = extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg"), options);

  const std::string path = std::filesystem::temp_directory_path() / "netchoice_choices_test.jsonl";
  write_choices_jsonl(path, extracted.data);
  const auto loaded = read_choices_jsonl(path);
  std::remove(path.c_str());

  REQUIRE(loaded.events.size() == extracted.data.events.size());
  CHECK(loaded.feature_names == extracted.data.feature_names);
  CHECK(loaded.directed == extracted.data.directed);
  for (std::size_t k = 0; k < loaded.events.size(); ++k) {
    const auto& a = extracted.data.events[k];
    const auto& b = loaded.events[k];
    CHECK(a.event == b.event);
    CHECK(a.chooser == b.chooser);
    CHECK(a.chosen == b.chosen);
    CHECK(a.alternatives == b.alternatives);
    CHECK(a.features == b.features);
    CHECK(a.fof == b.fof);
    CHECK(a.full_size == b.full_size);
    CHECK(a.full_fof_size == b.full_fof_size);
    CHECK(a.full_degree_sum == b.full_degree_sum);
    CHECK(a.chosen_in_fof == b.chosen_in_fof);
  }
}

TEST_CASE("keep-prob and max-events follow the scan-keep-stop protocol") {
  GrowthConfig config;
  config.model = GrowthModel::Uniform;
  config.n = 300;
  config.m = 1;
  config.seed = 21;
  const auto grown = generate(config);

  ExtractOptions options;
  options.keep_prob = 0.25;
  options.max_events = 20;
  options.seed = 9;
  const auto extracted = extract_choices(grown.graph, FeatureSpec::parse("deg"), options);
  CHECK(extracted.data.events.size() == 20);
  CHECK(extracted.diagnostics.skipped_coin > 0);
  CHECK(extracted.diagnostics.skipped_after_stop > 0);
  // Kept events are in canonical event order.
  for (std::size_t k = 1; k < extracted.data.events.size(); ++k) {
    CHECK(extracted.data.events[k].event > extracted.data.events[k - 1].event);
  }
}
