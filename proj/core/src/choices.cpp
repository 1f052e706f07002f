#include "netchoice/choices.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace netchoice {

using json = nlohmann::json;

int ChoiceData::column(const std::string& name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int ChoiceData::require_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ConfigError("choice data has no feature column '" + name + "'");
  return c;
}

void ChoiceData::validate() const {
  const std::int32_t f = n_features();
  for (const ChoiceEvent& ev : events) {
    if (ev.chosen < 0 || ev.chosen >= ev.n_alternatives()) {
      throw DataError("event " + std::to_string(ev.event) + ": chosen position out of range");
    }
    if (ev.features.size() != static_cast<std::size_t>(ev.n_alternatives()) * f) {
      throw DataError("event " + std::to_string(ev.event) + ": feature matrix shape mismatch");
    }
    for (NodeId alt : ev.alternatives) {
      if (alt == ev.chooser) {
        throw DataError("event " + std::to_string(ev.event) + ": chooser among alternatives");
      }
    }
    for (double x : ev.features) {
      if (!std::isfinite(x)) {
        throw DataError("event " + std::to_string(ev.event) + ": non-finite feature");
      }
    }
    if (!ev.fof.empty() && ev.fof.size() != ev.alternatives.size()) {
      throw DataError("event " + std::to_string(ev.event) + ": fof mask shape mismatch");
    }
  }
}

namespace {

constexpr double kSecondsPerYear = 365.25 * 86400.0;

// Per-event context shared by all feature columns of one event.
struct EventContext {
  NodeId chooser = -1;
  EventIndex t = 0;
  double timestamp = std::numeric_limits<double>::quiet_NaN();
  std::unordered_set<NodeId> fof;
  std::vector<std::int64_t> common_neighbors;  // indexed by node id; epoch-stamped
  std::vector<int> hops;                       // from single-source BFS, -1 unreachable
};

}  // namespace

ExtractResult extract_choices(const TemporalGraph& graph, const FeatureSpec& spec,
                              const ExtractOptions& options) {
  spec.validate();
  if (graph.num_edges() == 0) throw DataError("extract_choices: graph has no edges");

  ExtractResult result;
  ChoiceData& out = result.data;
  ExtractDiagnostics& diag = result.diagnostics;
  out.feature_names = spec.names();
  out.directed = graph.directed();
  out.choice_set = options.choice_set == ChoiceSetRule::FofOnly ? "fof" : "all";

  const Traversal traversal = options.traversal.value_or(graph.default_traversal());
  const std::int32_t n_features = spec.size();
  const bool need_fof = options.with_fof_flags || spec.has(FeatureKind::IsFof) ||
                        options.choice_set == ChoiceSetRule::FofOnly;
  const bool need_cn = spec.has(FeatureKind::LogCommonNeighbors);
  const bool need_hops = spec.has(FeatureKind::HopCategory);
  const int hop_cap = spec.has(FeatureKind::HopCategory) ? spec.hop_cap : options.hop_cap;

  int pos_x = -1, pos_y = -1;
  if (spec.has(FeatureKind::LatentDistance)) {
    pos_x = graph.covariate_index("pos0");
    pos_y = graph.covariate_index("pos1");
    if (pos_x < 0 || pos_y < 0) {
      throw ConfigError("latent_distance needs 'pos0' and 'pos1' node covariates");
    }
  }
  std::vector<int> covariate_cols(spec.features.size(), -1);
  for (std::size_t f = 0; f < spec.features.size(); ++f) {
    if (spec.features[f].kind == FeatureKind::Covariate) {
      const int c = graph.covariate_index(spec.features[f].covariate);
      if (c < 0) throw ConfigError("unknown node covariate '" + spec.features[f].covariate + "'");
      covariate_cols[f] = c;
    }
  }

  // First timestamp at which each node is seen, for ages measured in years.
  std::vector<double> first_seen_ts;
  const bool use_years = graph.has_timestamps() && spec.has(FeatureKind::LogAge);
  if (graph.has_timestamps()) {
    first_seen_ts.assign(static_cast<std::size_t>(graph.num_nodes()),
                         std::numeric_limits<double>::infinity());
    for (const TemporalEdge& e : graph.edges()) {
      auto& s = first_seen_ts[static_cast<std::size_t>(e.src)];
      auto& d = first_seen_ts[static_cast<std::size_t>(e.dst)];
      s = std::min(s, e.timestamp);
      d = std::min(d, e.timestamp);
    }
  }
  // First event of each chooser, and the day it was first seen, for the
  // new-chooser filters.
  std::vector<EventIndex> first_incident(static_cast<std::size_t>(graph.num_nodes()),
                                         std::numeric_limits<EventIndex>::max());
  for (const TemporalEdge& e : graph.edges()) {
    auto& s = first_incident[static_cast<std::size_t>(e.src)];
    auto& d = first_incident[static_cast<std::size_t>(e.dst)];
    s = std::min(s, e.event);
    d = std::min(d, e.event);
  }

  // Replay: nodes are declared up front (their arrival gates eligibility),
  // edges are appended one at a time, and every feature reads the replay
  // graph's current state, i.e. the prefix strictly before the edge.
  TemporalGraph replay(graph.directed());
  replay.reserve_nodes(graph.num_nodes());
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    replay.add_node();
    replay.meta(v) = graph.meta(v);
  }
  for (const auto& name : graph.covariate_names()) replay.add_covariate(name);

  // Nodes ordered by arrival; the prefix of this order that has arrived by t
  // is exactly the eligible universe (minus the chooser and linked nodes).
  std::vector<NodeId> by_arrival(static_cast<std::size_t>(graph.num_nodes()));
  for (NodeId v = 0; v < graph.num_nodes(); ++v) by_arrival[static_cast<std::size_t>(v)] = v;
  std::stable_sort(by_arrival.begin(), by_arrival.end(), [&](NodeId a, NodeId b) {
    return graph.meta(a).arrival < graph.meta(b).arrival;
  });
  std::size_t arrived = 0;

  Rng rng(splitmix64(options.seed + 0x5eed));
  EventContext ctx;
  std::vector<NodeId> eligible;
  bool stopped = false;

  for (const TemporalEdge& edge : graph.edges()) {
    ++diag.edges_seen;
    const EventIndex t = edge.event;
    while (arrived < by_arrival.size() && graph.meta(by_arrival[arrived]).arrival <= t) ++arrived;

    bool keep = true;
    if (stopped) {
      ++diag.skipped_after_stop;
      keep = false;
    }
    if (keep && !std::isnan(edge.timestamp) &&
        (edge.timestamp < options.window_start || edge.timestamp > options.window_end)) {
      ++diag.skipped_window;
      keep = false;
    }
    if (keep && options.new_choosers != NewChooserFilter::Keep) {
      const EventIndex first = first_incident[static_cast<std::size_t>(edge.src)];
      bool is_new = false;
      if (options.new_choosers == NewChooserFilter::DropFirstEvent) {
        is_new = first == t;
      } else {  // DropFirstDay: same UTC day as the chooser's first appearance
        if (!std::isnan(edge.timestamp)) {
          const double first_ts = first_seen_ts.empty()
                                      ? edge.timestamp
                                      : first_seen_ts[static_cast<std::size_t>(edge.src)];
          is_new = std::floor(edge.timestamp / 86400.0) == std::floor(first_ts / 86400.0);
        } else {
          is_new = first == t;
        }
      }
      if (is_new) {
        ++diag.skipped_new_chooser;
        keep = false;
      }
    }
    if (keep && options.keep_prob < 1.0 && rng.next_double() >= options.keep_prob) {
      ++diag.skipped_coin;
      keep = false;
    }

    if (keep) {
      const NodeId chooser = edge.src;
      const NodeId chosen_node = edge.dst;

      ctx.chooser = chooser;
      ctx.t = t;
      ctx.timestamp = edge.timestamp;
      if (need_fof) {
        const auto fof = replay.friends_of_friends(chooser, replay.end_time(), traversal);
        ctx.fof.clear();
        ctx.fof.insert(fof.begin(), fof.end());
      }

      // Eligible universe: arrived nodes other than the chooser that the
      // chooser is not already linked to.
      eligible.clear();
      std::int64_t fof_count = 0;
      double degree_sum = 0.0;
      for (std::size_t i = 0; i < arrived; ++i) {
        const NodeId v = by_arrival[i];
        if (v == chooser || replay.linked(chooser, v)) continue;
        eligible.push_back(v);
        if (need_fof && ctx.fof.count(v)) ++fof_count;
        degree_sum += static_cast<double>(replay.attachment_degree(v));
      }
      const std::int64_t full_size = static_cast<std::int64_t>(eligible.size());

      // Apply the choice-set rule and per-alternative filters; the chosen
      // node is always retained.
      std::vector<NodeId> kept;
      kept.reserve(eligible.size());
      bool chosen_outside = false;
      for (const NodeId v : eligible) {
        bool inside = true;
        if (options.choice_set == ChoiceSetRule::FofOnly && !ctx.fof.count(v)) inside = false;
        if (options.min_degree > 0 && replay.attachment_degree(v) < options.min_degree) {
          inside = false;
        }
        if (v == chosen_node) {
          chosen_outside = !inside;
          continue;  // inserted after sampling
        }
        if (inside) kept.push_back(v);
      }

      // Uniform negative sampling without replacement (reservoir), fused into
      // extraction so full choice sets are never materialized.
      if (options.negative_samples >= 0 &&
          static_cast<std::int64_t>(kept.size()) > options.negative_samples) {
        const std::int64_t s = options.negative_samples;
        for (std::size_t i = static_cast<std::size_t>(s); i < kept.size(); ++i) {
          const std::int64_t j = rng.next_index(static_cast<std::int64_t>(i) + 1);
          if (j < s) kept[static_cast<std::size_t>(j)] = kept[i];
        }
        kept.resize(static_cast<std::size_t>(s));
      }
      kept.push_back(chosen_node);
      std::sort(kept.begin(), kept.end());

      if (kept.empty()) {
        ++diag.dropped_empty_choice_set;
      } else {
        ChoiceEvent ev;
        ev.event = t;
        ev.chooser = chooser;
        ev.alternatives = std::move(kept);
        ev.chosen = static_cast<std::int32_t>(
            std::lower_bound(ev.alternatives.begin(), ev.alternatives.end(), chosen_node) -
            ev.alternatives.begin());
        ev.full_size = full_size;
        ev.full_fof_size = fof_count;
        ev.full_degree_sum = degree_sum;
        ev.chosen_in_fof = need_fof && ctx.fof.count(chosen_node) > 0;
        ev.chosen_outside_rule = chosen_outside;
        if (chosen_outside) ++diag.flagged_chosen_outside_rule;

        const std::int32_t n_alts = ev.n_alternatives();
        if (need_cn) {
          ctx.common_neighbors.assign(static_cast<std::size_t>(graph.num_nodes()), 0);
          const bool dir = traversal == Traversal::Directed;
          const auto firsts = dir ? replay.out_neighbors(chooser, replay.end_time())
                                  : replay.neighbors(chooser, replay.end_time());
          for (const NodeId k : firsts) {
            const auto seconds = dir ? replay.out_neighbors(k, replay.end_time())
                                     : replay.neighbors(k, replay.end_time());
            for (const NodeId w : seconds) ++ctx.common_neighbors[static_cast<std::size_t>(w)];
          }
        }
        if (need_hops) {
          ctx.hops = replay.hop_distances(chooser, replay.end_time(), hop_cap, traversal);
        }

        ev.features.resize(static_cast<std::size_t>(n_alts) * n_features);
        if (options.with_fof_flags && need_fof) ev.fof.resize(static_cast<std::size_t>(n_alts));
        for (std::int32_t a = 0; a < n_alts; ++a) {
          const NodeId v = ev.alternatives[static_cast<std::size_t>(a)];
          if (!ev.fof.empty()) ev.fof[static_cast<std::size_t>(a)] = ctx.fof.count(v) ? 1 : 0;
          double* row = ev.features.data() + static_cast<std::size_t>(a) * n_features;
          for (std::int32_t f = 0; f < n_features; ++f) {
            const Feature& feat = spec.features[static_cast<std::size_t>(f)];
            double value = 0.0;
            switch (feat.kind) {
              case FeatureKind::LogDegree:
                value = zero_safe_log(static_cast<double>(replay.attachment_degree(v)));
                break;
              case FeatureKind::HasDegree:
                value = replay.attachment_degree(v) > 0 ? 1.0 : 0.0;
                break;
              case FeatureKind::Degree:
                value = static_cast<double>(replay.attachment_degree(v));
                break;
              case FeatureKind::DegreeIndicator:
                value = replay.attachment_degree(v) == feat.param ? 1.0 : 0.0;
                break;
              case FeatureKind::LogCommonNeighbors:
                value = zero_safe_log(
                    static_cast<double>(ctx.common_neighbors[static_cast<std::size_t>(v)]));
                break;
              case FeatureKind::IsFof:
                value = ctx.fof.count(v) ? 1.0 : 0.0;
                break;
              case FeatureKind::Reciprocal:
                value = graph.directed() && replay.has_arc(v, ctx.chooser) ? 1.0 : 0.0;
                break;
              case FeatureKind::HopCategory: {
                const int h = ctx.hops[static_cast<std::size_t>(v)];
                if (h >= 0) {
                  const int bucket = std::min(std::max(h, 2), hop_cap);
                  value = bucket == feat.param ? 1.0 : 0.0;
                }
                break;
              }
              case FeatureKind::LogAge: {
                if (use_years) {
                  const double first = first_seen_ts[static_cast<std::size_t>(v)];
                  const double years = (ctx.timestamp - first) / kSecondsPerYear;
                  value = std::log(std::max(1.0, years));
                } else {
                  value = zero_safe_log(static_cast<double>(ctx.t - replay.meta(v).arrival));
                }
                break;
              }
              case FeatureKind::NodeIdentity:
                value = static_cast<double>(v);
                break;
              case FeatureKind::SameGroup:
                value = replay.meta(v).group >= 0 &&
                                replay.meta(v).group == replay.meta(ctx.chooser).group
                            ? 1.0
                            : 0.0;
                break;
              case FeatureKind::LatentDistance: {
                const double dx = replay.covariate(ctx.chooser, pos_x) - replay.covariate(v, pos_x);
                const double dy = replay.covariate(ctx.chooser, pos_y) - replay.covariate(v, pos_y);
                value = std::hypot(dx, dy);
                break;
              }
              case FeatureKind::Covariate: {
                const double c = replay.covariate(v, covariate_cols[static_cast<std::size_t>(f)]);
                value = std::isnan(c) ? 0.0 : c;
                break;
              }
            }
            row[f] = value;
          }
        }
        out.events.push_back(std::move(ev));
        ++diag.events_kept;
        if (options.max_events >= 0 &&
            diag.events_kept >= options.max_events) {
          stopped = true;
        }
      }
    }

    replay.add_edge(edge.src, edge.dst, edge.event, edge.timestamp);
  }
  return result;
}

ChoiceData negative_sample(const ChoiceData& data, std::int64_t s, Rng& rng) {
  if (s < 1) throw ConfigError("negative_sample: s must be >= 1");
  ChoiceData out;
  out.feature_names = data.feature_names;
  out.directed = data.directed;
  out.choice_set = data.choice_set;
  out.events.reserve(data.events.size());

  const std::int32_t F = data.n_features();
  for (const ChoiceEvent& ev : data.events) {
    const std::int64_t non_chosen = ev.n_alternatives() - 1;
    if (non_chosen <= s) {
      out.events.push_back(ev);
      continue;
    }
    std::vector<std::int32_t> pool;
    pool.reserve(static_cast<std::size_t>(non_chosen));
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      if (a != ev.chosen) pool.push_back(a);
    }
    for (std::size_t i = static_cast<std::size_t>(s); i < pool.size(); ++i) {
      const std::int64_t j = rng.next_index(static_cast<std::int64_t>(i) + 1);
      if (j < s) pool[static_cast<std::size_t>(j)] = pool[i];
    }
    pool.resize(static_cast<std::size_t>(s));
    pool.push_back(ev.chosen);
    std::sort(pool.begin(), pool.end());

    ChoiceEvent kept;
    kept.event = ev.event;
    kept.chooser = ev.chooser;
    kept.full_size = ev.full_size;
    kept.full_fof_size = ev.full_fof_size;
    kept.full_degree_sum = ev.full_degree_sum;
    kept.chosen_in_fof = ev.chosen_in_fof;
    kept.chosen_outside_rule = ev.chosen_outside_rule;
    kept.weight = ev.weight;
    kept.alternatives.reserve(pool.size());
    kept.features.reserve(pool.size() * static_cast<std::size_t>(F));
    if (!ev.fof.empty()) kept.fof.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const std::int32_t a = pool[i];
      if (a == ev.chosen) kept.chosen = static_cast<std::int32_t>(i);
      kept.alternatives.push_back(ev.alternatives[static_cast<std::size_t>(a)]);
      const double* row = ev.row(a, F);
      kept.features.insert(kept.features.end(), row, row + F);
      if (!ev.fof.empty()) kept.fof.push_back(ev.fof[static_cast<std::size_t>(a)]);
    }
    out.events.push_back(std::move(kept));
  }
  return out;
}

void write_choices_jsonl(const std::string& path, const ChoiceData& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write choice data: " + path);
  json header = {{"schema", "netchoice.choices.v1"},
                 {"features", data.feature_names},
                 {"directed", data.directed},
                 {"choice_set", data.choice_set},
                 {"n_events", data.events.size()}};
  out << header.dump() << '\n';
  const std::int32_t F = data.n_features();
  for (const ChoiceEvent& ev : data.events) {
    json rec = {{"event", ev.event},
                {"chooser", ev.chooser},
                {"chosen", ev.chosen},
                {"alternatives", ev.alternatives}};
    json rows = json::array();
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      const double* row = ev.row(a, F);
      rows.push_back(std::vector<double>(row, row + F));
    }
    rec["features"] = std::move(rows);
    if (!ev.fof.empty()) rec["fof"] = ev.fof;
    rec["full_size"] = ev.full_size;
    rec["fof_size"] = ev.full_fof_size;
    rec["deg_sum"] = ev.full_degree_sum;
    if (ev.chosen_in_fof) rec["chosen_in_fof"] = true;
    if (ev.chosen_outside_rule) rec["chosen_outside_rule"] = true;
    if (ev.weight != 1.0) rec["weight"] = ev.weight;
    out << rec.dump() << '\n';
  }
}

ChoiceData read_choices_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open choice data: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty choice data file");

  ChoiceData data;
  std::int64_t line_no = 1;
  try {
    const json header = json::parse(line);
    if (header.value("schema", "") != "netchoice.choices.v1") {
      throw DataError(path + ": not a netchoice choice data file");
    }
    data.feature_names = header.at("features").get<std::vector<std::string>>();
    data.directed = header.value("directed", true);
    data.choice_set = header.value("choice_set", "all");

    const std::int32_t F = data.n_features();
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json rec = json::parse(line);
      ChoiceEvent ev;
      ev.event = rec.at("event").get<EventIndex>();
      ev.chooser = rec.at("chooser").get<NodeId>();
      ev.chosen = rec.at("chosen").get<std::int32_t>();
      ev.alternatives = rec.at("alternatives").get<std::vector<NodeId>>();
      ev.features.reserve(ev.alternatives.size() * static_cast<std::size_t>(F));
      for (const auto& row : rec.at("features")) {
        const auto values = row.get<std::vector<double>>();
        if (values.size() != static_cast<std::size_t>(F)) {
          throw DataError("feature row width mismatch");
        }
        ev.features.insert(ev.features.end(), values.begin(), values.end());
      }
      if (rec.contains("fof")) ev.fof = rec.at("fof").get<std::vector<std::uint8_t>>();
      ev.full_size = rec.value("full_size", std::int64_t{0});
      ev.full_fof_size = rec.value("fof_size", std::int64_t{0});
      ev.full_degree_sum = rec.value("deg_sum", 0.0);
      ev.chosen_in_fof = rec.value("chosen_in_fof", false);
      ev.chosen_outside_rule = rec.value("chosen_outside_rule", false);
      ev.weight = rec.value("weight", 1.0);
      data.events.push_back(std::move(ev));
    }
  } catch (const json::exception& e) {
    throw DataError(path + " line " + std::to_string(line_no) + ": " + e.what());
  }
  data.validate();
  return data;
}

}  // namespace netchoice
