#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netchoice/features.hpp"
#include "netchoice/graph.hpp"
#include "netchoice/rng.hpp"

namespace netchoice {

// One edge-formation decision. `features` is a row-major
// |alternatives| x |feature columns| matrix computed strictly before the
// event; alternatives are sorted by node id and always contain the chosen
// node. The full_* aggregates describe the complete eligible set at the
// event, so models whose per-alternative weight is constant or equal to the
// degree can be evaluated exactly even after negative sampling.
struct ChoiceEvent {
  EventIndex event = 0;
  NodeId chooser = -1;
  std::int32_t chosen = 0;  // position in `alternatives`
  std::vector<NodeId> alternatives;
  std::vector<double> features;
  std::vector<std::uint8_t> fof;  // per-alternative FoF membership; may be empty

  std::int64_t full_size = 0;      // |eligible set|
  std::int64_t full_fof_size = 0;  // |FoF subset of the eligible set|
  double full_degree_sum = 0.0;    // sum of attachment degrees over the eligible set
  bool chosen_in_fof = false;
  bool chosen_outside_rule = false;  // chosen fell outside the configured choice set
  double weight = 1.0;

  std::int32_t n_alternatives() const { return static_cast<std::int32_t>(alternatives.size()); }
  const double* row(std::int32_t alt, std::int32_t n_features) const {
    return features.data() + static_cast<std::size_t>(alt) * n_features;
  }
};

struct ChoiceData {
  std::vector<std::string> feature_names;
  bool directed = true;
  std::string choice_set = "all";  // "all" or "fof"
  std::vector<ChoiceEvent> events;

  std::int32_t n_features() const { return static_cast<std::int32_t>(feature_names.size()); }
  // Index of a named column, -1 when absent.
  int column(const std::string& name) const;
  int require_column(const std::string& name) const;  // throws ConfigError
  void validate() const;  // invariants: chosen in range, finite features, ...
};

enum class ChoiceSetRule { AllNodes, FofOnly };
enum class NewChooserFilter { Keep, DropFirstEvent, DropFirstDay };

struct ExtractOptions {
  ChoiceSetRule choice_set = ChoiceSetRule::AllNodes;
  std::optional<Traversal> traversal;  // defaults to the graph's natural traversal
  int hop_cap = 6;

  // Alternatives with attachment degree below this are dropped (the chosen
  // node is always kept and the event flagged if it violates the rule).
  std::int64_t min_degree = 0;

  // Keep the chosen node plus at most this many sampled non-chosen
  // alternatives; negative keeps the full set.
  std::int64_t negative_samples = -1;

  bool with_fof_flags = true;

  // Ingestion-style filters. The date window and the keep/stop rule apply in
  // event order: scan, keep with probability keep_prob, stop at max_events.
  NewChooserFilter new_choosers = NewChooserFilter::Keep;
  double window_start = -std::numeric_limits<double>::infinity();
  double window_end = std::numeric_limits<double>::infinity();
  double keep_prob = 1.0;
  std::int64_t max_events = -1;

  std::uint64_t seed = 0;
};

struct ExtractDiagnostics {
  std::int64_t edges_seen = 0;
  std::int64_t events_kept = 0;
  std::int64_t skipped_window = 0;
  std::int64_t skipped_new_chooser = 0;
  std::int64_t skipped_coin = 0;
  std::int64_t skipped_after_stop = 0;
  std::int64_t dropped_empty_choice_set = 0;
  std::int64_t flagged_chosen_outside_rule = 0;
};

struct ExtractResult {
  ChoiceData data;
  ExtractDiagnostics diagnostics;
};

// Recasts the graph's edge sequence as choice data: one event per retained
// edge, alternatives drawn from all eligible nodes (or the chooser's
// friends-of-friends), features computed on the prefix graph strictly before
// the edge. Replays the edge sequence on a scratch graph so every query is
// time-correct by construction.
ExtractResult extract_choices(const TemporalGraph& graph, const FeatureSpec& spec,
                              const ExtractOptions& options = {});

// Keeps each event's chosen alternative plus min(s, available) distinct
// non-chosen alternatives sampled uniformly without replacement. Events with
// at most s non-chosen alternatives are returned unchanged.
ChoiceData negative_sample(const ChoiceData& data, std::int64_t s, Rng& rng);

// JSON-lines round trip. The first line is a header record with the schema
// name, feature names and flags; each following line is one event.
void write_choices_jsonl(const std::string& path, const ChoiceData& data);
ChoiceData read_choices_jsonl(const std::string& path);

}  // namespace netchoice
