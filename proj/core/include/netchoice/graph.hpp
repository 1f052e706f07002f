#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "netchoice/errors.hpp"

namespace netchoice {

using NodeId = std::int32_t;
using EventIndex = std::int64_t;

enum class Traversal { Directed, Undirected };

struct TemporalEdge {
  NodeId src = -1;
  NodeId dst = -1;
  EventIndex event = 0;
  double timestamp = std::numeric_limits<double>::quiet_NaN();  // NaN when absent
};

struct NodeMeta {
  EventIndex arrival = 0;  // node exists for all events t >= arrival
  int group = -1;          // categorical label, -1 when absent
  double fitness = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> covariates;  // aligned with TemporalGraph::covariate_names()
};

// Append-only directed simple graph with per-edge event indices and
// time-correct structural queries. "As of t" is strict: an edge formed at
// event t is invisible to queries at t.
//
// Undirected graphs are stored with the same directed arcs (the source is the
// node that initiated the edge); the flag switches degree accounting, the
// duplicate rule, and the default traversal to the symmetric reading.
class TemporalGraph {
 public:
  explicit TemporalGraph(bool directed = true) : directed_(directed) {}

  // Node ids are dense integers assigned in creation order. By default a new
  // node's arrival is the next event index, i.e. it exists from the first
  // event recorded after its creation.
  NodeId add_node();
  void reserve_nodes(std::int64_t n);

  NodeMeta& meta(NodeId v) { return meta_.at(static_cast<std::size_t>(v)); }
  const NodeMeta& meta(NodeId v) const { return meta_.at(static_cast<std::size_t>(v)); }

  int covariate_index(const std::string& name) const;
  int add_covariate(const std::string& name);  // idempotent, returns index
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  void set_covariate(NodeId v, int index, double value);
  double covariate(NodeId v, int index) const;  // NaN when unset

  // Appends the edge (src, dst) at event index `event`. Rejects self-loops,
  // duplicate edges (symmetric duplicates in undirected mode) and
  // non-monotone event indices.
  void add_edge(NodeId src, NodeId dst, EventIndex event,
                double timestamp = std::numeric_limits<double>::quiet_NaN());

  bool directed() const { return directed_; }
  Traversal default_traversal() const {
    return directed_ ? Traversal::Directed : Traversal::Undirected;
  }
  NodeId num_nodes() const { return static_cast<NodeId>(meta_.size()); }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }
  std::span<const TemporalEdge> edges() const { return edges_; }
  EventIndex last_event() const { return last_event_; }
  // Convenience value of t that makes every recorded edge visible.
  EventIndex end_time() const { return last_event_ + 1; }
  bool has_timestamps() const { return has_timestamps_; }

  // Current-state arc test in the stored direction, O(1).
  bool has_arc(NodeId i, NodeId j) const;
  // True when an edge blocks (i, j) from forming: i->j for directed graphs,
  // either direction for undirected ones.
  bool linked(NodeId i, NodeId j) const;

  // Degrees as of event t (strictly before t).
  std::int64_t in_degree(NodeId v, EventIndex t) const;
  std::int64_t out_degree(NodeId v, EventIndex t) const;
  std::int64_t total_degree(NodeId v, EventIndex t) const {
    return in_degree(v, t) + out_degree(v, t);
  }
  // Degree used by attachment models: in-degree for directed graphs, total
  // degree for undirected ones.
  std::int64_t attachment_degree(NodeId v, EventIndex t) const {
    return directed_ ? in_degree(v, t) : total_degree(v, t);
  }

  // Current-state degrees, O(1).
  std::int64_t in_degree(NodeId v) const { return static_cast<std::int64_t>(in_arcs(v).size()); }
  std::int64_t out_degree(NodeId v) const { return static_cast<std::int64_t>(out_arcs(v).size()); }
  std::int64_t total_degree(NodeId v) const { return in_degree(v) + out_degree(v); }
  std::int64_t attachment_degree(NodeId v) const {
    return directed_ ? in_degree(v) : total_degree(v);
  }

  std::vector<NodeId> out_neighbors(NodeId v, EventIndex t) const;
  std::vector<NodeId> in_neighbors(NodeId v, EventIndex t) const;
  // Union of in- and out-neighbors, deduplicated and sorted.
  std::vector<NodeId> neighbors(NodeId v, EventIndex t) const;

  // Nodes two steps from v as of t, excluding v and nodes already linked from
  // v. Directed traversal follows arc direction twice; undirected uses the
  // symmetric neighborhoods. Sorted.
  std::vector<NodeId> friends_of_friends(NodeId v, EventIndex t, Traversal traversal) const;
  std::vector<NodeId> friends_of_friends(NodeId v, EventIndex t) const {
    return friends_of_friends(v, t, default_traversal());
  }

  // Number of intermediates k with arcs i->k and k->j as of t (symmetric
  // neighborhoods under undirected traversal).
  std::int64_t common_neighbors(NodeId i, NodeId j, EventIndex t, Traversal traversal) const;
  std::int64_t common_neighbors(NodeId i, NodeId j, EventIndex t) const {
    return common_neighbors(i, j, t, default_traversal());
  }

  // BFS shortest-path length as of t, truncated at cap (cap >= 1). nullopt
  // means unreachable within the cap.
  std::optional<int> hop_distance(NodeId i, NodeId j, EventIndex t, int cap,
                                  Traversal traversal) const;
  std::optional<int> hop_distance(NodeId i, NodeId j, EventIndex t, int cap) const {
    return hop_distance(i, j, t, cap, default_traversal());
  }

  // Single-source truncated BFS; returns distances to every node (-1 beyond
  // cap or unreachable). One call serves all alternatives of a choice event.
  std::vector<int> hop_distances(NodeId src, EventIndex t, int cap, Traversal traversal) const;

 private:
  struct Arc {
    EventIndex event;
    NodeId node;
  };

  static std::uint64_t arc_key(NodeId i, NodeId j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
  }
  const std::vector<Arc>& out_arcs(NodeId v) const { return out_.at(static_cast<std::size_t>(v)); }
  const std::vector<Arc>& in_arcs(NodeId v) const { return in_.at(static_cast<std::size_t>(v)); }
  static std::int64_t count_before(const std::vector<Arc>& arcs, EventIndex t);
  void check_node(NodeId v) const;

  bool directed_;
  bool has_timestamps_ = false;
  std::vector<std::vector<Arc>> out_, in_;
  std::vector<NodeMeta> meta_;
  std::vector<TemporalEdge> edges_;
  std::vector<std::string> covariate_names_;
  std::unordered_set<std::uint64_t> arc_keys_;
  EventIndex last_event_ = -1;
};

}  // namespace netchoice
