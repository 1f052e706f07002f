#include "netchoice/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace netchoice {

NodeId TemporalGraph::add_node() {
  NodeMeta meta;
  meta.arrival = last_event_ + 1;
  meta_.push_back(std::move(meta));
  out_.emplace_back();
  in_.emplace_back();
  return static_cast<NodeId>(meta_.size() - 1);
}

void TemporalGraph::reserve_nodes(std::int64_t n) {
  meta_.reserve(static_cast<std::size_t>(n));
  out_.reserve(static_cast<std::size_t>(n));
  in_.reserve(static_cast<std::size_t>(n));
}

int TemporalGraph::covariate_index(const std::string& name) const {
  for (std::size_t i = 0; i < covariate_names_.size(); ++i) {
    if (covariate_names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int TemporalGraph::add_covariate(const std::string& name) {
  const int existing = covariate_index(name);
  if (existing >= 0) return existing;
  covariate_names_.push_back(name);
  return static_cast<int>(covariate_names_.size() - 1);
}

void TemporalGraph::set_covariate(NodeId v, int index, double value) {
  check_node(v);
  if (index < 0 || index >= static_cast<int>(covariate_names_.size())) {
    throw std::out_of_range("set_covariate: unknown covariate index");
  }
  auto& covs = meta_[static_cast<std::size_t>(v)].covariates;
  if (covs.size() <= static_cast<std::size_t>(index)) {
    covs.resize(static_cast<std::size_t>(index) + 1, std::numeric_limits<double>::quiet_NaN());
  }
  covs[static_cast<std::size_t>(index)] = value;
}

double TemporalGraph::covariate(NodeId v, int index) const {
  check_node(v);
  const auto& covs = meta_[static_cast<std::size_t>(v)].covariates;
  if (index < 0 || static_cast<std::size_t>(index) >= covs.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return covs[static_cast<std::size_t>(index)];
}

void TemporalGraph::check_node(NodeId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= meta_.size()) {
    throw std::out_of_range("TemporalGraph: node id " + std::to_string(v) + " out of range");
  }
}

bool TemporalGraph::has_arc(NodeId i, NodeId j) const {
  return arc_keys_.count(arc_key(i, j)) > 0;
}

bool TemporalGraph::linked(NodeId i, NodeId j) const {
  if (directed_) return has_arc(i, j);
  return has_arc(i, j) || has_arc(j, i);
}

void TemporalGraph::add_edge(NodeId src, NodeId dst, EventIndex event, double timestamp) {
  check_node(src);
  check_node(dst);
  if (src == dst) {
    throw DataError("add_edge: self-loop rejected at node " + std::to_string(src));
  }
  if (linked(src, dst)) {
    throw DataError("add_edge: duplicate edge (" + std::to_string(src) + "," +
                    std::to_string(dst) + ")");
  }
  if (event <= last_event_) {
    throw DataError("add_edge: non-monotone event index " + std::to_string(event) +
                    " (last was " + std::to_string(last_event_) + ")");
  }
  edges_.push_back(TemporalEdge{src, dst, event, timestamp});
  out_[static_cast<std::size_t>(src)].push_back(Arc{event, dst});
  in_[static_cast<std::size_t>(dst)].push_back(Arc{event, src});
  arc_keys_.insert(arc_key(src, dst));
  last_event_ = event;
  if (!std::isnan(timestamp)) has_timestamps_ = true;
}

std::int64_t TemporalGraph::count_before(const std::vector<Arc>& arcs, EventIndex t) {
  auto it = std::lower_bound(arcs.begin(), arcs.end(), t,
                             [](const Arc& a, EventIndex value) { return a.event < value; });
  return static_cast<std::int64_t>(it - arcs.begin());
}

std::int64_t TemporalGraph::in_degree(NodeId v, EventIndex t) const {
  check_node(v);
  return count_before(in_arcs(v), t);
}

std::int64_t TemporalGraph::out_degree(NodeId v, EventIndex t) const {
  check_node(v);
  return count_before(out_arcs(v), t);
}

std::vector<NodeId> TemporalGraph::out_neighbors(NodeId v, EventIndex t) const {
  check_node(v);
  const auto& arcs = out_arcs(v);
  const std::int64_t k = count_before(arcs, t);
  std::vector<NodeId> result;
  result.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) result.push_back(arcs[static_cast<std::size_t>(i)].node);
  return result;
}

std::vector<NodeId> TemporalGraph::in_neighbors(NodeId v, EventIndex t) const {
  check_node(v);
  const auto& arcs = in_arcs(v);
  const std::int64_t k = count_before(arcs, t);
  std::vector<NodeId> result;
  result.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) result.push_back(arcs[static_cast<std::size_t>(i)].node);
  return result;
}

std::vector<NodeId> TemporalGraph::neighbors(NodeId v, EventIndex t) const {
  std::vector<NodeId> result = out_neighbors(v, t);
  std::vector<NodeId> in = in_neighbors(v, t);
  result.insert(result.end(), in.begin(), in.end());
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::vector<NodeId> TemporalGraph::friends_of_friends(NodeId v, EventIndex t,
                                                      Traversal traversal) const {
  check_node(v);
  const bool dir = traversal == Traversal::Directed;
  std::vector<NodeId> first = dir ? out_neighbors(v, t) : neighbors(v, t);
  std::vector<NodeId> candidates;
  for (NodeId k : first) {
    std::vector<NodeId> second = dir ? out_neighbors(k, t) : neighbors(k, t);
    candidates.insert(candidates.end(), second.begin(), second.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<NodeId> result;
  result.reserve(candidates.size());
  // Nodes already linked from v as of t are not candidates.
  std::unordered_set<NodeId> blocked_set(first.begin(), first.end());
  for (NodeId j : candidates) {
    if (j == v) continue;
    if (blocked_set.count(j)) continue;
    result.push_back(j);
  }
  return result;
}

std::int64_t TemporalGraph::common_neighbors(NodeId i, NodeId j, EventIndex t,
                                             Traversal traversal) const {
  check_node(i);
  check_node(j);
  const bool dir = traversal == Traversal::Directed;
  std::vector<NodeId> from_i = dir ? out_neighbors(i, t) : neighbors(i, t);
  std::vector<NodeId> to_j = dir ? in_neighbors(j, t) : neighbors(j, t);
  std::unordered_set<NodeId> set_i(from_i.begin(), from_i.end());
  std::int64_t count = 0;
  // to_j may repeat a node only in the directed case (one in-arc per source),
  // and neighbors() deduplicates, so plain counting is exact.
  for (NodeId k : to_j) {
    if (set_i.count(k)) ++count;
  }
  return count;
}

std::vector<int> TemporalGraph::hop_distances(NodeId src, EventIndex t, int cap,
                                              Traversal traversal) const {
  check_node(src);
  if (cap < 1) throw ConfigError("hop_distances: cap must be >= 1");
  const bool dir = traversal == Traversal::Directed;
  std::vector<int> dist(meta_.size(), -1);
  dist[static_cast<std::size_t>(src)] = 0;
  std::deque<NodeId> frontier{src};
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    const int du = dist[static_cast<std::size_t>(u)];
    if (du >= cap) continue;
    auto visit = [&](const std::vector<Arc>& arcs) {
      const std::int64_t k = count_before(arcs, t);
      for (std::int64_t a = 0; a < k; ++a) {
        const NodeId w = arcs[static_cast<std::size_t>(a)].node;
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = du + 1;
          frontier.push_back(w);
        }
      }
    };
    visit(out_arcs(u));
    if (!dir) visit(in_arcs(u));
  }
  return dist;
}

std::optional<int> TemporalGraph::hop_distance(NodeId i, NodeId j, EventIndex t, int cap,
                                               Traversal traversal) const {
  check_node(i);
  check_node(j);
  if (cap < 1) throw ConfigError("hop_distance: cap must be >= 1");
  if (i == j) return 0;
  std::vector<int> dist = hop_distances(i, t, cap, traversal);
  const int d = dist[static_cast<std::size_t>(j)];
  if (d < 0) return std::nullopt;
  return d;
}

}  // namespace netchoice
