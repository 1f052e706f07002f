// Independent reference implementations used to freeze expected values.
// Everything here recomputes results by direct definition (exhaustive loops,
// plain exponent sums, finite differences) and must stay independent of the
// library code paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "netchoice/clogit.hpp"
#include "netchoice/graph.hpp"

namespace oracles {

using netchoice::ChoiceData;
using netchoice::ChoiceEvent;
using netchoice::Design;
using netchoice::EventIndex;
using netchoice::NodeId;
using netchoice::TemporalEdge;

struct EdgeTriple {
  NodeId src, dst;
  EventIndex t;
};

// Degree recount from the raw edge list, no graph structure involved.
inline std::map<NodeId, std::int64_t> recount_in_degrees(const std::vector<EdgeTriple>& edges,
                                                         EventIndex before) {
  std::map<NodeId, std::int64_t> result;
  for (const auto& e : edges) {
    if (e.t < before) ++result[e.dst];
  }
  return result;
}

inline std::map<NodeId, std::int64_t> recount_out_degrees(const std::vector<EdgeTriple>& edges,
                                                          EventIndex before) {
  std::map<NodeId, std::int64_t> result;
  for (const auto& e : edges) {
    if (e.t < before) ++result[e.src];
  }
  return result;
}

// O(n^3)-style friends-of-friends by double loop over edge pairs.
inline std::set<NodeId> brute_fof(const std::vector<EdgeTriple>& edges, NodeId i, EventIndex t,
                                  bool undirected) {
  auto adjacent = [&](NodeId a, NodeId b) {
    for (const auto& e : edges) {
      if (e.t >= t) continue;
      if (e.src == a && e.dst == b) return true;
      if (undirected && e.src == b && e.dst == a) return true;
    }
    return false;
  };
  std::set<NodeId> nodes;
  for (const auto& e : edges) {
    nodes.insert(e.src);
    nodes.insert(e.dst);
  }
  std::set<NodeId> result;
  for (NodeId k : nodes) {
    if (!adjacent(i, k)) continue;
    for (NodeId j : nodes) {
      if (j == i || adjacent(i, j)) continue;
      if (adjacent(k, j)) result.insert(j);
    }
  }
  return result;
}

// Exhaustive intermediate-node scan.
inline std::int64_t brute_common_neighbors(const std::vector<EdgeTriple>& edges, NodeId i,
                                           NodeId j, EventIndex t, bool undirected,
                                           NodeId n_nodes) {
  auto adjacent = [&](NodeId a, NodeId b) {
    for (const auto& e : edges) {
      if (e.t >= t) continue;
      if (e.src == a && e.dst == b) return true;
      if (undirected && e.src == b && e.dst == a) return true;
    }
    return false;
  };
  std::int64_t count = 0;
  for (NodeId k = 0; k < n_nodes; ++k) {
    if (adjacent(i, k) && adjacent(k, j)) ++count;
  }
  return count;
}

// All-pairs shortest paths; -1 means unreachable.
inline std::vector<std::vector<int>> floyd_warshall(const std::vector<EdgeTriple>& edges,
                                                    NodeId n_nodes, EventIndex t,
                                                    bool undirected) {
  const int inf = 1 << 20;
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(n_nodes),
                                     std::vector<int>(static_cast<std::size_t>(n_nodes), inf));
  for (NodeId v = 0; v < n_nodes; ++v) dist[v][v] = 0;
  for (const auto& e : edges) {
    if (e.t >= t) continue;
    dist[e.src][e.dst] = 1;
    if (undirected) dist[e.dst][e.src] = 1;
  }
  for (NodeId k = 0; k < n_nodes; ++k) {
    for (NodeId i = 0; i < n_nodes; ++i) {
      for (NodeId j = 0; j < n_nodes; ++j) {
        dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
      }
    }
  }
  for (auto& row : dist) {
    for (auto& d : row) {
      if (d >= inf) d = -1;
    }
  }
  return dist;
}

// Direct evaluation of the softmax likelihood by plain exponent sums in long
// double, matching the design's column/level/support semantics but none of
// its evaluation machinery.
inline long double naive_event_loglik(const Design& design, const Eigen::VectorXd& theta,
                                      const ChoiceEvent& ev) {
  const int F = design.data->n_features();
  const int d = design.n_dense();
  long double z = 0.0L;
  long double chosen_exp = -1.0L;
  for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
    if (!design.in_support(ev, a)) {
      if (a == ev.chosen) return -std::numeric_limits<long double>::infinity();
      continue;
    }
    const double* row = ev.row(a, F);
    long double u = 0.0L;
    for (int c = 0; c < d; ++c) {
      u += static_cast<long double>(theta[c]) * row[design.dense_cols[c]];
    }
    if (design.level_col >= 0) u += theta[d + design.level_of(ev, a)];
    const long double e = std::exp(u);
    z += e;
    if (a == ev.chosen) chosen_exp = e;
  }
  if (chosen_exp < 0.0L) return -std::numeric_limits<long double>::infinity();
  return std::log(chosen_exp / z);
}

inline long double naive_loglik(const Design& design, const Eigen::VectorXd& theta,
                                const double* weights = nullptr) {
  long double total = 0.0L;
  const auto& events = design.data->events;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const double w = events[k].weight * (weights ? weights[k] : 1.0);
    total += w * naive_event_loglik(design, theta, events[k]);
  }
  return total;
}

// Direct evaluation of the analytic gradient by plain exponent sums in long
// double (dense designs only).
inline Eigen::VectorXd naive_gradient(const Design& design, const Eigen::VectorXd& theta) {
  const int F = design.data->n_features();
  const int d = design.n_dense();
  std::vector<long double> grad(static_cast<std::size_t>(d), 0.0L);
  for (const ChoiceEvent& ev : design.data->events) {
    long double z = 0.0L;
    std::vector<long double> weights(static_cast<std::size_t>(ev.n_alternatives()), 0.0L);
    bool chosen_supported = false;
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      if (!design.in_support(ev, a)) continue;
      const double* row = ev.row(a, F);
      long double u = 0.0L;
      for (int c = 0; c < d; ++c) {
        u += static_cast<long double>(theta[c]) * row[design.dense_cols[c]];
      }
      weights[static_cast<std::size_t>(a)] = std::exp(u);
      z += weights[static_cast<std::size_t>(a)];
      if (a == ev.chosen) chosen_supported = true;
    }
    if (!chosen_supported) continue;
    const double* chosen_row = ev.row(ev.chosen, F);
    for (int c = 0; c < d; ++c) {
      long double expected = 0.0L;
      for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
        expected += weights[static_cast<std::size_t>(a)] / z *
                    ev.row(a, F)[design.dense_cols[c]];
      }
      grad[static_cast<std::size_t>(c)] +=
          static_cast<long double>(ev.weight) * (chosen_row[design.dense_cols[c]] - expected);
    }
  }
  Eigen::VectorXd result(d);
  for (int c = 0; c < d; ++c) result[c] = static_cast<double>(grad[static_cast<std::size_t>(c)]);
  return result;
}

// Central finite differences of a scalar function of theta.
template <class Fn>
Eigen::VectorXd finite_difference_gradient(Fn&& fn, const Eigen::VectorXd& theta,
                                           double h = 1e-5) {
  Eigen::VectorXd grad(theta.size());
  Eigen::VectorXd probe = theta;
  for (int i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = fn(probe);
    probe[i] = theta[i] - h;
    const double down = fn(probe);
    probe[i] = theta[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

template <class GradFn>
Eigen::MatrixXd finite_difference_jacobian(GradFn&& grad_fn, const Eigen::VectorXd& theta,
                                           double h = 1e-5) {
  const Eigen::VectorXd g0 = grad_fn(theta);
  Eigen::MatrixXd jac(g0.size(), theta.size());
  Eigen::VectorXd probe = theta;
  for (int i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const Eigen::VectorXd up = grad_fn(probe);
    probe[i] = theta[i] - h;
    const Eigen::VectorXd down = grad_fn(probe);
    probe[i] = theta[i];
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

// Synthetic choice data with standard normal features and choices sampled
// from the true conditional logit at theta_true; used for recovery and
// calibration tests.
inline ChoiceData synthetic_choice_data(int n_events, int n_alternatives,
                                        const Eigen::VectorXd& theta_true, std::uint64_t seed,
                                        double weight = 1.0) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int F = static_cast<int>(theta_true.size());

  ChoiceData data;
  for (int f = 0; f < F; ++f) data.feature_names.push_back("x" + std::to_string(f));
  for (int k = 0; k < n_events; ++k) {
    ChoiceEvent ev;
    ev.event = k;
    ev.chooser = 100000 + k;
    ev.weight = weight;
    ev.features.resize(static_cast<std::size_t>(n_alternatives) * F);
    std::vector<double> utilities(static_cast<std::size_t>(n_alternatives), 0.0);
    for (int a = 0; a < n_alternatives; ++a) {
      ev.alternatives.push_back(a);
      for (int f = 0; f < F; ++f) {
        const double x = normal(engine);
        ev.features[static_cast<std::size_t>(a) * F + f] = x;
        utilities[static_cast<std::size_t>(a)] += theta_true[f] * x;
      }
    }
    double z = 0.0;
    for (double u : utilities) z += std::exp(u);
    double draw = unif(engine) * z;
    int chosen = n_alternatives - 1;
    for (int a = 0; a < n_alternatives; ++a) {
      draw -= std::exp(utilities[static_cast<std::size_t>(a)]);
      if (draw < 0.0) {
        chosen = a;
        break;
      }
    }
    ev.chosen = chosen;
    ev.full_size = n_alternatives;
    data.events.push_back(std::move(ev));
  }
  return data;
}

}  // namespace oracles
