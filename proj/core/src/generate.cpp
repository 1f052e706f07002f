#include "netchoice/generate.hpp"

#include <algorithm>
#include <cmath>

namespace netchoice {

GrowthModel growth_model_from_string(const std::string& name) {
  if (name == "uniform") return GrowthModel::Uniform;
  if (name == "pa") return GrowthModel::Pa;
  if (name == "npa") return GrowthModel::NonparametricPa;
  if (name == "fitness") return GrowthModel::Fitness;
  if (name == "copy") return GrowthModel::Copy;
  if (name == "local-search") return GrowthModel::LocalSearch;
  if (name == "rp") return GrowthModel::Rp;
  if (name == "homophily") return GrowthModel::Homophily;
  if (name == "latent") return GrowthModel::Latent;
  throw ConfigError("unknown growth model: " + name);
}

std::string to_string(GrowthModel model) {
  switch (model) {
    case GrowthModel::Uniform: return "uniform";
    case GrowthModel::Pa: return "pa";
    case GrowthModel::NonparametricPa: return "npa";
    case GrowthModel::Fitness: return "fitness";
    case GrowthModel::Copy: return "copy";
    case GrowthModel::LocalSearch: return "local-search";
    case GrowthModel::Rp: return "rp";
    case GrowthModel::Homophily: return "homophily";
    case GrowthModel::Latent: return "latent";
  }
  return "?";
}

void GrowthConfig::validate() const {
  if (m < 1) throw ConfigError("generate: m must be >= 1");
  if (n < m + 1) throw ConfigError("generate: need n >= m+1 so the first arrival has m targets");
  auto check_unit = [](double value, const char* what) {
    if (!(value > 0.0 && value <= 1.0)) {
      throw ConfigError(std::string("generate: ") + what + " must be in (0, 1]");
    }
  };
  if (model == GrowthModel::Copy || model == GrowthModel::Rp) check_unit(p, "p");
  if (model == GrowthModel::LocalSearch || model == GrowthModel::Rp) check_unit(r, "r");
  if (model == GrowthModel::NonparametricPa && degree_utilities.empty()) {
    throw ConfigError("generate: npa requires a degree utility table");
  }
  if (model == GrowthModel::Homophily && groups < 1) {
    throw ConfigError("generate: homophily needs at least one group");
  }
  if (!std::isfinite(alpha)) throw ConfigError("generate: alpha must be finite");
}

std::size_t sample_weighted(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw ConfigError("sample_weighted: empty weight vector");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw ConfigError("sample_weighted: weights must be finite and >= 0");
    total += w;
  }
  if (total <= 0.0) {
    return static_cast<std::size_t>(rng.next_index(static_cast<std::int64_t>(weights.size())));
  }
  const double u = rng.next_double() * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cum += weights[i];
    last_positive = i;
    if (u < cum) return i;
  }
  return last_positive;  // guards against rounding at the end of the scan
}

namespace {

enum class UtilityKind { Uniform, Pa, NonparametricPa, Fitness, Homophily, Latent };

struct Mode {
  bool fof_set = false;
  UtilityKind utility = UtilityKind::Uniform;
  double prob = 1.0;
};

// Mode order is fixed so that nested models consume the mode stream the same
// way: rp(r=1,p) reproduces copy(p) and rp(r,p=1) reproduces local-search(r)
// edge for edge under a shared seed.
std::vector<Mode> build_modes(const GrowthConfig& config) {
  switch (config.model) {
    case GrowthModel::Uniform: return {{false, UtilityKind::Uniform, 1.0}};
    case GrowthModel::Pa: return {{false, UtilityKind::Pa, 1.0}};
    case GrowthModel::NonparametricPa: return {{false, UtilityKind::NonparametricPa, 1.0}};
    case GrowthModel::Fitness: return {{false, UtilityKind::Fitness, 1.0}};
    case GrowthModel::Homophily: return {{false, UtilityKind::Homophily, 1.0}};
    case GrowthModel::Latent: return {{false, UtilityKind::Latent, 1.0}};
    case GrowthModel::Copy:
      return {{false, UtilityKind::Uniform, config.p}, {false, UtilityKind::Pa, 1.0 - config.p}};
    case GrowthModel::LocalSearch:
      return {{false, UtilityKind::Uniform, config.r}, {true, UtilityKind::Uniform, 1.0 - config.r}};
    case GrowthModel::Rp:
      return {{false, UtilityKind::Uniform, config.r * config.p},
              {false, UtilityKind::Pa, config.r * (1.0 - config.p)},
              {true, UtilityKind::Uniform, (1.0 - config.r) * config.p},
              {true, UtilityKind::Pa, (1.0 - config.r) * (1.0 - config.p)}};
  }
  throw ConfigError("generate: unhandled model");
}

std::size_t pick_mode(const std::vector<Mode>& modes, Rng& mode_rng) {
  const double u = mode_rng.next_double();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    if (modes[m].prob <= 0.0) continue;
    cum += modes[m].prob;
    last_positive = m;
    if (u < cum) return m;
  }
  return last_positive;
}

}  // namespace

GrowthResult generate(const GrowthConfig& config) {
  config.validate();

  GrowthResult result;
  result.graph = TemporalGraph(config.directed);
  TemporalGraph& g = result.graph;
  g.reserve_nodes(config.n);

  // Independent substreams: the mode draws must not shift the target draws,
  // so that constrained and unconstrained variants of the same process stay
  // aligned under a shared seed; metadata draws get their own stream too.
  Rng mode_rng(splitmix64(config.seed + 1));
  Rng target_rng(splitmix64(config.seed + 2));
  Rng meta_rng(splitmix64(config.seed + 3));

  const std::vector<Mode> modes = build_modes(config);
  const bool single_mode = modes.size() == 1;

  int pos_x = -1, pos_y = -1;
  if (config.model == GrowthModel::Latent) {
    pos_x = g.add_covariate("pos0");
    pos_y = g.add_covariate("pos1");
  }
  const double alpha = config.model == GrowthModel::Pa ? config.alpha : 1.0;

  auto spawn_node = [&]() {
    const NodeId v = g.add_node();
    switch (config.model) {
      case GrowthModel::Fitness:
        g.meta(v).fitness = meta_rng.exponential(1.0);
        break;
      case GrowthModel::Homophily:
        g.meta(v).group = static_cast<int>(meta_rng.next_index(config.groups));
        break;
      case GrowthModel::Latent:
        g.set_covariate(v, pos_x, meta_rng.next_double());
        g.set_covariate(v, pos_y, meta_rng.next_double());
        break;
      default:
        break;
    }
    return v;
  };

  auto weight_of = [&](UtilityKind kind, NodeId chooser, NodeId candidate) -> double {
    switch (kind) {
      case UtilityKind::Uniform:
        return 1.0;
      case UtilityKind::Pa: {
        const auto d = g.attachment_degree(candidate);
        if (alpha == 0.0) return 1.0;
        if (d == 0) return 0.0;
        if (alpha == 1.0) return static_cast<double>(d);
        return std::pow(static_cast<double>(d), alpha);
      }
      case UtilityKind::NonparametricPa: {
        const auto d = static_cast<std::size_t>(g.attachment_degree(candidate));
        const auto& table = config.degree_utilities;
        return std::exp(table[std::min(d, table.size() - 1)]);
      }
      case UtilityKind::Fitness:
        return std::exp(g.meta(candidate).fitness);
      case UtilityKind::Homophily:
        return g.meta(chooser).group == g.meta(candidate).group ? std::exp(config.homophily) : 1.0;
      case UtilityKind::Latent: {
        const double dx = g.covariate(chooser, pos_x) - g.covariate(candidate, pos_x);
        const double dy = g.covariate(chooser, pos_y) - g.covariate(candidate, pos_y);
        return std::exp(-config.beta * std::hypot(dx, dy));
      }
    }
    return 1.0;
  };

  // Seed nodes: the first m nodes exist before any edge so the first arrival
  // can pick m distinct targets. They carry no edges; degree-based utilities
  // start from the all-zero-weight fallback.
  for (std::int32_t v = 0; v < config.m; ++v) spawn_node();

  std::vector<NodeId> candidates;
  std::vector<double> weights;
  std::vector<NodeId> picked;  // targets chosen by the current arrival
  EventIndex event = 0;

  for (std::int32_t u = config.m; u < config.n; ++u) {
    const NodeId chooser = spawn_node();
    picked.clear();
    for (std::int32_t e = 0; e < config.m; ++e) {
      const Mode& mode = modes[single_mode ? 0 : pick_mode(modes, mode_rng)];

      candidates.clear();
      bool reverted_to_uniform = false;
      if (mode.fof_set) {
        const auto fof = g.friends_of_friends(chooser, g.end_time());
        candidates.assign(fof.begin(), fof.end());
        if (candidates.empty()) {
          ++result.empty_fof_fallbacks;
          reverted_to_uniform = true;
        }
      }
      if (candidates.empty()) {
        // The chooser is the newest node, so the only nodes linked to it are
        // the targets it picked earlier in this arrival.
        for (NodeId v = 0; v < chooser; ++v) {
          if (std::find(picked.begin(), picked.end(), v) == picked.end()) {
            candidates.push_back(v);
          }
        }
      }
      if (candidates.empty()) {
        throw ConfigError("generate: no eligible targets for node " + std::to_string(chooser));
      }

      double total = 0.0;
      weights.resize(candidates.size());
      const UtilityKind utility = reverted_to_uniform ? UtilityKind::Uniform : mode.utility;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        weights[c] = weight_of(utility, chooser, candidates[c]);
        total += weights[c];
      }
      std::size_t pick;
      if (total <= 0.0) {
        ++result.zero_weight_fallbacks;
        pick = static_cast<std::size_t>(
            target_rng.next_index(static_cast<std::int64_t>(candidates.size())));
      } else {
        const double draw = target_rng.next_double() * total;
        double cum = 0.0;
        pick = 0;
        std::size_t last_positive = 0;
        bool found = false;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          if (weights[c] <= 0.0) continue;
          cum += weights[c];
          last_positive = c;
          if (draw < cum) {
            pick = c;
            found = true;
            break;
          }
        }
        if (!found) pick = last_positive;
      }
      picked.push_back(candidates[pick]);
      g.add_edge(chooser, candidates[pick], event++);
    }
  }
  return result;
}

}  // namespace netchoice
