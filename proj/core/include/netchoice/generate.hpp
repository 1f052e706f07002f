#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netchoice/graph.hpp"
#include "netchoice/rng.hpp"

namespace netchoice {

enum class GrowthModel {
  Uniform,
  Pa,               // degree^alpha attachment
  NonparametricPa,  // exp(theta[degree]) attachment
  Fitness,          // exp(fitness_j), fitness ~ Exponential(1) at creation
  Copy,             // uniform w.p. p, linear PA w.p. 1-p
  LocalSearch,      // uniform over all w.p. r, uniform over FoFs w.p. 1-r
  Rp,               // {all, FoF} choice set w.p. {r, 1-r} x {uniform, PA} w.p. {p, 1-p}
  Homophily,        // exp(h) bonus for same-group targets
  Latent            // exp(-beta * distance) over positions in the unit square
};

GrowthModel growth_model_from_string(const std::string& name);
std::string to_string(GrowthModel model);

struct GrowthConfig {
  GrowthModel model = GrowthModel::Uniform;
  std::int32_t n = 0;  // target node count, must be >= m+1
  std::int32_t m = 1;  // edges per arriving node
  bool directed = true;
  std::uint64_t seed = 0;
  double alpha = 1.0;                     // Pa
  double p = 1.0;                         // Copy / Rp: probability of the uniform utility
  double r = 1.0;                         // LocalSearch / Rp: probability of the full choice set
  double homophily = 1.0;                 // Homophily: same-group utility
  int groups = 2;                         // Homophily: number of equiprobable groups
  double beta = 1.0;                      // Latent: distance coefficient
  std::vector<double> degree_utilities;   // NonparametricPa: theta_k, clamped at the back

  void validate() const;
};

struct GrowthResult {
  TemporalGraph graph;
  // FoF modes with an empty FoF set revert to a uniform draw over all
  // eligible nodes; degree-style modes with all-zero weights do the same.
  std::int64_t empty_fof_fallbacks = 0;
  std::int64_t zero_weight_fallbacks = 0;

  GrowthResult() : graph(true) {}
};

// Grows a graph node by node: the first m nodes are seeded without edges,
// then each arriving node draws m distinct targets from the model's choice
// distribution. Degrees and adjacency update after every edge, and mixture
// modes are re-sampled per edge. The seed fully determines the output.
GrowthResult generate(const GrowthConfig& config);

// Draws an index with probability weights[i] / sum(weights). All-zero (or
// all-negative-zero) weights fall back to a uniform draw over all indices.
std::size_t sample_weighted(std::span<const double> weights, Rng& rng);

}  // namespace netchoice
