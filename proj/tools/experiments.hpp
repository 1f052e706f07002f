#pragma once

#include <cstdint>
#include <string>

namespace netchoice::experiments {

struct ExperimentConfig {
  std::string out_dir = ".";
  double scale = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Likelihood surface of the two-mode degree/uniform mixture on copy-model
// data, with the EM path across it. Emits surface.csv, em_path.csv,
// manifest.json.
void run_surface(const ExperimentConfig& config);

// Attachment-kernel comparison on a pure preferential attachment graph:
// exposure-ratio estimator vs the per-degree logit, plus the parametric MLE
// and the least-squares summary. Emits kernel.csv, degree_coefficients.csv,
// manifest.json.
void run_kernel(const ExperimentConfig& config);

// Power-law exponent estimates over an (r, p) lattice of growth models.
// Emits gamma.csv, manifest.json.
void run_gamma_grid(const ExperimentConfig& config);

// Profile likelihoods of the copy and local-search models on data generated
// from each, with likelihood-ratio comparisons. Emits curves.csv,
// summary.json.
void run_model_compare(const ExperimentConfig& config);

// Per-degree choice propensities with the parametric reference line. Emits
// degree_curve.csv, manifest.json.
void run_degree_curve(const ExperimentConfig& config);

void run(const std::string& name, const ExperimentConfig& config);

}  // namespace netchoice::experiments
