#pragma once

#include <string>
#include <vector>

#include "netchoice/clogit.hpp"
#include "netchoice/mixture.hpp"
#include "netchoice/stats.hpp"

namespace netchoice {

// FNV-1a hash of a canonical config string, hex-encoded; embedded in every
// output artifact so reruns are verifiable.
std::string config_hash(const std::string& canonical);

// Fit reports as JSON text. The `context` string is echoed verbatim under
// "config" (callers pass their canonical config JSON).
std::string fit_report_json(const LogitFit& fit, const std::string& context);
std::string nonparametric_report_json(const NonparametricPaFit& fit, const std::string& context);
std::string em_report_json(const EmResult& result, const std::vector<std::string>& mode_names,
                           const std::string& context);
std::string lr_report_json(const LRTestResult& result, const std::string& context);

// CSV emitters for plot-ready data.
void write_coefficient_csv(const std::string& path, const LogitFit& fit);
void write_degree_coefficient_csv(const std::string& path, const NonparametricPaFit& fit);
void write_kernel_csv(const std::string& path, const std::vector<KernelEstimate>& estimates);
void write_surface_csv(const std::string& path, const SurfaceResult& surface);
void write_profile_csv(const std::string& path, const std::string& model,
                       const ProfileFit& profile);
void write_em_path_csv(const std::string& path, const EmResult& result);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace netchoice
