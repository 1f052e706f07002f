#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "netchoice/choices.hpp"
#include "netchoice/generate.hpp"
#include "netchoice/mixture.hpp"
#include "netchoice/report.hpp"
#include "netchoice/stats.hpp"

namespace netchoice::experiments {

using json = nlohmann::json;

namespace {

std::int32_t scaled(double base, double scale, double floor) {
  return static_cast<std::int32_t>(std::max(floor, std::round(base * scale)));
}

void write_manifest(const std::string& out_dir, json manifest) {
  manifest["config_hash"] = config_hash(manifest.dump());
  write_text_file(out_dir + "/manifest.json", manifest.dump(2));
}

ChoiceData drop_zero_degree_chosen(ChoiceData data) {
  const int deg_col = data.require_column("degree");
  std::erase_if(data.events, [&](const ChoiceEvent& ev) {
    return ev.row(ev.chosen, data.n_features())[deg_col] < 1.0;
  });
  return data;
}

int observed_max_degree(const ChoiceData& data) {
  const int deg_col = data.require_column("degree");
  int max_degree = 1;
  for (const auto& ev : data.events) {
    for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
      max_degree = std::max(max_degree, static_cast<int>(ev.row(a, data.n_features())[deg_col]));
    }
  }
  return max_degree;
}

}  // namespace

void run_surface(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);

  GrowthConfig growth;
  growth.model = GrowthModel::Copy;
  growth.p = 0.5;  // degree mode carries weight 0.5
  growth.n = scaled(10000, config.scale, 400);
  growth.m = 4;
  growth.directed = false;
  growth.seed = config.seed;
  const auto grown = generate(growth);

  ExtractOptions options;
  options.negative_samples = 10;
  options.seed = config.seed + 1;
  const auto data = extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg"), options).data;

  std::vector<double> alphas, pis;
  for (int i = 0; i <= 40; ++i) alphas.push_back(2.0 * i / 40.0);
  for (int i = 0; i <= 40; ++i) pis.push_back(static_cast<double>(i) / 40.0);
  const SurfaceResult surface =
      copy_model_surface(data, alphas, pis, "log_degree", config.threads);
  write_surface_csv(config.out_dir + "/surface.csv", surface);

  MixtureModel model;
  model.modes.push_back(MixtureMode::log_degree(data, 1.0, false, Support::all(), "pa"));
  model.modes.push_back(MixtureMode::uniform(data));
  model.pi = Eigen::Vector2d(0.5, 0.5);
  EmOptions em_options;
  em_options.starts = 1;  // a single path across the surface
  em_options.seed = config.seed;
  em_options.inner.threads = config.threads;
  const EmResult em = em_fit(model, em_options);
  write_em_path_csv(config.out_dir + "/em_path.csv", em);

  write_manifest(config.out_dir,
                 json{{"experiment", "surface"},
                      {"n", growth.n},
                      {"m", growth.m},
                      {"p_uniform", growth.p},
                      {"pi1_true", 1.0 - growth.p},
                      {"negative_samples", 10},
                      {"seed", config.seed},
                      {"scale", config.scale},
                      {"n_events", data.events.size()},
                      {"em", {{"alpha", em.model.modes[0].theta[0]},
                              {"pi1", em.model.pi[0]},
                              {"loglik", em.loglik},
                              {"iterations", em.iterations},
                              {"converged", em.converged}}}});
}

void run_kernel(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);

  GrowthConfig growth;
  growth.model = GrowthModel::Pa;
  growth.alpha = 1.0;
  growth.n = scaled(2000, config.scale, 300);
  growth.m = 1;
  growth.directed = false;
  growth.seed = config.seed;
  const auto grown = generate(growth);

  const auto data =
      drop_zero_degree_chosen(extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg")).data);
  const int max_degree = observed_max_degree(data);

  FitOptions fit_options;
  fit_options.threads = config.threads;
  Design parametric = Design::columns(data, {"log_degree"});
  parametric.support = Support::column_at_least(data.require_column("degree"), 1.0);
  parametric.threads = config.threads;
  const LogitFit mle = fit(parametric, fit_options);

  const auto np = fit_nonparametric_pa(data, max_degree, fit_options);
  const double alpha_ls = pham_ls_alpha(np);

  const KernelEstimate newman = newman_kernel(data, max_degree);
  const KernelEstimate logit = kernel_from_nonparametric(np);
  write_kernel_csv(config.out_dir + "/kernel.csv", {newman, logit});
  write_degree_coefficient_csv(config.out_dir + "/degree_coefficients.csv", np);

  write_manifest(config.out_dir, json{{"experiment", "kernel"},
                                      {"n", growth.n},
                                      {"m", growth.m},
                                      {"alpha_true", growth.alpha},
                                      {"seed", config.seed},
                                      {"scale", config.scale},
                                      {"max_degree", max_degree},
                                      {"alpha_mle", mle.theta[0]},
                                      {"alpha_mle_se", mle.se[0]},
                                      {"alpha_ls", alpha_ls},
                                      {"n_events", data.events.size()}});
}

void run_gamma_grid(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  const std::vector<double> r_grid{0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> p_grid{0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
  const std::int32_t n = scaled(20000, config.scale, 500);
  const int replicas = std::max(1, static_cast<int>(std::round(10 * config.scale)));

  std::ofstream csv(config.out_dir + "/gamma.csv");
  csv.precision(12);
  csv << "r,p,replica,gamma,x_min,n_tail\n";
  for (const double r : r_grid) {
    for (const double p : p_grid) {
      std::vector<std::int64_t> pooled;
      for (int rep = 0; rep < replicas; ++rep) {
        GrowthConfig growth;
        growth.model = GrowthModel::Rp;
        growth.r = r;
        growth.p = p;
        growth.n = n;
        growth.m = 4;
        growth.directed = false;
        growth.seed = config.seed + static_cast<std::uint64_t>(1000 * r + 100 * p + rep);
        const auto grown = generate(growth);
        std::vector<std::int64_t> degrees;
        for (NodeId v = 0; v < grown.graph.num_nodes(); ++v) {
          degrees.push_back(grown.graph.total_degree(v));
        }
        pooled.insert(pooled.end(), degrees.begin(), degrees.end());
        const PowerLawFit fit = powerlaw_fit_scan(degrees, growth.m, 200, 50);
        csv << r << ',' << p << ',' << rep << ',' << fit.gamma << ',' << fit.x_min << ','
            << fit.n_tail << '\n';
      }
      const PowerLawFit pooled_fit = powerlaw_fit_scan(pooled, 4, 200, 50);
      csv << r << ',' << p << ',' << -1 << ',' << pooled_fit.gamma << ',' << pooled_fit.x_min
          << ',' << pooled_fit.n_tail << '\n';
    }
  }
  csv.close();

  write_manifest(config.out_dir, json{{"experiment", "gamma-grid"},
                                      {"n", n},
                                      {"m", 4},
                                      {"replicas", replicas},
                                      {"r_grid", r_grid},
                                      {"p_grid", p_grid},
                                      {"seed", config.seed},
                                      {"scale", config.scale},
                                      {"note", "replica -1 pools all replicas of a cell"}});
}

void run_model_compare(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  const std::int32_t n = scaled(20000, config.scale, 1000);

  json summary = {{"experiment", "model-compare"},
                  {"n", n},
                  {"m", 4},
                  {"seed", config.seed},
                  {"scale", config.scale},
                  {"cases", json::array()}};

  std::ofstream curves(config.out_dir + "/curves.csv");
  curves.precision(12);
  curves << "dataset,model,pi,loglik\n";

  struct Case {
    const char* name;
    double r, p;
  };
  for (const Case c : {Case{"r0.5_p1", 0.5, 1.0}, Case{"r1_p0.5", 1.0, 0.5}}) {
    GrowthConfig growth;
    growth.model = GrowthModel::Rp;
    growth.r = c.r;
    growth.p = c.p;
    growth.n = n;
    growth.m = 4;
    growth.directed = false;
    growth.seed = config.seed + static_cast<std::uint64_t>(c.r * 10 + c.p * 100);
    const auto grown = generate(growth);

    ExtractOptions options;
    options.negative_samples = 10;  // profile fits use exact full-set counts
    options.seed = growth.seed + 1;
    const auto data =
        extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg"), options).data;

    const ProfileFit local_search = fit_local_search(data);
    const ProfileFit copy = fit_copy(data);
    for (const auto& [pi, ll] : local_search.curve) {
      curves << c.name << ",local-search," << pi << ',' << ll << '\n';
    }
    for (const auto& [pi, ll] : copy.curve) {
      curves << c.name << ",copy," << pi << ',' << ll << '\n';
    }

    const bool ls_wins = local_search.loglik > copy.loglik;
    const LRTestResult lr = lr_statistic(std::min(local_search.loglik, copy.loglik),
                                         std::max(local_search.loglik, copy.loglik), 1);
    summary["cases"].push_back(json{{"dataset", c.name},
                                    {"r_true", c.r},
                                    {"p_true", c.p},
                                    {"r_hat", local_search.pi},
                                    {"p_hat", copy.pi},
                                    {"loglik_local_search", local_search.loglik},
                                    {"loglik_copy", copy.loglik},
                                    {"winner", ls_wins ? "local-search" : "copy"},
                                    {"lr_statistic", lr.statistic},
                                    {"lr_p_value", lr.p_value},
                                    {"n_events", data.events.size()}});
  }
  curves.close();
  summary["config_hash"] = config_hash(summary.dump());
  write_text_file(config.out_dir + "/summary.json", summary.dump(2));
}

void run_degree_curve(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);

  GrowthConfig growth;
  growth.model = GrowthModel::Pa;
  growth.alpha = 1.0;
  growth.n = scaled(2000, config.scale, 300);
  growth.m = 1;
  growth.directed = false;
  growth.seed = config.seed;
  const auto grown = generate(growth);
  const auto data =
      drop_zero_degree_chosen(extract_choices(grown.graph, FeatureSpec::parse("deg,logdeg")).data);

  FitOptions fit_options;
  fit_options.threads = config.threads;
  Design parametric = Design::columns(data, {"log_degree"});
  parametric.support = Support::column_at_least(data.require_column("degree"), 1.0);
  const LogitFit mle = fit(parametric, fit_options);
  const auto np = fit_nonparametric_pa(data, observed_max_degree(data), fit_options);

  std::ofstream csv(config.out_dir + "/degree_curve.csv");
  csv.precision(12);
  csv << "degree,theta,se,parametric,chosen,exposure,estimated,pinned\n";
  for (const auto& c : np.coefficients) {
    const double parametric_theta =
        c.degree >= 1 ? mle.theta[0] * std::log(static_cast<double>(c.degree)) : 0.0;
    csv << c.degree << ',' << c.theta << ',' << c.se << ',' << parametric_theta << ','
        << c.chosen_count << ',' << c.exposure_count << ',' << (c.estimated ? 1 : 0) << ','
        << (c.pinned ? 1 : 0) << '\n';
  }
  csv.close();

  write_manifest(config.out_dir, json{{"experiment", "degree-curve"},
                                      {"n", growth.n},
                                      {"m", growth.m},
                                      {"alpha_true", growth.alpha},
                                      {"alpha_mle", mle.theta[0]},
                                      {"seed", config.seed},
                                      {"scale", config.scale}});
}

void run(const std::string& name, const ExperimentConfig& config) {
  if (name == "surface") {
    run_surface(config);
  } else if (name == "kernel") {
    run_kernel(config);
  } else if (name == "gamma-grid") {
    run_gamma_grid(config);
  } else if (name == "model-compare") {
    run_model_compare(config);
  } else if (name == "degree-curve") {
    run_degree_curve(config);
  } else {
    throw ConfigError("unknown experiment '" + name +
                      "' (expected surface, kernel, gamma-grid, model-compare, degree-curve)");
  }
}

}  // namespace netchoice::experiments
