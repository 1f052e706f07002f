#include "netchoice/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace netchoice {

using json = nlohmann::json;

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::stringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

namespace {

json nan_safe(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json coefficient_table(const LogitFit& fit) {
  json table = json::array();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    const double est = fit.theta[static_cast<Eigen::Index>(i)];
    const double se = fit.se[static_cast<Eigen::Index>(i)];
    json row = {{"name", fit.names[i]},
                {"estimate", nan_safe(est)},
                {"se", nan_safe(se)},
                {"z", nan_safe(se > 0 ? est / se : std::numeric_limits<double>::quiet_NaN())}};
    if (!fit.frozen.empty() && fit.frozen[i]) row["fixed"] = true;
    table.push_back(std::move(row));
  }
  return table;
}

json fit_body(const LogitFit& fit) {
  json body = {{"coefficients", coefficient_table(fit)},
               {"loglik", nan_safe(fit.loglik)},
               {"n_events", fit.n_events},
               {"converged", fit.converged},
               {"iterations", fit.iterations},
               {"gradient_norm", nan_safe(fit.gradient_norm)},
               {"se_defined", fit.se_defined},
               {"ridge_active", fit.ridge_active}};
  if (fit.skipped_zero_probability_events > 0) {
    body["skipped_zero_probability_events"] = fit.skipped_zero_probability_events;
  }
  if (!fit.diagnostic.empty()) body["diagnostic"] = fit.diagnostic;
  return body;
}

json parse_context(const std::string& context) {
  if (context.empty()) return json::object();
  return json::parse(context);
}

}  // namespace

std::string fit_report_json(const LogitFit& fit, const std::string& context) {
  json report = fit_body(fit);
  report["config"] = parse_context(context);
  report["config_hash"] = config_hash(context);
  return report.dump(2);
}

std::string nonparametric_report_json(const NonparametricPaFit& fit, const std::string& context) {
  json degrees = json::array();
  for (const auto& c : fit.coefficients) {
    degrees.push_back({{"degree", c.degree},
                       {"theta", nan_safe(c.theta)},
                       {"se", nan_safe(c.se)},
                       {"chosen", c.chosen_count},
                       {"exposure", c.exposure_count},
                       {"estimated", c.estimated},
                       {"pinned", c.pinned}});
  }
  json report = {{"pin_degree", fit.pin_degree},
                 {"degrees", std::move(degrees)},
                 {"loglik", nan_safe(fit.fit.loglik)},
                 {"n_events", fit.fit.n_events},
                 {"converged", fit.fit.converged},
                 {"iterations", fit.fit.iterations}};
  report["config"] = parse_context(context);
  report["config_hash"] = config_hash(context);
  return report.dump(2);
}

std::string em_report_json(const EmResult& result, const std::vector<std::string>& mode_names,
                           const std::string& context) {
  json modes = json::array();
  for (int m = 0; m < result.model.n_modes(); ++m) {
    const MixtureMode& mode = result.model.modes[static_cast<std::size_t>(m)];
    json coefs = json::array();
    const auto names = mode.design.param_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      coefs.push_back({{"name", names[i]},
                       {"estimate", nan_safe(mode.theta[static_cast<Eigen::Index>(i)])},
                       {"fixed", !mode.frozen.empty() && mode.frozen[i] != 0}});
    }
    modes.push_back({{"name", m < static_cast<int>(mode_names.size())
                                  ? mode_names[static_cast<std::size_t>(m)]
                                  : mode.name},
                     {"pi", result.model.pi[m]},
                     {"coefficients", std::move(coefs)}});
  }
  json trajectory = json::array();
  for (const auto& it : result.trajectory) {
    json pis = json::array();
    for (Eigen::Index m = 0; m < it.pi.size(); ++m) pis.push_back(it.pi[m]);
    json thetas = json::array();
    for (const auto& theta : it.thetas) {
      json values = json::array();
      for (Eigen::Index i = 0; i < theta.size(); ++i) values.push_back(theta[i]);
      thetas.push_back(std::move(values));
    }
    trajectory.push_back({{"iteration", it.iteration},
                          {"loglik", nan_safe(it.loglik)},
                          {"pi", std::move(pis)},
                          {"theta", std::move(thetas)}});
  }
  json report = {{"modes", std::move(modes)},
                 {"loglik", nan_safe(result.loglik)},
                 {"iterations", result.iterations},
                 {"converged", result.converged},
                 {"degenerate_modes", result.degenerate_modes},
                 {"trajectory", std::move(trajectory)}};
  report["config"] = parse_context(context);
  report["config_hash"] = config_hash(context);
  return report.dump(2);
}

std::string lr_report_json(const LRTestResult& result, const std::string& context) {
  json report = {{"statistic", nan_safe(result.statistic)},
                 {"df", result.df},
                 {"p_value", nan_safe(result.p_value)}};
  report["config"] = parse_context(context);
  report["config_hash"] = config_hash(context);
  return report.dump(2);
}

void write_coefficient_csv(const std::string& path, const LogitFit& fit) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write csv: " + path);
  out.precision(12);
  out << "name,estimate,se,z,fixed\n";
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    const double est = fit.theta[static_cast<Eigen::Index>(i)];
    const double se = fit.se[static_cast<Eigen::Index>(i)];
    out << fit.names[i] << ',' << est << ',' << se << ','
        << (se > 0 ? est / se : std::numeric_limits<double>::quiet_NaN()) << ','
        << (!fit.frozen.empty() && fit.frozen[i] ? 1 : 0) << '\n';
  }
}

void write_degree_coefficient_csv(const std::string& path, const NonparametricPaFit& fit) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write csv: " + path);
  out.precision(12);
  out << "degree,theta,se,chosen,exposure,estimated,pinned\n";
  for (const auto& c : fit.coefficients) {
    out << c.degree << ',' << c.theta << ',' << c.se << ',' << c.chosen_count << ','
        << c.exposure_count << ',' << (c.estimated ? 1 : 0) << ',' << (c.pinned ? 1 : 0) << '\n';
  }
}

void write_kernel_csv(const std::string& path, const std::vector<KernelEstimate>& estimates) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write csv: " + path);
  out.precision(12);
  out << "estimator,degree,propensity,lo,hi,chosen,exposure\n";
  for (const auto& estimate : estimates) {
    for (const auto& p : estimate.points) {
      out << estimate.estimator << ',' << p.degree << ',' << p.propensity << ',' << p.lo << ','
          << p.hi << ',' << p.chosen << ',' << p.exposure << '\n';
    }
  }
}

void write_surface_csv(const std::string& path, const SurfaceResult& surface) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write csv: " + path);
  out.precision(12);
  out << "alpha,pi1,loglik\n";
  for (std::size_t a = 0; a < surface.alphas.size(); ++a) {
    for (std::size_t p = 0; p < surface.pis.size(); ++p) {
      out << surface.alphas[a] << ',' << surface.pis[p] << ','
          << surface.loglik(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(p)) << '\n';
    }
  }
}

void write_profile_csv(const std::string& path, const std::string& model,
                       const ProfileFit& profile) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write csv: " + path);
  out.precision(12);
  out << "model,pi,loglik\n";
  for (const auto& [pi, ll] : profile.curve) {
    out << model << ',' << pi << ',' << ll << '\n';
  }
}

void write_em_path_csv(const std::string& path, const EmResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write csv: " + path);
  out.precision(12);
  out << "iteration,loglik,pi1,alpha\n";
  for (const auto& it : result.trajectory) {
    const double pi1 = it.pi.size() > 0 ? it.pi[0] : std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    for (const auto& theta : it.thetas) {
      if (theta.size() > 0) {
        alpha = theta[0];
        break;
      }
    }
    out << it.iteration << ',' << it.loglik << ',' << pi1 << ',' << alpha << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

}  // namespace netchoice
