// Command line front end: synthetic graph generation, edge-list ingestion,
// choice-data extraction, model fitting, and the canned experiments.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "experiments.hpp"
#include "netchoice/choices.hpp"
#include "netchoice/edgelist.hpp"
#include "netchoice/generate.hpp"
#include "netchoice/mixture.hpp"
#include "netchoice/report.hpp"
#include "netchoice/stats.hpp"

using json = nlohmann::json;
using namespace netchoice;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitBadConfig = 4;

struct SynthArgs {
  std::string model = "pa";
  std::int32_t n = 2000;
  std::int32_t m = 1;
  double alpha = 1.0;
  double p = 1.0;
  double r = 1.0;
  double homophily = 1.0;
  int groups = 2;
  double beta = 1.0;
  std::string npa_thetas;
  bool undirected = false;
  std::uint64_t seed = 1;
  std::string out = "synth";
};

int cmd_synth(const SynthArgs& args) {
  GrowthConfig config;
  config.model = growth_model_from_string(args.model);
  config.n = args.n;
  config.m = args.m;
  config.alpha = args.alpha;
  config.p = args.p;
  config.r = args.r;
  config.homophily = args.homophily;
  config.groups = args.groups;
  config.beta = args.beta;
  config.directed = !args.undirected;
  config.seed = args.seed;
  if (!args.npa_thetas.empty()) {
    std::stringstream ss(args.npa_thetas);
    std::string token;
    while (std::getline(ss, token, ',')) config.degree_utilities.push_back(std::stod(token));
  }

  const GrowthResult result = generate(config);

  json config_json = {{"command", "synth"},  {"model", args.model},     {"n", config.n},
                      {"m", config.m},       {"alpha", config.alpha},   {"p", config.p},
                      {"r", config.r},       {"homophily", config.homophily},
                      {"groups", config.groups}, {"beta", config.beta},
                      {"directed", config.directed}, {"seed", config.seed}};
  json manifest = config_json;
  manifest["nodes"] = result.graph.num_nodes();
  manifest["edges"] = result.graph.num_edges();
  manifest["empty_fof_fallbacks"] = result.empty_fof_fallbacks;
  manifest["zero_weight_fallbacks"] = result.zero_weight_fallbacks;
  manifest["config_hash"] = config_hash(config_json.dump());

  write_edge_list(args.out + "_edges.csv", result.graph);
  write_node_sidecar(args.out + "_nodes.csv", result.graph);
  write_text_file(args.out + "_manifest.json", manifest.dump(2));
  std::cout << manifest.dump(2) << std::endl;
  return kExitOk;
}

struct IngestArgs {
  std::string edges;
  std::string nodes;
  bool undirected = false;
  std::string out = "ingest";
};

int cmd_ingest(const IngestArgs& args) {
  Dataset dataset = load_edge_list(args.edges, !args.undirected);
  if (!args.nodes.empty()) load_node_sidecar(dataset, args.nodes);

  write_edge_list(args.out + "_edges.csv", dataset.graph, &dataset.node_names);
  write_symbol_table(args.out + "_symbols.csv", dataset.node_names);
  write_node_sidecar(args.out + "_nodes.csv", dataset.graph, &dataset.node_names,
                     &dataset.group_names);

  json summary = {{"command", "ingest"},
                  {"edges_file", args.edges},
                  {"nodes_file", args.nodes},
                  {"directed", !args.undirected},
                  {"nodes", dataset.graph.num_nodes()},
                  {"edges", dataset.graph.num_edges()},
                  {"lines_read", dataset.stats.lines_read},
                  {"malformed", dataset.stats.malformed},
                  {"dropped_duplicates", dataset.stats.dropped_duplicates},
                  {"dropped_self_loops", dataset.stats.dropped_self_loops},
                  {"resorted_by_timestamp", dataset.stats.resorted_by_timestamp},
                  {"sample_errors", dataset.stats.sample_errors}};
  if (dataset.graph.has_timestamps()) {
    summary["min_timestamp"] = dataset.stats.min_timestamp;
    summary["max_timestamp"] = dataset.stats.max_timestamp;
  }
  summary["config_hash"] = config_hash(summary.dump());
  write_text_file(args.out + "_summary.json", summary.dump(2));
  std::cout << summary.dump(2) << std::endl;
  return kExitOk;
}

struct ExtractArgs {
  std::string edges;
  std::string nodes;
  bool undirected = false;
  std::string features = "logdeg,hasdeg";
  std::string choice_set = "all";
  std::int64_t min_degree = 0;
  std::int64_t neg_samples = -1;
  int hop_cap = 6;
  std::string drop_new_choosers = "off";
  double window_start = -std::numeric_limits<double>::infinity();
  double window_end = std::numeric_limits<double>::infinity();
  double keep_prob = 1.0;
  std::int64_t max_events = -1;
  std::uint64_t seed = 1;
  std::string out = "choices.jsonl";
};

int cmd_extract(const ExtractArgs& args) {
  Dataset dataset = load_edge_list(args.edges, !args.undirected);
  if (!args.nodes.empty()) load_node_sidecar(dataset, args.nodes);

  ExtractOptions options;
  if (args.choice_set == "all") {
    options.choice_set = ChoiceSetRule::AllNodes;
  } else if (args.choice_set == "fof") {
    options.choice_set = ChoiceSetRule::FofOnly;
  } else {
    throw ConfigError("--choice-set must be 'all' or 'fof'");
  }
  options.min_degree = args.min_degree;
  options.negative_samples = args.neg_samples;
  options.hop_cap = args.hop_cap;
  options.window_start = args.window_start;
  options.window_end = args.window_end;
  options.keep_prob = args.keep_prob;
  options.max_events = args.max_events;
  options.seed = args.seed;
  if (args.drop_new_choosers == "off") {
    options.new_choosers = NewChooserFilter::Keep;
  } else if (args.drop_new_choosers == "event") {
    options.new_choosers = NewChooserFilter::DropFirstEvent;
  } else if (args.drop_new_choosers == "day") {
    options.new_choosers = NewChooserFilter::DropFirstDay;
  } else {
    throw ConfigError("--drop-new-choosers must be off, event, or day");
  }

  const FeatureSpec spec = FeatureSpec::parse(args.features);
  const ExtractResult result = extract_choices(dataset.graph, spec, options);
  write_choices_jsonl(args.out, result.data);

  json summary = {{"command", "extract"},
                  {"edges_file", args.edges},
                  {"features", args.features},
                  {"choice_set", args.choice_set},
                  {"min_degree", args.min_degree},
                  {"neg_samples", args.neg_samples},
                  {"seed", args.seed},
                  {"events", result.data.events.size()},
                  {"edges_seen", result.diagnostics.edges_seen},
                  {"skipped_window", result.diagnostics.skipped_window},
                  {"skipped_new_chooser", result.diagnostics.skipped_new_chooser},
                  {"skipped_coin", result.diagnostics.skipped_coin},
                  {"flagged_chosen_outside_rule", result.diagnostics.flagged_chosen_outside_rule}};
  summary["config_hash"] = config_hash(summary.dump());
  write_text_file(args.out + ".manifest.json", summary.dump(2));
  std::cout << summary.dump(2) << std::endl;
  return kExitOk;
}

struct FitArgs {
  std::string choices;
  std::string features;  // subset; empty = all columns
  bool nonparametric = false;
  int max_degree = -1;
  std::int64_t min_degree_support = 0;
  double ridge = 0.0;
  int max_iterations = 500;
  int threads = 1;
  std::string out = "fit.json";
  std::string csv;
};

int cmd_fit(const FitArgs& args) {
  const ChoiceData data = read_choices_jsonl(args.choices);
  if (data.events.empty()) throw DataError(args.choices + ": no events");

  FitOptions options;
  options.ridge = args.ridge;
  options.max_iterations = args.max_iterations;
  options.threads = args.threads;

  json config_json = {{"command", "fit"},
                      {"choices_file", args.choices},
                      {"features", args.features},
                      {"nonparametric", args.nonparametric},
                      {"max_degree", args.max_degree},
                      {"min_degree_support", args.min_degree_support},
                      {"ridge", args.ridge}};

  if (args.nonparametric) {
    int max_degree = args.max_degree;
    const int deg_col = data.require_column("degree");
    if (max_degree < 0) {
      max_degree = 1;
      for (const auto& ev : data.events) {
        for (std::int32_t a = 0; a < ev.n_alternatives(); ++a) {
          max_degree =
              std::max(max_degree, static_cast<int>(ev.row(a, data.n_features())[deg_col]));
        }
      }
    }
    const NonparametricPaFit np = fit_nonparametric_pa(data, max_degree, options);
    write_text_file(args.out, nonparametric_report_json(np, config_json.dump()));
    if (!args.csv.empty()) write_degree_coefficient_csv(args.csv, np);
    std::cout << "loglik " << np.fit.loglik << ", " << (np.fit.converged ? "converged" : "NOT converged")
              << " in " << np.fit.iterations << " iterations" << std::endl;
    return np.fit.converged ? kExitOk : kExitNoConvergence;
  }

  Design design = args.features.empty()
                      ? Design::dense(data)
                      : Design::columns(data, FeatureSpec::parse(args.features).names());
  if (args.min_degree_support > 0) {
    design.support = Support::column_at_least(data.require_column("degree"),
                                              static_cast<double>(args.min_degree_support));
  }
  design.threads = args.threads;
  const LogitFit fitted = fit(design, options);
  write_text_file(args.out, fit_report_json(fitted, config_json.dump()));
  if (!args.csv.empty()) write_coefficient_csv(args.csv, fitted);
  std::cout << "loglik " << fitted.loglik << ", "
            << (fitted.converged ? "converged" : "NOT converged") << " in " << fitted.iterations
            << " iterations" << std::endl;
  for (std::size_t i = 0; i < fitted.names.size(); ++i) {
    std::cout << "  " << fitted.names[i] << " = " << fitted.theta[static_cast<Eigen::Index>(i)]
              << " (se " << fitted.se[static_cast<Eigen::Index>(i)] << ")" << std::endl;
  }
  return fitted.converged ? kExitOk : kExitNoConvergence;
}

struct EmFitArgs {
  std::string choices;
  std::string model = "copy";
  double tolerance = 1e-7;
  int max_iterations = 1000;
  int starts = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "emfit.json";
  std::string profile_csv;
};

int cmd_emfit(const EmFitArgs& args) {
  const ChoiceData data = read_choices_jsonl(args.choices);
  if (data.events.empty()) throw DataError(args.choices + ": no events");

  json config_json = {{"command", "emfit"},
                      {"choices_file", args.choices},
                      {"model", args.model},
                      {"tolerance", args.tolerance},
                      {"starts", args.starts},
                      {"seed", args.seed}};

  if (args.model == "copy" || args.model == "local-search") {
    const ProfileFit profile =
        args.model == "copy" ? fit_copy(data) : fit_local_search(data);
    json report = {{"model", args.model},
                   {"pi_uniform", profile.pi},
                   {"estimate", profile.pi},
                   {"loglik", profile.loglik},
                   {"n_events", data.events.size()}};
    report["config"] = config_json;
    report["config_hash"] = config_hash(config_json.dump());
    write_text_file(args.out, report.dump(2));
    if (!args.profile_csv.empty()) write_profile_csv(args.profile_csv, args.model, profile);
    std::cout << report.dump(2) << std::endl;
    return kExitOk;
  }

  MixtureModel model;
  if (args.model == "copy-free") {
    model.modes.push_back(MixtureMode::log_degree(data, 1.0, false, Support::all(), "pa"));
    model.modes.push_back(MixtureMode::uniform(data));
    model.pi = Eigen::Vector2d(0.5, 0.5);
  } else if (args.model == "rp") {
    model.modes.push_back(MixtureMode::uniform(data, Support::all(), "uniform-all"));
    model.modes.push_back(MixtureMode::log_degree(data, 1.0, true, Support::all(), "pa-all"));
    model.modes.push_back(MixtureMode::uniform(data, Support::fof_only(), "uniform-fof"));
    model.modes.push_back(MixtureMode::log_degree(data, 1.0, true, Support::fof_only(), "pa-fof"));
    model.pi = Eigen::VectorXd::Constant(4, 0.25);
  } else {
    throw ConfigError("--model must be copy, local-search, copy-free, or rp");
  }

  EmOptions options;
  options.tolerance = args.tolerance;
  options.max_iterations = args.max_iterations;
  options.starts = args.starts;
  options.seed = args.seed;
  options.inner.threads = args.threads;
  const EmResult em = em_fit(model, options);

  std::vector<std::string> mode_names;
  for (const auto& mode : model.modes) mode_names.push_back(mode.name);
  write_text_file(args.out, em_report_json(em, mode_names, config_json.dump()));
  std::cout << "loglik " << em.loglik << " after " << em.iterations << " iterations, pi = [";
  for (int m = 0; m < em.model.pi.size(); ++m) {
    std::cout << (m ? ", " : "") << em.model.pi[m];
  }
  std::cout << "]" << std::endl;
  return kExitOk;
}

struct LrArgs {
  std::string null_report;
  std::string alt_report;
  int df = -1;
  std::string out = "lrtest.json";
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report: " + path);
  json parsed;
  in >> parsed;
  return parsed;
}

int cmd_lrtest(const LrArgs& args) {
  const json null_report = read_json_file(args.null_report);
  const json alt_report = read_json_file(args.alt_report);

  auto names_of = [](const json& report) {
    std::vector<std::string> names;
    for (const auto& row : report.at("coefficients")) {
      if (!row.value("fixed", false)) names.push_back(row.at("name").get<std::string>());
    }
    return names;
  };
  const auto null_names = names_of(null_report);
  const auto alt_names = names_of(alt_report);
  for (const auto& name : null_names) {
    if (std::find(alt_names.begin(), alt_names.end(), name) == alt_names.end()) {
      throw ConfigError("lrtest: null feature '" + name + "' missing from the alternative model");
    }
  }
  if (null_report.at("n_events") != alt_report.at("n_events")) {
    throw ConfigError("lrtest: fits cover different event counts");
  }
  int df = args.df;
  if (df < 0) df = static_cast<int>(alt_names.size() - null_names.size());
  const LRTestResult result = lr_statistic(null_report.at("loglik").get<double>(),
                                           alt_report.at("loglik").get<double>(), df);

  json config_json = {
      {"command", "lrtest"}, {"null", args.null_report}, {"alt", args.alt_report}, {"df", df}};
  write_text_file(args.out, lr_report_json(result, config_json.dump()));
  std::cout << "statistic " << result.statistic << ", df " << result.df << ", p "
            << result.p_value << std::endl;
  return kExitOk;
}

struct AccuracyArgs {
  std::string fit_report;
  std::string choices;
  std::string out;
};

int cmd_accuracy(const AccuracyArgs& args) {
  const json report = read_json_file(args.fit_report);
  const ChoiceData data = read_choices_jsonl(args.choices);
  if (data.events.empty()) throw DataError(args.choices + ": no events");

  std::vector<std::string> names;
  std::vector<double> estimates;
  for (const auto& row : report.at("coefficients")) {
    names.push_back(row.at("name").get<std::string>());
    estimates.push_back(row.at("estimate").is_null() ? 0.0 : row.at("estimate").get<double>());
  }
  const Design design = Design::columns(data, names);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(estimates.size()));
  for (std::size_t i = 0; i < estimates.size(); ++i) theta[static_cast<Eigen::Index>(i)] = estimates[i];

  const double accuracy = holdout_accuracy(design, theta);
  json result = {{"command", "accuracy"},
                 {"fit", args.fit_report},
                 {"choices", args.choices},
                 {"n_events", data.events.size()},
                 {"accuracy", accuracy}};
  result["config_hash"] = config_hash(result.dump());
  if (!args.out.empty()) write_text_file(args.out, result.dump(2));
  std::cout << result.dump(2) << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netchoice: network formation as discrete choice"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic growth graph");
  synth_cmd->add_option("--model", synth.model,
                        "uniform|pa|npa|fitness|copy|local-search|rp|homophily|latent");
  synth_cmd->add_option("--n", synth.n, "target node count");
  synth_cmd->add_option("--m", synth.m, "edges per arriving node");
  synth_cmd->add_option("--alpha", synth.alpha, "degree exponent (pa)");
  synth_cmd->add_option("--p", synth.p, "probability of the uniform utility (copy, rp)");
  synth_cmd->add_option("--r", synth.r, "probability of the full choice set (local-search, rp)");
  synth_cmd->add_option("--homophily", synth.homophily, "same-group utility (homophily)");
  synth_cmd->add_option("--groups", synth.groups, "group count (homophily)");
  synth_cmd->add_option("--beta", synth.beta, "distance coefficient (latent)");
  synth_cmd->add_option("--npa-thetas", synth.npa_thetas, "comma list of per-degree utilities (npa)");
  synth_cmd->add_flag("--undirected", synth.undirected, "grow an undirected graph");
  synth_cmd->add_option("--seed", synth.seed, "random seed");
  synth_cmd->add_option("--out", synth.out, "output prefix");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "canonicalize an edge list");
  ingest_cmd->add_option("--edges", ingest.edges, "edge list file")->required();
  ingest_cmd->add_option("--nodes", ingest.nodes, "node metadata sidecar");
  ingest_cmd->add_flag("--undirected", ingest.undirected, "treat edges as undirected");
  ingest_cmd->add_option("--out", ingest.out, "output prefix");

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "recast an edge list as choice data");
  extract_cmd->add_option("--edges", extract.edges, "edge list file")->required();
  extract_cmd->add_option("--nodes", extract.nodes, "node metadata sidecar");
  extract_cmd->add_flag("--undirected", extract.undirected, "treat edges as undirected");
  extract_cmd->add_option("--features", extract.features,
                          "comma list: logdeg,hasdeg,deg,degind:K,logcn,fof,recip,hops[:CAP],"
                          "logage,nodefe,samegroup,latdist,cov:NAME");
  extract_cmd->add_option("--choice-set", extract.choice_set, "all|fof");
  extract_cmd->add_option("--min-degree", extract.min_degree, "drop alternatives below this degree");
  extract_cmd->add_option("--neg-samples", extract.neg_samples,
                          "uniform negative samples per event (-1 = full sets)");
  extract_cmd->add_option("--hop-cap", extract.hop_cap, "hop-distance cap");
  extract_cmd->add_option("--drop-new-choosers", extract.drop_new_choosers, "off|event|day");
  extract_cmd->add_option("--window-start", extract.window_start, "timestamp window start");
  extract_cmd->add_option("--window-end", extract.window_end, "timestamp window end");
  extract_cmd->add_option("--keep-prob", extract.keep_prob, "keep each event with this probability");
  extract_cmd->add_option("--max-events", extract.max_events, "stop after this many events");
  extract_cmd->add_option("--seed", extract.seed, "random seed");
  extract_cmd->add_option("--out", extract.out, "choice data output (jsonl)");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit a conditional logit to choice data");
  fit_cmd->add_option("--choices", fit_args.choices, "choice data (jsonl)")->required();
  fit_cmd->add_option("--features", fit_args.features, "subset of stored features to use");
  fit_cmd->add_flag("--nonparametric", fit_args.nonparametric, "per-degree coefficients");
  fit_cmd->add_option("--max-degree", fit_args.max_degree, "top degree bucket (nonparametric)");
  fit_cmd->add_option("--min-degree-support", fit_args.min_degree_support,
                      "restrict alternatives to degree >= this (needs a 'degree' column)");
  fit_cmd->add_option("--ridge", fit_args.ridge, "L2 penalty (0 = off)");
  fit_cmd->add_option("--max-iter", fit_args.max_iterations, "iteration cap");
  fit_cmd->add_option("--threads", fit_args.threads, "evaluation threads");
  fit_cmd->add_option("--out", fit_args.out, "fit report (json)");
  fit_cmd->add_option("--csv", fit_args.csv, "coefficient table (csv)");

  EmFitArgs emfit;
  auto* emfit_cmd = app.add_subcommand("emfit", "fit a latent-class mixture");
  emfit_cmd->add_option("--choices", emfit.choices, "choice data (jsonl)")->required();
  emfit_cmd->add_option("--model", emfit.model, "copy|local-search|copy-free|rp");
  emfit_cmd->add_option("--tol", emfit.tolerance, "EM stopping tolerance");
  emfit_cmd->add_option("--max-iter", emfit.max_iterations, "EM iteration cap");
  emfit_cmd->add_option("--starts", emfit.starts, "multi-start count");
  emfit_cmd->add_option("--seed", emfit.seed, "random seed");
  emfit_cmd->add_option("--threads", emfit.threads, "evaluation threads");
  emfit_cmd->add_option("--out", emfit.out, "fit report (json)");
  emfit_cmd->add_option("--profile-csv", emfit.profile_csv, "profile curve (csv)");

  experiments::ExperimentConfig experiment;
  std::string experiment_name;
  auto* experiment_cmd = app.add_subcommand("experiment", "run a canned experiment");
  experiment_cmd
      ->add_option("name", experiment_name, "surface|kernel|gamma-grid|model-compare|degree-curve")
      ->required();
  experiment_cmd->add_option("--scale", experiment.scale, "shrink factor for quick runs");
  experiment_cmd->add_option("--seed", experiment.seed, "random seed");
  experiment_cmd->add_option("--threads", experiment.threads, "evaluation threads");
  experiment_cmd->add_option("--out", experiment.out_dir, "output directory");

  LrArgs lr;
  auto* lr_cmd = app.add_subcommand("lrtest", "likelihood-ratio test between two fit reports");
  lr_cmd->add_option("--null", lr.null_report, "null model fit report")->required();
  lr_cmd->add_option("--alt", lr.alt_report, "alternative model fit report")->required();
  lr_cmd->add_option("--df", lr.df, "degrees of freedom (default: free parameter difference)");
  lr_cmd->add_option("--out", lr.out, "test report (json)");

  AccuracyArgs accuracy;
  auto* accuracy_cmd = app.add_subcommand("accuracy", "held-out predictive accuracy of a fit");
  accuracy_cmd->add_option("--fit", accuracy.fit_report, "fit report (json)")->required();
  accuracy_cmd->add_option("--choices", accuracy.choices, "held-out choice data (jsonl)")
      ->required();
  accuracy_cmd->add_option("--out", accuracy.out, "result (json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitBadConfig;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (ingest_cmd->parsed()) return cmd_ingest(ingest);
    if (extract_cmd->parsed()) return cmd_extract(extract);
    if (fit_cmd->parsed()) return cmd_fit(fit_args);
    if (emfit_cmd->parsed()) return cmd_emfit(emfit);
    if (experiment_cmd->parsed()) {
      experiments::run(experiment_name, experiment);
      return kExitOk;
    }
    if (lr_cmd->parsed()) return cmd_lrtest(lr);
    if (accuracy_cmd->parsed()) return cmd_accuracy(accuracy);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitBadConfig;
  } catch (const ConvergenceError& e) {
    std::cerr << "did not converge: " << e.what() << std::endl;
    return kExitNoConvergence;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitDataError;
  }
  return kExitBadConfig;
}
