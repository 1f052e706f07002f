#include "netchoice/features.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace netchoice {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

int parse_int(const std::string& s, const std::string& token) {
  try {
    std::size_t pos = 0;
    const int value = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("bad feature token '" + token + "'");
  }
}

}  // namespace

FeatureSpec FeatureSpec::parse(const std::string& tokens) {
  FeatureSpec spec;
  std::stringstream ss(tokens);
  std::string raw;
  while (std::getline(ss, raw, ',')) {
    const std::string token = trim(raw);
    if (token.empty()) continue;
    const auto colon = token.find(':');
    const std::string head = colon == std::string::npos ? token : token.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : token.substr(colon + 1);

    if (head == "logdeg") {
      spec.features.push_back({FeatureKind::LogDegree, "log_degree", 0, ""});
    } else if (head == "hasdeg") {
      spec.features.push_back({FeatureKind::HasDegree, "has_degree", 0, ""});
    } else if (head == "deg") {
      spec.features.push_back({FeatureKind::Degree, "degree", 0, ""});
    } else if (head == "degind") {
      const int k = parse_int(arg, token);
      spec.features.push_back({FeatureKind::DegreeIndicator, "deg:" + std::to_string(k), k, ""});
    } else if (head == "logcn") {
      spec.features.push_back({FeatureKind::LogCommonNeighbors, "log_common_neighbors", 0, ""});
    } else if (head == "fof") {
      spec.features.push_back({FeatureKind::IsFof, "is_fof", 0, ""});
    } else if (head == "recip") {
      spec.features.push_back({FeatureKind::Reciprocal, "reciprocal", 0, ""});
    } else if (head == "hops") {
      spec.hop_cap = arg.empty() ? 6 : parse_int(arg, token);
      if (spec.hop_cap < 3) throw ConfigError("hops cap must be >= 3");
      for (int h = 2; h < spec.hop_cap; ++h) {
        spec.features.push_back({FeatureKind::HopCategory, "hop:" + std::to_string(h), h, ""});
      }
      spec.features.push_back(
          {FeatureKind::HopCategory, "hop:" + std::to_string(spec.hop_cap) + "+", spec.hop_cap, ""});
    } else if (head == "logage") {
      spec.features.push_back({FeatureKind::LogAge, "log_age", 0, ""});
    } else if (head == "nodefe") {
      spec.features.push_back({FeatureKind::NodeIdentity, "node_id", 0, ""});
    } else if (head == "samegroup") {
      spec.features.push_back({FeatureKind::SameGroup, "same_group", 0, ""});
    } else if (head == "latdist") {
      spec.features.push_back({FeatureKind::LatentDistance, "latent_distance", 0, ""});
    } else if (head == "cov") {
      if (arg.empty()) throw ConfigError("cov feature needs a name, e.g. cov:year");
      spec.features.push_back({FeatureKind::Covariate, "cov:" + arg, 0, arg});
    } else {
      throw ConfigError("unknown feature token '" + token + "'");
    }
  }
  spec.validate();
  return spec;
}

std::vector<std::string> FeatureSpec::names() const {
  std::vector<std::string> result;
  result.reserve(features.size());
  for (const auto& f : features) result.push_back(f.name);
  return result;
}

bool FeatureSpec::has(FeatureKind kind) const {
  return std::any_of(features.begin(), features.end(),
                     [kind](const Feature& f) { return f.kind == kind; });
}

void FeatureSpec::validate() const {
  if (features.empty()) throw ConfigError("feature spec is empty");
  std::unordered_set<std::string> seen;
  for (const auto& f : features) {
    if (!seen.insert(f.name).second) throw ConfigError("duplicate feature name '" + f.name + "'");
    if (f.kind == FeatureKind::DegreeIndicator && f.param < 0) {
      throw ConfigError("degree indicator needs k >= 0");
    }
  }
}

}  // namespace netchoice
