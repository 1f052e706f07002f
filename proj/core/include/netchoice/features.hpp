#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "netchoice/errors.hpp"

namespace netchoice {

// log that maps 0 to 0. Paired with HasDegree this keeps degree-zero
// alternatives identifiable without an epsilon offset.
inline double zero_safe_log(double x) { return x <= 0.0 ? 0.0 : std::log(x); }

enum class FeatureKind {
  LogDegree,           // zero-safe log of the attachment degree
  HasDegree,           // 1 if attachment degree > 0
  Degree,              // raw attachment degree (carrier for per-degree models)
  DegreeIndicator,     // 1 if attachment degree == k
  LogCommonNeighbors,  // zero-safe log of common-neighbor count with the chooser
  IsFof,               // 1 if the alternative is a friend-of-friend of the chooser
  Reciprocal,          // 1 if the alternative already links to the chooser
  HopCategory,         // 1 if hop distance falls in this category (see FeatureSpec)
  LogAge,              // log of the alternative's age (see notes in choices.hpp)
  NodeIdentity,        // raw node id (carrier for per-node fixed effects)
  SameGroup,           // 1 if chooser and alternative share a group label
  LatentDistance,      // Euclidean distance over the pos* covariates
  Covariate            // named node covariate of the alternative
};

struct Feature {
  FeatureKind kind;
  std::string name;
  int param = 0;          // DegreeIndicator: k. HopCategory: the hop bucket.
  std::string covariate;  // Covariate: column name
};

// Ordered list of per-alternative feature columns. Hop categories are one-hot
// over buckets 2..cap with values below 2 clamped into the first bucket, cap
// meaning ">= cap", and "unreachable" as the implicit reference level.
struct FeatureSpec {
  std::vector<Feature> features;
  int hop_cap = 6;

  // Parses a comma-separated list of tokens:
  //   logdeg hasdeg deg degind:K logcn fof recip hops[:CAP] logage nodefe
  //   samegroup latdist cov:NAME
  // "hops" expands to one column per bucket.
  static FeatureSpec parse(const std::string& tokens);

  std::vector<std::string> names() const;
  int size() const { return static_cast<int>(features.size()); }
  bool has(FeatureKind kind) const;
  void validate() const;  // names unique, parameters sane
};

}  // namespace netchoice
