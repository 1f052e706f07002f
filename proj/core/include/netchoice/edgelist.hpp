#pragma once

#include <string>
#include <vector>

#include "netchoice/graph.hpp"

namespace netchoice {

// Ingestion diagnostics. Lines that cannot be parsed are counted and a few
// samples are kept for error messages; duplicate edges and self-loops are
// dropped with counts per the simple-graph rule.
struct IngestStats {
  std::int64_t lines_read = 0;
  std::int64_t edges_parsed = 0;
  std::int64_t malformed = 0;
  std::int64_t dropped_duplicates = 0;
  std::int64_t dropped_self_loops = 0;
  bool resorted_by_timestamp = false;
  double min_timestamp = std::numeric_limits<double>::quiet_NaN();
  double max_timestamp = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> sample_errors;
};

struct Dataset {
  TemporalGraph graph;
  std::vector<std::string> node_names;   // dense id -> original label
  std::vector<std::string> group_names;  // group id -> original label
  IngestStats stats;

  Dataset() : graph(true) {}
  explicit Dataset(bool directed) : graph(directed) {}
};

// Reads a delimited edge list: one `source,target[,timestamp]` per line,
// `#` starts a comment. Tab- or space-separated lines are accepted as well.
// Rows are stably sorted by timestamp when timestamps are present and out of
// order (a warning is recorded in stats). Node labels are interned to dense
// ids in canonical (sorted) encounter order; event indices are 0..E-1.
Dataset load_edge_list(const std::string& path, bool directed = true);

// Optional node metadata sidecar with a header row:
//   node,arrival[,group][,fitness][,<covariate>...]
// Unknown columns are treated as named covariates. Rows for labels that do
// not occur in the graph are skipped.
void load_node_sidecar(Dataset& dataset, const std::string& path);

void write_edge_list(const std::string& path, const TemporalGraph& graph,
                     const std::vector<std::string>* node_names = nullptr);
void write_node_sidecar(const std::string& path, const TemporalGraph& graph,
                        const std::vector<std::string>* node_names = nullptr,
                        const std::vector<std::string>* group_names = nullptr);
void write_symbol_table(const std::string& path, const std::vector<std::string>& node_names);

}  // namespace netchoice
