#include "netchoice/edgelist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace netchoice {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  if (line.find(',') != std::string::npos) {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  } else {
    std::stringstream ss(line);
    std::string field;
    while (ss >> field) fields.push_back(field);
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

struct RawEdge {
  std::string src, dst;
  double ts;
  bool has_ts;
  std::int64_t line;
};

void note_error(IngestStats& stats, const std::string& message) {
  ++stats.malformed;
  if (stats.sample_errors.size() < 8) stats.sample_errors.push_back(message);
}

}  // namespace

Dataset load_edge_list(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path);

  Dataset dataset(directed);
  IngestStats& stats = dataset.stats;

  std::vector<RawEdge> rows;
  std::string line;
  std::int64_t line_no = 0;
  bool any_ts = false, any_no_ts = false;
  while (std::getline(in, line)) {
    ++line_no;
    ++stats.lines_read;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto fields = split_fields(stripped);
    if (fields.size() < 2 || fields.size() > 3) {
      note_error(stats, "line " + std::to_string(line_no) + ": expected 2 or 3 columns");
      continue;
    }
    RawEdge edge{fields[0], fields[1], std::numeric_limits<double>::quiet_NaN(), false, line_no};
    if (fields.size() == 3) {
      if (!parse_double(fields[2], edge.ts)) {
        note_error(stats, "line " + std::to_string(line_no) + ": bad timestamp '" + fields[2] + "'");
        continue;
      }
      edge.has_ts = true;
      any_ts = true;
    } else {
      any_no_ts = true;
    }
    rows.push_back(std::move(edge));
  }
  if (any_ts && any_no_ts) {
    throw DataError(path + ": timestamps must be present on all edges or none");
  }

  if (any_ts) {
    const bool sorted = std::is_sorted(rows.begin(), rows.end(),
                                       [](const RawEdge& a, const RawEdge& b) { return a.ts < b.ts; });
    if (!sorted) {
      std::stable_sort(rows.begin(), rows.end(),
                       [](const RawEdge& a, const RawEdge& b) { return a.ts < b.ts; });
      stats.resorted_by_timestamp = true;
    }
    if (!rows.empty()) {
      stats.min_timestamp = rows.front().ts;
      stats.max_timestamp = rows.back().ts;
    }
  }

  std::unordered_map<std::string, NodeId> ids;
  auto intern = [&](const std::string& label) {
    auto it = ids.find(label);
    if (it != ids.end()) return it->second;
    const NodeId id = dataset.graph.add_node();
    ids.emplace(label, id);
    dataset.node_names.push_back(label);
    return id;
  };

  EventIndex event = 0;
  for (const RawEdge& row : rows) {
    const NodeId s = intern(row.src);
    const NodeId d = intern(row.dst);
    if (s == d) {
      ++stats.dropped_self_loops;
      continue;
    }
    if (dataset.graph.linked(s, d)) {
      ++stats.dropped_duplicates;
      continue;
    }
    dataset.graph.add_edge(s, d, event++, row.ts);
    ++stats.edges_parsed;
  }
  // A node first seen as a target arrives at the event that chose it; fix up
  // arrivals assigned optimistically by add_node during interning.
  for (const TemporalEdge& e : dataset.graph.edges()) {
    auto& src_meta = dataset.graph.meta(e.src);
    auto& dst_meta = dataset.graph.meta(e.dst);
    src_meta.arrival = std::min(src_meta.arrival, e.event);
    dst_meta.arrival = std::min(dst_meta.arrival, e.event);
  }
  return dataset;
}

void load_node_sidecar(Dataset& dataset, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open node sidecar: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": missing header row");
  const auto header = split_fields(trim(line));
  if (header.empty() || header[0] != "node") {
    throw DataError(path + ": header must start with 'node'");
  }

  int arrival_col = -1, group_col = -1, fitness_col = -1;
  std::vector<std::pair<int, int>> covariate_cols;  // (file column, covariate index)
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c] == "arrival") {
      arrival_col = static_cast<int>(c);
    } else if (header[c] == "group") {
      group_col = static_cast<int>(c);
    } else if (header[c] == "fitness") {
      fitness_col = static_cast<int>(c);
    } else {
      covariate_cols.emplace_back(static_cast<int>(c), dataset.graph.add_covariate(header[c]));
    }
  }

  std::unordered_map<std::string, NodeId> ids;
  for (std::size_t i = 0; i < dataset.node_names.size(); ++i) {
    ids.emplace(dataset.node_names[i], static_cast<NodeId>(i));
  }
  std::unordered_map<std::string, int> groups;
  for (std::size_t i = 0; i < dataset.group_names.size(); ++i) {
    groups.emplace(dataset.group_names[i], static_cast<int>(i));
  }

  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto fields = split_fields(stripped);
    if (fields.empty()) continue;
    auto it = ids.find(fields[0]);
    if (it == ids.end()) continue;  // metadata for nodes outside the graph
    const NodeId v = it->second;
    auto field_at = [&](int c) -> std::string {
      return (c >= 0 && c < static_cast<int>(fields.size())) ? fields[static_cast<std::size_t>(c)]
                                                             : "";
    };
    if (const std::string a = field_at(arrival_col); !a.empty()) {
      double value;
      if (parse_double(a, value)) {
        dataset.graph.meta(v).arrival = static_cast<EventIndex>(value);
      } else {
        note_error(dataset.stats, path + " line " + std::to_string(line_no) + ": bad arrival");
      }
    }
    if (const std::string g = field_at(group_col); !g.empty()) {
      auto git = groups.find(g);
      if (git == groups.end()) {
        git = groups.emplace(g, static_cast<int>(dataset.group_names.size())).first;
        dataset.group_names.push_back(g);
      }
      dataset.graph.meta(v).group = git->second;
    }
    if (const std::string f = field_at(fitness_col); !f.empty()) {
      double value;
      if (parse_double(f, value)) {
        dataset.graph.meta(v).fitness = value;
      } else {
        note_error(dataset.stats, path + " line " + std::to_string(line_no) + ": bad fitness");
      }
    }
    for (const auto& [col, cov] : covariate_cols) {
      if (const std::string s = field_at(col); !s.empty()) {
        double value;
        if (parse_double(s, value)) dataset.graph.set_covariate(v, cov, value);
      }
    }
  }
}

void write_edge_list(const std::string& path, const TemporalGraph& graph,
                     const std::vector<std::string>* node_names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write edge list: " + path);
  out << "# source,target" << (graph.has_timestamps() ? ",timestamp" : "") << "\n";
  auto name = [&](NodeId v) {
    return node_names ? (*node_names)[static_cast<std::size_t>(v)] : std::to_string(v);
  };
  out.precision(17);
  for (const TemporalEdge& e : graph.edges()) {
    out << name(e.src) << ',' << name(e.dst);
    if (graph.has_timestamps()) out << ',' << e.timestamp;
    out << '\n';
  }
}

void write_node_sidecar(const std::string& path, const TemporalGraph& graph,
                        const std::vector<std::string>* node_names,
                        const std::vector<std::string>* group_names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write node sidecar: " + path);

  bool any_group = false, any_fitness = false;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    any_group = any_group || graph.meta(v).group >= 0;
    any_fitness = any_fitness || !std::isnan(graph.meta(v).fitness);
  }
  out << "node,arrival";
  if (any_group) out << ",group";
  if (any_fitness) out << ",fitness";
  for (const auto& cov : graph.covariate_names()) out << ',' << cov;
  out << '\n';
  out.precision(17);
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    const NodeMeta& meta = graph.meta(v);
    out << (node_names ? (*node_names)[static_cast<std::size_t>(v)] : std::to_string(v));
    out << ',' << meta.arrival;
    if (any_group) {
      out << ',';
      if (meta.group >= 0) {
        if (group_names && meta.group < static_cast<int>(group_names->size())) {
          out << (*group_names)[static_cast<std::size_t>(meta.group)];
        } else {
          out << meta.group;
        }
      }
    }
    if (any_fitness) {
      out << ',';
      if (!std::isnan(meta.fitness)) out << meta.fitness;
    }
    for (std::size_t c = 0; c < graph.covariate_names().size(); ++c) {
      out << ',';
      const double value = graph.covariate(v, static_cast<int>(c));
      if (!std::isnan(value)) out << value;
    }
    out << '\n';
  }
}

void write_symbol_table(const std::string& path, const std::vector<std::string>& node_names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write symbol table: " + path);
  out << "id,node\n";
  for (std::size_t i = 0; i < node_names.size(); ++i) {
    out << i << ',' << node_names[i] << '\n';
  }
}

}  // namespace netchoice
