#ifndef OMAP_ONTOLOGY_HPP_
#define OMAP_ONTOLOGY_HPP_

// Class taxonomies as undirected graphs, and the shortest-path distance
// matrices between evaluated classes that every ontology-aware metric and
// loss weight is derived from.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "omap/detail/text.hpp"
#include "omap/error.hpp"
#include "omap/parallel.hpp"

namespace omap {

using Distance = std::uint32_t;

struct OntologyNode {
  std::string id;
  std::string display_name;
  std::vector<std::string> child_ids;
  // Any other fields of the source record ("restrictions", "description",
  // ...). Carried along untouched.
  nlohmann::json metadata = nlohmann::json::object();
};

/// Undirected, unweighted, loop-free graph over ontology nodes. Immutable once
/// built; use parse_ontology() or parse_edge_list() to obtain one.
class OntologyGraph {
 public:
  OntologyGraph() = default;

  /// Builds the graph from parent->child links. Validates id uniqueness and
  /// that every child id names a node.
  static OntologyGraph from_nodes(std::vector<OntologyNode> nodes) {
    OntologyGraph graph;
    graph.nodes_ = std::move(nodes);
    graph.index_nodes();
    graph.adjacency_.resize(graph.nodes_.size());
    for (std::size_t parent = 0; parent < graph.nodes_.size(); ++parent) {
      for (const std::string& child_id : graph.nodes_[parent].child_ids) {
        const auto child = graph.find(child_id);
        if (!child) {
          throw Error(ErrorCode::kDanglingReference,
                      "node '" + graph.nodes_[parent].id +
                          "' lists unknown child_id '" + child_id + "'");
        }
        if (*child == parent) {
          throw Error(ErrorCode::kSelfLoop,
                      "node '" + child_id + "' lists itself as a child");
        }
        graph.add_edge(parent, *child);
      }
    }
    graph.finalize();
    return graph;
  }

  /// Builds the graph from explicit undirected edges between named vertices.
  static OntologyGraph from_edges(
      const std::vector<std::string>& names,
      const std::vector<std::pair<std::string, std::string>>& edges) {
    OntologyGraph graph;
    graph.nodes_.reserve(names.size());
    for (const std::string& name : names) {
      graph.nodes_.push_back(OntologyNode{name, name, {}, nlohmann::json::object()});
    }
    graph.index_nodes();
    graph.adjacency_.resize(graph.nodes_.size());
    for (const auto& [a, b] : edges) {
      const auto u = graph.find(a);
      const auto v = graph.find(b);
      if (!u || !v) {
        throw Error(ErrorCode::kDanglingReference,
                    "edge '" + a + " " + b + "' names unknown vertex '" +
                        (u ? b : a) + "'");
      }
      if (*u == *v) {
        throw Error(ErrorCode::kSelfLoop, "self-loop on vertex '" + a + "'");
      }
      graph.add_edge(*u, *v);
    }
    graph.finalize();
    return graph;
  }

  std::size_t vertex_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  const OntologyNode& node(std::size_t vertex) const { return nodes_.at(vertex); }
  std::span<const OntologyNode> nodes() const { return nodes_; }

  std::span<const std::size_t> neighbors(std::size_t vertex) const {
    return adjacency_.at(vertex);
  }

  std::optional<std::size_t> find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  /// Hop counts from `source` to every vertex; unreachable vertices get
  /// kUnreachable.
  static constexpr Distance kUnreachable = std::numeric_limits<Distance>::max();

  std::vector<Distance> bfs(std::size_t source) const {
    std::vector<Distance> dist(nodes_.size(), kUnreachable);
    std::vector<std::size_t> frontier{source};
    dist.at(source) = 0;
    std::vector<std::size_t> next;
    for (Distance depth = 1; !frontier.empty(); ++depth) {
      next.clear();
      for (std::size_t u : frontier) {
        for (std::size_t v : adjacency_[u]) {
          if (dist[v] == kUnreachable) {
            dist[v] = depth;
            next.push_back(v);
          }
        }
      }
      frontier.swap(next);
    }
    return dist;
  }

 private:
  void index_nodes() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].id.empty()) {
        throw Error(ErrorCode::kParse, "node " + std::to_string(i) + " has an empty id");
      }
      if (!by_id_.emplace(nodes_[i].id, i).second) {
        throw Error(ErrorCode::kDuplicateId, "duplicate node id '" + nodes_[i].id + "'");
      }
    }
  }

  void add_edge(std::size_t u, std::size_t v) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }

  // Sorts neighbor lists and collapses duplicate edges.
  void finalize() {
    edge_count_ = 0;
    for (auto& list : adjacency_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      edge_count_ += list.size();
    }
    edge_count_ /= 2;
  }

  std::vector<OntologyNode> nodes_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::size_t edge_count_ = 0;
};

/// Parses the AudioSet ontology layout: a JSON array of records carrying at
/// least "id", "name" and "child_ids".
inline OntologyGraph parse_ontology(std::string_view document) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("taxonomy is not valid JSON: ") + e.what());
  }
  if (!root.is_array()) {
    throw Error(ErrorCode::kParse, "taxonomy must be a JSON array of records");
  }
  std::vector<OntologyNode> nodes;
  nodes.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& record = root[i];
    const auto where = "taxonomy record " + std::to_string(i);
    if (!record.is_object()) throw Error(ErrorCode::kParse, where + " is not an object");
    const auto id = record.find("id");
    const auto name = record.find("name");
    const auto children = record.find("child_ids");
    if (id == record.end() || !id->is_string()) {
      throw Error(ErrorCode::kParse, where + " lacks a string \"id\"");
    }
    if (name == record.end() || !name->is_string()) {
      throw Error(ErrorCode::kParse, where + " lacks a string \"name\"");
    }
    if (children == record.end() || !children->is_array()) {
      throw Error(ErrorCode::kParse, where + " lacks a \"child_ids\" array");
    }
    OntologyNode node;
    node.id = id->get<std::string>();
    node.display_name = name->get<std::string>();
    for (const auto& child : *children) {
      if (!child.is_string()) {
        throw Error(ErrorCode::kParse, where + " has a non-string child id");
      }
      node.child_ids.push_back(child.get<std::string>());
    }
    for (auto it = record.begin(); it != record.end(); ++it) {
      if (it.key() != "id" && it.key() != "name" && it.key() != "child_ids") {
        node.metadata[it.key()] = it.value();
      }
    }
    nodes.push_back(std::move(node));
  }
  return OntologyGraph::from_nodes(std::move(nodes));
}

/// Parses the edge-list layout: vertex names one per line, a blank line, then
/// one "name name" edge per line.
inline OntologyGraph parse_edge_list(std::string_view document) {
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> edges;
  bool in_edges = false;
  std::size_t line_no = 0;
  for (std::string_view raw : detail::split_lines(document)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) {
      if (!names.empty()) in_edges = true;
      continue;
    }
    if (!in_edges) {
      names.emplace_back(line);
      continue;
    }
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      std::size_t end = pos;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
      if (end > pos) tokens.emplace_back(line.substr(pos, end - pos));
      pos = end;
    }
    if (tokens.size() != 2) {
      throw Error(ErrorCode::kParse, "edge list line " + std::to_string(line_no) +
                                         ": expected two vertex names");
    }
    edges.emplace_back(std::move(tokens[0]), std::move(tokens[1]));
  }
  if (names.empty()) throw Error(ErrorCode::kParse, "edge list declares no vertices");
  return OntologyGraph::from_edges(names, edges);
}

inline OntologyGraph load_ontology(const std::filesystem::path& path) {
  return parse_ontology(detail::read_file(path));
}

inline OntologyGraph load_edge_list(const std::filesystem::path& path) {
  return parse_edge_list(detail::read_file(path));
}

struct ClassEntry {
  std::size_t column = 0;
  std::string node_id;
  std::string display_name;
  std::size_t vertex = 0;
};

/// Maps matrix columns 0..C-1 onto graph vertices.
class ClassIndex {
 public:
  ClassIndex() = default;

  /// Entries may arrive in any order; columns must cover 0..C-1 exactly once
  /// and each node id may appear only once.
  static ClassIndex from_entries(std::vector<ClassEntry> entries,
                                 const OntologyGraph& graph) {
    if (entries.empty()) throw Error(ErrorCode::kArgument, "class index is empty");
    std::sort(entries.begin(), entries.end(),
              [](const ClassEntry& a, const ClassEntry& b) { return a.column < b.column; });
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      ClassEntry& entry = entries[i];
      if (entry.column != i) {
        throw Error(i > 0 && entry.column == entries[i - 1].column
                        ? ErrorCode::kDuplicateId
                        : ErrorCode::kRange,
                    "class index columns must be 0.." + std::to_string(entries.size() - 1) +
                        " without gaps or duplicates (offending column " +
                        std::to_string(entry.column) + ")");
      }
      const auto vertex = graph.find(entry.node_id);
      if (!vertex) {
        throw Error(ErrorCode::kDanglingReference,
                    "class " + std::to_string(i) + " refers to node '" + entry.node_id +
                        "' which is not in the ontology");
      }
      if (!seen.emplace(entry.node_id, i).second) {
        throw Error(ErrorCode::kDuplicateId,
                    "node '" + entry.node_id + "' is mapped to columns " +
                        std::to_string(seen[entry.node_id]) + " and " + std::to_string(i));
      }
      entry.vertex = *vertex;
      if (entry.display_name.empty()) entry.display_name = graph.node(*vertex).display_name;
    }
    ClassIndex index;
    index.entries_ = std::move(entries);
    return index;
  }

  /// Every vertex of the graph, in graph order.
  static ClassIndex all_vertices(const OntologyGraph& graph) {
    std::vector<ClassEntry> entries;
    for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
      entries.push_back({v, graph.node(v).id, graph.node(v).display_name, v});
    }
    return from_entries(std::move(entries), graph);
  }

  static ClassIndex from_ids(const std::vector<std::string>& ids,
                             const OntologyGraph& graph) {
    std::vector<ClassEntry> entries;
    for (std::size_t i = 0; i < ids.size(); ++i) entries.push_back({i, ids[i], "", 0});
    return from_entries(std::move(entries), graph);
  }

  std::size_t size() const { return entries_.size(); }
  const ClassEntry& operator[](std::size_t column) const { return entries_.at(column); }
  std::span<const ClassEntry> entries() const { return entries_; }

 private:
  std::vector<ClassEntry> entries_;
};

/// Parses "index,mid,display_name" CSV (header row required).
inline ClassIndex parse_class_index(std::string_view document, const OntologyGraph& graph) {
  const auto lines = detail::split_lines(document);
  std::vector<ClassEntry> entries;
  bool header = true;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (detail::trim(lines[n]).empty()) continue;
    const auto fields = detail::split_csv_record(lines[n]);
    const std::string where = "class index line " + std::to_string(n + 1);
    if (!fields || fields->size() != 3) {
      throw Error(ErrorCode::kParse, where + ": expected 3 comma-separated fields");
    }
    if (header) {
      header = false;
      continue;
    }
    const auto column = detail::parse_number<std::size_t>((*fields)[0]);
    if (!column) throw Error(ErrorCode::kParse, where + ": index is not a nonnegative integer");
    entries.push_back({*column, std::string(detail::trim((*fields)[1])), (*fields)[2], 0});
  }
  if (entries.empty()) throw Error(ErrorCode::kParse, "class index has no entries");
  return ClassIndex::from_entries(std::move(entries), graph);
}

inline ClassIndex load_class_index(const std::filesystem::path& path,
                                   const OntologyGraph& graph) {
  return parse_class_index(detail::read_file(path), graph);
}

/// Symmetric C x C matrix of hop distances between evaluated classes, either
/// the base matrix or its thresholded form at a coarse-grained level.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  /// Takes row-major values; mu is computed here.
  DistanceMatrix(std::size_t size, std::vector<Distance> values,
                 std::optional<Distance> level, Distance d_max)
      : size_(size), values_(std::move(values)), level_(level), d_max_(d_max) {
    if (values_.size() != size_ * size_) {
      throw Error(ErrorCode::kShape, "distance matrix payload does not match its size");
    }
    // Integer sum is exact; one division gives the mean.
    std::uint64_t total = 0;
    for (Distance d : values_) total += d;
    mu_ = values_.empty() ? 0.0
                          : static_cast<double>(total) / static_cast<double>(values_.size());
  }

  std::size_t size() const { return size_; }
  Distance operator()(std::size_t i, std::size_t j) const { return values_[i * size_ + j]; }
  std::span<const Distance> row(std::size_t i) const {
    return std::span<const Distance>(values_).subspan(i * size_, size_);
  }
  std::span<const Distance> values() const { return values_; }

  /// nullopt for the unthresholded matrix.
  std::optional<Distance> level() const { return level_; }
  bool is_base() const { return !level_.has_value(); }
  double mu() const { return mu_; }
  /// Largest entry of the base matrix this one was derived from.
  Distance d_max() const { return d_max_; }

 private:
  std::size_t size_ = 0;
  std::vector<Distance> values_;
  std::optional<Distance> level_;
  Distance d_max_ = 0;
  double mu_ = 0.0;
};

/// Evaluated classes that cannot be reached from the first class, in column
/// order. Empty when the class set is connected.
inline std::vector<std::size_t> disconnected_classes(const OntologyGraph& graph,
                                                     const ClassIndex& classes) {
  std::vector<std::size_t> unreachable;
  if (classes.size() == 0) return unreachable;
  const auto dist = graph.bfs(classes[0].vertex);
  for (const ClassEntry& entry : classes.entries()) {
    if (dist[entry.vertex] == OntologyGraph::kUnreachable) unreachable.push_back(entry.column);
  }
  return unreachable;
}

/// BFS from every class vertex over the whole graph (paths may pass through
/// vertices that are not evaluated classes), restricted to the class columns.
inline DistanceMatrix all_pairs_distance(const OntologyGraph& graph, const ClassIndex& classes,
                                         std::size_t threads = 1) {
  const std::size_t count = classes.size();
  std::vector<Distance> values(count * count);
  parallel_for(count, threads, [&](std::size_t i) {
    const auto dist = graph.bfs(classes[i].vertex);
    for (std::size_t j = 0; j < count; ++j) {
      const Distance d = dist[classes[j].vertex];
      if (d == OntologyGraph::kUnreachable) {
        throw Error(ErrorCode::kDisconnected,
                    "classes '" + classes[i].node_id + "' and '" + classes[j].node_id +
                        "' are not connected in the ontology");
      }
      values[i * count + j] = d;
    }
  });
  const Distance d_max = values.empty() ? 0 : *std::max_element(values.begin(), values.end());
  return DistanceMatrix(count, std::move(values), std::nullopt, d_max);
}

/// Keeps entries strictly greater than `level`, zeroing the rest.
inline DistanceMatrix threshold_distance(const DistanceMatrix& base, Distance level) {
  if (!base.is_base()) {
    throw Error(ErrorCode::kArgument, "threshold_distance expects an unthresholded matrix");
  }
  if (level > base.d_max()) {
    throw Error(ErrorCode::kRange, "level " + std::to_string(level) +
                                       " exceeds the maximum distance " +
                                       std::to_string(base.d_max()));
  }
  std::vector<Distance> values(base.values().begin(), base.values().end());
  for (Distance& d : values) {
    if (d <= level) d = 0;
  }
  return DistanceMatrix(base.size(), std::move(values), level, base.d_max());
}

/// Fingerprint of the evaluated class set and its base distances. Two reports
/// are comparable only if their digests agree.
inline std::string ontology_digest(const ClassIndex& classes, const DistanceMatrix& base) {
  detail::Fnv1a64 hash;
  hash.update_u64(classes.size());
  for (const ClassEntry& entry : classes.entries()) {
    hash.update(entry.node_id);
    hash.update(std::string_view("\0", 1));
  }
  for (Distance d : base.values()) hash.update_u64(d);
  return hash.hex();
}

}  // namespace omap

#endif  // OMAP_ONTOLOGY_HPP_
