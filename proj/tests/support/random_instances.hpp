#ifndef OMAP_TESTS_SUPPORT_RANDOM_INSTANCES_HPP_
#define OMAP_TESTS_SUPPORT_RANDOM_INSTANCES_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "omap/omap.hpp"
#include "support/oracle.hpp"

namespace testing_support {

using Rng = std::mt19937_64;
using Edge = std::pair<std::size_t, std::size_t>;

struct RandomGraph {
  std::vector<std::string> names;
  std::vector<Edge> edges;
  omap::OntologyGraph graph;
};

inline std::string vertex_name(std::size_t v) { return "v" + std::to_string(v); }

inline RandomGraph make_graph(std::size_t vertices, const std::vector<Edge>& edges) {
  RandomGraph out;
  for (std::size_t v = 0; v < vertices; ++v) out.names.push_back(vertex_name(v));
  out.edges = edges;
  std::vector<std::pair<std::string, std::string>> named;
  for (const auto& [a, b] : edges) named.emplace_back(vertex_name(a), vertex_name(b));
  out.graph = omap::OntologyGraph::from_edges(out.names, named);
  return out;
}

/// Random spanning tree plus each remaining pair joined with probability
/// `extra`.
inline RandomGraph random_connected_graph(Rng& rng, std::size_t vertices, double extra) {
  std::vector<Edge> edges;
  std::vector<std::size_t> perm(vertices);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 1; i < vertices; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    edges.emplace_back(perm[pick(rng)], perm[i]);
  }
  std::bernoulli_distribution coin(extra);
  for (std::size_t a = 0; a < vertices; ++a) {
    for (std::size_t b = a + 1; b < vertices; ++b) {
      if (coin(rng)) edges.emplace_back(a, b);
    }
  }
  return make_graph(vertices, edges);
}

/// Possibly disconnected graph: each pair joined with probability p.
inline RandomGraph random_graph(Rng& rng, std::size_t vertices, double p) {
  std::vector<Edge> edges;
  std::bernoulli_distribution coin(p);
  for (std::size_t a = 0; a < vertices; ++a) {
    for (std::size_t b = a + 1; b < vertices; ++b) {
      if (coin(rng)) edges.emplace_back(a, b);
    }
  }
  return make_graph(vertices, edges);
}

struct Instance {
  RandomGraph graph;
  std::vector<std::size_t> class_vertices;
  omap::ClassIndex classes;
  omap::ScoreMatrix scores;
  omap::LabelMatrix labels;
  // Oracle-side copies.
  oracle::Grid score_grid;
  std::vector<std::vector<int>> label_grid;
  oracle::IntGrid base;
};

inline omap::ScoreMatrix random_scores(Rng& rng, std::size_t rows, std::size_t cols) {
  omap::ScoreMatrix scores(rows, cols);
  std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
  std::uniform_int_distribution<int> style(0, 2);
  std::uniform_int_distribution<int> eighth(0, 8);
  for (std::size_t c = 0; c < cols; ++c) {
    // Style 0: continuous; 1: heavy ties on a 1/8 grid; 2: mixed.
    const int s = style(rng);
    for (std::size_t r = 0; r < rows; ++r) {
      const bool tie = s == 1 || (s == 2 && r % 2 == 0);
      scores(r, c) = tie ? static_cast<float>(eighth(rng)) / 8.0f : uniform(rng);
    }
  }
  return scores;
}

/// Every row gets at least one label unless allow_empty.
inline omap::LabelMatrix random_labels(Rng& rng, std::size_t rows, std::size_t cols, double density,
                                       bool allow_empty = false) {
  omap::LabelMatrix labels(rows, cols);
  std::bernoulli_distribution coin(density);
  std::uniform_int_distribution<std::size_t> any(0, cols - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    bool some = false;
    for (std::size_t c = 0; c < cols; ++c) {
      labels(r, c) = coin(rng);
      some = some || labels(r, c);
    }
    if (!some && !allow_empty) labels(r, any(rng)) = 1;
  }
  return labels;
}

inline Instance random_instance(Rng& rng, std::size_t max_samples, std::size_t max_classes,
                                std::size_t max_vertices) {
  std::uniform_int_distribution<std::size_t> vertex_count(2, max_vertices);
  std::uniform_real_distribution<double> extra(0.0, 0.3);
  Instance inst;
  inst.graph = random_connected_graph(rng, vertex_count(rng), extra(rng));
  const std::size_t vertices = inst.graph.names.size();
  std::uniform_int_distribution<std::size_t> class_count(2, std::min(max_classes, vertices));
  const std::size_t n_classes = class_count(rng);
  std::vector<std::size_t> perm(vertices);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  inst.class_vertices.assign(perm.begin(), perm.begin() + static_cast<long>(n_classes));
  std::vector<std::string> ids;
  for (std::size_t v : inst.class_vertices) ids.push_back(vertex_name(v));
  inst.classes = omap::ClassIndex::from_ids(ids, inst.graph.graph);

  std::uniform_int_distribution<std::size_t> sample_count(1, max_samples);
  std::uniform_real_distribution<double> density(0.1, 0.5);
  const std::size_t n_samples = sample_count(rng);
  inst.scores = random_scores(rng, n_samples, n_classes);
  inst.labels = random_labels(rng, n_samples, n_classes, density(rng));

  inst.score_grid.assign(n_samples, std::vector<double>(n_classes));
  inst.label_grid.assign(n_samples, std::vector<int>(n_classes));
  for (std::size_t r = 0; r < n_samples; ++r) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      inst.score_grid[r][c] = static_cast<double>(inst.scores(r, c));
      inst.label_grid[r][c] = inst.labels(r, c);
    }
  }
  inst.base = oracle::restrict(oracle::floyd_warshall(vertices, inst.graph.edges),
                               inst.class_vertices);
  return inst;
}

/// Distance matrix as computed by the library, for instance-level tests.
inline omap::DistanceMatrix library_distances(const Instance& inst) {
  return omap::all_pairs_distance(inst.graph.graph, inst.classes);
}

}  // namespace testing_support

#endif  // OMAP_TESTS_SUPPORT_RANDOM_INSTANCES_HPP_
