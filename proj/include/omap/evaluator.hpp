#ifndef OMAP_EVALUATOR_HPP_
#define OMAP_EVALUATOR_HPP_

// In-process entry point for host-language bindings and the CLI: an ontology,
// its class index and the base distance matrix, loaded once and reused.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omap/error.hpp"
#include "omap/matrix.hpp"
#include "omap/metrics.hpp"
#include "omap/obce.hpp"
#include "omap/ontology.hpp"
#include "omap/report.hpp"

namespace omap {

class Evaluator {
 public:
  Evaluator(OntologyGraph graph, ClassIndex classes, std::size_t threads = 1)
      : graph_(std::move(graph)),
        classes_(std::move(classes)),
        base_(all_pairs_distance(graph_, classes_, threads)),
        digest_(ontology_digest(classes_, base_)) {}

  /// AudioSet-style taxonomy JSON plus "index,mid,display_name" CSV.
  static Evaluator load(const std::filesystem::path& ontology_path,
                        const std::filesystem::path& class_index_path,
                        std::size_t threads = 1) {
    OntologyGraph graph = load_ontology(ontology_path);
    ClassIndex classes = load_class_index(class_index_path, graph);
    return Evaluator(std::move(graph), std::move(classes), threads);
  }

  const OntologyGraph& graph() const { return graph_; }
  const ClassIndex& classes() const { return classes_; }
  const DistanceMatrix& distances() const { return base_; }
  const std::string& digest() const { return digest_; }
  std::size_t class_count() const { return classes_.size(); }

  EvaluationReport evaluate(const ScoreMatrix& scores, const LabelMatrix& labels,
                            const EvaluationOptions& options = {}) const {
    check_width(scores.cols());
    check_width(labels.cols());
    return ontology_aware_map(scores, labels, base_, classes_, options);
  }

  /// Row-major host buffers of n_samples x class_count() binary32 values.
  EvaluationReport evaluate(std::span<const float> scores, std::span<const float> labels,
                            std::size_t n_samples, const EvaluationOptions& options = {}) const {
    return evaluate(to_scores(scores, n_samples), to_labels(labels, n_samples), options);
  }

  WeightMatrix obce_weights(const LabelMatrix& labels, double beta, bool allow_empty = false,
                            std::size_t threads = 1) const {
    check_width(labels.cols());
    return obce_weights_batch(labels, base_, beta, allow_empty, threads);
  }

  WeightMatrix obce_weights(std::span<const float> labels, std::size_t n_samples, double beta,
                            bool allow_empty = false, std::size_t threads = 1) const {
    return obce_weights(to_labels(labels, n_samples), beta, allow_empty, threads);
  }

 private:
  void check_width(std::size_t cols) const {
    if (cols != classes_.size()) {
      throw Error(ErrorCode::kShape, "class count mismatch: input has " + std::to_string(cols) +
                                         " classes, class index has " +
                                         std::to_string(classes_.size()));
    }
  }

  void check_buffer(std::size_t size, std::size_t n_samples) const {
    if (n_samples != 0 && size % n_samples == 0 && size / n_samples != classes_.size()) {
      throw Error(ErrorCode::kShape, "class count mismatch: buffer holds " +
                                         std::to_string(n_samples) + " rows of " +
                                         std::to_string(size / n_samples) +
                                         " classes, class index has " +
                                         std::to_string(classes_.size()));
    }
    if (n_samples == 0 || size != n_samples * classes_.size()) {
      throw Error(ErrorCode::kShape, "buffer of " + std::to_string(size) +
                                         " values does not hold " + std::to_string(n_samples) +
                                         " rows of " + std::to_string(classes_.size()) +
                                         " classes");
    }
  }

  ScoreMatrix to_scores(std::span<const float> data, std::size_t n_samples) const {
    check_buffer(data.size(), n_samples);
    ScoreMatrix m(n_samples, classes_.size(), std::vector<float>(data.begin(), data.end()));
    validate_scores(m);
    return m;
  }

  LabelMatrix to_labels(std::span<const float> data, std::size_t n_samples) const {
    check_buffer(data.size(), n_samples);
    std::vector<std::uint8_t> bits(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i] != 0.0f && data[i] != 1.0f) {
        throw Error(ErrorCode::kBinarity, "label is not 0 or 1 at " +
                                              cell_name(i / classes_.size(),
                                                        i % classes_.size()));
      }
      bits[i] = data[i] == 1.0f;
    }
    return LabelMatrix(n_samples, classes_.size(), std::move(bits));
  }

  OntologyGraph graph_;
  ClassIndex classes_;
  DistanceMatrix base_;
  std::string digest_;
};

}  // namespace omap

#endif  // OMAP_EVALUATOR_HPP_
