#ifndef OMAP_METRICS_HPP_
#define OMAP_METRICS_HPP_

// Average precision, its ontology-aware variant, and the aggregate scores
// built from them.
//
// A class's precision-recall curve is traced over thresholds equal to the
// distinct score values of that class, highest first; a sample is predicted
// positive when its score is >= the threshold. In the ontology-aware variant
// every false positive counts with the weight W[n][c] instead of 1, where W is
// the sample's nearest-label graph distance (after coarse-grained
// thresholding) divided by the mean of the thresholded distance matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omap/error.hpp"
#include "omap/matrix.hpp"
#include "omap/ontology.hpp"
#include "omap/parallel.hpp"
#include "omap/report.hpp"

namespace omap {

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t true_positives = 0;
  double false_positives = 0.0;  // weighted when weights are supplied
};

struct PRCurve {
  std::vector<PRPoint> points;  // thresholds strictly descending
  std::size_t positives = 0;
};

namespace detail {

/// Sample indices by descending score; ties keep index order.
inline std::vector<std::uint32_t> descending_order(std::span<const float> scores) {
  std::vector<std::uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

inline std::size_t count_positives(std::span<const std::uint8_t> labels) {
  std::size_t positives = 0;
  for (std::uint8_t y : labels) positives += (y != 0);
  return positives;
}

/// Walks the curve one distinct threshold at a time and calls
/// visit(threshold, true_positives, weighted_false_positives). Within a group
/// of tied scores the false-positive weights are summed in ascending value
/// order, so the result depends only on the multiset of (score, label,
/// weight) triples and not on sample order.
template <class WeightOf, class Visit>
void sweep_curve(std::span<const float> scores, std::span<const std::uint8_t> labels,
                 std::span<const std::uint32_t> order, WeightOf&& weight_of, Visit&& visit) {
  std::size_t tp = 0;
  double fp = 0.0;
  std::vector<double> tied;
  std::size_t i = 0;
  while (i < order.size()) {
    const float threshold = scores[order[i]];
    tied.clear();
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      const std::uint32_t n = order[i];
      if (labels[n] != 0) {
        ++tp;
      } else {
        tied.push_back(weight_of(n));
      }
    }
    if (tied.size() > 1) std::sort(tied.begin(), tied.end());
    double group = 0.0;
    for (double w : tied) group += w;
    fp += group;
    visit(static_cast<double>(threshold), tp, fp);
  }
}

inline double precision_of(std::size_t tp, double fp) {
  const double denom = static_cast<double>(tp) + fp;
  return denom > 0.0 ? static_cast<double>(tp) / denom : 1.0;
}

/// Step-interpolated area, accumulated point by point.
class AreaAccumulator {
 public:
  explicit AreaAccumulator(std::size_t positives) : positives_(positives) {}
  // Sums (tp_k - tp_{k-1}) * P_k and divides by the positive count once, so a
  // curve with precision 1 throughout gives exactly 1.
  void add(std::size_t tp, double precision) {
    area_ += static_cast<double>(tp - previous_tp_) * precision;
    previous_tp_ = tp;
  }
  double value() const {
    return std::clamp(area_ / static_cast<double>(positives_), 0.0, 1.0);
  }

 private:
  std::size_t positives_;
  std::size_t previous_tp_ = 0;
  double area_ = 0.0;
};

inline void check_column_shapes(std::size_t scores, std::size_t labels) {
  if (scores != labels) {
    throw Error(ErrorCode::kShape, "score column has " + std::to_string(scores) +
                                       " entries but label column has " +
                                       std::to_string(labels));
  }
  if (scores == 0) throw Error(ErrorCode::kShape, "empty score column");
}

inline PRCurve build_curve(std::span<const float> scores, std::span<const std::uint8_t> labels,
                           std::span<const double> weights) {
  PRCurve curve;
  curve.positives = count_positives(labels);
  if (curve.positives == 0) {
    throw Error(ErrorCode::kNoPositives, "column has no positive labels");
  }
  const auto order = descending_order(scores);
  const bool weighted = !weights.empty();
  sweep_curve(
      scores, labels, order,
      [&](std::uint32_t n) { return weighted ? weights[n] : 1.0; },
      [&](double threshold, std::size_t tp, double fp) {
        curve.points.push_back({threshold, precision_of(tp, fp),
                                static_cast<double>(tp) / static_cast<double>(curve.positives),
                                tp, fp});
      });
  return curve;
}

}  // namespace detail

/// Classic precision-recall curve of one class.
inline PRCurve pr_curve(std::span<const float> scores, std::span<const std::uint8_t> labels) {
  detail::check_column_shapes(scores.size(), labels.size());
  return detail::build_curve(scores, labels, {});
}

/// Precision-recall curve with each false positive counted at its weight.
inline PRCurve pr_curve(std::span<const float> scores, std::span<const std::uint8_t> labels,
                        std::span<const double> weights) {
  detail::check_column_shapes(scores.size(), labels.size());
  if (weights.size() != scores.size()) {
    throw Error(ErrorCode::kShape, "weight column length does not match the score column");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kRange, "false-positive weights must be finite and >= 0");
    }
  }
  return detail::build_curve(scores, labels, weights);
}

/// Area under the curve: sum over points of (R_k - R_{k-1}) * P_k, R_0 = 0.
inline double average_precision(const PRCurve& curve) {
  if (curve.positives == 0) {
    throw Error(ErrorCode::kNoPositives, "curve has no positive labels");
  }
  detail::AreaAccumulator area(curve.positives);
  for (const PRPoint& point : curve.points) area.add(point.true_positives, point.precision);
  return area.value();
}

// ---------------------------------------------------------------------------
// Reweighting

/// What to do with a sample that carries no positive label.
enum class EmptyLabelPolicy {
  kError,    // reject the input
  kMaxWeight // treat every false positive on it as maximally serious
};

/// What to do with a class that has no positive label.
enum class ZeroPositivePolicy {
  kSkip,   // exclude from all means
  kError,
};

inline const char* policy_name(EmptyLabelPolicy p) {
  return p == EmptyLabelPolicy::kError ? "error" : "max_weight";
}
inline const char* policy_name(ZeroPositivePolicy p) {
  return p == ZeroPositivePolicy::kSkip ? "skip" : "error";
}

struct ReweightMatrix {
  WeightMatrix values;
  Distance level = 0;
};

namespace detail {

inline void check_empty_rows(const LabelMatrix& labels, EmptyLabelPolicy policy) {
  if (policy != EmptyLabelPolicy::kError) return;
  for (std::size_t n = 0; n < labels.rows(); ++n) {
    const auto row = labels.row(n);
    if (std::none_of(row.begin(), row.end(), [](std::uint8_t y) { return y != 0; })) {
      throw Error(ErrorCode::kEmptyLabels,
                  "sample " + std::to_string(n) + " has an empty label set");
    }
  }
}

}  // namespace detail

/// W[n][c] = min{ D[c][k] : k in L_n } / mu for a thresholded distance matrix
/// D with mean mu. The matrix must be thresholded at some level (a base
/// matrix is treated as level 0 only if passed through threshold_distance).
inline ReweightMatrix reweight_matrix(const LabelMatrix& labels, const DistanceMatrix& dist,
                                      EmptyLabelPolicy policy = EmptyLabelPolicy::kError) {
  if (labels.cols() != dist.size()) {
    throw Error(ErrorCode::kShape, "label matrix has " + std::to_string(labels.cols()) +
                                       " classes but the distance matrix has " +
                                       std::to_string(dist.size()));
  }
  if (dist.is_base()) {
    throw Error(ErrorCode::kArgument, "reweight_matrix expects a thresholded distance matrix");
  }
  if (!(dist.mu() > 0.0)) {
    throw Error(ErrorCode::kDegenerateLevel,
                "distance matrix at level " + std::to_string(*dist.level()) +
                    " is all zero; the reweight matrix is undefined");
  }
  detail::check_empty_rows(labels, policy);
  const std::size_t classes = labels.cols();
  ReweightMatrix out{WeightMatrix(labels.rows(), classes), *dist.level()};
  for (std::size_t n = 0; n < labels.rows(); ++n) {
    const auto targets = label_set(labels, n);
    for (std::size_t c = 0; c < classes; ++c) {
      Distance nearest = dist.d_max();
      if (!targets.empty()) {
        nearest = dist(c, targets.front());
        for (std::size_t k : targets) nearest = std::min(nearest, dist(c, k));
      }
      out.values(n, c) = static_cast<double>(nearest) / dist.mu();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-level and aggregate evaluation

struct LevelResult {
  Distance level = 0;
  std::vector<std::optional<double>> per_class;  // nullopt: class skipped
  double mean = 0.0;                              // over evaluated classes
};

/// Inclusive range of coarse-grained levels.
struct LevelRange {
  Distance first = 0;
  Distance last = 0;
  std::size_t count() const { return static_cast<std::size_t>(last - first) + 1; }
  bool operator==(const LevelRange&) const = default;
};

struct EvaluationOptions {
  // Default: 0 .. d_max - 1, or 0 .. d_max with include_top_level.
  std::optional<LevelRange> levels;
  bool include_top_level = false;
  EmptyLabelPolicy empty_labels = EmptyLabelPolicy::kError;
  ZeroPositivePolicy zero_positive = ZeroPositivePolicy::kSkip;
  std::size_t threads = 1;
};

inline LevelRange resolve_levels(const EvaluationOptions& options, Distance d_max) {
  if (options.levels) {
    const LevelRange range = *options.levels;
    if (range.first > range.last) {
      throw Error(ErrorCode::kRange, "level range " + std::to_string(range.first) + ".." +
                                         std::to_string(range.last) + " is empty");
    }
    if (range.last > d_max) {
      throw Error(ErrorCode::kRange, "level " + std::to_string(range.last) +
                                         " exceeds the maximum class distance " +
                                         std::to_string(d_max));
    }
    return range;
  }
  if (options.include_top_level) return {0, d_max};
  if (d_max == 0) {
    throw Error(ErrorCode::kDegenerateLevel,
                "all evaluated classes are at distance 0; no coarse-grained level exists");
  }
  return {0, static_cast<Distance>(d_max - 1)};
}

namespace detail {

/// Everything about an instance that does not depend on the level: per-class
/// sort orders, positive counts, and the nearest-label base distance of every
/// (class, sample) pair. Thresholding commutes with the minimum over labels
/// (min of thresholded distances is 0 iff some label is within the level), so
/// each level's reweight column follows from `nearest` directly.
class Workspace {
 public:
  static constexpr Distance kNoLabels = OntologyGraph::kUnreachable;

  Workspace(const ScoreMatrix& scores, const LabelMatrix& labels, const DistanceMatrix& base,
            const EvaluationOptions& options)
      : scores_(scores), labels_(labels), base_(base) {
    validate_scores(scores);
    validate_labels(labels);
    if (scores.rows() != labels.rows() || scores.cols() != labels.cols()) {
      throw Error(ErrorCode::kShape, "scores are " + std::to_string(scores.rows()) + "x" +
                                         std::to_string(scores.cols()) + " but labels are " +
                                         std::to_string(labels.rows()) + "x" +
                                         std::to_string(labels.cols()));
    }
    if (!base.is_base()) {
      throw Error(ErrorCode::kArgument, "evaluation expects the unthresholded distance matrix");
    }
    if (scores.cols() != base.size()) {
      throw Error(ErrorCode::kShape, "class count mismatch: matrices have " +
                                         std::to_string(scores.cols()) +
                                         " classes, distance matrix has " +
                                         std::to_string(base.size()));
    }
    check_empty_rows(labels, options.empty_labels);

    const std::size_t n_samples = scores.rows();
    const std::size_t n_classes = scores.cols();
    positives_.assign(n_classes, 0);
    for (std::size_t n = 0; n < n_samples; ++n) {
      for (std::size_t c = 0; c < n_classes; ++c) positives_[c] += labels(n, c) != 0;
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (positives_[c] == 0 && options.zero_positive == ZeroPositivePolicy::kError) {
        throw Error(ErrorCode::kNoPositives, "class " + std::to_string(c) +
                                                 " has no positive labels");
      }
    }

    // nearest_ is class-major so each class sweep reads contiguous memory.
    nearest_.assign(n_classes * n_samples, kNoLabels);
    for (std::size_t n = 0; n < n_samples; ++n) {
      const auto targets = label_set(labels, n);
      if (targets.empty()) {
        ++empty_rows_;
        continue;
      }
      for (std::size_t c = 0; c < n_classes; ++c) {
        const auto row = base.row(c);
        Distance best = row[targets.front()];
        for (std::size_t k : targets) best = std::min(best, row[k]);
        nearest_[c * n_samples + n] = best;
      }
    }
  }

  std::size_t samples() const { return scores_.rows(); }
  std::size_t classes() const { return scores_.cols(); }
  std::size_t positives(std::size_t c) const { return positives_[c]; }
  std::size_t empty_rows() const { return empty_rows_; }
  const DistanceMatrix& base() const { return base_; }

  struct Column {
    std::vector<float> scores;
    std::vector<std::uint8_t> labels;
    std::vector<std::uint32_t> order;
  };

  Column column(std::size_t c) const {
    Column col{scores_.column(c), labels_.column(c), {}};
    col.order = descending_order(col.scores);
    return col;
  }

  /// Reweight value of sample n for class c at a level whose thresholded
  /// matrix has mean mu (mu == 0 marks the all-zero top level).
  double weight(std::size_t c, std::size_t n, Distance level, double mu) const {
    if (mu == 0.0) return 0.0;
    const Distance d = nearest_[c * samples() + n];
    if (d == kNoLabels) return static_cast<double>(base_.d_max()) / mu;
    return d > level ? static_cast<double>(d) / mu : 0.0;
  }

 private:
  const ScoreMatrix& scores_;
  const LabelMatrix& labels_;
  const DistanceMatrix& base_;
  std::vector<std::size_t> positives_;
  std::vector<Distance> nearest_;
  std::size_t empty_rows_ = 0;
};

inline double column_ap(const Workspace::Column& col, std::size_t positives) {
  AreaAccumulator area(positives);
  sweep_curve(
      col.scores, col.labels, col.order, [](std::uint32_t) { return 1.0; },
      [&](double, std::size_t tp, double fp) { area.add(tp, precision_of(tp, fp)); });
  return area.value();
}

inline double column_oap(const Workspace& ws, const Workspace::Column& col, std::size_t c,
                         Distance level, double mu) {
  AreaAccumulator area(ws.positives(c));
  sweep_curve(
      col.scores, col.labels, col.order,
      [&](std::uint32_t n) { return ws.weight(c, n, level, mu); },
      [&](double, std::size_t tp, double fp) { area.add(tp, precision_of(tp, fp)); });
  return area.value();
}

inline double level_mu(const DistanceMatrix& base, Distance level) {
  return threshold_distance(base, level).mu();
}

inline double mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kNoPositives, "no class has a positive label; the mean is undefined");
  }
  return sum / static_cast<double>(count);
}

}  // namespace detail

/// Ontology-aware AP of every class at one coarse-grained level.
inline LevelResult oap_level(const ScoreMatrix& scores, const LabelMatrix& labels,
                             const DistanceMatrix& base, Distance level,
                             const EvaluationOptions& options = {}) {
  const detail::Workspace ws(scores, labels, base, options);
  if (level > base.d_max()) {
    throw Error(ErrorCode::kRange, "level " + std::to_string(level) +
                                       " exceeds the maximum class distance " +
                                       std::to_string(base.d_max()));
  }
  const double mu = detail::level_mu(base, level);
  LevelResult result{level, std::vector<std::optional<double>>(ws.classes()), 0.0};
  parallel_for(ws.classes(), options.threads, [&](std::size_t c) {
    if (ws.positives(c) == 0) return;
    const auto col = ws.column(c);
    result.per_class[c] = detail::column_oap(ws, col, c, level, mu);
  });
  result.mean = detail::mean_of(result.per_class);
  return result;
}

/// Mean over classes with at least one positive of the classic AP.
inline double mean_average_precision(const ScoreMatrix& scores, const LabelMatrix& labels,
                                     std::size_t threads = 1) {
  validate_scores(scores);
  validate_labels(labels);
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols()) {
    throw Error(ErrorCode::kShape, "score and label matrices differ in shape");
  }
  std::vector<std::optional<double>> per_class(scores.cols());
  parallel_for(scores.cols(), threads, [&](std::size_t c) {
    const auto s = scores.column(c);
    const auto y = labels.column(c);
    if (detail::count_positives(y) == 0) return;
    per_class[c] = average_precision(pr_curve(s, y));
  });
  return detail::mean_of(per_class);
}

/// Full evaluation: classic mAP plus ontology-aware AP of every class at every
/// level of the range, aggregated into OmAP (mean over levels and evaluated
/// classes) and OmAP0 (the level-0 mean).
inline EvaluationReport ontology_aware_map(const ScoreMatrix& scores, const LabelMatrix& labels,
                                           const DistanceMatrix& base,
                                           const ClassIndex& classes,
                                           const EvaluationOptions& options = {}) {
  const detail::Workspace ws(scores, labels, base, options);
  if (classes.size() != ws.classes()) {
    throw Error(ErrorCode::kShape, "class count mismatch: matrices have " +
                                       std::to_string(ws.classes()) +
                                       " classes, class index has " +
                                       std::to_string(classes.size()));
  }
  const LevelRange range = resolve_levels(options, base.d_max());
  const std::size_t n_levels = range.count();
  std::vector<double> mus(n_levels);
  for (std::size_t l = 0; l < n_levels; ++l) {
    mus[l] = detail::level_mu(base, static_cast<Distance>(range.first + l));
  }

  EvaluationReport report;
  report.per_class.resize(ws.classes());
  parallel_for(ws.classes(), options.threads, [&](std::size_t c) {
    ClassResult& out = report.per_class[c];
    out.column = c;
    out.id = classes[c].node_id;
    out.name = classes[c].display_name;
    out.positives = ws.positives(c);
    if (out.positives == 0) {
      out.skipped = true;
      return;
    }
    const auto col = ws.column(c);
    out.ap = detail::column_ap(col, out.positives);
    out.oap.resize(n_levels);
    for (std::size_t l = 0; l < n_levels; ++l) {
      out.oap[l] = detail::column_oap(ws, col, c, static_cast<Distance>(range.first + l), mus[l]);
    }
  });

  std::size_t evaluated = 0;
  double ap_sum = 0.0;
  for (const ClassResult& r : report.per_class) {
    if (r.skipped) continue;
    ++evaluated;
    ap_sum += *r.ap;
  }
  if (evaluated == 0) {
    throw Error(ErrorCode::kNoPositives, "no class has a positive label; the mean is undefined");
  }
  report.map = ap_sum / static_cast<double>(evaluated);

  double total = 0.0;
  for (std::size_t l = 0; l < n_levels; ++l) {
    double level_sum = 0.0;
    for (const ClassResult& r : report.per_class) {
      if (!r.skipped) level_sum += r.oap[l];
    }
    total += level_sum;
    const Distance level = static_cast<Distance>(range.first + l);
    report.levels.push_back({level, level_sum / static_cast<double>(evaluated)});
    if (level == 0) report.omap0 = report.levels.back().mean_oap;
  }
  report.omap = total / (static_cast<double>(n_levels) * static_cast<double>(evaluated));

  ReportMetadata& meta = report.metadata;
  meta.ontology_digest = ontology_digest(classes, base);
  meta.d_max = base.d_max();
  meta.level_first = range.first;
  meta.level_last = range.last;
  meta.n_samples = ws.samples();
  meta.n_classes = ws.classes();
  meta.evaluated_classes = evaluated;
  meta.empty_label_samples = ws.empty_rows();
  meta.empty_label_policy = policy_name(options.empty_labels);
  meta.zero_positive_policy = policy_name(options.zero_positive);
  return report;
}

// ---------------------------------------------------------------------------
// Comparison

struct LevelDelta {
  Distance level = 0;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // a - b
};

struct ReportComparison {
  std::vector<LevelDelta> levels;
  LevelDelta map;   // level field unused
  LevelDelta omap;  // level field unused
};

/// Per-level mean-OAP differences a - b. Both reports must come from the same
/// class set, ontology and level range.
inline ReportComparison compare_reports(const EvaluationReport& a, const EvaluationReport& b) {
  if (a.metadata.ontology_digest != b.metadata.ontology_digest) {
    throw Error(ErrorCode::kMismatch, "reports were computed on different ontologies (digest " +
                                          a.metadata.ontology_digest + " vs " +
                                          b.metadata.ontology_digest + ")");
  }
  if (a.metadata.level_first != b.metadata.level_first ||
      a.metadata.level_last != b.metadata.level_last || a.levels.size() != b.levels.size()) {
    throw Error(ErrorCode::kMismatch,
                "reports cover different level ranges (" +
                    std::to_string(a.metadata.level_first) + ".." +
                    std::to_string(a.metadata.level_last) + " vs " +
                    std::to_string(b.metadata.level_first) + ".." +
                    std::to_string(b.metadata.level_last) + ")");
  }
  ReportComparison out;
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    const double x = a.levels[l].mean_oap;
    const double y = b.levels[l].mean_oap;
    out.levels.push_back({a.levels[l].level, x, y, x - y});
  }
  out.map = {0, a.map, b.map, a.map - b.map};
  out.omap = {0, a.omap, b.omap, a.omap - b.omap};
  return out;
}

}  // namespace omap

#endif  // OMAP_METRICS_HPP_
