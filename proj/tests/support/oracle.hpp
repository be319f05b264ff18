#ifndef OMAP_TESTS_SUPPORT_ORACLE_HPP_
#define OMAP_TESTS_SUPPORT_ORACLE_HPP_

// Brute-force reference implementations used only by the tests. Nothing here
// calls into the library's metric, distance or weight code: distances come
// from Floyd-Warshall, curves from enumerating every sample's score as a
// threshold and recounting TP/FP over all samples, and weights from a literal
// transcription of the loss-weight procedure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;
using IntGrid = std::vector<std::vector<long>>;

inline constexpr long kInf = std::numeric_limits<long>::max() / 4;

inline IntGrid floyd_warshall(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  IntGrid d(n, std::vector<long>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& [a, b] : edges) {
    d[a][b] = 1;
    d[b][a] = 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return d;
}

/// Rows/columns of `full` picked by `vertices`.
inline IntGrid restrict(const IntGrid& full, const std::vector<std::size_t>& vertices) {
  IntGrid out(vertices.size(), std::vector<long>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = 0; j < vertices.size(); ++j) out[i][j] = full[vertices[i]][vertices[j]];
  }
  return out;
}

inline IntGrid threshold(const IntGrid& d, long level) {
  IntGrid out = d;
  for (auto& row : out) {
    for (long& v : row) v = v > level ? v : 0;
  }
  return out;
}

inline double mean(const IntGrid& d) {
  double total = 0.0;
  double count = 0.0;
  for (const auto& row : d) {
    for (long v : row) {
      total += static_cast<double>(v);
      count += 1.0;
    }
  }
  return total / count;
}

inline long max_entry(const IntGrid& d) {
  long m = 0;
  for (const auto& row : d) {
    for (long v : row) m = std::max(m, v);
  }
  return m;
}

/// Weighted FP reweight matrix at one level; mu == 0 gives all zeros.
inline Grid reweight(const std::vector<std::vector<int>>& labels, const IntGrid& base, long level) {
  const IntGrid d = threshold(base, level);
  const double mu = mean(d);
  const std::size_t n_classes = base.size();
  Grid w(labels.size(), std::vector<double>(n_classes, 0.0));
  for (std::size_t n = 0; n < labels.size(); ++n) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      long best = kInf;
      for (std::size_t k = 0; k < n_classes; ++k) {
        if (labels[n][k] == 1) best = std::min(best, d[c][k]);
      }
      w[n][c] = mu == 0.0 ? 0.0 : static_cast<double>(best) / mu;
    }
  }
  return w;
}

/// AP of one column: one PR point per sample threshold gamma = score[n],
/// predicted positive iff score >= gamma, FP counted with weight w[i].
/// Points are ordered by descending gamma; area = sum (R_k - R_{k-1}) P_k.
inline double average_precision(const std::vector<double>& scores, const std::vector<int>& labels,
                                const std::vector<double>& weights) {
  const std::size_t n = scores.size();
  double positives = 0.0;
  for (int y : labels) positives += y;
  struct Point {
    double gamma, precision, recall;
  };
  std::vector<Point> points;
  for (std::size_t t = 0; t < n; ++t) {
    const double gamma = scores[t];
    double tp = 0.0;
    double fp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (scores[i] >= gamma) {
        if (labels[i] == 1) {
          tp += 1.0;
        } else {
          fp += weights[i];
        }
      }
    }
    const double precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 1.0;
    points.push_back({gamma, precision, tp / positives});
  }
  std::sort(points.begin(), points.end(),
            [](const Point& a, const Point& b) { return a.gamma > b.gamma; });
  double area = 0.0;
  double previous = 0.0;
  for (const Point& p : points) {
    area += (p.recall - previous) * p.precision;
    previous = p.recall;
  }
  return area;
}

inline std::vector<double> column(const Grid& m, std::size_t c) {
  std::vector<double> out;
  for (const auto& row : m) out.push_back(row[c]);
  return out;
}

inline std::vector<int> column(const std::vector<std::vector<int>>& m, std::size_t c) {
  std::vector<int> out;
  for (const auto& row : m) out.push_back(row[c]);
  return out;
}

inline bool has_positive(const std::vector<int>& col) {
  return std::any_of(col.begin(), col.end(), [](int y) { return y == 1; });
}

/// Per-class AP (nullopt for classes without positives).
inline std::vector<std::optional<double>> per_class_ap(const Grid& scores,
                                                       const std::vector<std::vector<int>>& labels) {
  const std::size_t n_classes = scores.front().size();
  std::vector<std::optional<double>> out(n_classes);
  const std::vector<double> ones(scores.size(), 1.0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto y = column(labels, c);
    if (has_positive(y)) out[c] = average_precision(column(scores, c), y, ones);
  }
  return out;
}

inline std::vector<std::optional<double>> per_class_oap(const Grid& scores,
                                                        const std::vector<std::vector<int>>& labels,
                                                        const IntGrid& base, long level) {
  const Grid w = reweight(labels, base, level);
  const std::size_t n_classes = base.size();
  std::vector<std::optional<double>> out(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto y = column(labels, c);
    if (has_positive(y)) out[c] = average_precision(column(scores, c), y, column(w, c));
  }
  return out;
}

inline double mean_present(const std::vector<std::optional<double>>& v) {
  double total = 0.0;
  double count = 0.0;
  for (const auto& x : v) {
    if (x) {
      total += *x;
      count += 1.0;
    }
  }
  return total / count;
}

struct Aggregate {
  double map = 0.0;
  double omap = 0.0;
  std::vector<double> level_means;
};

/// mAP, and OmAP as the mean over levels first..last and classes with
/// positives of the per-class OAP.
inline Aggregate aggregate(const Grid& scores, const std::vector<std::vector<int>>& labels,
                           const IntGrid& base, long first, long last) {
  Aggregate out;
  out.map = mean_present(per_class_ap(scores, labels));
  double total = 0.0;
  double count = 0.0;
  for (long level = first; level <= last; ++level) {
    const auto per_class = per_class_oap(scores, labels, base, level);
    out.level_means.push_back(mean_present(per_class));
    for (const auto& x : per_class) {
      if (x) {
        total += *x;
        count += 1.0;
      }
    }
  }
  out.omap = total / count;
  return out;
}

/// Loss weights for one sample, transcribed step by step.
inline std::vector<double> loss_weights(const std::vector<std::size_t>& targets, const IntGrid& base,
                                        double beta) {
  const std::size_t n_classes = base.size();
  std::vector<double> r(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k : targets) {
      const double d = static_cast<double>(base[c][k]);
      const double powered = (d == 0.0 && beta == 0.0) ? 1.0 : std::pow(d, beta);
      best = std::min(best, powered);
    }
    r[c] = best;
  }
  double peak = 0.0;
  for (double v : r) peak = std::max(peak, v);
  if (peak > 0.0) {
    for (double& v : r) v = v / peak;
  }
  for (std::size_t k : targets) r[k] = 1.0;
  double sum = 0.0;
  for (double v : r) sum += v;
  const double m = sum / static_cast<double>(n_classes);
  for (double& v : r) v = v / m;
  return r;
}

}  // namespace oracle

#endif  // OMAP_TESTS_SUPPORT_ORACLE_HPP_
