#ifndef OMAP_OBCE_HPP_
#define OMAP_OBCE_HPP_

// Ontology-aware binary cross entropy: per-class loss weights derived from the
// graph distance between each class and the sample's target classes, and the
// reference loss values that consume them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omap/error.hpp"
#include "omap/matrix.hpp"
#include "omap/ontology.hpp"
#include "omap/parallel.hpp"

namespace omap {

struct WeightVector {
  std::vector<double> values;
  double beta = 1.0;
  std::vector<std::size_t> sample_labels;
};

/// Loss weights for one sample with target classes `targets`.
///
/// r_c = min over targets k of D[c][k]^beta (with 0^0 = 1), then r /= max(r),
/// targets set to 1, and finally every entry divided by the mean taken once
/// after that step, so the weights average to exactly 1 up to rounding.
inline WeightVector obce_weights(std::span<const std::size_t> targets,
                                 const DistanceMatrix& base, double beta) {
  if (!base.is_base()) {
    throw Error(ErrorCode::kArgument, "loss weights use the unthresholded distance matrix");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::kArgument, "beta must be a finite value >= 0");
  }
  if (targets.empty()) {
    throw Error(ErrorCode::kEmptyLabels, "loss weights need at least one target class");
  }
  const std::size_t classes = base.size();
  for (std::size_t k : targets) {
    if (k >= classes) {
      throw Error(ErrorCode::kRange, "target class " + std::to_string(k) + " out of range");
    }
  }

  WeightVector out{std::vector<double>(classes), beta, {targets.begin(), targets.end()}};
  auto& r = out.values;
  for (std::size_t c = 0; c < classes; ++c) {
    const auto row = base.row(c);
    Distance nearest = row[targets.front()];
    for (std::size_t k : targets) nearest = std::min(nearest, row[k]);
    // std::pow(0.0, 0.0) is 1, which is the required convention.
    r[c] = std::pow(static_cast<double>(nearest), beta);
  }
  const double peak = *std::max_element(r.begin(), r.end());
  // peak is 0 only when every class is a target; all entries become 1 below.
  if (peak > 0.0) {
    for (double& v : r) v /= peak;
  }
  for (std::size_t k : targets) r[k] = 1.0;
  double sum = 0.0;
  for (double v : r) sum += v;
  const double mean = sum / static_cast<double>(classes);
  for (double& v : r) v /= mean;
  return out;
}

/// Row n of the result is obce_weights(L_n). Rows without labels are an
/// error unless `allow_empty` is set, in which case they get all-ones weights.
inline WeightMatrix obce_weights_batch(const LabelMatrix& labels, const DistanceMatrix& base,
                                       double beta, bool allow_empty = false,
                                       std::size_t threads = 1) {
  validate_labels(labels);
  if (labels.cols() != base.size()) {
    throw Error(ErrorCode::kShape, "class count mismatch: labels have " +
                                       std::to_string(labels.cols()) +
                                       " classes, distance matrix has " +
                                       std::to_string(base.size()));
  }
  if (!allow_empty) {
    for (std::size_t n = 0; n < labels.rows(); ++n) {
      if (label_set(labels, n).empty()) {
        throw Error(ErrorCode::kEmptyLabels,
                    "sample " + std::to_string(n) + " has an empty label set");
      }
    }
  }
  WeightMatrix out(labels.rows(), labels.cols(), 1.0);
  parallel_for(labels.rows(), threads, [&](std::size_t n) {
    const auto targets = label_set(labels, n);
    if (targets.empty()) return;
    const auto weights = obce_weights(targets, base, beta);
    std::copy(weights.values.begin(), weights.values.end(), out.row(n).begin());
  });
  return out;
}

inline constexpr double kDefaultClampEpsilon = 1e-7;

struct LossValue {
  double bce = 0.0;
  double obce = 0.0;
  double combined = 0.0;
};

namespace detail {

inline void check_loss_inputs(std::span<const double> targets, std::span<const double> predictions,
                              std::size_t weights, double epsilon) {
  if (targets.size() != predictions.size() || targets.size() != weights) {
    throw Error(ErrorCode::kShape, "loss inputs differ in length");
  }
  if (targets.empty()) throw Error(ErrorCode::kShape, "loss inputs are empty");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw Error(ErrorCode::kArgument, "clamp epsilon must lie in (0, 0.5)");
  }
  for (double y : targets) {
    if (y != 0.0 && y != 1.0) throw Error(ErrorCode::kBinarity, "loss targets must be 0 or 1");
  }
  for (double p : predictions) {
    if (!std::isfinite(p)) throw Error(ErrorCode::kNonFinite, "non-finite prediction");
  }
}

// Negated elementwise log-likelihood, summed with weight r, divided by C.
template <class WeightOf>
double weighted_cross_entropy(std::span<const double> y, std::span<const double> p,
                              WeightOf&& weight_of, double epsilon) {
  double sum = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    const double q = std::clamp(p[c], epsilon, 1.0 - epsilon);
    const double term = y[c] * std::log(q) + (1.0 - y[c]) * std::log(1.0 - q);
    sum += weight_of(c) * term;
  }
  return -sum / static_cast<double>(y.size());
}

}  // namespace detail

/// Binary cross entropy, -mean(y log p + (1-y) log(1-p)), p clamped to
/// [eps, 1-eps].
inline double bce_loss(std::span<const double> targets, std::span<const double> predictions,
                       double epsilon = kDefaultClampEpsilon) {
  detail::check_loss_inputs(targets, predictions, targets.size(), epsilon);
  return detail::weighted_cross_entropy(
      targets, predictions, [](std::size_t) { return 1.0; }, epsilon);
}

/// Same as bce_loss with each class term scaled by weights[c].
inline double obce_loss(std::span<const double> targets, std::span<const double> predictions,
                        std::span<const double> weights, double epsilon = kDefaultClampEpsilon) {
  detail::check_loss_inputs(targets, predictions, weights.size(), epsilon);
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kRange, "loss weights must be finite and >= 0");
    }
  }
  return detail::weighted_cross_entropy(
      targets, predictions, [&](std::size_t c) { return weights[c]; }, epsilon);
}

/// Both losses and their average.
inline LossValue combined_loss(std::span<const double> targets,
                               std::span<const double> predictions,
                               std::span<const double> weights,
                               double epsilon = kDefaultClampEpsilon) {
  LossValue out;
  out.bce = bce_loss(targets, predictions, epsilon);
  out.obce = obce_loss(targets, predictions, weights, epsilon);
  out.combined = (out.bce + out.obce) / 2.0;
  return out;
}

}  // namespace omap

#endif  // OMAP_OBCE_HPP_
