#ifndef OMAP_MATRIX_HPP_
#define OMAP_MATRIX_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omap/error.hpp"

namespace omap {

/// Dense row-major matrix with value semantics.
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::kShape, "matrix payload has " + std::to_string(data_.size()) +
                                         " elements, expected " +
                                         std::to_string(rows_ * cols_));
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return std::span<T>(data_).subspan(r * cols_, cols_); }
  std::span<const T> row(std::size_t r) const {
    return std::span<const T>(data_).subspan(r * cols_, cols_);
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  /// Copy of column c.
  std::vector<T> column(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Model outputs in [0,1]; stored at single precision.
using ScoreMatrix = Matrix<float>;
/// Binary targets.
using LabelMatrix = Matrix<std::uint8_t>;
/// Per-sample, per-class weights (reweight matrices, loss weights).
using WeightMatrix = Matrix<double>;

inline std::string cell_name(std::size_t r, std::size_t c) {
  return "(row " + std::to_string(r) + ", col " + std::to_string(c) + ")";
}

/// Every element finite and inside [0,1]; at least one row and column.
inline void validate_scores(const ScoreMatrix& scores) {
  if (scores.rows() == 0 || scores.cols() == 0) {
    throw Error(ErrorCode::kShape, "score matrix must have at least one row and one column");
  }
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    for (std::size_t c = 0; c < scores.cols(); ++c) {
      const float v = scores(r, c);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFinite, "non-finite score at " + cell_name(r, c));
      }
      if (v < 0.0f || v > 1.0f) {
        throw Error(ErrorCode::kRange,
                    "score " + std::to_string(v) + " outside [0,1] at " + cell_name(r, c));
      }
    }
  }
}

inline void validate_labels(const LabelMatrix& labels) {
  if (labels.rows() == 0 || labels.cols() == 0) {
    throw Error(ErrorCode::kShape, "label matrix must have at least one row and one column");
  }
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    for (std::size_t c = 0; c < labels.cols(); ++c) {
      if (labels(r, c) > 1) {
        throw Error(ErrorCode::kBinarity, "label is not 0 or 1 at " + cell_name(r, c));
      }
    }
  }
}

/// Columns set in row `sample` of a label matrix: the sample's label set.
inline std::vector<std::size_t> label_set(const LabelMatrix& labels, std::size_t sample) {
  std::vector<std::size_t> set;
  const auto row = labels.row(sample);
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c] != 0) set.push_back(c);
  }
  return set;
}

}  // namespace omap

#endif  // OMAP_MATRIX_HPP_
