#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace valfind {

// Dense row-major matrix of doubles. Rows are handed out as spans so the
// algorithms can treat a row as a point without copying.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Copy of the selected rows, in the given order.
  Matrix select_rows(std::span<const std::size_t> idx) const;
  /// Copy of columns [begin, begin+count).
  Matrix column_block(std::size_t begin, std::size_t count) const;
  /// Horizontal concatenation; row counts must agree.
  static Matrix hconcat(const Matrix& a, const Matrix& b);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
/// Scale v to unit L2 norm in place; zero vectors are left untouched.
void normalize_l2(std::span<double> v);
/// Normalize every row of m to unit L2 norm (zero rows stay zero).
void normalize_rows(Matrix& m);

/// Symmetric n x n matrix of Euclidean distances between rows.
Matrix pairwise_distances(const Matrix& x);

}  // namespace valfind
