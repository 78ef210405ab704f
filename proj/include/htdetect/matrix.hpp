#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "htdetect/error.hpp"
#include "htdetect/features.hpp"

namespace htdetect {

/// Dense row-major matrix of training rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix to_matrix(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) return {};
  Matrix m(vectors.size(), vectors.front().values.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].values.size() != m.cols()) throw SchemaError("ragged feature vectors");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = vectors[i].values[j];
  }
  return m;
}

}  // namespace htdetect
