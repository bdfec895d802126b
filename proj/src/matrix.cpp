#include "smdp/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smdp/error.hpp"

namespace smdp {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::dimension_mismatch, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::row_sum(std::size_t i) const {
  auto r = row(i);
  return std::accumulate(r.begin(), r.end(), 0.0);
}

double Matrix::max_stochastic_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) worst = std::max(worst, std::abs(row_sum(i) - 1.0));
  return worst;
}

}  // namespace smdp
