#include "sedkit/matrix.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "sedkit/error.h"

namespace sedkit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw SizeError("matrix data size " + std::to_string(data_.size()) +
                    " does not match shape " + std::to_string(rows_) + "x" +
                    std::to_string(cols_));
  }
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
  if (values.size() != rows_) throw SizeError("column length does not match rows");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

Matrix Matrix::slice_rows(std::size_t first, std::size_t count) const {
  if (first + count > rows_) throw SizeError("row slice out of range");
  const auto begin = data_.begin() + static_cast<std::ptrdiff_t>(first * cols_);
  return Matrix(count, cols_,
                std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * cols_)));
}

void require_finite(const Matrix& m, const char* what) {
  const auto data = m.data();
  if (!std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); })) {
    throw NumericError(std::string("non-finite value in ") + what);
  }
}

}  // namespace sedkit
