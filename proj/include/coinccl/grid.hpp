#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace coinccl {

/// dense row-major matrix of doubles
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : mRows(rows), mCols(cols), mData(rows * cols, fill) {}

  std::size_t rows() const { return mRows; }
  std::size_t cols() const { return mCols; }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < mRows && c < mCols);
    return mData[r * mCols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < mRows && c < mCols);
    return mData[r * mCols + c];
  }

  double* data() { return mData.data(); }
  const double* data() const { return mData.data(); }
  std::size_t size() const { return mData.size(); }

  bool operator==(const Matrix&) const = default;

private:
  std::size_t mRows = 0, mCols = 0;
  std::vector<double> mData;
};

/// n evenly spaced values from lo to hi inclusive
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + static_cast<double>(i) * step;
  return v;
}

} // namespace coinccl
