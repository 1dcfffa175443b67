#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sentlab {

// Flat row-major 2-D array. S is float for training, double for the
// verification paths (gradient checks, correlation oracles).
template <class S>
struct Matrix {
  uint32_t rows = 0;
  uint32_t cols = 0;
  std::vector<S> data;

  Matrix() = default;
  Matrix(uint32_t r, uint32_t c) : rows(r), cols(c), data(size_t(r) * c, S(0)) {
    if (r == 0 || c == 0) throw std::invalid_argument("Matrix: zero dimension");
  }

  S& at(uint32_t r, uint32_t c) { return data[size_t(r) * cols + c]; }
  S at(uint32_t r, uint32_t c) const { return data[size_t(r) * cols + c]; }

  std::span<S> row(uint32_t r) { return {data.data() + size_t(r) * cols, cols}; }
  std::span<const S> row(uint32_t r) const {
    return {data.data() + size_t(r) * cols, cols};
  }

  size_t size() const { return data.size(); }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }

  bool all_finite() const {
    for (S v : data)
      if (!std::isfinite(double(v))) return false;
    return true;
  }
};

template <class S>
bool all_finite(std::span<const S> v) {
  for (S x : v)
    if (!std::isfinite(double(x))) return false;
  return true;
}

// y = A x
template <class S>
void matvec(const Matrix<S>& a, std::span<const S> x, std::span<S> y) {
  if (x.size() != a.cols || y.size() != a.rows)
    throw std::invalid_argument("matvec: dimension mismatch");
  for (uint32_t r = 0; r < a.rows; ++r) {
    const S* row = a.data.data() + size_t(r) * a.cols;
    double acc = 0;
    for (uint32_t c = 0; c < a.cols; ++c) acc += double(row[c]) * double(x[c]);
    y[r] = S(acc);
  }
}

// y = A^T x
template <class S>
void matvec_t(const Matrix<S>& a, std::span<const S> x, std::span<S> y) {
  if (x.size() != a.rows || y.size() != a.cols)
    throw std::invalid_argument("matvec_t: dimension mismatch");
  for (uint32_t c = 0; c < a.cols; ++c) y[c] = S(0);
  for (uint32_t r = 0; r < a.rows; ++r) {
    const S* row = a.data.data() + size_t(r) * a.cols;
    S xr = x[r];
    for (uint32_t c = 0; c < a.cols; ++c) y[c] += xr * row[c];
  }
}

// A += u v^T
template <class S>
void add_outer(Matrix<S>& a, std::span<const S> u, std::span<const S> v) {
  if (u.size() != a.rows || v.size() != a.cols)
    throw std::invalid_argument("add_outer: dimension mismatch");
  for (uint32_t r = 0; r < a.rows; ++r) {
    S* row = a.data.data() + size_t(r) * a.cols;
    S ur = u[r];
    for (uint32_t c = 0; c < a.cols; ++c) row[c] += ur * v[c];
  }
}

template <class S>
void axpy(S alpha, std::span<const S> x, std::span<S> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <class S>
double dot(std::span<const S> a, std::span<const S> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double acc = 0;
  for (size_t i = 0; i < a.size(); ++i) acc += double(a[i]) * double(b[i]);
  return acc;
}

template <class S>
void fill(std::span<S> v, S value) {
  for (S& x : v) x = value;
}

}  // namespace sentlab
