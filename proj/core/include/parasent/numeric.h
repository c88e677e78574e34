#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "parasent/errors.h"

namespace parasent {

template <class T>
using Vec = std::vector<T>;

// Row-major dense matrix. Column vectors (biases, peepholes) are n x 1.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix storage " + std::to_string(data_.size()) +
                           " does not match shape " + std::to_string(rows_) +
                           "x" + std::to_string(cols_));
    }
  }

  static Matrix column(std::vector<T> v) {
    const auto n = v.size();
    return Matrix(n, 1, std::move(v));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  T operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  template <class U>
  Matrix<U> cast() const {
    return Matrix<U>(rows_, cols_,
                     std::vector<U>(data_.begin(), data_.end()));
  }

  bool same_shape(const Matrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace detail {
inline void require(bool ok, const char* op, std::size_t a, std::size_t b) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}
}  // namespace detail

template <class T>
T sigmoid(T x) {
  // Split on sign so exp never overflows.
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
Vec<T> matvec(const Matrix<T>& m, std::span<const T> v) {
  detail::require(m.cols() == v.size(), "matvec", m.cols(), v.size());
  Vec<T> out(m.rows(), T(0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    T acc = T(0);
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

// M v + b
template <class T>
Vec<T> affine(const Matrix<T>& m, std::span<const T> v, std::span<const T> b) {
  detail::require(m.rows() == b.size(), "affine", m.rows(), b.size());
  Vec<T> out = matvec(m, v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

enum class Activation { Sigmoid, Tanh };

template <class T>
Vec<T> elementwise(Activation f, std::span<const T> v) {
  Vec<T> out(v.begin(), v.end());
  for (auto& x : out) x = f == Activation::Sigmoid ? sigmoid(x) : std::tanh(x);
  return out;
}

template <class T>
Vec<T> softmax(std::span<const T> v) {
  if (v.empty()) throw DimensionError("softmax: empty input");
  const T mx = *std::max_element(v.begin(), v.end());
  Vec<T> out(v.size());
  T total = T(0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    total += out[i];
  }
  for (auto& x : out) x /= total;
  return out;
}

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  detail::require(a.size() == b.size(), "dot", a.size(), b.size());
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
T norm(std::span<const T> a) {
  return std::sqrt(dot(a, a));
}

template <class T>
T cosine(std::span<const T> u, std::span<const T> v) {
  detail::require(u.size() == v.size(), "cosine", u.size(), v.size());
  const T nu = norm(u);
  const T nv = norm(v);
  if (nu == T(0) || nv == T(0)) {
    throw DegenerateVectorError("cosine: zero-norm input vector");
  }
  const T c = dot(u, v) / (nu * nv);
  return std::clamp(c, T(-1), T(1));
}

template <class T>
bool all_finite(std::span<const T> v) {
  return std::all_of(v.begin(), v.end(),
                     [](T x) { return std::isfinite(x); });
}

// Convenience overloads so callers can pass std::vector directly.
template <class T>
Vec<T> affine(const Matrix<T>& m, const Vec<T>& v, const Vec<T>& b) {
  return affine(m, std::span<const T>(v), std::span<const T>(b));
}
template <class T>
Vec<T> softmax(const Vec<T>& v) {
  return softmax(std::span<const T>(v));
}
template <class T>
T cosine(const Vec<T>& u, const Vec<T>& v) {
  return cosine(std::span<const T>(u), std::span<const T>(v));
}
template <class T>
Vec<T> elementwise(Activation f, const Vec<T>& v) {
  return elementwise(f, std::span<const T>(v));
}

}  // namespace parasent
