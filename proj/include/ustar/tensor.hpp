#pragma once

// Dense square-index tensors: every index runs over the same dimension n.
// Used with T = double for point values and T = Jet for differentiable
// evaluations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "ustar/jet.hpp"

namespace ustar {

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank, T fill = T(0.0))
      : dim_(dim), rank_(rank), data_(count(dim, rank), fill) {}

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }
  T& operator()(int i, int j) { return data_[flat(i, j)]; }
  const T& operator()(int i, int j) const { return data_[flat(i, j)]; }
  T& operator()(int i, int j, int k) { return data_[flat(i, j, k)]; }
  const T& operator()(int i, int j, int k) const { return data_[flat(i, j, k)]; }
  T& operator()(int i, int j, int k, int l) { return data_[flat(i, j, k, l)]; }
  const T& operator()(int i, int j, int k, int l) const {
    return data_[flat(i, j, k, l)];
  }

  T& at(std::span<const int> idx) { return data_[flat_span(idx)]; }
  const T& at(std::span<const int> idx) const { return data_[flat_span(idx)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

 private:
  static std::size_t count(int dim, int rank) {
    std::size_t c = 1;
    for (int r = 0; r < rank; ++r) c *= static_cast<std::size_t>(dim);
    return c;
  }
  std::size_t flat(int i, int j) const {
    return static_cast<std::size_t>(i) * dim_ + j;
  }
  std::size_t flat(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }
  std::size_t flat(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * dim_ + j) * dim_ + k) * dim_ + l;
  }
  std::size_t flat_span(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * dim_ + static_cast<std::size_t>(i);
    return f;
  }

  int dim_ = 0;
  int rank_ = 0;
  std::vector<T> data_;
};

using TensorD = Tensor<double>;
using TensorJ = Tensor<Jet>;

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

/// Point values of a jet tensor.
inline TensorD values(const TensorJ& t) {
  TensorD out(t.dim(), t.rank());
  for (std::size_t k = 0; k < t.size(); ++k) out.data()[k] = t.data()[k].value();
  return out;
}

/// Componentwise truncation of a jet tensor.
inline TensorJ truncated(const TensorJ& t, int order) {
  TensorJ out = t;
  for (auto& x : out.data()) x = x.truncated(order);
  return out;
}

/// d/dx_i of every component.
inline TensorJ derivative(const TensorJ& t, int i) {
  TensorJ out(t.dim(), t.rank());
  for (std::size_t k = 0; k < t.size(); ++k) out.data()[k] = t.data()[k].derivative(i);
  return out;
}

template <typename T>
double max_abs(const Tensor<T>& t) {
  double m = 0.0;
  for (const auto& x : t.data()) m = std::max(m, std::abs(value_of(x)));
  return m;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(value_of(a.data()[k]) - value_of(b.data()[k])));
  }
  return m;
}

/// Matrix product of rank-2 tensors, (AB)_ij = A_ik B_kj.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const int n = a.dim();
  Tensor<T> out(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      T s(0.0);
      for (int k = 0; k < n; ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  const int n = a.dim();
  Tensor<T> out(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = a(j, i);
  return out;
}

template <typename T>
Tensor<T> identity(int n) {
  Tensor<T> out(n, 2);
  for (int i = 0; i < n; ++i) out(i, i) = T(1.0);
  return out;
}

/// Gauss-Jordan inverse with partial pivoting on point values.  Returns the
/// determinant through `det` when requested.
template <typename T>
Tensor<T> inverse(const Tensor<T>& m, T* det = nullptr) {
  const int n = m.dim();
  Tensor<T> a = m;
  Tensor<T> inv = identity<T>(n);
  T d(1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(value_of(a(r, col))) > std::abs(value_of(a(piv, col)))) piv = r;
    }
    if (value_of(a(piv, col)) == 0.0) throw std::domain_error("inverse: singular matrix");
    if (piv != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a(piv, c), a(col, c));
        std::swap(inv(piv, c), inv(col, c));
      }
      d = -d;
    }
    const T p = a(col, col);
    d = d * p;
    const T rp = T(1.0) / p;
    for (int c = 0; c < n; ++c) {
      a(col, c) = a(col, c) * rp;
      inv(col, c) = inv(col, c) * rp;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = a(r, col);
      if (value_of(f) == 0.0 && !std::is_same_v<T, Jet>) continue;
      for (int c = 0; c < n; ++c) {
        a(r, c) = a(r, c) - f * a(col, c);
        inv(r, c) = inv(r, c) - f * inv(col, c);
      }
    }
  }
  if (det) *det = d;
  return inv;
}

/// Determinant by elimination; exactly zero when a pivot vanishes.
template <typename T>
T determinant(const Tensor<T>& m) {
  const int n = m.dim();
  Tensor<T> a = m;
  T d(1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(value_of(a(r, col))) > std::abs(value_of(a(piv, col)))) piv = r;
    }
    if (value_of(a(piv, col)) == 0.0) return T(0.0);
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
      d = -d;
    }
    d = d * a(col, col);
    const T rp = T(1.0) / a(col, col);
    for (int r = col + 1; r < n; ++r) {
      const T f = a(r, col) * rp;
      for (int c = col; c < n; ++c) a(r, c) = a(r, c) - f * a(col, c);
    }
  }
  return d;
}

}  // namespace ustar
