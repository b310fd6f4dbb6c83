#pragma once

#include <Eigen/Dense>
#include <array>
#include <cassert>
#include <complex>
#include <utility>

namespace stochmetric {

/// Symmetric 4x4 tensor with 10 stored components in packed upper-triangular
/// order (00,01,02,03,11,12,13,22,23,33). Symmetry holds by storage.
template <typename Scalar>
class SymTensor4 {
 public:
  using Packed = Eigen::Matrix<Scalar, 10, 1>;
  using Dense = Eigen::Matrix<Scalar, 4, 4>;

  SymTensor4() : data_(Packed::Zero()) {}
  explicit SymTensor4(const Packed& packed) : data_(packed) {}

  /// Symmetrizes `m` as (m + m^T) / 2.
  static SymTensor4 from_dense(const Dense& m) {
    SymTensor4 t;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) t.data_[index(i, j)] = (m(i, j) + m(j, i)) / Scalar(2);
    return t;
  }

  static SymTensor4 Zero() { return SymTensor4(); }

  static SymTensor4 diagonal(Scalar d0, Scalar d1, Scalar d2, Scalar d3) {
    SymTensor4 t;
    t(0, 0) = d0;
    t(1, 1) = d1;
    t(2, 2) = d2;
    t(3, 3) = d3;
    return t;
  }

  Scalar& operator()(int i, int j) { return data_[index(i, j)]; }
  const Scalar& operator()(int i, int j) const { return data_[index(i, j)]; }

  Dense dense() const {
    Dense m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  const Packed& packed() const { return data_; }
  Packed& packed() { return data_; }

  SymTensor4& operator+=(const SymTensor4& o) {
    data_ += o.data_;
    return *this;
  }
  SymTensor4& operator-=(const SymTensor4& o) {
    data_ -= o.data_;
    return *this;
  }
  SymTensor4& operator*=(Scalar s) {
    data_ *= s;
    return *this;
  }
  friend SymTensor4 operator+(SymTensor4 a, const SymTensor4& b) { return a += b; }
  friend SymTensor4 operator-(SymTensor4 a, const SymTensor4& b) { return a -= b; }
  friend SymTensor4 operator*(Scalar s, SymTensor4 a) { return a *= s; }
  friend SymTensor4 operator*(SymTensor4 a, Scalar s) { return a *= s; }

  auto max_abs() const { return data_.cwiseAbs().maxCoeff(); }

  bool operator==(const SymTensor4& o) const { return data_ == o.data_; }

  static constexpr int index(int i, int j) {
    assert(i >= 0 && i < 4 && j >= 0 && j < 4);
    if (i > j) std::swap(i, j);
    constexpr std::array<int, 4> row_start{0, 4, 7, 9};
    return row_start[i] + (j - i);
  }

 private:
  Packed data_;
};

using SymTensor4d = SymTensor4<double>;
using SymTensor4cd = SymTensor4<std::complex<double>>;

/// Minkowski metric diag(+1, -1, -1, -1).
template <typename Scalar = double>
SymTensor4<Scalar> minkowski() {
  return SymTensor4<Scalar>::diagonal(Scalar(1), Scalar(-1), Scalar(-1), Scalar(-1));
}

/// Full quadratic form g_ik dx^i dx^k over all 16 index pairs.
template <typename Scalar, typename Derived>
Scalar interval_squared(const SymTensor4<Scalar>& g,
                        const Eigen::MatrixBase<Derived>& dx) {
  static_assert(Derived::SizeAtCompileTime == 4 || Derived::SizeAtCompileTime == Eigen::Dynamic);
  Scalar sum(0);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) sum += g(i, k) * dx(i) * dx(k);
  return sum;
}

}  // namespace stochmetric
