#pragma once

// Exact dense linear algebra over Eigen matrices with rational or integer
// scalars. All routines are deterministic: pivots are chosen as the first
// nonzero entry, never by magnitude.

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crnsn/rational.hpp"

namespace crnsn {

/// Fraction-free (Bareiss) determinant over an integral domain.
template <typename Derived>
typename Derived::Scalar bareiss_determinant(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  if (input.rows() != input.cols()) throw std::invalid_argument("determinant of non-square matrix");
  Matrix<Scalar> a = input;
  const Eigen::Index n = a.rows();
  if (n == 0) return Scalar(1);
  Scalar previous(1);
  bool negate = false;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      Eigen::Index p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return Scalar(0);
      a.row(k).swap(a.row(p));
      negate = !negate;
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      for (Eigen::Index j = k + 1; j < n; ++j)
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / previous;
      a(i, k) = 0;
    }
    previous = a(k, k);
  }
  return negate ? Scalar(-a(n - 1, n - 1)) : a(n - 1, n - 1);
}

/// Exact rational determinant: each row is scaled to integers by the lcm of
/// its denominators, Bareiss runs over the integers, then the scale is undone.
template <typename Derived>
Rational det_exact(const Eigen::MatrixBase<Derived>& m) {
  static_assert(std::is_same_v<typename Derived::Scalar, Rational>, "det_exact expects Rational");
  if (m.rows() != m.cols()) throw std::invalid_argument("det_exact: matrix is not square");
  const Eigen::Index n = m.rows();
  Matrix<Integer> scaled(n, n);
  Integer scale = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    Integer lcm = 1;
    for (Eigen::Index j = 0; j < n; ++j)
      lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(m(i, j)));
    for (Eigen::Index j = 0; j < n; ++j)
      scaled(i, j) = boost::multiprecision::numerator(m(i, j)) * (lcm / boost::multiprecision::denominator(m(i, j)));
    scale *= lcm;
  }
  return Rational(bareiss_determinant(scaled), scale);
}

/// Reduced row echelon form over an exact field.
template <typename Scalar>
struct RowEchelon {
  Matrix<Scalar> reduced;
  std::vector<Eigen::Index> pivot_columns;

  Eigen::Index rank() const { return static_cast<Eigen::Index>(pivot_columns.size()); }
};

template <typename Derived>
RowEchelon<typename Derived::Scalar> row_reduce(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  RowEchelon<Scalar> out{input, {}};
  Matrix<Scalar>& a = out.reduced;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < a.cols() && row < a.rows(); ++col) {
    Eigen::Index p = row;
    while (p < a.rows() && a(p, col) == 0) ++p;
    if (p == a.rows()) continue;
    if (p != row) a.row(p).swap(a.row(row));
    const Scalar pivot = a(row, col);
    for (Eigen::Index j = col; j < a.cols(); ++j) a(row, j) /= pivot;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i == row || a(i, col) == 0) continue;
      const Scalar factor = a(i, col);
      for (Eigen::Index j = col; j < a.cols(); ++j) a(i, j) -= factor * a(row, j);
    }
    out.pivot_columns.push_back(col);
    ++row;
  }
  return out;
}

template <typename Derived>
Eigen::Index rank_exact(const Eigen::MatrixBase<Derived>& m) {
  return row_reduce(m).rank();
}

/// Scales v so that its first nonzero entry equals 1.
template <typename Scalar>
Vector<Scalar> normalize_leading(Vector<Scalar> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0) {
      const Scalar lead = v(i);
      for (Eigen::Index j = 0; j < v.size(); ++j) v(j) /= lead;
      break;
    }
  }
  return v;
}

/// Basis of { x : m x = 0 }, one vector per free column, each normalized so
/// its first nonzero entry is 1.
template <typename Derived>
std::vector<Vector<typename Derived::Scalar>> right_kernel_basis(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const auto echelon = row_reduce(m);
  std::vector<bool> is_pivot(static_cast<std::size_t>(m.cols()), false);
  for (auto c : echelon.pivot_columns) is_pivot[static_cast<std::size_t>(c)] = true;

  std::vector<Vector<Scalar>> basis;
  for (Eigen::Index free = 0; free < m.cols(); ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    Vector<Scalar> x = Vector<Scalar>::Zero(m.cols());
    x(free) = 1;
    for (std::size_t r = 0; r < echelon.pivot_columns.size(); ++r)
      x(echelon.pivot_columns[r]) = -echelon.reduced(static_cast<Eigen::Index>(r), free);
    basis.push_back(normalize_leading<Scalar>(std::move(x)));
  }
  return basis;
}

/// Basis of { y : y^T m = 0 }.
template <typename Derived>
std::vector<Vector<typename Derived::Scalar>> left_kernel_basis(const Eigen::MatrixBase<Derived>& m) {
  return right_kernel_basis(m.transpose());
}

/// Rescales a rational vector to coprime integers with a positive leading entry.
RationalVector primitive_integer_vector(const RationalVector& v);

}  // namespace crnsn
