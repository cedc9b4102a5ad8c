#include "crnsn/simplex.hpp"

#include <vector>

#include "crnsn/errors.hpp"

namespace crnsn {
namespace {

struct Tableau {
  RationalMatrix t;  // rows: constraints; last column: right-hand side
  std::vector<Eigen::Index> basis;

  Eigen::Index rows() const { return t.rows(); }
  Eigen::Index rhs() const { return t.cols() - 1; }

  void pivot(Eigen::Index row, Eigen::Index col) {
    const Rational p = t(row, col);
    t.row(row) /= p;
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      if (i == row || t(i, col) == 0) continue;
      const Rational f = t(i, col);
      t.row(i) -= f * t.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  }

  void drop_row(Eigen::Index row) {
    RationalMatrix next(t.rows() - 1, t.cols());
    for (Eigen::Index i = 0, k = 0; i < t.rows(); ++i)
      if (i != row) next.row(k++) = t.row(i);
    t = std::move(next);
    basis.erase(basis.begin() + row);
  }
};

enum class Outcome { Optimal, Unbounded };

// Bland's rule on the first `allowed` columns.
Outcome run_simplex(Tableau& tab, const RationalVector& cost, Eigen::Index allowed) {
  for (;;) {
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < allowed; ++j) {
      Rational reduced = cost(j);
      for (Eigen::Index i = 0; i < tab.rows(); ++i)
        if (tab.t(i, j) != 0) reduced -= cost(tab.basis[static_cast<std::size_t>(i)]) * tab.t(i, j);
      if (reduced < 0) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return Outcome::Optimal;

    Eigen::Index leaving = -1;
    Rational best;
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
      if (tab.t(i, entering) <= 0) continue;
      Rational ratio = tab.t(i, tab.rhs()) / tab.t(i, entering);
      if (leaving < 0 || ratio < best ||
          (ratio == best && tab.basis[static_cast<std::size_t>(i)] <
                                tab.basis[static_cast<std::size_t>(leaving)])) {
        leaving = i;
        best = ratio;
      }
    }
    if (leaving < 0) return Outcome::Unbounded;
    tab.pivot(leaving, entering);
  }
}

}  // namespace

std::optional<RationalVector> minimize(const LinearProgram& lp) {
  const Eigen::Index n = lp.objective.size();
  const Eigen::Index m_eq = lp.equality.rows();
  const Eigen::Index m_ge = lp.inequality.rows();
  const Eigen::Index m = m_eq + m_ge;
  // columns: x (n) | surplus (m_ge) | artificial (m) | rhs
  const Eigen::Index structural = n + m_ge;
  Tableau tab{RationalMatrix::Zero(m, structural + m + 1), std::vector<Eigen::Index>(static_cast<std::size_t>(m))};

  for (Eigen::Index i = 0; i < m_eq; ++i) {
    tab.t.row(i).head(n) = lp.equality.row(i);
    tab.t(i, tab.rhs()) = lp.equality_rhs(i);
  }
  for (Eigen::Index k = 0; k < m_ge; ++k) {
    const Eigen::Index i = m_eq + k;
    tab.t.row(i).head(n) = lp.inequality.row(k);
    tab.t(i, n + k) = -1;
    tab.t(i, tab.rhs()) = lp.inequality_rhs(k);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.t(i, tab.rhs()) < 0) tab.t.row(i) *= Rational(-1);
    tab.t(i, structural + i) = 1;
    tab.basis[static_cast<std::size_t>(i)] = structural + i;
  }

  RationalVector phase_one = RationalVector::Zero(structural + m);
  phase_one.tail(m).setConstant(Rational(1));
  if (run_simplex(tab, phase_one, structural + m) != Outcome::Optimal)
    throw Error("simplex: phase one unbounded");
  Rational infeasibility = 0;
  for (Eigen::Index i = 0; i < tab.rows(); ++i)
    if (tab.basis[static_cast<std::size_t>(i)] >= structural) infeasibility += tab.t(i, tab.rhs());
  if (infeasibility != 0) return std::nullopt;

  // Drive zero-valued artificials out of the basis; rows that cannot be
  // pivoted are linearly dependent and get dropped.
  for (Eigen::Index i = 0; i < tab.rows();) {
    if (tab.basis[static_cast<std::size_t>(i)] < structural) {
      ++i;
      continue;
    }
    Eigen::Index col = 0;
    while (col < structural && tab.t(i, col) == 0) ++col;
    if (col < structural) {
      tab.pivot(i, col);
      ++i;
    } else {
      tab.drop_row(i);
    }
  }

  RationalVector phase_two = RationalVector::Zero(structural + m);
  phase_two.head(n) = lp.objective;
  if (run_simplex(tab, phase_two, structural) != Outcome::Optimal)
    throw Error("simplex: objective unbounded below");

  RationalVector x = RationalVector::Zero(n);
  for (Eigen::Index i = 0; i < tab.rows(); ++i) {
    const Eigen::Index b = tab.basis[static_cast<std::size_t>(i)];
    if (b < n) x(b) = tab.t(i, tab.rhs());
  }
  return x;
}

}  // namespace crnsn
