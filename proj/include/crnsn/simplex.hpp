#pragma once

#include <optional>

#include "crnsn/rational.hpp"

namespace crnsn {

/// minimize objective . x  subject to  equality x = equality_rhs,
///                                     inequality x >= inequality_rhs,  x >= 0.
/// Either constraint block may have zero rows.
struct LinearProgram {
  RationalMatrix equality;
  RationalVector equality_rhs;
  RationalMatrix inequality;
  RationalVector inequality_rhs;
  RationalVector objective;
};

/// Exact two-phase simplex with Bland's rule. Returns nullopt when the
/// feasible set is empty; throws crnsn::Error when the objective is unbounded.
std::optional<RationalVector> minimize(const LinearProgram& lp);

}  // namespace crnsn
