#pragma once

#include "netmpc/types.hpp"

namespace netmpc {

enum class LpStatus { Optimal, Unbounded, Infeasible };

/// Result of a linear program.  For lp_max, `x` is the maximizer and `value`
/// the maximum when Optimal; when Infeasible, `farkas` holds y >= 0 with
/// A'y = 0 and b'y < 0.
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Vec x;
  Vec farkas;
};

/// Result of a standard-form simplex run.  `x` is the solution, `pi` the
/// simplex multipliers of the equality rows and, when Unbounded, `ray` an
/// improving recession direction.
struct SimplexResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Vec x;
  Vec pi;
  Vec ray;
};

/// min c'x subject to Ax = b, x >= 0.  Dense two-phase revised simplex with
/// Bland's rule (deterministic, anti-cycling).  Throws std::runtime_error if
/// the iteration limit is hit (numerical breakdown).
SimplexResult simplex_standard(const Mat& A, const Vec& b, const Vec& c);

/// max c'z subject to Az <= b with z free, solved through the standard-form
/// dual (min b'y, A'y = c, y >= 0), whose basis has only dim(z) rows.
LpResult lp_max(const Vec& c, const Mat& A, const Vec& b);

/// Feasibility of {z : Az <= b}: when feasible, returns a point in the set
/// (within tol); when infeasible, returns a Farkas certificate.
LpResult find_point(const Mat& A, const Vec& b, double tol = 1e-9);

}  // namespace netmpc
