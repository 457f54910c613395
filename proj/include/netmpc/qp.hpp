#pragma once

#include <vector>

#include "netmpc/types.hpp"

namespace netmpc {

/// Strictly convex quadratic program  min_u  u'V u + u'v  s.t.  W u <= w.
struct QpInstance {
  Mat V;
  Vec v;
  Mat W;
  Vec w;
};

enum class QpStatus { Optimal, Infeasible };

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Vec u;
  double objective = 0.0;
  /// Multipliers per constraint row (zero for inactive rows).
  Vec lambda;
  /// Row indices active at the solution.
  std::vector<int> active;
  /// Farkas certificate (y >= 0, W'y = 0, w'y < 0) when infeasible.
  Vec farkas;
  /// Largest KKT residual over stationarity and complementarity.
  double kkt_residual = 0.0;
};

/// Dense primal active-set method with deterministic (lowest row index)
/// tie-breaking.  The initial point comes from a phase-1 LP; infeasible
/// problems return a Farkas certificate.  The solution is certified against
/// the KKT conditions (stationarity 1e-7, multiplier sign -1e-9,
/// complementarity 1e-7, feasibility 1e-8, all scaled); certification
/// failure throws std::runtime_error.  V must be symmetric positive
/// definite (throws std::invalid_argument otherwise).
QpResult solve_qp(const QpInstance& qp);

}  // namespace netmpc
