#pragma once

#include <vector>

#include "netmpc/lp.hpp"
#include "netmpc/types.hpp"

namespace netmpc {

/// H-representation {z : A z <= b}.
struct Polyhedron {
  Mat A;
  Vec b;

  int rows() const { return static_cast<int>(A.rows()); }
  int dim() const { return static_cast<int>(A.cols()); }
  bool contains(const Vec& z, double tol = 1e-9) const;
};

/// Stacks two systems with the same dimension.
Polyhedron stack(const Polyhedron& p, const Polyhedron& q);

/// Removes rows that duplicate an earlier row up to positive scaling, and
/// rows with (numerically) zero normal and nonnegative bound.  Rows with zero
/// normal and negative bound are kept (they encode infeasibility).  Among
/// rows with the same normal direction only the tightest bound survives.
Polyhedron drop_duplicate_rows(const Polyhedron& p, double tol = 1e-9);

/// LP-based redundancy removal.  Row i is removed iff its left-hand side,
/// maximized subject to the remaining kept rows plus the context rows, stays
/// below its bound + tol.  Unbounded LPs keep the row.  The context rows are
/// constraints known to hold wherever the system is used; they are never part
/// of the output.  Deterministic given the row order.
Polyhedron reduce_redundancy(const Polyhedron& p, const Polyhedron& context,
                             double tol = 1e-9);
inline Polyhedron reduce_redundancy(const Polyhedron& p, double tol = 1e-9) {
  return reduce_redundancy(p, Polyhedron{Mat(0, p.dim()), Vec(0)}, tol);
}

/// Exact projection of {(x, y) : A [x; y] <= b} onto the first keep_dims
/// coordinates by Fourier-Motzkin elimination of the trailing coordinates.
/// After each elimination the system is pruned (duplicates plus LP
/// redundancy) to contain the blow-up.  Throws std::runtime_error when an
/// intermediate system exceeds max_rows.
Polyhedron project_to_first(const Polyhedron& p, int keep_dims,
                            int max_rows = 200000);

}  // namespace netmpc
