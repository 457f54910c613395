#pragma once

#include "netmpc/offline_synthesis.hpp"
#include "netmpc/polytope.hpp"

namespace netmpc {

/// Constraints on (x0, ubar) for a fixed first sensor-arrival step K_h: the
/// plant runs open-loop (zero input) until step K_h + d_hi, is then driven by
/// the stacked inputs ubar = [u_{K_h+N-1}; ...; u_{K_h+d_hi}], must respect
/// the state constraints throughout, and must reach the terminal set at step
/// K_h + N.
Polyhedron admissible_lifted(const SynthesisParams& sp,
                             const Polyhedron& terminal, int K_h);

/// Initial states from which the constraints can be met for every possible
/// first sensor-arrival step: the intersection over K_h in [h_lo, h_hi] of
/// the lifted systems with the inputs projected out.
Polyhedron admissible_region(const SynthesisParams& sp,
                             const Polyhedron& terminal);

}  // namespace netmpc
