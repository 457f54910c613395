#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netmpc/age_processes.hpp"
#include "netmpc/controller.hpp"

namespace netmpc {

/// Closed-loop controller variants.
enum class Variant {
  Stochastic,              // scenario-based MPC over the age posterior
  DeterministicBuffered,   // actuator buffers every packet to age d_hi
  Lqr,                     // u = 0 until the first state arrives, then -L x
  UnconstrainedStochastic  // expected-cost minimizer without constraints
};

std::string variant_name(Variant v);

/// One closed-loop experiment: which controller, how the age processes are
/// generated (chain / uniform / script via the specs), and for how long.
struct ExperimentSpec {
  Variant variant = Variant::Stochastic;
  Vec x0;
  int horizon = 60;
  std::uint64_t seed = 0;
  AgeProcessSpec d_spec, h_spec, s_spec;

  /// Spec whose age processes follow the synthesis parameters: D from the
  /// design chain, H and S uniform over feasible successors.
  static ExperimentSpec make(const SynthesisParams& sp, Variant v, Vec x0,
                             int horizon, std::uint64_t seed);
  /// Pins a process to the constant script value, e.g. D = d_hi.
  void script_d(int value);
  void script_h(int value);
  void script_s(int value);
};

struct TraceStep {
  int k = 0;
  Vec x;
  Vec u;
  int D = 0, H = 0, S = 0;
  bool feasible = true;        // the step's program had a feasible point
  double J = 0.0;              // running cost through this step
  std::vector<int> violations; // violated rows: state rows, then input rows
};

struct Trace {
  std::uint64_t seed = 0;
  std::string variant;
  std::vector<TraceStep> steps;
  bool feasible = true;  // false once any step's program was infeasible
  int violation_count = 0;

  double final_cost() const;
};

/// Synthesis parameters for the deterministic-buffered baseline: the same
/// plant and weights, but a single possible age d_hi (the buffer length).
/// With one scenario the local-feedback tail is plain -L x and the tail cost
/// telescopes to the terminal quadratic, i.e. standard delayed-chain MPC.
SynthesisParams deterministic_buffered_params(const SynthesisParams& sp);

/// Runs one closed loop.  `tables` must match the variant: the stochastic
/// variants take the full synthesis, the buffered variant the tables for
/// deterministic_buffered_params, and the LQR baseline only uses aux.lqr.L.
/// Deterministic per (spec, seed); an infeasible program truncates the trace
/// with feasible = false.
Trace run_closed_loop(const SynthesisTables& tables, const ExperimentSpec& spec);

/// CSV with columns k, x1..xn, u1..um, D, H, S, feasible, Jtilde.
std::string trace_csv(const Trace& trace);

/// Summary of several traces: final costs, violation counts, feasibility.
std::string summary_json(const std::vector<Trace>& traces);

/// Per-step running-cost comparison CSV: column per trace.
std::string compare_csv(const std::vector<Trace>& traces);

/// Minimal line chart (state norm, input norm and running cost over time).
std::string trace_svg(const Trace& trace);

}  // namespace netmpc
