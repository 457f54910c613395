#pragma once

#include <optional>

#include "netmpc/information_tracker.hpp"
#include "netmpc/offline_synthesis.hpp"
#include "netmpc/qp.hpp"

namespace netmpc {

/// Weighted combination of the per-age tables for a concrete posterior:
/// minimize uhat' V uhat + v' uhat subject to W uhat <= w.
QpInstance assemble_qp(const SynthesisTables& tables,
                       const InformationState& st);

/// Packet payload [u^(d_hi); ...; u^(d_lo)] extracted from the stacked
/// candidate vector uhat = [u^(N-1); ...; u^(d_lo)].
Vec candidate_packet_blocks(const Dims& dims, const Vec& uhat);

/// Local-feedback candidate for the newest slot of the next decision: the
/// feedback gain applied to the posterior-expected state N - 1 steps ahead of
/// the current assessment.  prev_uhat fills the slots the expectation needs;
/// its own newest slot is unused.
Vec kappa_newest_slot(const SynthesisTables& tables,
                      const InformationState& st, const Vec& uhat);

/// Warm-start candidate for step k+1 from the step-k solution: every slot
/// shifts down by one and the newest slot is the local-feedback input.
Vec shifted_candidate(const SynthesisTables& tables,
                      const InformationState& st_next, const Vec& prev_uhat);

/// Online controller: tracks its own packets, assesses the view, solves the
/// constrained (or unconstrained) program and emits the candidate packet.
class MpcController {
 public:
  enum class Mode { Constrained, Unconstrained };

  explicit MpcController(SynthesisTables tables,
                         Mode mode = Mode::Constrained);

  struct StepResult {
    ControllerPacket packet;
    bool solved = false;    // a program was assembled and solved
    bool feasible = true;   // false if the QP had no feasible point
    Vec uhat;
    double objective = 0.0;
    std::optional<InformationState> info;
  };

  /// Advances one step; must be called with views for k = 0, 1, ...
  StepResult step(const ControllerView& view);

  const SynthesisTables& tables() const { return tables_; }
  const InformationTracker& tracker() const { return tracker_; }

 private:
  SynthesisTables tables_;
  Mode mode_;
  InformationTracker tracker_;
  std::optional<Vec> last_uhat_;
};

}  // namespace netmpc
