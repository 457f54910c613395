#pragma once

#include <vector>

#include "netmpc/markov_chain.hpp"
#include "netmpc/protocol.hpp"
#include "netmpc/types.hpp"

namespace netmpc {

/// Everything the controller can deduce at step k from the packets received
/// so far: the newest usable state (the anchor), the stacked extended state,
/// and the posterior distribution of the actuation age at the anchor time.
struct InformationState {
  int k = 0;
  int h_tilde = 0;   // age of the anchor state x_{k - h_tilde}
  Vec p;             // posterior of D_{k - h_tilde}, indexed over [d_lo, d_hi]
  AgeMask support = 0;
  Vec anchor;        // x_{k - h_tilde}
  Vec xhat;          // [anchor; sent packet k-1; ...; sent packet k-d_hi-h_hi]
};

/// Tracks the controller's own transmissions and fuses them with the
/// delivered sensor and acknowledgment data.
class InformationTracker {
 public:
  InformationTracker(PlantModel plant, AgeBounds bounds, MarkovChain chain);

  /// Records the candidate packet broadcast at step k; packets must be
  /// recorded in order k = 0, 1, ...
  void record_sent(const ControllerPacket& pkt);

  int packets_recorded() const { return static_cast<int>(sent_.size()); }
  /// Stacked blocks [u^(d_hi); ...; u^(d_lo)] of the packet sent at step t,
  /// or zero for t < 0.
  Vec sent_packet(int t) const;

  /// Ages d consistent with one observed transition x_t -> x_{t+1}, i.e.
  /// those whose hypothesized applied input reproduces the transition within
  /// an infinity-norm residual of tol.
  AgeMask transition_ages(int t, const Vec& x_t, const Vec& x_next,
                          double tol = 1e-9) const;

  /// Full assessment at the view's current step; requires at least one
  /// delivered sensor packet and all sent packets recorded through k - 1.
  InformationState assess(const ControllerView& view) const;

 private:
  PlantModel plant_;
  AgeBounds bounds_;
  MarkovChain chain_;
  int m_tilde_ = 0;
  std::vector<Vec> sent_;
};

}  // namespace netmpc
