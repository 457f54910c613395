#include "netmpc/information_tracker.hpp"

#include <algorithm>
#include <stdexcept>

namespace netmpc {

InformationTracker::InformationTracker(PlantModel plant, AgeBounds bounds,
                                       MarkovChain chain)
    : plant_(std::move(plant)), bounds_(bounds), chain_(std::move(chain)) {
  plant_.validate();
  bounds_.validate();
  if (chain_.lo() != bounds_.d_lo || chain_.hi() != bounds_.d_hi)
    throw std::invalid_argument("age chain range does not match bounds");
  m_tilde_ = (bounds_.d_hi - bounds_.d_lo + 1) * plant_.m();
}

void InformationTracker::record_sent(const ControllerPacket& pkt) {
  if (pkt.k != static_cast<int>(sent_.size()))
    throw std::invalid_argument("packets must be recorded in step order");
  if (pkt.blocks.size() != m_tilde_)
    throw std::invalid_argument("packet payload has wrong size");
  sent_.push_back(pkt.blocks);
}

Vec InformationTracker::sent_packet(int t) const {
  if (t < 0) return Vec::Zero(m_tilde_);
  return sent_.at(t);
}

AgeMask InformationTracker::transition_ages(int t, const Vec& x_t,
                                            const Vec& x_next,
                                            double tol) const {
  AgeMask out = 0;
  for (int d = bounds_.d_lo; d <= bounds_.d_hi; ++d) {
    Vec u = Vec::Zero(plant_.m());
    if (t - d >= 0)
      u = packet_block(sent_.at(t - d), d, plant_.m(), bounds_.d_lo,
                       bounds_.d_hi);
    const Vec resid = x_next - plant_.A * x_t - plant_.B * u;
    if (resid.cwiseAbs().maxCoeff() <= tol)
      out = mask_with(out, bounds_.d_lo, d);
  }
  return out;
}

InformationState InformationTracker::assess(const ControllerView& view) const {
  const int k = view.k();
  if (!view.sensor_seen())
    throw std::logic_error("assess requires at least one sensor packet");
  if (static_cast<int>(sent_.size()) != k)
    throw std::logic_error("sent packets must cover steps 0..k-1");

  const int H = view.H();
  const bool have_ack = view.ack_seen();
  const int S = have_ack ? view.S() : 0;
  const int h_tilde = have_ack ? std::min(H, S - 1) : H;
  const int anchor_time = k - h_tilde;

  // States known directly from the sensor cover [0, k - H]; when the ack
  // stream makes newer inputs known, roll the model forward to the anchor.
  std::vector<Vec> states(anchor_time + 1);
  for (int t = 0; t <= k - H; ++t) states[t] = view.state(t);
  for (int t = k - H; t < anchor_time; ++t) {
    Vec u = Vec::Zero(plant_.m());
    if (t <= view.newest_d_time()) {
      if (t >= view.K_d()) {
        const int d = view.d_value(t);
        if (t - d >= 0)
          u = packet_block(sent_.at(t - d), d, plant_.m(), bounds_.d_lo,
                           bounds_.d_hi);
      }  // before the actuator's first reception the applied input was zero
    } else if (!(view.knows_no_data_yet() && t <= k - S)) {
      throw std::logic_error("cannot reconstruct state: input unknown");
    }
    states[t + 1] = plant_.A * states[t] + plant_.B * u;
  }

  InformationState out;
  out.k = k;
  out.h_tilde = h_tilde;
  out.anchor = states[anchor_time];

  // Posterior of D at the anchor time.
  const int lo = bounds_.d_lo, hi = bounds_.d_hi;
  const int r = hi - lo + 1;
  out.p = Vec::Zero(r);
  if (have_ack && view.K_sd() >= 0) {
    const int d_known = view.d_value(k - S);  // newest known age
    if (h_tilde == S - 1) {
      for (int d = lo; d <= hi; ++d) out.p(d - lo) = chain_.phi(d_known, d);
    } else {
      IndexedAgeSets thetas;
      thetas.lo = k - S + 1;
      thetas.hi = anchor_time - 1;
      for (int t = thetas.lo; t <= thetas.hi; ++t)
        thetas.sets.push_back(transition_ages(t, states[t], states[t + 1]));
      for (int d = lo; d <= hi; ++d)
        out.p(d - lo) = chain_.p2(k - S, anchor_time, d_known, d, thetas);
    }
  } else if (anchor_time <= lo) {
    const Vec dist = chain_.n_step(anchor_time).transpose() * chain_.mu_vec();
    out.p = dist;
  } else {
    IndexedAgeSets thetas;
    thetas.lo = lo;
    thetas.hi = anchor_time - 1;
    for (int t = thetas.lo; t <= thetas.hi; ++t) {
      AgeMask m = chain_.full();
      if (t <= k - H - 1) m &= transition_ages(t, states[t], states[t + 1]);
      if (have_ack && t <= k - S) {
        AgeMask late = 0;  // no packet delivered by t: age exceeds t
        for (int d = std::max(lo, t + 1); d <= hi; ++d)
          late = mask_with(late, lo, d);
        m &= late;
      }
      thetas.sets.push_back(m);
    }
    for (int d = lo; d <= hi; ++d)
      out.p(d - lo) = chain_.p4(lo, anchor_time, d, thetas);
  }

  out.support = 0;
  for (int d = lo; d <= hi; ++d)
    if (out.p(d - lo) > 0.0) out.support = mask_with(out.support, lo, d);

  // Extended state: anchor plus the last d_hi + h_hi sent packets.
  const int packets = bounds_.d_hi + bounds_.h_hi;
  out.xhat = Vec::Zero(plant_.n() + packets * m_tilde_);
  out.xhat.head(plant_.n()) = out.anchor;
  for (int j = 1; j <= packets; ++j)
    out.xhat.segment(plant_.n() + (j - 1) * m_tilde_, m_tilde_) =
        sent_packet(k - j);
  return out;
}

}  // namespace netmpc
