#include "netmpc/protocol.hpp"

#include <algorithm>

namespace netmpc {

Vec packet_block(const Vec& blocks, int d, int m, int d_lo, int d_hi) {
  if (d < d_lo || d > d_hi) throw std::invalid_argument("packet block age out of range");
  if (blocks.size() != static_cast<int>((d_hi - d_lo + 1) * m))
    throw std::invalid_argument("controller packet payload size mismatch");
  return blocks.segment(packet_block_offset(d, m, d_hi), m);
}

SensorPacket make_sensor_packet(int k, const std::vector<Vec>& trajectory,
                                int h_lo, int h_hi) {
  if (k >= static_cast<int>(trajectory.size()))
    throw std::invalid_argument("sensor packet requires the state at its send time");
  SensorPacket p;
  p.k = k;
  p.first = std::max(0, k - (h_hi - h_lo));
  p.states.assign(trajectory.begin() + p.first, trajectory.begin() + k + 1);
  return p;
}

ActuatorPacket make_actuator_packet(int k, const std::vector<int>& d_history,
                                    int K_d, int s_lo, int s_hi) {
  ActuatorPacket p;
  p.k = k;
  if (K_d < 0 || k < K_d) {
    p.first = k + 1;  // empty payload
    return p;
  }
  p.first = std::max(K_d, k - (s_hi - s_lo));
  p.d_values.assign(d_history.begin() + p.first, d_history.begin() + k + 1);
  return p;
}

Vec actuator_apply(int k, int D_k, const std::vector<ControllerPacket>& packets,
                   int m, int d_lo, int d_hi) {
  if (k - D_k < 0) return Vec::Zero(m);
  const ControllerPacket& p = packets.at(k - D_k);
  if (p.k != k - D_k) throw std::logic_error("packet store not indexed by send time");
  return packet_block(p.blocks, D_k, m, d_lo, d_hi);
}

int ControllerView::H() const {
  if (sensor_ts_ < 0) throw std::logic_error("no sensor packet delivered yet");
  return k_ - sensor_ts_;
}

int ControllerView::S() const {
  if (ack_ts_ < 0) throw std::logic_error("no acknowledgment delivered yet");
  return k_ - ack_ts_;
}

int ControllerView::K_d() const {
  if (K_d_ < 0) throw std::logic_error("actuator-side first arrival not known yet");
  return K_d_;
}

int ControllerView::d_value(int t) const {
  if (K_d_ < 0 || t < K_d_ || t > newest_d_)
    throw std::logic_error("age D not known for the requested step");
  return d_values_.at(t - K_d_);
}

void ControllerView::advance(int k, const std::optional<SensorPacket>& sensor,
                             const std::optional<ActuatorPacket>& ack) {
  if (k != k_ + 1) throw std::logic_error("controller view must advance one step at a time");
  k_ = k;

  if (sensor) {
    if (sensor->k > k || sensor->k < sensor_ts_)
      throw std::logic_error("sensor packet timestamps must be monotone");
    sensor_ts_ = sensor->k;
    if (K_h_ < 0) K_h_ = k;
    // The window overlaps previously known states, so knowledge stays
    // contiguous from step 0.
    if (sensor->first > static_cast<int>(states_.size()))
      throw std::logic_error("sensor packet window leaves a state gap");
    for (int t = sensor->first; t <= sensor->k; ++t) {
      const Vec& x = sensor->states.at(t - sensor->first);
      if (t < static_cast<int>(states_.size()))
        continue;
      states_.push_back(x);
    }
    newest_state_ = sensor_ts_;
  }

  if (ack) {
    if (ack->k > k || ack->k < ack_ts_)
      throw std::logic_error("acknowledgment timestamps must be monotone");
    ack_ts_ = ack->k;
    if (K_s_ < 0) K_s_ = k;
    if (!ack->d_values.empty()) {
      if (K_sd_ < 0) {
        K_sd_ = k;
        K_d_ = ack->first;
      }
      if (ack->first > K_d_ + static_cast<int>(d_values_.size()))
        throw std::logic_error("acknowledgment window leaves an age gap");
      for (int t = ack->first; t <= ack->k; ++t) {
        if (t < K_d_ + static_cast<int>(d_values_.size())) continue;
        d_values_.push_back(ack->d_values.at(t - ack->first));
      }
      newest_d_ = ack->k;
    }
  }
}

}  // namespace netmpc
