#pragma once

#include <optional>
#include <vector>

#include "netmpc/types.hpp"

namespace netmpc {

/// Sensor packet sent at step k: plant states for steps [first, k].  The
/// window is long enough that consecutive delivered packets overlap, so the
/// receiver always knows the full state prefix.
struct SensorPacket {
  int k = 0;
  int first = 0;
  std::vector<Vec> states;
};

/// Controller packet sent at step k: one candidate input per possible age,
/// stacked as [u^(d_hi); ...; u^(d_lo)] (m_tilde entries).  The actuator
/// applies the block matching the packet's actual age on arrival.
struct ControllerPacket {
  int k = 0;
  Vec blocks;
};

/// Acknowledgment packet sent by the actuator at step k: the ages D for
/// steps [first, k].  Empty (first > k) until the actuator has received its
/// first controller packet.
struct ActuatorPacket {
  int k = 0;
  int first = 0;
  std::vector<int> d_values;
};

/// Offset of the age-d block inside a controller packet.
inline int packet_block_offset(int d, int m, int d_hi) { return (d_hi - d) * m; }

/// Extracts the age-d block from a controller packet payload.
Vec packet_block(const Vec& blocks, int d, int m, int d_lo, int d_hi);

/// Sensor packet for step k covering [max(0, k - (h_hi - h_lo)), k].
SensorPacket make_sensor_packet(int k, const std::vector<Vec>& trajectory,
                                int h_lo, int h_hi);

/// Actuator packet for step k covering [max(K_d, k - (s_hi - s_lo)), k];
/// empty while k < K_d (no controller packet seen yet, K_d < 0 encodes that).
ActuatorPacket make_actuator_packet(int k, const std::vector<int>& d_history,
                                    int K_d, int s_lo, int s_hi);

/// Input applied by the actuator at step k when the newest controller packet
/// has age D_k: the age-D_k block of packet k - D_k, or zero before any
/// packet is received (k - D_k < 0).  packets[j] is the packet sent at j.
Vec actuator_apply(int k, int D_k, const std::vector<ControllerPacket>& packets,
                   int m, int d_lo, int d_hi);

/// Everything the controller has learned from delivered packets up to the
/// current step.  Grows monotonically.
class ControllerView {
 public:
  /// Advances to step k with the newest delivered packets (nullopt while the
  /// corresponding link has not delivered anything yet).
  void advance(int k, const std::optional<SensorPacket>& sensor,
               const std::optional<ActuatorPacket>& ack);

  int k() const { return k_; }
  /// Current sensor age H_k; only valid once a sensor packet has arrived.
  int H() const;
  /// Current acknowledgment age S_k; only valid once an ack has arrived.
  int S() const;
  bool sensor_seen() const { return newest_state_ >= 0; }
  bool ack_seen() const { return K_s_ >= 0; }

  int K_h() const { return K_h_; }
  int K_s() const { return K_s_; }
  /// First step at which the controller's ack knowledge covers K_d; -1 while
  /// the actuator-side first arrival is still unknown.
  int K_sd() const { return K_sd_; }
  /// Actuator-side first arrival K_d; only valid once K_sd is reached.
  int K_d() const;

  /// Newest step whose state is known: k - H_k.
  int newest_state_time() const { return newest_state_; }
  const Vec& state(int t) const { return states_.at(t); }

  /// Newest step whose age D is known (-1 if none): k - S_k once ack data
  /// covers it.
  int newest_d_time() const { return newest_d_; }
  int d_value(int t) const;

  /// While K_s <= k < K_sd the controller knows that no controller packet
  /// reached the actuator up to k - S_k (hence those inputs were zero).
  bool knows_no_data_yet() const { return K_s_ >= 0 && K_sd_ < 0; }

 private:
  int k_ = -1;
  int sensor_ts_ = -1;  // send time of newest sensor packet
  int ack_ts_ = -1;     // send time of newest actuator packet
  int newest_state_ = -1;
  int newest_d_ = -1;
  int K_h_ = -1, K_s_ = -1, K_sd_ = -1, K_d_ = -1;
  std::vector<Vec> states_;     // states_[t] = x_t for t <= newest_state_
  std::vector<int> d_values_;   // d_values_[t] = D_t for t <= newest_d_
};

}  // namespace netmpc
