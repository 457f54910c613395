#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "netmpc/markov_chain.hpp"
#include "netmpc/types.hpp"

namespace netmpc {

/// Counter-based deterministic random generator (SplitMix64 stream).  The
/// same seed always reproduces the same sequence, and independent streams are
/// derived from a seed plus a stream id.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  static CounterRng stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1).
  double next_double();
  /// Uniform integer in [lo, hi].
  int next_int(int lo, int hi);
  /// Sample index lo + i with probability probs(i); probs must sum to ~1.
  int sample(const Vec& probs, int lo);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Law of one age process on [lo, hi].  Exactly one of the following applies:
///  - script: a fixed, pre-validated age sequence;
///  - chain:  a Markov chain on [lo, hi];
///  - neither: independent uniform choice among feasible successors.
struct AgeProcessSpec {
  int lo = 0;
  int hi = 0;
  std::optional<MarkovChain> chain;
  std::optional<std::vector<int>> script;

  void validate() const;
};

/// Joint realization of the three age processes over steps 0..horizon-1.
struct NetworkRealization {
  std::vector<int> D;  // controller -> actuator age
  std::vector<int> H;  // sensor -> controller age
  std::vector<int> S;  // actuator -> controller age
};

/// First times at which each link has delivered:
///   K_h = min{k : H_k <= k},  K_d = min{k : D_k <= k},  K_s = min{k : S_k <= k},
///   K_sd = min{k >= K_s : k - S_k >= K_d}.
struct FirstArrivals {
  int K_h = -1;
  int K_d = -1;
  int K_s = -1;
  int K_sd = -1;
};

/// Throws std::invalid_argument unless the sequence stays in [lo, hi] and
/// grows by at most one per step.
void validate_age_sequence(const std::vector<int>& ages, int lo, int hi);

/// Samples (or copies) the three age processes.  Scripted processes are
/// validated; sampled ones draw from the chain when given, otherwise
/// uniformly over feasible successors.  Deterministic in (specs, seed).
NetworkRealization sample_realization(const AgeProcessSpec& d,
                                      const AgeProcessSpec& h,
                                      const AgeProcessSpec& s,
                                      int horizon, std::uint64_t seed);

/// Throws std::invalid_argument when any first-arrival time does not occur
/// within the realization.
FirstArrivals first_arrival_times(const NetworkRealization& r);

/// Adapter from a per-packet trace to an age process: delays[j] is the
/// delivery delay of the packet sent at step j (nullopt = lost).  The age at
/// step k is k minus the newest send time delivered by k, or k + 1 before the
/// first delivery.  Throws when the resulting ages leave [lo, hi].
std::vector<int> ages_from_packet_delays(
    const std::vector<std::optional<int>>& delays, int lo, int hi);

}  // namespace netmpc
