#pragma once

#include <cstdint>
#include <vector>

#include "netmpc/types.hpp"

namespace netmpc {

/// Subset of an integer age range [lo, hi], stored as a bit mask where bit i
/// corresponds to age lo + i.
using AgeMask = std::uint32_t;

inline AgeMask full_mask(int lo, int hi) {
  return (AgeMask{1} << (hi - lo + 1)) - 1;
}
inline bool mask_contains(AgeMask s, int lo, int age) {
  return age >= lo && (s >> (age - lo)) & 1u;
}
inline AgeMask mask_with(AgeMask s, int lo, int age) {
  return s | (AgeMask{1} << (age - lo));
}
inline int mask_count(AgeMask s) { return __builtin_popcount(s); }

/// A contiguous run of age subsets, one per absolute time step t in [lo, hi].
struct IndexedAgeSets {
  int lo = 0;
  int hi = -1;  // hi < lo denotes an empty run
  std::vector<AgeMask> sets;

  int size() const { return hi - lo + 1; }
  AgeMask at(int t) const { return sets.at(t - lo); }
};

/// Thrown when a conditional probability is requested for a conditioning
/// event of probability zero.
struct ZeroConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Homogeneous Markov chain on the integer range [lo, hi] with initial
/// distribution mu (time 0) and one-step transition matrix phi.
///
/// The chain models the age of the newest delivered packet, so admissible
/// transitions can grow by at most one per step: phi(a, b) > 0 implies
/// lo <= b <= min(hi, a + 1).
class MarkovChain {
 public:
  /// Trivial single-state chain (age 0 with probability one).
  MarkovChain() : lo_(0), hi_(0), mu_(Vec::Ones(1)), phi_(Mat::Ones(1, 1)) {}
  /// Validates and constructs; throws std::invalid_argument on bad input.
  MarkovChain(int lo, int hi, Vec mu, Mat phi);

  int lo() const { return lo_; }
  int hi() const { return hi_; }
  int size() const { return hi_ - lo_ + 1; }
  AgeMask full() const { return full_mask(lo_, hi_); }

  double mu(int d) const { return mu_(d - lo_); }
  const Vec& mu_vec() const { return mu_; }
  double phi(int a, int b) const { return phi_(a - lo_, b - lo_); }
  const Mat& phi_mat() const { return phi_; }

  /// n-step transition matrix; n = 0 yields the identity.
  Mat n_step(int n) const;

  /// Ages reachable in one step from age a (positive phi row entries).
  AgeMask successors(int a) const;

  /// Probability of moving from age delta_lo at time i_lo to time i_hi while
  /// passing through the given age subsets at times (i_lo, i_hi]; thetas must
  /// cover exactly (i_lo, i_hi].  An empty subset yields 0.
  double p1(int i_lo, int i_hi, int delta_lo, const IndexedAgeSets& thetas) const;

  /// Conditional probability that the age at time i_hi equals delta_hi, given
  /// age delta_lo at time i_lo and passage through the subsets at times
  /// (i_lo, i_hi - 1].  Throws ZeroConditioningError when the conditioning
  /// event has probability zero.
  double p2(int i_lo, int i_hi, int delta_lo, int delta_hi,
            const IndexedAgeSets& thetas) const;

  /// Unconditional probability (marginalizing the initial distribution) of
  /// passing through the subsets at times [i_lo, i_hi]; i_lo may be 0, in
  /// which case the first subset constrains the initial age.
  double p3(int i_lo, int i_hi, const IndexedAgeSets& thetas) const;

  /// Conditional version of p3: probability that the age at time i_hi equals
  /// delta, given passage through the subsets at times [i_lo, i_hi - 1].
  double p4(int i_lo, int i_hi, int delta, const IndexedAgeSets& thetas) const;

 private:
  int lo_, hi_;
  Vec mu_;
  Mat phi_;
};

/// Exhaustive-enumeration oracle: P[age at t_query = delta | age at t is in
/// allowed[t] for all t in [0, horizon]].  allowed must have horizon + 1
/// entries.  Enumerates every path in [lo, hi]^(horizon+1); refuses runs with
/// more than ~1e7 paths.  Throws ZeroConditioningError when the conditioning
/// event has probability zero.
double brute_force_conditional(const MarkovChain& chain,
                               const std::vector<AgeMask>& allowed,
                               int t_query, int delta);

/// Same enumeration, returning the unconditional probability of the event
/// that the age lies in allowed[t] for every t.
double brute_force_event(const MarkovChain& chain,
                         const std::vector<AgeMask>& allowed);

}  // namespace netmpc
