#include "netmpc/markov_chain.hpp"

#include <cmath>

namespace netmpc {

MarkovChain::MarkovChain(int lo, int hi, Vec mu, Mat phi)
    : lo_(lo), hi_(hi), mu_(std::move(mu)), phi_(std::move(phi)) {
  if (lo < 0 || hi < lo) throw std::invalid_argument("age range must satisfy 0 <= lo <= hi");
  const int r = size();
  if (mu_.size() != r) throw std::invalid_argument("initial distribution size mismatch");
  if (phi_.rows() != r || phi_.cols() != r)
    throw std::invalid_argument("transition matrix size mismatch");
  double mu_sum = 0.0;
  for (int i = 0; i < r; ++i) {
    if (mu_(i) <= 0.0)
      throw std::invalid_argument("initial distribution must be strictly positive on the range");
    mu_sum += mu_(i);
  }
  if (std::abs(mu_sum - 1.0) > 1e-9)
    throw std::invalid_argument("initial distribution must sum to 1");
  for (int i = 0; i < r; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < r; ++j) {
      const double p = phi_(i, j);
      if (p < 0.0) throw std::invalid_argument("transition probabilities must be nonnegative");
      // The age of the newest delivered packet grows by at most one per step.
      if (p > 0.0 && (lo_ + j) > (lo_ + i) + 1)
        throw std::invalid_argument("transition matrix allows age growth larger than one");
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > 1e-9)
      throw std::invalid_argument("transition matrix rows must sum to 1");
  }
}

Mat MarkovChain::n_step(int n) const {
  if (n < 0) throw std::invalid_argument("n-step power requires n >= 0");
  Mat p = Mat::Identity(size(), size());
  for (int i = 0; i < n; ++i) p = p * phi_;
  return p;
}

AgeMask MarkovChain::successors(int a) const {
  AgeMask s = 0;
  for (int b = lo_; b <= hi_; ++b)
    if (phi(a, b) > 0.0) s = mask_with(s, lo_, b);
  return s;
}

double MarkovChain::p1(int i_lo, int i_hi, int delta_lo,
                       const IndexedAgeSets& thetas) const {
  if (i_hi <= i_lo) throw std::invalid_argument("p1 requires i_hi > i_lo");
  if (delta_lo < lo_ || delta_lo > hi_) throw std::invalid_argument("p1 start age out of range");
  if (thetas.lo != i_lo + 1 || thetas.hi != i_hi)
    throw std::invalid_argument("p1 subsets must cover (i_lo, i_hi]");
  Vec v = Vec::Zero(size());
  v(delta_lo - lo_) = 1.0;
  for (int t = i_lo + 1; t <= i_hi; ++t) {
    const AgeMask allowed = thetas.at(t);
    Vec next = Vec::Zero(size());
    for (int b = lo_; b <= hi_; ++b) {
      if (!mask_contains(allowed, lo_, b)) continue;
      double acc = 0.0;
      for (int a = lo_; a <= hi_; ++a) acc += v(a - lo_) * phi(a, b);
      next(b - lo_) = acc;
    }
    v = next;
  }
  return v.sum();
}

double MarkovChain::p2(int i_lo, int i_hi, int delta_lo, int delta_hi,
                       const IndexedAgeSets& thetas) const {
  if (i_hi <= i_lo) throw std::invalid_argument("p2 requires i_hi > i_lo");
  if (thetas.lo != i_lo + 1 || thetas.hi != i_hi - 1)
    throw std::invalid_argument("p2 subsets must cover (i_lo, i_hi - 1]");
  if (delta_hi < lo_ || delta_hi > hi_) return 0.0;
  if (i_hi == i_lo + 1) return phi(delta_lo, delta_hi);
  IndexedAgeSets ext = thetas;
  ext.hi = i_hi;
  ext.sets.push_back(mask_with(0, lo_, delta_hi));
  const double num = p1(i_lo, i_hi, delta_lo, ext);
  const double den = p1(i_lo, i_hi - 1, delta_lo, thetas);
  if (den <= 0.0)
    throw ZeroConditioningError("p2: conditioning event has probability zero");
  return num / den;
}

double MarkovChain::p3(int i_lo, int i_hi, const IndexedAgeSets& thetas) const {
  if (i_lo < 0 || i_hi < i_lo) throw std::invalid_argument("p3 requires 0 <= i_lo <= i_hi");
  if (thetas.lo != i_lo || thetas.hi != i_hi)
    throw std::invalid_argument("p3 subsets must cover [i_lo, i_hi]");
  // Forward pass: distribute mu over i_lo steps, then apply the subsets.
  Vec v = mu_;
  if (i_lo > 0) v = n_step(i_lo).transpose() * v;
  for (int b = lo_; b <= hi_; ++b)
    if (!mask_contains(thetas.at(i_lo), lo_, b)) v(b - lo_) = 0.0;
  for (int t = i_lo + 1; t <= i_hi; ++t) {
    const AgeMask allowed = thetas.at(t);
    Vec next = Vec::Zero(size());
    for (int b = lo_; b <= hi_; ++b) {
      if (!mask_contains(allowed, lo_, b)) continue;
      double acc = 0.0;
      for (int a = lo_; a <= hi_; ++a) acc += v(a - lo_) * phi(a, b);
      next(b - lo_) = acc;
    }
    v = next;
  }
  return v.sum();
}

double MarkovChain::p4(int i_lo, int i_hi, int delta,
                       const IndexedAgeSets& thetas) const {
  if (i_hi <= i_lo) throw std::invalid_argument("p4 requires i_hi > i_lo");
  if (thetas.lo != i_lo || thetas.hi != i_hi - 1)
    throw std::invalid_argument("p4 subsets must cover [i_lo, i_hi - 1]");
  if (delta < lo_ || delta > hi_) return 0.0;
  IndexedAgeSets ext = thetas;
  ext.hi = i_hi;
  ext.sets.push_back(mask_with(0, lo_, delta));
  const double num = p3(i_lo, i_hi, ext);
  const double den = p3(i_lo, i_hi - 1, thetas);
  if (den <= 0.0)
    throw ZeroConditioningError("p4: conditioning event has probability zero");
  return num / den;
}

namespace {

double enumerate_paths(const MarkovChain& c, const std::vector<AgeMask>& allowed,
                       int t_query, int delta) {
  const int T = static_cast<int>(allowed.size()) - 1;
  double total = 0.0;
  std::vector<int> path(T + 1, c.lo());
  // Odometer-style enumeration of every path in [lo, hi]^(T+1).
  while (true) {
    bool ok = true;
    for (int t = 0; t <= T && ok; ++t)
      ok = mask_contains(allowed[t], c.lo(), path[t]);
    if (ok && (t_query < 0 || path[t_query] == delta)) {
      double w = c.mu(path[0]);
      for (int t = 1; t <= T && w > 0.0; ++t) w *= c.phi(path[t - 1], path[t]);
      total += w;
    }
    int pos = T;
    while (pos >= 0 && path[pos] == c.hi()) path[pos--] = c.lo();
    if (pos < 0) break;
    ++path[pos];
  }
  return total;
}

void check_enumeration_size(const MarkovChain& c, std::size_t steps) {
  double paths = 1.0;
  for (std::size_t i = 0; i < steps; ++i) paths *= c.size();
  if (paths > 1e7)
    throw std::invalid_argument("brute-force enumeration horizon too large");
}

}  // namespace

double brute_force_event(const MarkovChain& chain, const std::vector<AgeMask>& allowed) {
  if (allowed.empty()) throw std::invalid_argument("empty constraint list");
  check_enumeration_size(chain, allowed.size());
  return enumerate_paths(chain, allowed, -1, 0);
}

double brute_force_conditional(const MarkovChain& chain,
                               const std::vector<AgeMask>& allowed,
                               int t_query, int delta) {
  if (allowed.empty()) throw std::invalid_argument("empty constraint list");
  if (t_query < 0 || t_query >= static_cast<int>(allowed.size()))
    throw std::invalid_argument("query time outside constrained horizon");
  check_enumeration_size(chain, allowed.size());
  const double den = enumerate_paths(chain, allowed, -1, 0);
  if (den <= 0.0)
    throw ZeroConditioningError("brute force: conditioning event has probability zero");
  return enumerate_paths(chain, allowed, t_query, delta) / den;
}

}  // namespace netmpc
