#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netmpc/markov_chain.hpp"
#include "test_helpers.hpp"

using namespace netmpc;
using netmpc::testing::demo_chain;
using netmpc::testing::random_chain;

namespace {

IndexedAgeSets sets_over(int lo, int hi, std::vector<AgeMask> s) {
  IndexedAgeSets r;
  r.lo = lo;
  r.hi = hi;
  r.sets = std::move(s);
  return r;
}

/// Builds a full-horizon constraint list for the brute-force oracle with the
/// given subsets patched in at [t0, t0 + subsets.size()).
std::vector<AgeMask> allowed_list(const MarkovChain& c, int horizon, int t0,
                                  const std::vector<AgeMask>& subsets) {
  std::vector<AgeMask> a(horizon + 1, c.full());
  for (std::size_t i = 0; i < subsets.size(); ++i) a[t0 + i] = subsets[i];
  return a;
}

AgeMask random_nonempty_mask(std::mt19937_64& rng, int bits) {
  std::uniform_int_distribution<AgeMask> d(1, (AgeMask{1} << bits) - 1);
  return d(rng);
}

}  // namespace

TEST_CASE("chain validation") {
  CHECK_NOTHROW(demo_chain());

  Vec mu(3);
  mu << 0.2, 0.4, 0.4;
  Mat phi(3, 3);
  phi << 0.4, 0.6, 0.0,
         0.4, 0.4, 0.2,
         0.2, 0.4, 0.4;

  SUBCASE("row sum off") {
    Mat bad = phi;
    bad(0, 0) = 0.5;
    CHECK_THROWS_AS(MarkovChain(0, 2, mu, bad), std::invalid_argument);
  }
  SUBCASE("age growth larger than one") {
    Mat bad = phi;
    bad(0, 0) = 0.3;
    bad(0, 2) = 0.1;  // jump from age 0 to age 2
    CHECK_THROWS_AS(MarkovChain(0, 2, mu, bad), std::invalid_argument);
  }
  SUBCASE("initial distribution must be positive everywhere") {
    Vec bad_mu(3);
    bad_mu << 0.6, 0.4, 0.0;
    CHECK_THROWS_AS(MarkovChain(0, 2, bad_mu, phi), std::invalid_argument);
  }
  SUBCASE("negative entries rejected") {
    Mat bad = phi;
    bad(2, 0) = -0.2;
    bad(2, 1) = 0.8;
    CHECK_THROWS_AS(MarkovChain(0, 2, mu, bad), std::invalid_argument);
  }
}

TEST_CASE("n-step powers") {
  const auto c = demo_chain();
  CHECK(c.n_step(0).isIdentity(1e-14));
  CHECK(c.n_step(1).isApprox(c.phi_mat(), 1e-14));
  // Two-step probability 2 -> 0.
  CHECK(c.n_step(2)(2, 0) == doctest::Approx(0.32).epsilon(1e-12));
  for (int n = 0; n <= 5; ++n) {
    const Mat p = c.n_step(n);
    for (int i = 0; i < c.size(); ++i)
      CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("path probability through subsets") {
  const auto c = demo_chain();
  // One constrained step from age 1 through {0, 1}.
  CHECK(c.p1(0, 1, 1, sets_over(1, 1, {0b011})) ==
        doctest::Approx(0.8).epsilon(1e-12));
  // Unconstrained subsets give total probability one.
  CHECK(c.p1(0, 3, 2, sets_over(1, 3, {c.full(), c.full(), c.full()})) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Singleton subsets reduce to a product of one-step probabilities.
  CHECK(c.p1(2, 4, 1, sets_over(3, 4, {0b001, 0b010})) ==
        doctest::Approx(c.phi(1, 0) * c.phi(0, 1)).epsilon(1e-12));
  // An empty subset annihilates the path set.
  CHECK(c.p1(0, 2, 1, sets_over(1, 2, {0b011, 0})) == 0.0);
}

TEST_CASE("path probability matches brute force") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_chain(rng, 0, 3);
    std::uniform_int_distribution<int> hz(1, 5);
    const int span = hz(rng);
    std::vector<AgeMask> subsets(span);
    for (auto& s : subsets) s = random_nonempty_mask(rng, c.size());
    std::uniform_int_distribution<int> start(c.lo(), c.hi());
    const int d0 = start(rng);

    // p1 conditions on the start age; emulate with a singleton subset at 0
    // and renormalize by the start probability.
    auto allowed = allowed_list(c, span, 1, subsets);
    allowed[0] = mask_with(0, c.lo(), d0);
    const double joint = brute_force_event(c, allowed);
    const double expect = joint / c.mu(d0);
    const double got = c.p1(0, span, d0, sets_over(1, span, subsets));
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("conditional endpoint probability") {
  const auto c = demo_chain();
  // Example: travel 0 -> 2 from age 1 through {0, 1}; endpoint age 0.
  CHECK(c.p2(0, 2, 1, 0, sets_over(1, 1, {0b011})) ==
        doctest::Approx(0.4).epsilon(1e-12));
  // Adjacent steps collapse to the one-step matrix.
  IndexedAgeSets empty;
  empty.lo = 1;
  empty.hi = 0;
  CHECK(c.p2(0, 1, 2, 1, empty) == doctest::Approx(c.phi(2, 1)).epsilon(1e-14));
  // Unconstrained subsets give the multi-step matrix.
  CHECK(c.p2(0, 3, 1, 0, sets_over(1, 2, {c.full(), c.full()})) ==
        doctest::Approx(c.n_step(3)(1, 0)).epsilon(1e-12));
  // Impossible conditioning event.
  CHECK_THROWS_AS(c.p2(0, 3, 1, 0, sets_over(1, 2, {0u, c.full()})),
                  ZeroConditioningError);
}

TEST_CASE("conditional endpoint sums to one and matches brute force") {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_chain(rng, 0, 3);
    std::uniform_int_distribution<int> hz(2, 6);
    const int i_hi = hz(rng);
    std::vector<AgeMask> subsets(i_hi - 1);
    for (auto& s : subsets) s = random_nonempty_mask(rng, c.size());
    std::uniform_int_distribution<int> start(c.lo(), c.hi());
    const int d0 = start(rng);
    const auto idx = sets_over(1, i_hi - 1, subsets);

    auto allowed = allowed_list(c, i_hi, 1, subsets);
    allowed[0] = mask_with(0, c.lo(), d0);
    if (brute_force_event(c, allowed) <= 0.0) continue;

    double total = 0.0;
    for (int delta = c.lo(); delta <= c.hi(); ++delta) {
      const double got = c.p2(0, i_hi, d0, delta, idx);
      const double expect = brute_force_conditional(c, allowed, i_hi, delta);
      CHECK(got == doctest::Approx(expect).epsilon(1e-10));
      total += got;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("marginalized path probability") {
  const auto c = demo_chain();
  // Single time step: mass of {1, 2} under the initial distribution.
  CHECK(c.p3(0, 0, sets_over(0, 0, {0b110})) ==
        doctest::Approx(0.8).epsilon(1e-12));
  // Unconstrained subsets carry probability one.
  CHECK(c.p3(1, 3, sets_over(1, 3, {c.full(), c.full(), c.full()})) ==
        doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cc = random_chain(rng, 0, 3);
    std::uniform_int_distribution<int> lo_d(0, 2), len_d(0, 3);
    const int i_lo = lo_d(rng), i_hi = i_lo + len_d(rng);
    std::vector<AgeMask> subsets(i_hi - i_lo + 1);
    for (auto& s : subsets) s = random_nonempty_mask(rng, cc.size());
    const double got = cc.p3(i_lo, i_hi, sets_over(i_lo, i_hi, subsets));
    const double expect =
        brute_force_event(cc, allowed_list(cc, i_hi, i_lo, subsets));
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("marginalized conditional endpoint") {
  const auto c = demo_chain();
  // Initial age restricted to {2}; endpoint age 2 one step later:
  // mu(2) phi(2,2) / mu(2) = phi(2,2).
  CHECK(c.p4(0, 1, 2, sets_over(0, 0, {0b100})) ==
        doctest::Approx(0.4).epsilon(1e-12));
  // Unconstrained subsets reduce to the marginal distribution.
  Vec marg = c.n_step(3).transpose() * c.mu_vec();
  for (int delta = 0; delta <= 2; ++delta)
    CHECK(c.p4(0, 3, delta, sets_over(0, 2, {c.full(), c.full(), c.full()})) ==
          doctest::Approx(marg(delta)).epsilon(1e-12));
  // Impossible conditioning event.
  CHECK_THROWS_AS(c.p4(0, 2, 0, sets_over(0, 1, {c.full(), 0u})),
                  ZeroConditioningError);

  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto cc = random_chain(rng, 0, 3);
    std::uniform_int_distribution<int> lo_d(0, 2), len_d(1, 4);
    const int i_lo = lo_d(rng), i_hi = i_lo + len_d(rng);
    std::vector<AgeMask> subsets(i_hi - i_lo);
    for (auto& s : subsets) s = random_nonempty_mask(rng, cc.size());
    const auto allowed = allowed_list(cc, i_hi, i_lo, subsets);
    if (brute_force_event(cc, allowed) <= 0.0) continue;
    double total = 0.0;
    for (int delta = cc.lo(); delta <= cc.hi(); ++delta) {
      const double got = cc.p4(i_lo, i_hi, delta, sets_over(i_lo, i_hi - 1, subsets));
      const double expect = brute_force_conditional(cc, allowed, i_hi, delta);
      CHECK(got == doctest::Approx(expect).epsilon(1e-10));
      total += got;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("brute force guards") {
  const auto c = demo_chain();
  CHECK_THROWS_AS(brute_force_event(c, std::vector<AgeMask>(20, c.full())),
                  std::invalid_argument);
  // Impossible event has probability zero.
  std::vector<AgeMask> allowed(3, c.full());
  allowed[1] = 0;
  CHECK(brute_force_event(c, allowed) == 0.0);
  CHECK_THROWS_AS(brute_force_conditional(c, allowed, 2, 0), ZeroConditioningError);
}
