#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netmpc/offline_synthesis.hpp"
#include "netmpc/protocol.hpp"
#include "test_helpers.hpp"

using namespace netmpc;

namespace {

// Small but fully featured instance: the demo plant with the shortest
// admissible horizon, so scenario enumeration stays cheap.
SynthesisParams small_params(int N = 3) {
  return SynthesisParams::make(netmpc::testing::demo_plant(),
                               netmpc::testing::demo_bounds(),
                               netmpc::testing::demo_weights(), N,
                               netmpc::testing::demo_chain());
}

// Rebuilds the packet stream that (xhat, uhat) encodes and replays it through
// the protocol-level actuator rule, independently of the selection matrices.
struct Rollout {
  std::vector<Vec> x;  // x[i + h_tilde] = state at offset i, i in [-h, N]
  std::vector<Vec> u;  // u[i + h_tilde] = input at offset i, i in [-h, N-1]
};

Rollout replay(const SynthesisParams& sp, int h_tilde,
               const std::vector<int>& seq, const Vec& xhat, const Vec& uhat) {
  const Dims& d = sp.dims;
  const int base = d.d_hi + sp.bounds.h_hi;  // absolute time of step k
  std::vector<ControllerPacket> packets;
  for (int t = 0; t < base; ++t) {  // packets sent before k, from xhat
    const int j = base - t;
    Vec blocks = Vec::Zero(d.m_tilde);
    if (j <= d.d_hi + sp.bounds.h_hi)
      blocks = xhat.segment(d.n + (j - 1) * d.m_tilde, d.m_tilde);
    packets.push_back({t, blocks});
  }
  for (int t = 0; t <= d.N; ++t) {  // packets sent at and after k, from uhat
    Vec blocks = Vec::Zero(d.m_tilde);
    for (int age = d.d_lo; age <= d.d_hi; ++age)
      if (t + age >= d.d_lo && t + age <= d.N - 1)
        blocks.segment(packet_block_offset(age, d.m, d.d_hi), d.m) =
            uhat.segment((d.N - 1 - (t + age)) * d.m, d.m);
    packets.push_back({base + t, blocks});
  }
  Rollout r;
  r.x.assign(h_tilde + d.N + 1, Vec());
  r.u.assign(h_tilde + d.N, Vec());
  r.x[0] = xhat.head(d.n);
  for (int i = -h_tilde; i <= d.N - 1; ++i) {
    const int age = (i <= d.d_hi - 1) ? seq[i + h_tilde] : d.d_lo;
    r.u[i + h_tilde] =
        actuator_apply(base + i, age, packets, d.m, d.d_lo, d.d_hi);
    r.x[i + h_tilde + 1] =
        sp.plant.A * r.x[i + h_tilde] + sp.plant.B * r.u[i + h_tilde];
  }
  return r;
}

Mat mat_power_for_test(const Mat& A, int p) {
  Mat out = Mat::Identity(A.rows(), A.cols());
  for (int i = 0; i < p; ++i) out = out * A;
  return out;
}

Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = unif(rng);
  return v;
}

}  // namespace

TEST_CASE("derived dimensions") {
  const auto sp = small_params();
  CHECK(sp.dims.m_tilde == 6);
  CHECK(sp.dims.n_hat == 21);
  CHECK(sp.dims.m_hat == 6);
  CHECK(sp.dims.N_hat == 5);
  const auto big = small_params(10);
  CHECK(big.dims.m_hat == 20);
  CHECK(big.dims.N_hat == 12);
}

TEST_CASE("selection matrices agree with the packet replay") {
  const auto sp = small_params();
  std::mt19937_64 rng(42);
  for (int h_tilde = 0; h_tilde <= 1; ++h_tilde) {
    const auto scen = enumerate_scenarios(sp.chain, h_tilde, sp.chain.full());
    for (std::size_t r = 0; r < scen.seqs.size(); ++r) {
      const auto pm = prediction_matrices(sp, h_tilde, scen.seqs[r]);
      const Vec xhat = random_vec(rng, sp.dims.n_hat);
      const Vec uhat = random_vec(rng, sp.dims.m_hat);
      const Rollout ro = replay(sp, h_tilde, scen.seqs[r], xhat, uhat);
      for (int i = -h_tilde; i <= sp.dims.N; ++i) {
        const Vec want = ro.x[i + h_tilde];
        const Vec got = pm.ax(i) * xhat + pm.bx(i) * uhat;
        CHECK((want - got).cwiseAbs().maxCoeff() < 1e-10);
      }
      for (int i = -h_tilde; i <= sp.dims.N - 1; ++i) {
        const Vec want = ro.u[i + h_tilde];
        const Vec got = pm.au(i) * xhat + pm.bu(i) * uhat;
        CHECK((want - got).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("scenario weights are transition-consistent") {
  const auto sp = small_params();
  const auto scen = enumerate_scenarios(sp.chain, 1, AgeMask{0b011});
  double total = 0.0;
  for (std::size_t r = 0; r < scen.seqs.size(); ++r) {
    CHECK((scen.seqs[r][0] == 0 || scen.seqs[r][0] == 1));
    double w = 1.0;
    for (std::size_t t = 0; t + 1 < scen.seqs[r].size(); ++t)
      w *= sp.chain.phi(scen.seqs[r][t], scen.seqs[r][t + 1]);
    CHECK(scen.weights(r) == doctest::Approx(w).epsilon(1e-12));
    total += w;
  }
  CHECK(total == doctest::Approx(2.0).epsilon(1e-12));  // one per start age
}

TEST_CASE("tail gain vanishes beyond the dependence horizon and on itself") {
  const auto sp = small_params();
  const auto scen = enumerate_scenarios(sp.chain, 1, sp.chain.full());
  std::vector<PredictionMatrices> pm;
  for (const auto& s : scen.seqs) pm.push_back(prediction_matrices(sp, 1, s));
  const Mat L = Mat::Ones(2, 3);
  const auto same = tail_gain(sp, L, sp.dims.N, pm[0], pm[0]);
  CHECK(same.Kx.cwiseAbs().maxCoeff() == 0.0);
  CHECK(same.Ku.cwiseAbs().maxCoeff() == 0.0);
  const auto beyond = tail_gain(sp, L, sp.dims.N_hat, pm[0], pm[1]);
  CHECK(beyond.Kx.cwiseAbs().maxCoeff() == 0.0);
  CHECK(beyond.Ku.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("maximal invariant set: contractive scalar example") {
  Mat A_cl(1, 1);
  A_cl << 0.5;
  Polyhedron y;
  y.A.resize(2, 1);
  y.A << 1.0, -1.0;
  y.b = Vec::Ones(2);
  const auto t = maximal_admissible_set(A_cl, y);
  CHECK(t.t_star == 0);
  CHECK(t.set.rows() == 2);
  CHECK(t.set.contains(Vec::Constant(1, 0.999)));
  CHECK(!t.set.contains(Vec::Constant(1, 1.001)));
}

TEST_CASE("maximal invariant set is invariant and maximal on the demo plant") {
  const auto sp = small_params();
  const auto lqr = solve_dare(sp.plant.A, sp.plant.B, sp.weights.Q, sp.weights.R);
  const Mat A_cl = sp.plant.A - sp.plant.B * lqr.L;
  Polyhedron y;
  y.A.resize(10, 3);
  y.A << sp.plant.Mx, -sp.plant.Mu * lqr.L;
  y.b.resize(10);
  y.b << sp.plant.nx, sp.plant.nu;
  const auto t = maximal_admissible_set(A_cl, y);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const Vec dir = random_vec(rng, 3);
    const auto res = lp_max(dir, t.set.A, t.set.b);
    REQUIRE(res.status == LpStatus::Optimal);
    Vec inside = 0.99 * res.x;
    Vec outside = 1.01 * res.x;
    // Inside: the whole closed-loop trajectory satisfies the constraints.
    Vec z = inside;
    for (int step = 0; step < 200; ++step) {
      CHECK(y.contains(z, 1e-7));
      z = A_cl * z;
    }
    // Outside: some step violates them (otherwise the set was not maximal).
    z = outside;
    bool violated = false;
    for (int step = 0; step < 500 && !violated; ++step) {
      violated = !y.contains(z, 1e-9);
      z = A_cl * z;
    }
    CHECK(violated);
  }
}

TEST_CASE("reachable posterior supports for the demo age chain") {
  const auto family = reachable_dtilde(netmpc::testing::demo_chain(), 0);
  REQUIRE(family.size() == 2);
  CHECK(family[0] == AgeMask{0b011});
  CHECK(family[1] == AgeMask{0b111});
}

TEST_CASE("extended state prior covers the anchor and every packet block") {
  const auto sp = small_params();
  const auto prior = extended_state_prior(sp);
  CHECK(prior.dim() == sp.dims.n_hat);
  CHECK(prior.rows() == 6 + 3 * 3 * 4);
  // The prior is exactly the box: anchor within state bounds, blocks within
  // input bounds.
  Vec z = Vec::Zero(sp.dims.n_hat);
  CHECK(prior.contains(z));
  z(0) = 10.001;  // anchor outside the state box
  CHECK(!prior.contains(z));
  z(0) = 0.0;
  z(sp.dims.n + 1) = 5.001;  // second entry of the newest packet (|u2| <= 5)
  CHECK(prior.contains(Vec(0.999 / 5.001 * 5.0 * z)));
  CHECK(!prior.contains(z));
}

namespace {

// Exhaustive safety check of (xhat, uhat) under every realized scenario and
// every per-step hypothesized scenario choice in the local-feedback tail.
bool rollout_safe(const SynthesisParams& sp, const SynthAux& aux, int h_tilde,
                  const ScenarioSet& scen, const Vec& xhat, const Vec& uhat,
                  double tol) {
  const Dims& d = sp.dims;
  const auto& plant = sp.plant;
  std::vector<PredictionMatrices> pm;
  for (const auto& s : scen.seqs)
    pm.push_back(prediction_matrices(sp, h_tilde, s));
  Vec z(d.n_hat + d.m_hat);
  z << xhat, uhat;
  // Candidate inputs stay inside the input constraints.
  for (int i = d.d_lo; i <= d.N - 1; ++i) {
    const Vec u = uhat.segment((d.N - 1 - i) * d.m, d.m);
    if (((plant.Mu * u) - plant.nu).maxCoeff() > tol) return false;
  }
  const int count = static_cast<int>(scen.seqs.size());
  for (int r = 0; r < count; ++r) {
    const Rollout ro = replay(sp, h_tilde, scen.seqs[r], xhat, uhat);
    for (int i = d.d_lo + 1; i <= d.N - 1; ++i)
      if (((plant.Mx * ro.x[i + h_tilde]) - plant.nx).maxCoeff() > tol)
        return false;
    // Local-feedback tail: branch over every hypothesized scenario at every
    // step; all branches must stay safe and reach the terminal set.
    struct Node {
      Vec x;
      int i;
    };
    std::vector<Node> frontier{{ro.x[d.N + h_tilde], d.N}};
    while (!frontier.empty()) {
      const Node node = frontier.back();
      frontier.pop_back();
      if (node.i == d.N_hat) {
        if ((aux.terminal.set.A * node.x - aux.terminal.set.b).maxCoeff() > tol)
          return false;
        continue;
      }
      if (((plant.Mx * node.x) - plant.nx).maxCoeff() > tol) return false;
      for (int q = 0; q < count; ++q) {
        const TailGain tg = tail_gain(sp, aux.lqr.L, node.i, pm[r], pm[q]);
        const Vec u = -aux.lqr.L * node.x + tg.Kx * xhat + tg.Ku * uhat;
        if (((plant.Mu * u) - plant.nu).maxCoeff() > tol) return false;
        frontier.push_back({plant.A * node.x + plant.B * u, node.i + 1});
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("constraint table matches the exhaustive rollout classification") {
  const auto sp = small_params();
  SynthAux aux;
  aux.lqr = solve_dare(sp.plant.A, sp.plant.B, sp.weights.Q, sp.weights.R);
  Mat Y(10, 3);
  Y << sp.plant.Mx, -sp.plant.Mu * aux.lqr.L;
  Vec yb(10);
  yb << sp.plant.nx, sp.plant.nu;
  aux.terminal = maximal_admissible_set(sp.plant.A - sp.plant.B * aux.lqr.L,
                                        Polyhedron{Y, yb});

  const int h_tilde = 1;
  const AgeMask dtilde = 0b011;
  const auto table = build_constraint_table(sp, aux, h_tilde, dtilde);
  const auto scen = enumerate_scenarios(sp.chain, h_tilde, dtilde);
  const auto prior = extended_state_prior(sp);
  const Dims& d = sp.dims;

  std::mt19937_64 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 60 && checked < 25; ++trial) {
    // Prior-satisfying ray: anchor in the state box, packet and candidate
    // blocks in the input box, all scaled strictly inside.
    Vec z0(d.n_hat + d.m_hat);
    z0.head(3) = random_vec(rng, 3).cwiseProduct(Vec(sp.plant.nx.head(3)));
    for (int j = 0; j < 3 * 3 + 3; ++j) {
      Vec u = random_vec(rng, 2);
      u(0) *= 2.0;
      u(1) *= 5.0;
      z0.segment(3 + 2 * j, 2) = u;
    }
    z0 *= 0.9;
    // Ray-table intersection.
    double tmax = std::numeric_limits<double>::infinity();
    for (int rrow = 0; rrow < table.system.rows(); ++rrow) {
      const double num = table.system.b(rrow);
      const double den = table.system.A.row(rrow).dot(z0);
      if (den > 1e-12) tmax = std::min(tmax, num / den);
    }
    REQUIRE(std::isfinite(tmax));
    const Vec inside = 0.99 * tmax * z0;
    const Vec outside = 1.01 * tmax * z0;
    // Only compare where the offline reduction context is valid.
    if (!prior.contains(Vec(inside.head(d.n_hat))) ||
        !prior.contains(Vec(outside.head(d.n_hat))))
      continue;
    ++checked;
    CHECK(table.system.contains(inside, 1e-9));
    CHECK(!table.system.contains(outside, -1e-9));
    CHECK(rollout_safe(sp, aux, h_tilde, scen, inside.head(d.n_hat),
                       inside.tail(d.m_hat), 1e-7));
    CHECK(!rollout_safe(sp, aux, h_tilde, scen, outside.head(d.n_hat),
                        outside.tail(d.m_hat), -1e-7));
  }
  CHECK(checked >= 10);
}

TEST_CASE("cost table reproduces the expected-cost oracle") {
  const auto sp = small_params();
  SynthAux aux;
  aux.lqr = solve_dare(sp.plant.A, sp.plant.B, sp.weights.Q, sp.weights.R);
  const Dims& d = sp.dims;
  const int h_tilde = 1;
  const AgeMask dtilde = 0b111;
  const auto table = build_cost_table(sp, aux, h_tilde, dtilde);
  const auto scen = enumerate_scenarios(sp.chain, h_tilde, dtilde);
  const int count = static_cast<int>(scen.seqs.size());
  std::vector<PredictionMatrices> pm;
  for (const auto& s : scen.seqs)
    pm.push_back(prediction_matrices(sp, h_tilde, s));

  const auto tp = build_tail_maps(sp, aux, h_tilde, dtilde);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    // Random posterior over the support.
    Vec p(3);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    for (int i = 0; i < 3; ++i) p(i) = unif(rng);
    p /= p.sum();

    Mat V = Mat::Zero(d.m_hat, d.m_hat);
    Mat Hm = Mat::Zero(d.m_hat, d.n_hat);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) {
          V += p(a) * p(b) * p(c) * table.R[table.idx(a, b, c)];
          Hm += p(a) * p(b) * p(c) * table.H[table.idx(a, b, c)];
        }

    // Oracle, built from realized input values rather than table matrices.
    // Past step N every hypothesized current age spawns a feedback branch
    // whose gain corrects for the inputs that are still uncertain; the
    // realized tail cost is evaluated on the posterior mix of the branches.
    auto oracle = [&](const Vec& xhat, const Vec& uhat) {
      std::vector<Rollout> ro(count);
      for (int r = 0; r < count; ++r)
        ro[r] = replay(sp, h_tilde, scen.seqs[r], xhat, uhat);
      // Within-support average of the applied inputs, per hypothesized age.
      std::vector<std::vector<Vec>> ubar(3);
      for (int a = 0; a < 3; ++a) {
        ubar[a].assign(h_tilde + d.d_hi, Vec::Zero(d.m));
        for (int r = 0; r < count; ++r) {
          if (scen.age_at(r, -h_tilde) != a) continue;
          for (int j = -h_tilde; j <= d.d_hi - 1; ++j)
            ubar[a][j + h_tilde] += scen.weights(r) * ro[r].u[j + h_tilde];
        }
      }
      double cost = 0.0;
      for (int r = 0; r < count; ++r) {
        const double w = p(scen.age_at(r, -h_tilde)) * scen.weights(r);
        for (int i = d.d_lo; i <= d.N - 1; ++i)
          cost += w * ro[r].u[i + h_tilde].dot(sp.weights.R *
                                               ro[r].u[i + h_tilde]);
        for (int i = d.d_lo + 1; i <= d.N; ++i)
          cost += w * ro[r].x[i + h_tilde].dot(sp.weights.Q *
                                               ro[r].x[i + h_tilde]);
        // One tail branch per hypothesized age.
        std::vector<Vec> xb(3, ro[r].x[d.N + h_tilde]);
        Vec xmix;
        for (int i = d.N; i <= d.N_hat - 1; ++i) {
          Vec umix = Vec::Zero(d.m);
          for (int a = 0; a < 3; ++a) {
            Vec corr = Vec::Zero(d.n);
            for (int j = -tail_memory(sp, h_tilde, i); j <= d.d_hi - 1; ++j)
              corr += mat_power_for_test(sp.plant.A, i - 1 - j) * sp.plant.B *
                      (ro[r].u[j + h_tilde] - ubar[a][j + h_tilde]);
            const Vec ub = -aux.lqr.L * (xb[a] - corr);
            // The closed-form branch maps must reproduce the rollout exactly.
            const Vec xb_map = tp[a][r].Ah[i - d.N] * xhat +
                               tp[a][r].Bh[i - d.N] * uhat;
            const Vec ub_map = tp[a][r].Auh[i - d.N] * xhat +
                               tp[a][r].Buh[i - d.N] * uhat;
            CHECK((xb_map - xb[a]).cwiseAbs().maxCoeff() < 1e-8);
            CHECK((ub_map - ub).cwiseAbs().maxCoeff() < 1e-8);
            umix += p(a) * ub;
            xb[a] = sp.plant.A * xb[a] + sp.plant.B * ub;
          }
          cost += w * umix.dot(sp.weights.R * umix);
          xmix = Vec::Zero(d.n);
          for (int a = 0; a < 3; ++a) xmix += p(a) * xb[a];
          if (i + 1 <= d.N_hat - 1)
            cost += w * xmix.dot(sp.weights.Q * xmix);
        }
        cost += w * xmix.dot(aux.lqr.P * xmix);
      }
      return cost;
    };

    const Vec xhat = random_vec(rng, d.n_hat, 2.0);
    const Vec u1 = random_vec(rng, d.m_hat, 2.0);
    const Vec u2 = random_vec(rng, d.m_hat, 2.0);
    auto quad = [&](const Vec& u) {
      return u.dot(V * u) + 2.0 * u.dot(Hm * xhat);
    };
    const double got = quad(u1) - quad(u2);
    const double want = oracle(xhat, u1) - oracle(xhat, u2);
    CHECK(got == doctest::Approx(want).epsilon(1e-8));
  }
}
