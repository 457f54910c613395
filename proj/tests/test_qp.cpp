#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netmpc/qp.hpp"

using namespace netmpc;

namespace {

/// Independent reference solver: projected gradient ascent on the dual
///   max_{y >= 0} -1/4 (v + W'y)' G^-1 (v + W'y) - y'w,   G = 2V,
/// recovering u = -1/2 V^-1 (v + W'y) / ... with u = -G^-1 (v + W'y).
double dual_ascent_objective(const QpInstance& qp, int iters = 200000) {
  const Mat G = qp.V + qp.V.transpose();
  const Mat Ginv = G.inverse();
  const Mat K = qp.W * Ginv * qp.W.transpose();
  const double L = K.rows() > 0 ? K.operatorNorm() : 1.0;
  Vec y = Vec::Zero(qp.W.rows());
  for (int t = 0; t < iters; ++t) {
    const Vec u = -Ginv * (qp.v + qp.W.transpose() * y);
    const Vec grad = qp.W * u - qp.w;
    y = (y + grad / L).cwiseMax(0.0);
  }
  const Vec u = -Ginv * (qp.v + qp.W.transpose() * y);
  return u.dot(qp.V * u) + u.dot(qp.v) + y.dot((qp.W * u - qp.w).cwiseMax(0.0));
}

QpInstance random_qp(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> g(0.0, 1.0);
  QpInstance qp;
  Mat F(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) F(i, j) = g(rng);
  qp.V = F * F.transpose() + 0.5 * Mat::Identity(n, n);
  qp.v.resize(n);
  for (int i = 0; i < n; ++i) qp.v(i) = g(rng);
  qp.W.resize(m, n);
  qp.w.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) qp.W(i, j) = g(rng);
    qp.w(i) = 0.2 + std::abs(g(rng));  // origin feasible -> bounded, nonempty
  }
  return qp;
}

}  // namespace

TEST_CASE("scalar examples") {
  // min u^2 - 4u -> u = 2 (unconstrained).
  QpInstance a{Mat::Ones(1, 1), Vec::Constant(1, -4.0), Mat(0, 1), Vec(0)};
  const auto ra = solve_qp(a);
  REQUIRE(ra.status == QpStatus::Optimal);
  CHECK(ra.u(0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(ra.objective == doctest::Approx(-4.0).epsilon(1e-9));

  // min u^2 s.t. u >= 1 -> u = 1, active constraint, lambda = 2.
  QpInstance b{Mat::Ones(1, 1), Vec::Zero(1), -Mat::Ones(1, 1), -Vec::Ones(1)};
  const auto rb = solve_qp(b);
  REQUIRE(rb.status == QpStatus::Optimal);
  CHECK(rb.u(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rb.lambda(0) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(rb.active == std::vector<int>{0});
}

TEST_CASE("two dimensional active set with known multipliers") {
  // min |u|^2 s.t. u1 + u2 >= 2: solution (1, 1), lambda = 2.
  QpInstance qp;
  qp.V = Mat::Identity(2, 2);
  qp.v = Vec::Zero(2);
  qp.W.resize(1, 2);
  qp.W << -1.0, -1.0;
  qp.w = Vec::Constant(1, -2.0);
  const auto r = solve_qp(qp);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.u(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.u(1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.lambda(0) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(r.kkt_residual <= 1e-7);
}

TEST_CASE("infeasible problems yield a farkas certificate") {
  QpInstance qp;
  qp.V = Mat::Identity(1, 1);
  qp.v = Vec::Zero(1);
  qp.W.resize(2, 1);
  qp.W << 1.0, -1.0;
  qp.w.resize(2);
  qp.w << -1.0, 0.0;  // u <= -1 and u >= 0
  const auto r = solve_qp(qp);
  REQUIRE(r.status == QpStatus::Infeasible);
  REQUIRE(r.farkas.size() == 2);
  CHECK(r.farkas.minCoeff() >= -1e-9);
  CHECK(std::abs((qp.W.transpose() * r.farkas)(0)) <=
        1e-7 * r.farkas.cwiseAbs().maxCoeff());
  CHECK(qp.w.dot(r.farkas) < 0.0);
}

TEST_CASE("invalid hessians are rejected") {
  QpInstance asym{Mat::Identity(2, 2), Vec::Zero(2), Mat(0, 2), Vec(0)};
  asym.V(0, 1) = 1.0;  // asymmetric
  CHECK_THROWS_AS(solve_qp(asym), std::invalid_argument);

  QpInstance indef{-Mat::Identity(1, 1), Vec::Zero(1), Mat(0, 1), Vec(0)};
  CHECK_THROWS_AS(solve_qp(indef), std::invalid_argument);
}

TEST_CASE("bit-identical determinism") {
  std::mt19937_64 rng(21);
  const auto qp = random_qp(rng, 6, 10);
  const auto r1 = solve_qp(qp);
  const auto r2 = solve_qp(qp);
  REQUIRE(r1.status == QpStatus::Optimal);
  CHECK(r1.u == r2.u);  // exact equality, not approximate
  CHECK(r1.objective == r2.objective);
  CHECK(r1.active == r2.active);
}

TEST_CASE("agrees with the dual-ascent reference on random problems") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int mrows = 1 + static_cast<int>(rng() % 10);
    const auto qp = random_qp(rng, n, mrows);
    const auto r = solve_qp(qp);
    REQUIRE(r.status == QpStatus::Optimal);
    const double ref = dual_ascent_objective(qp);
    CHECK(r.objective == doctest::Approx(ref).epsilon(1e-6));
    // KKT residuals within certification bounds.
    CHECK(r.kkt_residual <= 1e-7);
    for (int i = 0; i < qp.W.rows(); ++i)
      CHECK(qp.W.row(i).dot(r.u) <= qp.w(i) + 1e-8 * (1.0 + std::abs(qp.w(i))));
  }
}
