#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <limits>
#include <random>

#include "netmpc/polytope.hpp"

using namespace netmpc;

namespace {

Polyhedron box(int n, double r) {
  Polyhedron p;
  p.A.resize(2 * n, n);
  p.A << Mat::Identity(n, n), -Mat::Identity(n, n);
  p.b = Vec::Constant(2 * n, r);
  return p;
}

/// Exhaustive vertex-enumeration oracle for max c'x over {Ax <= b} in low
/// dimension: solve every n x n row subsystem and keep the best feasible
/// vertex.  Assumes the maximum is attained at a vertex (bounded, full rank).
double vertex_max(const Vec& c, const Mat& A, const Vec& b) {
  const int n = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Mat M(n, n);
      Vec r(n);
      for (int i = 0; i < n; ++i) {
        M.row(i) = A.row(idx[i]);
        r(i) = b(idx[i]);
      }
      Eigen::FullPivLU<Mat> lu(M);
      if (!lu.isInvertible()) return;
      const Vec x = lu.solve(r);
      for (int i = 0; i < m; ++i)
        if (A.row(i).dot(x) > b(i) + 1e-7) return;
      best = std::max(best, c.dot(x));
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("lp_max on boxes and simple cones") {
  const auto p = box(3, 2.0);
  Vec c(3);
  c << 1.0, -1.0, 0.5;
  const auto r = lp_max(c, p.A, p.b);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(5.0));
  CHECK(r.x(0) == doctest::Approx(2.0));
  CHECK(r.x(1) == doctest::Approx(-2.0));

  // Unbounded direction.
  Mat A(1, 2);
  A << 1.0, 0.0;
  Vec b(1);
  b << 1.0;
  CHECK(lp_max(Vec::Constant(2, -1.0), A, b).status == LpStatus::Unbounded);

  // Infeasible system x <= -1, -x <= 0.
  Mat Ai(2, 1);
  Ai << 1.0, -1.0;
  Vec bi(2);
  bi << -1.0, 0.0;
  const auto ri = lp_max(Vec::Ones(1), Ai, bi);
  REQUIRE(ri.status == LpStatus::Infeasible);
  // Farkas: y >= 0, A'y = 0, b'y < 0.
  REQUIRE(ri.farkas.size() == 2);
  CHECK(ri.farkas.minCoeff() >= -1e-9);
  CHECK(std::abs((Ai.transpose() * ri.farkas)(0)) < 1e-7 * ri.farkas.cwiseAbs().maxCoeff());
  CHECK(bi.dot(ri.farkas) < 0.0);
}

TEST_CASE("lp_max matches vertex enumeration on random bounded systems") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);  // 2 or 3 dims
    const int extra = 3 + static_cast<int>(rng() % 4);
    Polyhedron p = box(n, 1.0 + std::abs(g(rng)));
    Mat A(p.rows() + extra, n);
    Vec b(p.rows() + extra);
    A.topRows(p.rows()) = p.A;
    b.head(p.rows()) = p.b;
    for (int i = 0; i < extra; ++i) {
      for (int j = 0; j < n; ++j) A(p.rows() + i, j) = g(rng);
      b(p.rows() + i) = 0.3 + std::abs(g(rng));  // keeps the origin inside
    }
    Vec c(n);
    for (int j = 0; j < n; ++j) c(j) = g(rng);
    const auto r = lp_max(c, A, b);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.value == doctest::Approx(vertex_max(c, A, b)).epsilon(1e-7));
    // The reported maximizer is feasible and attains the value.
    for (int i = 0; i < A.rows(); ++i) CHECK(A.row(i).dot(r.x) <= b(i) + 1e-7);
    CHECK(c.dot(r.x) == doctest::Approx(r.value).epsilon(1e-9));
  }
}

TEST_CASE("find_point returns interior points and certificates") {
  const auto p = box(4, 3.0);
  const auto r = find_point(p.A, p.b);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(p.contains(r.x, 1e-8));

  Mat Ai(2, 1);
  Ai << 1.0, -1.0;
  Vec bi(2);
  bi << -1.0, 0.0;
  const auto ri = find_point(Ai, bi);
  REQUIRE(ri.status == LpStatus::Infeasible);
  CHECK(ri.farkas.minCoeff() >= -1e-9);
  CHECK(bi.dot(ri.farkas) < 1e-12);
}

TEST_CASE("duplicate row removal") {
  Polyhedron p;
  p.A.resize(5, 2);
  p.A << 1.0, 0.0,
         2.0, 0.0,   // same direction, bound 4 -> 2 per unit: looser
         0.0, 1.0,
         0.0, 0.0,   // trivial row
         -1.0, 0.0;
  p.b.resize(5);
  p.b << 1.0, 4.0, 1.0, 5.0, 1.0;
  const auto q = drop_duplicate_rows(p);
  CHECK(q.rows() == 3);
  // The tightest bound per direction survives.
  const auto r = lp_max(Vec::Unit(2, 0), q.A, q.b);
  CHECK(r.value == doctest::Approx(1.0));
}

TEST_CASE("redundancy removal keeps exactly the facets") {
  // x <= 1 twice (scaled), x <= 2 redundant, plus a diagonal cut.
  Polyhedron p = box(2, 1.0);
  Mat A(p.rows() + 2, 2);
  Vec b(p.rows() + 2);
  A.topRows(p.rows()) = p.A;
  b.head(p.rows()) = p.b;
  A.row(p.rows()) << 1.0, 0.0;
  b(p.rows()) = 2.0;  // dominated by x <= 1
  A.row(p.rows() + 1) << 1.0, 1.0;
  b(p.rows() + 1) = 0.5;  // genuine facet
  const auto q = reduce_redundancy({A, b});
  CHECK(q.rows() == 5);

  // Equivalence: the reduced set contains the same points.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 500; ++t) {
    Vec z(2);
    z << u(rng), u(rng);
    CHECK(Polyhedron{A, b}.contains(z) == q.contains(z));
  }
}

TEST_CASE("redundancy removal with context rows") {
  // Context: |x| <= 1.  Row x1 + x2 <= 3 is implied by the context box and
  // must be dropped even though it is irredundant on its own.
  Polyhedron ctx = box(2, 1.0);
  Polyhedron p;
  p.A.resize(2, 2);
  p.A << 1.0, 1.0,
         1.0, -1.0;
  p.b.resize(2);
  p.b << 3.0, 0.5;
  const auto q = reduce_redundancy(p, ctx);
  CHECK(q.rows() == 1);
  CHECK(q.b(0) == doctest::Approx(0.5));
}

TEST_CASE("unbounded rows are kept") {
  // Single row in 2-D: nothing else bounds the LP, so it must be kept.
  Polyhedron p;
  p.A.resize(1, 2);
  p.A << 1.0, 1.0;
  p.b = Vec::Ones(1);
  CHECK(reduce_redundancy(p).rows() == 1);
}

TEST_CASE("projection eliminates trailing variables exactly") {
  // {(x, u) : x - u <= 0, u <= 1, -u <= 0, -x <= 0} -> {0 <= x <= 1}.
  Polyhedron p;
  p.A.resize(4, 2);
  p.A << 1.0, -1.0,
         0.0, 1.0,
         0.0, -1.0,
         -1.0, 0.0;
  p.b.resize(4);
  p.b << 0.0, 1.0, 0.0, 0.0;
  const auto q = project_to_first(p, 1);
  CHECK(q.dim() == 1);
  CHECK(lp_max(Vec::Ones(1), q.A, q.b).value == doctest::Approx(1.0));
  CHECK(lp_max(-Vec::Ones(1), q.A, q.b).value == doctest::Approx(0.0));
}

TEST_CASE("projection agrees with LP membership on random systems") {
  // Membership in the projection == existence of a lift, which is an LP
  // feasibility problem on the original system.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int nx = 2, nu = 3;
    Polyhedron p = box(nx + nu, 1.0);
    Mat A(p.rows() + 6, nx + nu);
    Vec b(p.rows() + 6);
    A.topRows(p.rows()) = p.A;
    b.head(p.rows()) = p.b;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < nx + nu; ++j) A(p.rows() + i, j) = g(rng);
      b(p.rows() + i) = 0.2 + std::abs(g(rng));
    }
    const auto proj = project_to_first({A, b}, nx);

    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int t = 0; t < 40; ++t) {
      Vec x(nx);
      x << u(rng), u(rng);
      // Lift feasibility: A_u u <= b - A_x x.
      const Mat Au = A.rightCols(nu);
      const Vec rhs = b - A.leftCols(nx) * x;
      const bool lifted = find_point(Au, rhs, 1e-9).status == LpStatus::Optimal;
      const bool member = proj.contains(x, 1e-7);
      CHECK(lifted == member);
    }
  }
}
