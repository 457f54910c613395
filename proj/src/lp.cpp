#include "netmpc/lp.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numeric>

namespace netmpc {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-9;
constexpr int kMaxIter = 100000;

struct Tableau {
  // min c'x s.t. Ax = b (rows independent), x >= 0, with me artificials
  // appended after the nv structural columns.
  Mat A;  // me x nv structural part
  Vec b;  // >= 0
  int me = 0, nv = 0;
  std::vector<int> basis;

  Vec column(int j) const {
    if (j < nv) return A.col(j);
    Vec e = Vec::Zero(me);
    e(j - nv) = 1.0;
    return e;
  }
};

/// One simplex phase with Bland's rule.  `cost` covers structural columns
/// and artificials; `allow_artificial_entering` is false in phase 2.
/// Returns Optimal or Unbounded; on Unbounded, ray is the entering direction
/// expressed over all columns.
LpStatus run_phase(Tableau& t, const Vec& cost, bool allow_artificial,
                   Vec* ray_out) {
  const int total = t.nv + t.me;
  const Vec b0 = t.b;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    if (iter == kMaxIter / 5) {
      // Heavy degeneracy can defeat Bland's rule in floating point: tiny
      // negative basic values make every ratio "positive" by noise and the
      // basis walks in circles.  A deterministic right-hand-side perturbation
      // breaks the ties; the caller's checks use the original b afterwards.
      std::uint64_t s = 0x9e3779b97f4a7c15ull;
      for (int i = 0; i < t.me; ++i) {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        const double u =
            0.5 + 0.5 * static_cast<double>(s >> 11) / 9007199254740992.0;
        t.b(i) += 1e-9 * u * (1.0 + std::abs(t.b(i)));
      }
    }
    Mat B(t.me, t.me);
    for (int i = 0; i < t.me; ++i) B.col(i) = t.column(t.basis[i]);
    Eigen::PartialPivLU<Mat> lu(B);
    Vec xB = lu.solve(t.b);
    Vec cB(t.me);
    for (int i = 0; i < t.me; ++i) cB(i) = cost(t.basis[i]);
    Vec pi = lu.transpose().solve(cB);

    std::vector<bool> in_basis(total, false);
    for (int j : t.basis) in_basis[j] = true;

    int entering = -1;
    const int limit = allow_artificial ? total : t.nv;
    const double pi_scale = pi.cwiseAbs().maxCoeff();
    for (int j = 0; j < limit; ++j) {
      if (in_basis[j]) continue;
      const Vec col = t.column(j);
      const double red = cost(j) - pi.dot(col);
      // Scale-aware threshold: with large multipliers the reduced cost
      // carries rounding noise well above any fixed absolute tolerance.
      const double tol = kCostTol * (1.0 + std::abs(cost(j)) +
                                     pi_scale * col.cwiseAbs().maxCoeff());
      if (red < -tol) {
        entering = j;
        break;  // smallest improving index
      }
    }
    if (entering < 0) {
      t.b = b0;
      return LpStatus::Optimal;
    }

    Vec y = lu.solve(t.column(entering));
    int leave = -1;
    double best_ratio = 0.0;
    // On degenerate ties prefer the larger pivot for stability; once the
    // iteration count suggests stalling, switch to Bland's smallest-index
    // tie-break, which cannot cycle.
    const bool bland = iter > kMaxIter / 10;
    const double y_floor = kPivotTol * (1.0 + y.cwiseAbs().maxCoeff());
    for (int i = 0; i < t.me; ++i) {
      if (y(i) <= y_floor) continue;
      const double ratio = std::max(xB(i), 0.0) / y(i);
      if (leave < 0 || ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 &&
           (bland ? t.basis[i] < t.basis[leave] : y(i) > y(leave)))) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) {
      if (ray_out) {
        Vec ray = Vec::Zero(total);
        ray(entering) = 1.0;
        for (int i = 0; i < t.me; ++i) ray(t.basis[i]) -= y(i);
        *ray_out = ray;
      }
      t.b = b0;
      return LpStatus::Unbounded;
    }
    t.basis[leave] = entering;
  }
  if (std::getenv("NETMPC_LP_DEBUG")) {
    std::fprintf(stderr, "lp stall: me=%d nv=%d phase=%d\n", t.me, t.nv,
                 allow_artificial ? 1 : 2);
    Mat B(t.me, t.me);
    for (int i = 0; i < t.me; ++i) B.col(i) = t.column(t.basis[i]);
    Vec xB = Eigen::PartialPivLU<Mat>(B).solve(t.b);
    std::fprintf(stderr, "  obj=%.17g minxB=%.3g\n",
                 [&] { double o = 0; for (int i = 0; i < t.me; ++i) o += cost(t.basis[i]) * xB(i); return o; }(),
                 xB.minCoeff());
  }
  throw std::runtime_error("simplex iteration limit reached");
}

}  // namespace

SimplexResult simplex_standard(const Mat& A_in, const Vec& b_in, const Vec& c) {
  const int me_full = static_cast<int>(A_in.rows());
  const int nv = static_cast<int>(A_in.cols());
  if (b_in.size() != me_full || c.size() != nv)
    throw std::invalid_argument("simplex dimension mismatch");

  SimplexResult res;

  // Keep a maximal independent subset of rows; dependent rows are checked
  // against the solution afterwards.
  Eigen::ColPivHouseholderQR<Mat> qr(A_in.transpose());
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  std::vector<int> rows(qr.colsPermutation().indices().data(),
                        qr.colsPermutation().indices().data() + me_full);
  rows.resize(rank);
  std::sort(rows.begin(), rows.end());

  Tableau t;
  t.me = rank;
  t.nv = nv;
  t.A.resize(rank, nv);
  t.b.resize(rank);
  for (int i = 0; i < rank; ++i) {
    t.A.row(i) = A_in.row(rows[i]);
    t.b(i) = b_in(rows[i]);
    if (t.b(i) < 0.0) {
      t.A.row(i) *= -1.0;
      t.b(i) *= -1.0;
    }
  }
  // Equilibrate: rows and columns of widely varying magnitude corrupt the
  // basis factorizations long before any pivot rule can save the method.
  Vec row_scale = Vec::Ones(rank), col_scale = Vec::Ones(nv);
  for (int i = 0; i < rank; ++i) {
    const double s =
        std::max(t.A.row(i).cwiseAbs().maxCoeff(), std::abs(t.b(i)));
    if (s > 1e-12) row_scale(i) = s;
    t.A.row(i) /= row_scale(i);
    t.b(i) /= row_scale(i);
  }
  for (int j = 0; j < nv; ++j) {
    const double s = t.A.col(j).cwiseAbs().maxCoeff();
    if (s > 1e-12) col_scale(j) = s;
    t.A.col(j) /= col_scale(j);
  }

  t.basis.resize(rank);
  std::iota(t.basis.begin(), t.basis.end(), nv);

  // Phase 1: drive the artificials to zero.
  Vec cost1 = Vec::Zero(nv + rank);
  cost1.tail(rank).setOnes();
  // Phase 1 is bounded below by zero, so a reported "unbounded" can only be a
  // numerical stall; the artificial-sum check below decides what it means.
  const LpStatus ph1 = run_phase(t, cost1, true, nullptr);
  {
    Mat B(rank, rank);
    for (int i = 0; i < rank; ++i) B.col(i) = t.column(t.basis[i]);
    Vec xB = Eigen::PartialPivLU<Mat>(B).solve(t.b);
    double infeas = 0.0;
    for (int i = 0; i < rank; ++i)
      if (t.basis[i] >= nv) infeas += std::max(xB(i), 0.0);
    if (infeas > 1e-8 * (1.0 + t.b.cwiseAbs().maxCoeff())) {
      if (ph1 != LpStatus::Optimal)
        throw std::runtime_error("phase 1 stalled away from feasibility");
      res.status = LpStatus::Infeasible;
      return res;
    }
  }

  // Pivot remaining artificials out of the basis (rows are independent, so a
  // structural pivot always exists).
  for (int p = 0; p < rank; ++p) {
    if (t.basis[p] < nv) continue;
    Mat B(rank, rank);
    for (int i = 0; i < rank; ++i) B.col(i) = t.column(t.basis[i]);
    Eigen::PartialPivLU<Mat> lu(B);
    std::vector<bool> in_basis(nv, false);
    for (int j : t.basis)
      if (j < nv) in_basis[j] = true;
    int found = -1;
    for (int j = 0; j < nv && found < 0; ++j) {
      if (in_basis[j]) continue;
      Vec y = lu.solve(t.A.col(j));
      if (std::abs(y(p)) > 1e-8) found = j;
    }
    if (found < 0) throw std::runtime_error("could not remove artificial from basis");
    t.basis[p] = found;
  }

  // Phase 2 on the true objective.
  Vec cost2 = Vec::Zero(nv + rank);
  cost2.head(nv) = c.cwiseQuotient(col_scale);
  Vec ray_full;
  const LpStatus st = run_phase(t, cost2, false, &ray_full);

  Mat B(rank, rank);
  for (int i = 0; i < rank; ++i) B.col(i) = t.column(t.basis[i]);
  Eigen::PartialPivLU<Mat> lu(B);
  Vec xB = lu.solve(t.b);
  res.x = Vec::Zero(nv);
  for (int i = 0; i < rank; ++i)
    if (t.basis[i] < nv) res.x(t.basis[i]) = xB(i) / col_scale(t.basis[i]);
  Vec cB(rank);
  for (int i = 0; i < rank; ++i) cB(i) = cost2(t.basis[i]);
  Vec pi_red = lu.transpose().solve(cB);
  res.pi = Vec::Zero(me_full);
  for (int i = 0; i < rank; ++i) res.pi(rows[i]) = pi_red(i) / row_scale(i);
  // Restore the sign convention of the original rows.
  for (int i = 0; i < rank; ++i)
    if (b_in(rows[i]) < 0.0) res.pi(rows[i]) *= -1.0;

  // Dependent rows must be consistent with the solution.
  const double scale = 1.0 + b_in.cwiseAbs().maxCoeff();
  for (int r = 0; r < me_full; ++r) {
    if (std::binary_search(rows.begin(), rows.end(), r)) continue;
    if (std::abs(A_in.row(r).dot(res.x) - b_in(r)) > 1e-7 * scale) {
      res.status = LpStatus::Infeasible;
      return res;
    }
  }

  if (st == LpStatus::Unbounded) {
    res.status = LpStatus::Unbounded;
    res.ray = ray_full.head(nv).cwiseQuotient(col_scale);
    return res;
  }
  res.status = LpStatus::Optimal;
  res.value = c.dot(res.x);
  return res;
}

LpResult lp_max(const Vec& c, const Mat& A, const Vec& b) {
  const int nv = static_cast<int>(A.cols());
  if (c.size() != nv || b.size() != A.rows())
    throw std::invalid_argument("lp_max dimension mismatch");
  LpResult out;
  if (A.rows() == 0) {
    // No constraints: the origin is optimal iff the objective is zero.
    if (nv == 0 || c.cwiseAbs().maxCoeff() == 0.0) {
      out.status = LpStatus::Optimal;
      out.value = 0.0;
      out.x = Vec::Zero(nv);
    } else {
      out.status = LpStatus::Unbounded;
    }
    return out;
  }

  // Dual of max c'z s.t. Az <= b: min b'y s.t. A'y = c, y >= 0.  The simplex
  // multipliers of the dual are the primal maximizer.
  const SimplexResult dual = simplex_standard(A.transpose(), c, b);
  switch (dual.status) {
    case LpStatus::Optimal:
      out.status = LpStatus::Optimal;
      out.value = dual.value;
      out.x = dual.pi;
      return out;
    case LpStatus::Unbounded:
      // Improving dual ray: y >= 0, A'y = 0, b'y < 0 certifies primal
      // infeasibility.
      out.status = LpStatus::Infeasible;
      out.farkas = dual.ray;
      return out;
    case LpStatus::Infeasible:
      break;
  }
  // Dual infeasible: the primal is unbounded if it has a point at all.
  const SimplexResult feas = simplex_standard(A.transpose(), Vec::Zero(nv), b);
  if (feas.status == LpStatus::Unbounded) {
    out.status = LpStatus::Infeasible;
    out.farkas = feas.ray;
  } else {
    out.status = LpStatus::Unbounded;
  }
  return out;
}

LpResult find_point(const Mat& A, const Vec& b, double tol) {
  const int M = static_cast<int>(A.rows());
  const int nv = static_cast<int>(A.cols());
  // max -t  s.t.  Az - t 1 <= b,  -t <= 1.
  Mat Ae(M + 1, nv + 1);
  Ae.setZero();
  Ae.topLeftCorner(M, nv) = A;
  Ae.col(nv).head(M).setConstant(-1.0);
  Ae(M, nv) = -1.0;
  Vec be(M + 1);
  be.head(M) = b;
  be(M) = 1.0;
  Vec ce = Vec::Zero(nv + 1);
  ce(nv) = -1.0;

  // Solve through the dual to recover both the point and, if infeasible, the
  // Farkas combination of the original rows.
  const SimplexResult dual = simplex_standard(Ae.transpose(), ce, be);
  LpResult out;
  if (dual.status != LpStatus::Optimal)
    throw std::runtime_error("feasibility program must have an optimum");
  const double t_star = dual.pi(nv);
  if (t_star <= tol) {
    out.status = LpStatus::Optimal;
    out.x = dual.pi.head(nv);
    out.value = t_star;
  } else {
    out.status = LpStatus::Infeasible;
    out.value = t_star;
    out.farkas = dual.x.head(M);  // y >= 0, A'y = 0, b'y < 0
  }
  return out;
}

}  // namespace netmpc
