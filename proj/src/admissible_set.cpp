#include "netmpc/admissible_set.hpp"

#include <stdexcept>

namespace netmpc {

Polyhedron admissible_lifted(const SynthesisParams& sp,
                             const Polyhedron& terminal, int K_h) {
  const int n = sp.dims.n;
  const int m = sp.dims.m;
  const int N = sp.N;
  const int d_hi = sp.dims.d_hi;
  const int blocks = N - d_hi;  // inputs at steps K_h + d_hi .. K_h + N - 1
  const int uc = blocks * m;
  const int a_x = static_cast<int>(sp.plant.Mx.rows());
  const int a_u = static_cast<int>(sp.plant.Mu.rows());
  const int rows = blocks * a_u + (K_h + N) * a_x +
                   static_cast<int>(terminal.rows());
  Mat A = Mat::Zero(rows, n + uc);
  Vec b(rows);
  int at = 0;
  // Input box on each block of ubar (newest first).
  for (int j = 0; j < blocks; ++j) {
    A.block(at, n + j * m, a_u, m) = sp.plant.Mu;
    b.segment(at, a_u) = sp.plant.nu;
    at += a_u;
  }
  // State constraints along the trajectory and the terminal requirement.
  // x_k = A^k x0 + sum_{j=K_h+d_hi}^{k-1} A^(k-1-j) B u_j.
  Mat apow = Mat::Identity(n, n);
  std::vector<Mat> powers{apow};
  for (int k = 1; k <= K_h + N; ++k) {
    apow = sp.plant.A * apow;
    powers.push_back(apow);
  }
  auto reach_row = [&](const Mat& M, int k) {
    Mat row = Mat::Zero(M.rows(), n + uc);
    row.leftCols(n) = M * powers[k];
    for (int j = K_h + d_hi; j <= k - 1; ++j) {
      const int col = n + (K_h + N - 1 - j) * m;  // newest-first layout
      row.middleCols(col, m) = M * powers[k - 1 - j] * sp.plant.B;
    }
    return row;
  };
  for (int k = 1; k <= K_h + N - 1; ++k) {
    A.middleRows(at, a_x) = reach_row(sp.plant.Mx, k);
    b.segment(at, a_x) = sp.plant.nx;
    at += a_x;
  }
  A.middleRows(at, a_x) = reach_row(sp.plant.Mx, 0);
  b.segment(at, a_x) = sp.plant.nx;
  at += a_x;
  A.middleRows(at, terminal.rows()) = reach_row(terminal.A, K_h + N);
  b.segment(at, terminal.rows()) = terminal.b;
  return Polyhedron{std::move(A), std::move(b)};
}

Polyhedron admissible_region(const SynthesisParams& sp,
                             const Polyhedron& terminal) {
  Polyhedron region;
  for (int K_h = sp.bounds.h_lo; K_h <= sp.bounds.h_hi; ++K_h) {
    const Polyhedron lifted = admissible_lifted(sp, terminal, K_h);
    const Polyhedron projected = project_to_first(lifted, sp.dims.n);
    region = (region.rows() == 0) ? projected : stack(region, projected);
  }
  return reduce_redundancy(drop_duplicate_rows(region));
}

}  // namespace netmpc
