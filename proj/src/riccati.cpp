#include "netmpc/riccati.hpp"

namespace netmpc {

double spectral_radius(const Mat& A) {
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

Mat dare_fixed_point(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                     double tol, int max_iter) {
  Mat P = Q;
  for (int i = 0; i < max_iter; ++i) {
    const Mat BtPB = R + B.transpose() * P * B;
    const Mat next = A.transpose() * P * A -
                     A.transpose() * P * B * BtPB.ldlt().solve(B.transpose() * P * A) + Q;
    const double diff = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (diff <= tol * (1.0 + P.cwiseAbs().maxCoeff())) return P;
  }
  throw std::runtime_error("riccati fixed-point iteration did not converge");
}

LqrSolution solve_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols())
    throw std::invalid_argument("riccati dimension mismatch");

  // Structure-preserving doubling: iterate (A_k, G_k, H_k) with
  //   A_{k+1} = A_k (I + G_k H_k)^-1 A_k
  //   G_{k+1} = G_k + A_k (I + G_k H_k)^-1 G_k A_k'
  //   H_{k+1} = H_k + A_k' H_k (I + G_k H_k)^-1 A_k
  // where G_0 = B R^-1 B', H_0 = Q; H_k -> P quadratically.
  Mat Ak = A;
  Mat Gk = B * R.ldlt().solve(B.transpose());
  Mat Hk = Q;
  const Mat I = Mat::Identity(n, n);
  bool converged = false;
  for (int i = 0; i < 200; ++i) {
    const Mat W = I + Gk * Hk;
    const Eigen::PartialPivLU<Mat> lu(W);
    const Mat WA = lu.solve(Ak);
    const Mat WG = lu.solve(Gk);
    const Mat Hn = Hk + Ak.transpose() * Hk * WA;
    const Mat Gn = Gk + Ak * WG * Ak.transpose();
    const Mat An = Ak * WA;
    const double diff = (Hn - Hk).cwiseAbs().maxCoeff();
    Ak = An;
    Gk = Gn;
    Hk = Hn;
    if (diff <= 1e-14 * (1.0 + Hk.cwiseAbs().maxCoeff())) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("riccati doubling iteration did not converge");
  Mat P = 0.5 * (Hk + Hk.transpose());

  // Residual and independent cross-check.
  const Mat BtPB = R + B.transpose() * P * B;
  const Mat res = A.transpose() * P * A -
                  A.transpose() * P * B * BtPB.ldlt().solve(B.transpose() * P * A) +
                  Q - P;
  const double scale = 1.0 + P.cwiseAbs().maxCoeff();
  if (res.cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::runtime_error("riccati residual too large");
  const Mat P_fp = dare_fixed_point(A, B, Q, R);
  if ((P - P_fp).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::runtime_error("riccati solvers disagree");

  LqrSolution sol;
  sol.P = P;
  sol.L = BtPB.ldlt().solve(B.transpose() * P * A);
  return sol;
}

}  // namespace netmpc
