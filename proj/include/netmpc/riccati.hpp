#pragma once

#include "netmpc/types.hpp"

namespace netmpc {

/// Solution of the discrete-time algebraic Riccati equation
///   P = A'PA - A'PB (R + B'PB)^-1 B'PA + Q
/// together with the optimal feedback gain L = (R + B'PB)^-1 B'PA
/// (control law u = -L x).
struct LqrSolution {
  Mat P;
  Mat L;
};

/// Structure-preserving doubling iteration; converges quadratically for
/// stabilizable (A, B) with Q >= 0, R > 0 and detectable (A, Q^1/2).
/// The result is cross-checked against the fixed-point iteration; throws
/// std::runtime_error when the two disagree or the iteration stalls.
LqrSolution solve_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R);

/// Plain fixed-point iteration on the Riccati operator (slow, used as an
/// independent cross-check).
Mat dare_fixed_point(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                     double tol = 1e-13, int max_iter = 200000);

/// Max |eigenvalue| of a square matrix.
double spectral_radius(const Mat& A);

}  // namespace netmpc
