#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace netmpc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Linear time-invariant plant x+ = A x + B u with polytopic state and input
/// constraints Mx x <= nx, Mu u <= nu.
struct PlantModel {
  Mat A;
  Mat B;
  Mat Mx;
  Vec nx;
  Mat Mu;
  Vec nu;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

/// Bounds of the three age processes: controller->actuator age D in
/// [d_lo, d_hi], sensor->controller age H in [h_lo, h_hi] and
/// actuator->controller age S in [s_lo, s_hi].
struct AgeBounds {
  int d_lo = 0, d_hi = 0;
  int h_lo = 0, h_hi = 0;
  int s_lo = 0, s_hi = 0;

  void validate() const;
};

/// Quadratic stage cost x'Qx + u'Ru.
struct CostWeights {
  Mat Q;
  Mat R;
};

/// Dimension bookkeeping shared by the synthesis and the online controller.
struct Dims {
  int n = 0;       // plant state dimension
  int m = 0;       // plant input dimension
  int N = 0;       // optimization horizon
  int d_lo = 0, d_hi = 0;
  int h_hi = 0;
  int m_tilde = 0; // size of one controller packet: (d_hi-d_lo+1)*m
  int m_hat = 0;   // decision vector size: m*(N-d_lo)
  int n_hat = 0;   // extended state size: n + m_tilde*(d_hi+h_hi)
  int N_hat = 0;   // prediction horizon covered by constraints

  static Dims make(const PlantModel& plant, const AgeBounds& b, int N);
};

}  // namespace netmpc
