#include "netmpc/qp.hpp"

#include <algorithm>
#include <cmath>

#include "netmpc/lp.hpp"

namespace netmpc {

namespace {

constexpr double kStationarityTol = 1e-7;
constexpr double kMultiplierTol = 1e-9;
constexpr double kComplementarityTol = 1e-7;
constexpr double kFeasibilityTol = 1e-8;

/// Orthonormal basis of the null space of W_a (rows = active constraints).
Mat null_space(const Mat& Wa, int n) {
  if (Wa.rows() == 0) return Mat::Identity(n, n);
  Eigen::ColPivHouseholderQR<Mat> qr(Wa.transpose());
  qr.setThreshold(1e-12);
  const int rank = static_cast<int>(qr.rank());
  const Mat Q = qr.householderQ();
  return Q.rightCols(n - rank);
}

}  // namespace

QpResult solve_qp(const QpInstance& qp) {
  const int n = static_cast<int>(qp.V.rows());
  const int m = static_cast<int>(qp.W.rows());
  if (qp.V.cols() != n || qp.v.size() != n || (m > 0 && qp.W.cols() != n) ||
      qp.w.size() != m)
    throw std::invalid_argument("qp dimension mismatch");
  if ((qp.V - qp.V.transpose()).cwiseAbs().maxCoeff() >
      1e-8 * (1.0 + qp.V.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("qp hessian must be symmetric");
  const Mat G = qp.V + qp.V.transpose();  // Hessian of u'Vu + u'v
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("qp hessian must be positive definite");

  QpResult res;

  // Phase 1: feasible starting point.
  Vec u;
  if (m > 0) {
    const auto p0 = find_point(qp.W, qp.w, 1e-10);
    if (p0.status != LpStatus::Optimal) {
      res.status = QpStatus::Infeasible;
      res.farkas = p0.farkas;
      return res;
    }
    u = p0.x;
  } else {
    u = Vec::Zero(n);
  }

  std::vector<bool> working(m, false);
  const double w_scale = 1.0 + (m > 0 ? qp.w.cwiseAbs().maxCoeff() : 0.0);

  const int max_iter = 100 + 20 * (n + m);
  Vec lambda_work;  // multipliers of the current working set
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (working[i]) act.push_back(i);
    Mat Wa(static_cast<int>(act.size()), n);
    for (std::size_t i = 0; i < act.size(); ++i) Wa.row(i) = qp.W.row(act[i]);

    const Vec g = G * u + qp.v;
    const Mat Z = null_space(Wa, n);
    Vec p = Vec::Zero(n);
    if (Z.cols() > 0) {
      const Mat H = Z.transpose() * G * Z;
      p = Z * H.llt().solve(-Z.transpose() * g);
    }

    if (p.norm() <= 1e-10 * (1.0 + u.norm())) {
      // Multipliers: least-squares solution of Wa' lambda = -g.
      lambda_work = act.empty()
                        ? Vec(0)
                        : Vec(Wa.transpose()
                                  .colPivHouseholderQr()
                                  .solve(-g));
      int drop = -1;
      double most_negative = -kMultiplierTol;
      for (std::size_t i = 0; i < act.size(); ++i) {
        if (lambda_work(i) < most_negative) {
          most_negative = lambda_work(i);
          drop = static_cast<int>(i);
        }
      }
      if (drop < 0) {
        res.status = QpStatus::Optimal;
        res.u = u;
        res.objective = u.dot(qp.V * u) + u.dot(qp.v);
        res.lambda = Vec::Zero(m);
        for (std::size_t i = 0; i < act.size(); ++i)
          res.lambda(act[i]) = std::max(lambda_work(i), 0.0);
        res.active = act;

        // KKT certification.
        const Vec stat = G * u + qp.v + qp.W.transpose() * res.lambda;
        const double g_scale = 1.0 + g.cwiseAbs().maxCoeff();
        double kkt = stat.cwiseAbs().maxCoeff() / g_scale;
        for (int i = 0; i < m; ++i) {
          const double slack = qp.w(i) - qp.W.row(i).dot(u);
          if (slack < -kFeasibilityTol * w_scale)
            throw std::runtime_error("qp certification failed: infeasible output");
          kkt = std::max(kkt, std::abs(res.lambda(i) * slack) / w_scale);
        }
        res.kkt_residual = kkt;
        if (kkt > std::max(kStationarityTol, kComplementarityTol))
          throw std::runtime_error("qp certification failed: kkt residual too large");
        return res;
      }
      working[act[drop]] = false;
      continue;
    }

    // Ratio test toward the nearest blocking constraint.
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < m; ++i) {
      if (working[i]) continue;
      const double den = qp.W.row(i).dot(p);
      if (den <= 1e-12) continue;
      const double a = (qp.w(i) - qp.W.row(i).dot(u)) / den;
      if (a < alpha - 1e-12) {
        alpha = a;
        blocking = i;
      }
    }
    u += std::max(alpha, 0.0) * p;
    if (blocking >= 0) working[blocking] = true;
  }
  throw std::runtime_error("qp active-set iteration limit reached");
}

}  // namespace netmpc
