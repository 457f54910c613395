#include "netmpc/controller.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace netmpc {

QpInstance assemble_qp(const SynthesisTables& tables,
                       const InformationState& st) {
  const Dims& d = tables.params.dims;
  const KeyEntry& entry = tables.at(st.h_tilde, st.support);
  const CostTable& ct = entry.cost;
  Mat V = Mat::Zero(d.m_hat, d.m_hat);
  Mat H = Mat::Zero(d.m_hat, d.n_hat);
  for (int a = 0; a < ct.r; ++a) {
    if (st.p(a) == 0.0) continue;
    for (int b = 0; b < ct.r; ++b) {
      if (st.p(b) == 0.0) continue;
      for (int c = 0; c < ct.r; ++c) {
        if (st.p(c) == 0.0) continue;
        const double w = st.p(a) * st.p(b) * st.p(c);
        V += w * ct.R[ct.idx(a, b, c)];
        H += w * ct.H[ct.idx(a, b, c)];
      }
    }
  }
  QpInstance qp;
  qp.V = 0.5 * (V + V.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat> eig(qp.V);
  if (eig.eigenvalues().minCoeff() < 1e-10)
    qp.V += 1e-9 * Mat::Identity(d.m_hat, d.m_hat);
  qp.v = 2.0 * H * st.xhat;
  qp.W = entry.constraints.system.A.rightCols(d.m_hat);
  qp.w = entry.constraints.system.b -
         entry.constraints.system.A.leftCols(d.n_hat) * st.xhat;
  return qp;
}

Vec candidate_packet_blocks(const Dims& dims, const Vec& uhat) {
  Vec blocks(dims.m_tilde);
  for (int age = dims.d_lo; age <= dims.d_hi; ++age)
    blocks.segment((dims.d_hi - age) * dims.m, dims.m) =
        uhat.segment((dims.N - 1 - age) * dims.m, dims.m);
  return blocks;
}

Vec kappa_newest_slot(const SynthesisTables& tables,
                      const InformationState& st, const Vec& uhat) {
  const SynthesisParams& sp = tables.params;
  const Dims& d = sp.dims;
  const KeyEntry& entry = tables.at(st.h_tilde, st.support);
  const ScenarioSet& scen = entry.scenarios;
  Vec mean = Vec::Zero(d.n);
  for (std::size_t r = 0; r < scen.seqs.size(); ++r) {
    const double w =
        st.p(scen.age_at(static_cast<int>(r), -st.h_tilde) - d.d_lo) *
        scen.weights(static_cast<int>(r));
    if (w == 0.0) continue;
    const PredictionMatrices pm =
        prediction_matrices(sp, st.h_tilde, scen.seqs[r]);
    mean += w * (pm.ax(d.N - 1) * st.xhat + pm.bx(d.N - 1) * uhat);
  }
  return -tables.aux.lqr.L * mean;
}

Vec shifted_candidate(const SynthesisTables& tables,
                      const InformationState& st_next, const Vec& prev_uhat) {
  const Dims& d = tables.params.dims;
  Vec uhat = Vec::Zero(d.m_hat);
  // Slot i of the new vector holds slot i+1 of the previous one.
  uhat.tail(d.m_hat - d.m) = prev_uhat.head(d.m_hat - d.m);
  uhat.head(d.m) = kappa_newest_slot(tables, st_next, uhat);
  return uhat;
}

MpcController::MpcController(SynthesisTables tables, Mode mode)
    : tables_(std::move(tables)),
      mode_(mode),
      tracker_(tables_.params.plant, tables_.params.bounds,
               tables_.params.chain) {}

MpcController::StepResult MpcController::step(const ControllerView& view) {
  const Dims& d = tables_.params.dims;
  StepResult out;
  out.packet.k = view.k();
  if (!view.sensor_seen()) {
    out.packet.blocks = Vec::Zero(d.m_tilde);
    tracker_.record_sent(out.packet);
    return out;
  }
  const InformationState st = tracker_.assess(view);
  out.info = st;
  if (mode_ == Mode::Unconstrained) {
    QpInstance qp = assemble_qp(tables_, st);
    out.uhat = (qp.V + qp.V.transpose()).ldlt().solve(-qp.v);
    out.solved = true;
  } else {
    const QpInstance qp = assemble_qp(tables_, st);
    const QpResult res = solve_qp(qp);
    if (res.status == QpStatus::Optimal) {
      out.uhat = res.u;
      out.objective = res.objective;
      out.solved = true;
    } else {
      out.feasible = false;
      // The theory guarantees the shifted previous solution stays feasible;
      // fall back to it (or to zero before the first solve).
      out.uhat = last_uhat_ ? shifted_candidate(tables_, st, *last_uhat_)
                            : Vec(Vec::Zero(d.m_hat));
      out.solved = false;
    }
  }
  last_uhat_ = out.uhat;
  out.packet.blocks = candidate_packet_blocks(d, out.uhat);
  tracker_.record_sent(out.packet);
  return out;
}

}  // namespace netmpc
