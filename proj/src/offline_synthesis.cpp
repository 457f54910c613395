#include "netmpc/offline_synthesis.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>
#include <utility>

#include "netmpc/lp.hpp"

namespace netmpc {
namespace {

Mat mat_power(const Mat& A, int p) {
  Mat out = Mat::Identity(A.rows(), A.cols());
  for (int i = 0; i < p; ++i) out = out * A;
  return out;
}

// Stacked input-box rows over the uhat columns of z = (xhat, uhat):
// Mu u^(i) <= nu for every candidate block.
Polyhedron uhat_box(const Dims& d, const PlantModel& plant, int offset,
                    int total_cols) {
  const int blocks = d.N - d.d_lo;
  const int a_u = static_cast<int>(plant.Mu.rows());
  Mat A = Mat::Zero(blocks * a_u, total_cols);
  Vec b(blocks * a_u);
  for (int bidx = 0; bidx < blocks; ++bidx) {
    A.block(bidx * a_u, offset + bidx * d.m, a_u, d.m) = plant.Mu;
    b.segment(bidx * a_u, a_u) = plant.nu;
  }
  return Polyhedron{std::move(A), std::move(b)};
}

// Embeds a polyhedron over some columns into a wider variable space.
Polyhedron embed(const Polyhedron& p, int offset, int total_cols) {
  Mat A = Mat::Zero(p.rows(), total_cols);
  A.middleCols(offset, p.dim()) = p.A;
  return Polyhedron{std::move(A), p.b};
}

}  // namespace

SynthesisParams SynthesisParams::make(PlantModel plant, AgeBounds bounds,
                                      CostWeights weights, int N,
                                      MarkovChain chain) {
  plant.validate();
  bounds.validate();
  if (chain.lo() != bounds.d_lo || chain.hi() != bounds.d_hi)
    throw std::invalid_argument("age chain range does not match bounds");
  SynthesisParams sp{std::move(plant), bounds, std::move(weights), N,
                     std::move(chain), {}};
  sp.dims = Dims::make(sp.plant, sp.bounds, N);
  if (sp.weights.Q.rows() != sp.dims.n || sp.weights.R.rows() != sp.dims.m)
    throw std::invalid_argument("cost weight dimensions do not match plant");
  return sp;
}

Mat sel_hat(const Dims& d, int i) {
  if (i < d.d_lo || i > d.N - 1)
    throw std::out_of_range("sel_hat: index outside candidate range");
  Mat T = Mat::Zero(d.m, d.m_hat);
  T.middleCols((d.N - 1 - i) * d.m, d.m).setIdentity();
  return T;
}

Mat sel_tilde(const Dims& d, int i, int age) {
  if (age <= i) return sel_hat(d, i);
  return Mat::Zero(d.m, d.m_hat);
}

Mat sel_bar(const Dims& d, int i, int age) {
  Mat T = Mat::Zero(d.m, d.n_hat);
  if (age <= i) return T;
  const int packet = age - i;  // packet sent at k - packet
  const int col = d.n + (packet - 1) * d.m_tilde + (d.d_hi - age) * d.m;
  T.middleCols(col, d.m).setIdentity();
  return T;
}

ScenarioSet enumerate_scenarios(const MarkovChain& chain, int h_tilde,
                                AgeMask dtilde) {
  const int len = h_tilde + chain.hi();
  if (len < 1) throw std::invalid_argument("scenario length must be positive");
  ScenarioSet out;
  out.h_tilde = h_tilde;
  std::vector<double> weights;
  std::vector<int> seq;
  std::function<void(double)> extend = [&](double w) {
    if (static_cast<int>(seq.size()) == len) {
      out.seqs.push_back(seq);
      weights.push_back(w);
      return;
    }
    const int prev = seq.back();
    for (int next = chain.lo(); next <= chain.hi(); ++next) {
      const double p = chain.phi(prev, next);
      if (p > 0.0) {
        seq.push_back(next);
        extend(w * p);
        seq.pop_back();
      }
    }
  };
  for (int first = chain.lo(); first <= chain.hi(); ++first) {
    if (!mask_contains(dtilde, chain.lo(), first)) continue;
    seq.assign(1, first);
    extend(1.0);
  }
  if (out.seqs.empty())
    throw std::invalid_argument("no scenario starts in the given support");
  out.weights = Eigen::Map<Vec>(weights.data(), weights.size());
  return out;
}

PredictionMatrices prediction_matrices(const SynthesisParams& sp, int h_tilde,
                                       const std::vector<int>& seq) {
  const Dims& d = sp.dims;
  if (static_cast<int>(seq.size()) != h_tilde + d.d_hi)
    throw std::invalid_argument("scenario length does not match anchor age");
  PredictionMatrices pm;
  pm.h_tilde = h_tilde;
  pm.Ax.resize(h_tilde + d.N + 1);
  pm.Bx.resize(h_tilde + d.N + 1);
  pm.Au.resize(h_tilde + d.N);
  pm.Bu.resize(h_tilde + d.N);
  Mat ax = Mat::Zero(d.n, d.n_hat);
  ax.leftCols(d.n).setIdentity();
  Mat bx = Mat::Zero(d.n, d.m_hat);
  pm.Ax[0] = ax;
  pm.Bx[0] = bx;
  for (int i = -h_tilde; i <= d.N - 1; ++i) {
    Mat au, bu;
    if (i <= d.d_hi - 1) {
      const int age = seq[i + h_tilde];
      au = sel_bar(d, i, age);
      bu = sel_tilde(d, i, age);
    } else {
      au = Mat::Zero(d.m, d.n_hat);
      bu = sel_hat(d, i);
    }
    pm.Au[i + h_tilde] = au;
    pm.Bu[i + h_tilde] = bu;
    ax = sp.plant.A * pm.Ax[i + h_tilde] + sp.plant.B * au;
    bx = sp.plant.A * pm.Bx[i + h_tilde] + sp.plant.B * bu;
    pm.Ax[i + h_tilde + 1] = ax;
    pm.Bx[i + h_tilde + 1] = bx;
  }
  return pm;
}

int tail_memory(const SynthesisParams& sp, int h_tilde, int i) {
  return std::min({sp.bounds.h_hi + sp.N - i - 1, sp.bounds.s_hi + sp.N - i - 2,
                   h_tilde});
}

TailGain tail_gain(const SynthesisParams& sp, const Mat& L, int i,
                   const PredictionMatrices& real,
                   const PredictionMatrices& hyp) {
  const Dims& d = sp.dims;
  TailGain tg{Mat::Zero(d.m, d.n_hat), Mat::Zero(d.m, d.m_hat)};
  if (i >= d.N_hat) return tg;
  Mat accx = Mat::Zero(d.n, d.n_hat);
  Mat accu = Mat::Zero(d.n, d.m_hat);
  const int j_lo = -tail_memory(sp, real.h_tilde, i);
  for (int j = j_lo; j <= d.d_hi - 1; ++j) {
    const Mat pw = mat_power(sp.plant.A, i - 1 - j) * sp.plant.B;
    accx += pw * (real.au(j) - hyp.au(j));
    accu += pw * (real.bu(j) - hyp.bu(j));
  }
  tg.Kx = L * accx;
  tg.Ku = L * accu;
  return tg;
}

TerminalSet maximal_admissible_set(const Mat& A_cl, const Polyhedron& yset,
                                   int max_iter) {
  Polyhedron cur = drop_duplicate_rows(yset);
  Mat power = A_cl;  // A_cl^{t+1}
  for (int t = 0; t < max_iter; ++t) {
    const Mat next_rows = yset.A * power;
    bool contained = true;
    for (int r = 0; r < next_rows.rows(); ++r) {
      const LpResult res = lp_max(next_rows.row(r).transpose(), cur.A, cur.b);
      if (res.status != LpStatus::Optimal || res.value > yset.b(r) + 1e-9) {
        contained = false;
        break;
      }
    }
    if (contained) {
      TerminalSet out{reduce_redundancy(cur), t};
      return out;
    }
    Polyhedron add{next_rows, yset.b};
    cur = drop_duplicate_rows(stack(cur, add));
    cur = reduce_redundancy(cur);
    power = power * A_cl;
  }
  throw std::runtime_error("invariant set not finitely determined");
}

Polyhedron extended_state_prior(const SynthesisParams& sp) {
  const Dims& d = sp.dims;
  const int a_x = static_cast<int>(sp.plant.Mx.rows());
  const int a_u = static_cast<int>(sp.plant.Mu.rows());
  const int packets = d.d_hi + sp.bounds.h_hi;
  const int blocks = d.d_hi - d.d_lo + 1;
  const int rows = a_x + packets * blocks * a_u;
  Mat A = Mat::Zero(rows, d.n_hat);
  Vec b(rows);
  A.topLeftCorner(a_x, d.n) = sp.plant.Mx;
  b.head(a_x) = sp.plant.nx;
  int r = a_x;
  for (int p = 0; p < packets; ++p)
    for (int blk = 0; blk < blocks; ++blk) {
      A.block(r, d.n + p * d.m_tilde + blk * d.m, a_u, d.m) = sp.plant.Mu;
      b.segment(r, a_u) = sp.plant.nu;
      r += a_u;
    }
  return Polyhedron{std::move(A), std::move(b)};
}

std::vector<AgeMask> reachable_dtilde(const MarkovChain& chain, int d_lo) {
  const int lo = chain.lo();
  const int states = chain.hi() - lo + 1;
  std::vector<AgeMask> succ(states, 0);
  for (int a = 0; a < states; ++a)
    for (int b = 0; b < states; ++b)
      if (chain.phi(lo + a, lo + b) > 0.0) succ[a] |= (AgeMask{1} << b);
  std::set<AgeMask> family;
  for (AgeMask e = 1; e < (AgeMask{1} << states); ++e) {
    AgeMask u = 0;
    for (int a = 0; a < states; ++a)
      if (e & (AgeMask{1} << a)) u |= succ[a];
    family.insert(u);
  }
  Vec dist = chain.mu_vec();
  for (int t = 0; t <= d_lo; ++t) {
    AgeMask supp = 0;
    for (int a = 0; a < states; ++a)
      if (dist(a) > 0.0) supp |= (AgeMask{1} << a);
    family.insert(supp);
    dist = chain.phi_mat().transpose() * dist;
  }
  return {family.begin(), family.end()};
}

namespace {

// Result of the backward pass over the local-feedback tail for one group of
// realized scenarios that share the same tail-relevant ages.
struct TailSystem {
  Mat Mx;   // columns: predicted state x_{k+N}
  Mat Mz;   // columns: z = (xhat, uhat)
  Vec rhs;
};

TailSystem terminal_tail_system(const SynthesisParams& sp, const SynthAux& aux,
                                const std::vector<PredictionMatrices>& pred,
                                int real_rep,
                                const std::vector<int>& hyp_reps,
                                const Polyhedron& context) {
  const Dims& d = sp.dims;
  const Mat& A = sp.plant.A;
  const Mat& B = sp.plant.B;
  const Mat& L = aux.lqr.L;
  const Mat A_cl = A - B * L;
  const int zc = d.n_hat + d.m_hat;
  const int a_x = static_cast<int>(sp.plant.Mx.rows());
  const int a_u = static_cast<int>(sp.plant.Mu.rows());

  Mat Mx = aux.terminal.set.A;
  Mat Mz = Mat::Zero(Mx.rows(), zc);
  Vec rhs = aux.terminal.set.b;

  for (int i = d.N_hat - 1; i >= d.N; --i) {
    const int per = static_cast<int>(Mx.rows()) + a_x + a_u;
    Mat sx(per * static_cast<int>(hyp_reps.size()), d.n);
    Mat sz(sx.rows(), zc);
    Vec sb(sx.rows());
    int r = 0;
    for (int q : hyp_reps) {
      const TailGain tg = tail_gain(sp, L, i, pred[real_rep], pred[q]);
      Mat Lhat(d.m, zc);
      Lhat << tg.Kx, tg.Ku;
      sx.middleRows(r, Mx.rows()) = Mx * A_cl;
      sz.middleRows(r, Mx.rows()) = Mx * B * Lhat + Mz;
      sb.segment(r, Mx.rows()) = rhs;
      r += static_cast<int>(Mx.rows());
      sx.middleRows(r, a_x) = sp.plant.Mx;
      sz.middleRows(r, a_x).setZero();
      sb.segment(r, a_x) = sp.plant.nx;
      r += a_x;
      sx.middleRows(r, a_u) = -sp.plant.Mu * L;
      sz.middleRows(r, a_u) = sp.plant.Mu * Lhat;
      sb.segment(r, a_u) = sp.plant.nu;
      r += a_u;
    }
    Mat full(sx.rows(), d.n + zc);
    full << sx, sz;
    Polyhedron p = drop_duplicate_rows(Polyhedron{full, sb});
    p = reduce_redundancy(p, context);
    Mx = p.A.leftCols(d.n);
    Mz = p.A.rightCols(zc);
    rhs = p.b;
  }
  return TailSystem{std::move(Mx), std::move(Mz), std::move(rhs)};
}

}  // namespace

ConstraintTable build_constraint_table(const SynthesisParams& sp,
                                       const SynthAux& aux, int h_tilde,
                                       AgeMask dtilde) {
  const Dims& d = sp.dims;
  const int zc = d.n_hat + d.m_hat;
  const ScenarioSet scen = enumerate_scenarios(sp.chain, h_tilde, dtilde);
  const int count = static_cast<int>(scen.seqs.size());
  std::vector<PredictionMatrices> pred(count);
  for (int r = 0; r < count; ++r)
    pred[r] = prediction_matrices(sp, h_tilde, scen.seqs[r]);

  // The tail pass depends on a scenario only through the ages that still feed
  // the local feedback corrections: offsets [-tail_memory(N), d_hi - 1].
  const int j_lo = -tail_memory(sp, h_tilde, d.N);
  std::map<std::vector<int>, int> group_reps;
  std::vector<int> group_of(count);
  for (int r = 0; r < count; ++r) {
    std::vector<int> key;
    for (int j = j_lo; j <= d.d_hi - 1; ++j)
      key.push_back(scen.age_at(r, j));
    auto [it, inserted] = group_reps.emplace(key, r);
    group_of[r] = it->second;
  }
  std::vector<int> reps;
  for (const auto& [key, rep] : group_reps) reps.push_back(rep);

  // Reduction context over (x_{k+i}, xhat, uhat): priors on the extended
  // state plus the input box that the assembled table always enforces.
  const Polyhedron prior = extended_state_prior(sp);
  const Polyhedron ubox = uhat_box(d, sp.plant, d.n + d.n_hat, d.n + zc);
  const Polyhedron context =
      stack(embed(prior, d.n, d.n + zc), ubox);

  std::map<int, TailSystem> tails;
  for (int rep : reps)
    tails.emplace(rep, terminal_tail_system(sp, aux, pred, rep, reps,
                                            context));

  // Assemble the full table over z = (xhat, uhat).
  const int a_x = static_cast<int>(sp.plant.Mx.rows());
  const int a_u = static_cast<int>(sp.plant.Mu.rows());
  std::vector<Mat> row_blocks;
  std::vector<Vec> rhs_blocks;
  for (int r = 0; r < count; ++r) {
    const TailSystem& ts = tails.at(group_of[r]);
    Mat pn(d.n, zc);
    pn << pred[r].ax(d.N), pred[r].bx(d.N);
    row_blocks.push_back(ts.Mx * pn + ts.Mz);
    rhs_blocks.push_back(ts.rhs);
    for (int i = d.d_lo + 1; i <= d.N - 1; ++i) {
      Mat st(a_x, zc);
      st << sp.plant.Mx * pred[r].ax(i), sp.plant.Mx * pred[r].bx(i);
      row_blocks.push_back(st);
      rhs_blocks.push_back(sp.plant.nx);
    }
  }
  const Polyhedron ubox_z = uhat_box(d, sp.plant, d.n_hat, zc);
  int total = static_cast<int>(ubox_z.rows());
  for (const Mat& blk : row_blocks) total += static_cast<int>(blk.rows());
  Mat A = Mat::Zero(total, zc);
  Vec b(total);
  int at = 0;
  for (size_t i = 0; i < row_blocks.size(); ++i) {
    A.middleRows(at, row_blocks[i].rows()) = row_blocks[i];
    b.segment(at, rhs_blocks[i].size()) = rhs_blocks[i];
    at += static_cast<int>(row_blocks[i].rows());
  }
  A.middleRows(at, ubox_z.rows()) = ubox_z.A;
  b.segment(at, ubox_z.rows()) = ubox_z.b;

  Polyhedron table = drop_duplicate_rows(Polyhedron{std::move(A), std::move(b)});
  table = reduce_redundancy(table, embed(prior, 0, zc));
  return ConstraintTable{std::move(table), d.n_hat};
}

std::vector<std::vector<TailMaps>> build_tail_maps(const SynthesisParams& sp,
                                                   const SynthAux& aux,
                                                   int h_tilde,
                                                   AgeMask dtilde) {
  const Dims& d = sp.dims;
  const Mat& A = sp.plant.A;
  const Mat& B = sp.plant.B;
  const Mat& L = aux.lqr.L;
  const Mat A_cl = A - B * L;
  const ScenarioSet scen = enumerate_scenarios(sp.chain, h_tilde, dtilde);
  const int count = static_cast<int>(scen.seqs.size());
  const int states = d.d_hi - d.d_lo + 1;
  std::vector<PredictionMatrices> pred(count);
  for (int r = 0; r < count; ++r)
    pred[r] = prediction_matrices(sp, h_tilde, scen.seqs[r]);

  // Posterior-averaged input maps per possible current age.
  std::vector<std::vector<Mat>> avg_au(states), avg_bu(states);
  for (int a = 0; a < states; ++a) {
    if (!mask_contains(dtilde, d.d_lo, d.d_lo + a)) continue;
    avg_au[a].assign(h_tilde + d.d_hi,
                     Mat::Zero(d.m, d.n_hat));
    avg_bu[a].assign(h_tilde + d.d_hi, Mat::Zero(d.m, d.m_hat));
    for (int r = 0; r < count; ++r) {
      if (scen.age_at(r, -h_tilde) != d.d_lo + a) continue;
      for (int j = -h_tilde; j <= d.d_hi - 1; ++j) {
        avg_au[a][j + h_tilde] += scen.weights(r) * pred[r].au(j);
        avg_bu[a][j + h_tilde] += scen.weights(r) * pred[r].bu(j);
      }
    }
  }

  const int tail = d.N_hat - d.N;  // indices N..N_hat
  auto vec_gain = [&](int i, int a, int r, bool input_map) {
    const int lo = -tail_memory(sp, h_tilde, i);
    Mat acc = Mat::Zero(d.n, input_map ? d.m_hat : d.n_hat);
    for (int j = lo; j <= d.d_hi - 1; ++j) {
      const Mat pw = mat_power(A, i - 1 - j) * B;
      if (input_map)
        acc += pw * (pred[r].bu(j) - avg_bu[a][j + h_tilde]);
      else
        acc += pw * (pred[r].au(j) - avg_au[a][j + h_tilde]);
    }
    return Mat(L * acc);
  };
  std::vector<std::vector<TailMaps>> tp(states, std::vector<TailMaps>(count));
  for (int a = 0; a < states; ++a) {
    if (!mask_contains(dtilde, d.d_lo, d.d_lo + a)) continue;
    for (int r = 0; r < count; ++r) {
      TailMaps& t = tp[a][r];
      t.Ah.resize(tail + 1);
      t.Bh.resize(tail + 1);
      t.Auh.resize(tail);
      t.Buh.resize(tail);
      t.Ah[0] = pred[r].ax(d.N);
      t.Bh[0] = pred[r].bx(d.N);
      for (int i = d.N + 1; i <= d.N_hat; ++i) {
        t.Ah[i - d.N] = A_cl * t.Ah[i - d.N - 1] + B * vec_gain(i - 1, a, r, false);
        t.Bh[i - d.N] = A_cl * t.Bh[i - d.N - 1] + B * vec_gain(i - 1, a, r, true);
      }
      for (int i = d.N; i <= d.N_hat - 1; ++i) {
        t.Auh[i - d.N] = -L * t.Ah[i - d.N] + vec_gain(i, a, r, false);
        t.Buh[i - d.N] = -L * t.Bh[i - d.N] + vec_gain(i, a, r, true);
      }
    }
  }
  return tp;
}

CostTable build_cost_table(const SynthesisParams& sp, const SynthAux& aux,
                           int h_tilde, AgeMask dtilde) {
  const Dims& d = sp.dims;
  const ScenarioSet scen = enumerate_scenarios(sp.chain, h_tilde, dtilde);
  const int count = static_cast<int>(scen.seqs.size());
  const int states = d.d_hi - d.d_lo + 1;
  std::vector<PredictionMatrices> pred(count);
  for (int r = 0; r < count; ++r)
    pred[r] = prediction_matrices(sp, h_tilde, scen.seqs[r]);
  const int tail = d.N_hat - d.N;
  const auto tp = build_tail_maps(sp, aux, h_tilde, dtilde);

  CostTable table;
  table.r = states;
  table.R.assign(states * states * states, Mat::Zero(d.m_hat, d.m_hat));
  table.H.assign(states * states * states, Mat::Zero(d.m_hat, d.n_hat));

  for (int r = 0; r < count; ++r) {
    const int a3 = scen.age_at(r, -h_tilde) - d.d_lo;
    const double w = scen.weights(r);
    // Scenario-only pieces: inputs over [d_lo, N-1], states over [d_lo+1, N].
    Mat R12 = Mat::Zero(d.m_hat, d.m_hat);
    Mat H12 = Mat::Zero(d.m_hat, d.n_hat);
    for (int i = d.d_lo; i <= d.N - 1; ++i) {
      R12 += pred[r].bu(i).transpose() * sp.weights.R * pred[r].bu(i);
      H12 += pred[r].bu(i).transpose() * sp.weights.R * pred[r].au(i);
    }
    for (int i = d.d_lo + 1; i <= d.N; ++i) {
      R12 += pred[r].bx(i).transpose() * sp.weights.Q * pred[r].bx(i);
      H12 += pred[r].bx(i).transpose() * sp.weights.Q * pred[r].ax(i);
    }
    for (int a1 = 0; a1 < states; ++a1) {
      if (!mask_contains(dtilde, d.d_lo, d.d_lo + a1)) continue;
      for (int a2 = 0; a2 < states; ++a2) {
        if (!mask_contains(dtilde, d.d_lo, d.d_lo + a2)) continue;
        Mat Racc = R12;
        Mat Hacc = H12;
        const TailMaps& t1 = tp[a1][r];
        const TailMaps& t2 = tp[a2][r];
        for (int i = d.N; i <= d.N_hat - 1; ++i) {
          Racc += t1.Buh[i - d.N].transpose() * sp.weights.R * t2.Buh[i - d.N];
          Hacc += t1.Buh[i - d.N].transpose() * sp.weights.R * t2.Auh[i - d.N];
        }
        for (int i = d.N + 1; i <= d.N_hat - 1; ++i) {
          Racc += t1.Bh[i - d.N].transpose() * sp.weights.Q * t2.Bh[i - d.N];
          Hacc += t1.Bh[i - d.N].transpose() * sp.weights.Q * t2.Ah[i - d.N];
        }
        Racc += t1.Bh[tail].transpose() * aux.lqr.P * t2.Bh[tail];
        Hacc += t1.Bh[tail].transpose() * aux.lqr.P * t2.Ah[tail];
        table.R[table.idx(a1, a2, a3)] += w * Racc;
        table.H[table.idx(a1, a2, a3)] += w * Hacc;
      }
    }
  }
  return table;
}

const KeyEntry& SynthesisTables::at(int h_tilde, AgeMask dtilde) const {
  auto it = entries.find({h_tilde, dtilde});
  if (it == entries.end())
    throw std::out_of_range("no synthesis entry for requested key");
  return it->second;
}

SynthesisTables synthesize(const SynthesisParams& sp) {
  SynthesisTables out;
  out.params = sp;
  out.aux.lqr = solve_dare(sp.plant.A, sp.plant.B, sp.weights.Q, sp.weights.R);
  const int a_x = static_cast<int>(sp.plant.Mx.rows());
  const int a_u = static_cast<int>(sp.plant.Mu.rows());
  Mat Y(a_x + a_u, sp.dims.n);
  Y << sp.plant.Mx, -sp.plant.Mu * out.aux.lqr.L;
  Vec y(a_x + a_u);
  y << sp.plant.nx, sp.plant.nu;
  out.aux.terminal = maximal_admissible_set(
      sp.plant.A - sp.plant.B * out.aux.lqr.L, Polyhedron{Y, y});
  out.h_tilde_lo = std::min(sp.bounds.h_lo, sp.bounds.s_lo - 1);
  out.dtilde_family = reachable_dtilde(sp.chain, sp.bounds.d_lo);
  for (int h = out.h_tilde_lo; h <= sp.bounds.h_hi; ++h)
    for (AgeMask dt : out.dtilde_family) {
      KeyEntry entry;
      entry.scenarios = enumerate_scenarios(sp.chain, h, dt);
      entry.constraints = build_constraint_table(sp, out.aux, h, dt);
      entry.cost = build_cost_table(sp, out.aux, h, dt);
      out.entries.emplace(std::make_pair(h, dt), std::move(entry));
    }
  return out;
}

}  // namespace netmpc
