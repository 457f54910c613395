#pragma once

#include <map>
#include <vector>

#include "netmpc/markov_chain.hpp"
#include "netmpc/polytope.hpp"
#include "netmpc/riccati.hpp"
#include "netmpc/types.hpp"

namespace netmpc {

/// Everything the offline synthesis needs about the problem.
struct SynthesisParams {
  PlantModel plant;
  AgeBounds bounds;
  CostWeights weights;
  int N = 0;
  MarkovChain chain;  // controller -> actuator age model
  Dims dims;

  static SynthesisParams make(PlantModel plant, AgeBounds bounds,
                              CostWeights weights, int N, MarkovChain chain);
};

// ---------------------------------------------------------------------------
// Selection matrices.
//
// The decision vector uhat stacks candidate inputs [u^(N-1); ...; u^(d_lo)];
// the extended state xhat stacks [x_anchor; packet_{k-1}; ...;
// packet_{k-d_hi-h_hi}], each packet holding blocks [u^(d_hi); ...; u^(d_lo)].
// ---------------------------------------------------------------------------

/// Picks candidate u^(i) out of uhat (i in [d_lo, N-1]).
Mat sel_hat(const Dims& d, int i);
/// Input applied at prediction offset i when the packet age is `age` and the
/// packet was sent at or after step k: sel_hat(i) when age <= i, else zero.
Mat sel_tilde(const Dims& d, int i, int age);
/// Input applied at offset i when the packet age `age` exceeds i: selects the
/// age-`age` block of the packet sent at k - (age - i) out of xhat.
Mat sel_bar(const Dims& d, int i, int age);

// ---------------------------------------------------------------------------
// Scenario enumeration.
// ---------------------------------------------------------------------------

/// All chain-feasible age sequences (d_{k+i}) for offsets
/// i in [-h_tilde, d_hi - 1] whose first element lies in `dtilde`, with the
/// product of one-step transition probabilities as weight.  Within each group
/// sharing a first element the weights sum to one.
struct ScenarioSet {
  int h_tilde = 0;
  std::vector<std::vector<int>> seqs;  // seqs[r][i + h_tilde] = age at offset i
  Vec weights;

  int age_at(int r, int offset) const { return seqs[r][offset + h_tilde]; }
  int length() const { return static_cast<int>(seqs.empty() ? 0 : seqs[0].size()); }
};
ScenarioSet enumerate_scenarios(const MarkovChain& chain, int h_tilde,
                                AgeMask dtilde);

// ---------------------------------------------------------------------------
// Prediction matrices for one scenario.
// ---------------------------------------------------------------------------

/// Affine maps from (xhat, uhat) to predicted states and inputs under a fixed
/// age scenario:  x_{k+i} = Ax[i] xhat + Bx[i] uhat (i in [-h_tilde, N]),
/// u_{k+i} = Au[i] xhat + Bu[i] uhat (i in [-h_tilde, N-1]).
struct PredictionMatrices {
  int h_tilde = 0;
  std::vector<Mat> Ax, Bx;
  std::vector<Mat> Au, Bu;

  const Mat& ax(int i) const { return Ax[i + h_tilde]; }
  const Mat& bx(int i) const { return Bx[i + h_tilde]; }
  const Mat& au(int i) const { return Au[i + h_tilde]; }
  const Mat& bu(int i) const { return Bu[i + h_tilde]; }
};
PredictionMatrices prediction_matrices(const SynthesisParams& sp, int h_tilde,
                                       const std::vector<int>& seq);

/// Largest anchor age whose input still influences x_{k+i+1} through the
/// local feedback tail: min(h_hi + N - i - 1, s_hi + N - i - 2, h_tilde).
int tail_memory(const SynthesisParams& sp, int h_tilde, int i);

/// Gain of the local feedback tail correction at offset i >= N:
///   kappa^(i) = -L x_{k+i} + Kx xhat + Ku uhat,
/// where (Kx, Ku) compare the inputs realized under scenario `real` with the
/// inputs hypothesized under scenario `hyp`.
struct TailGain {
  Mat Kx;  // m x n_hat
  Mat Ku;  // m x m_hat
};
TailGain tail_gain(const SynthesisParams& sp, const Mat& L, int i,
                   const PredictionMatrices& real, const PredictionMatrices& hyp);

// ---------------------------------------------------------------------------
// Terminal set.
// ---------------------------------------------------------------------------

/// Maximal constraint-admissible invariant set of x+ = A_cl x inside
/// {x : Y x <= y}: the set of initial states whose whole trajectory stays in
/// the constraints.  Throws std::runtime_error if not finitely determined
/// within max_iter steps.
struct TerminalSet {
  Polyhedron set;
  int t_star = 0;
};
TerminalSet maximal_admissible_set(const Mat& A_cl, const Polyhedron& yset,
                                   int max_iter = 500);

// ---------------------------------------------------------------------------
// Keyed synthesis output.
// ---------------------------------------------------------------------------

struct SynthAux {
  LqrSolution lqr;
  TerminalSet terminal;
};

/// Constraint table over z = (xhat, uhat): all state, input and terminal
/// requirements of the finite-horizon program for every scenario compatible
/// with (h_tilde, dtilde), reduced to an irredundant system.
struct ConstraintTable {
  Polyhedron system;  // dim = n_hat + m_hat
  int n_hat = 0;
  Mat Mx() const { return system.A.leftCols(n_hat); }
  Mat Mu() const { return system.A.rightCols(system.dim() - n_hat); }
};

/// Expected-cost table: matrices R(δ1, δ2, δ3) and H(δ1, δ2, δ3) such that
/// the conditional expected cost of uhat given xhat equals
///   sum_{δ1,δ2,δ3} P(δ1)P(δ2)P(δ3) (uhat' R uhat + 2 uhat' H xhat) + const.
struct CostTable {
  int r = 0;  // ages per axis (d_hi - d_lo + 1); index (δ..) zero-based
  std::vector<Mat> R;  // r^3 entries, m_hat x m_hat
  std::vector<Mat> H;  // r^3 entries, m_hat x n_hat
  int idx(int a, int b, int c) const { return (a * r + b) * r + c; }
};

/// Linear maps z = (xhat, uhat) -> trajectory of one local-feedback tail
/// branch for a given (assumed current age, realized scenario) pair.
struct TailMaps {
  std::vector<Mat> Ah, Bh;    // branch state at steps N .. N_hat
  std::vector<Mat> Auh, Buh;  // branch input at steps N .. N_hat - 1
};

/// Tail branch maps indexed [assumed age - d_lo][scenario]; entries for ages
/// outside the support are left empty.
std::vector<std::vector<TailMaps>> build_tail_maps(const SynthesisParams& sp,
                                                   const SynthAux& aux,
                                                   int h_tilde, AgeMask dtilde);

struct KeyEntry {
  ScenarioSet scenarios;
  ConstraintTable constraints;
  CostTable cost;
};

struct SynthesisTables {
  SynthesisParams params;
  SynthAux aux;
  int h_tilde_lo = 0;
  std::vector<AgeMask> dtilde_family;
  std::map<std::pair<int, AgeMask>, KeyEntry> entries;

  const KeyEntry& at(int h_tilde, AgeMask dtilde) const;
};

/// Prior constraints known to hold for every extended state produced by the
/// closed loop: the anchor satisfies the state constraints and every stored
/// packet block satisfies the input constraints.  Used as reduction context.
Polyhedron extended_state_prior(const SynthesisParams& sp);

/// Family of supports that the online age posterior can take: unions of
/// one-step successor sets plus the marginals mu Phi^t for t in [0, d_lo].
std::vector<AgeMask> reachable_dtilde(const MarkovChain& chain, int d_lo);

ConstraintTable build_constraint_table(const SynthesisParams& sp,
                                       const SynthAux& aux, int h_tilde,
                                       AgeMask dtilde);
CostTable build_cost_table(const SynthesisParams& sp, const SynthAux& aux,
                           int h_tilde, AgeMask dtilde);

/// Runs the complete offline synthesis for every reachable key.
SynthesisTables synthesize(const SynthesisParams& sp);

}  // namespace netmpc
