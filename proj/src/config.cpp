#include "netmpc/config.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace netmpc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

Mat json_to_mat(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    fail(name + " must be an array of rows");
  const std::size_t cols = j[0].size();
  Mat m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      fail(name + " rows must all have the same length");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

Vec json_to_vec(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) fail(name + " must be a nonempty array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

const json& at(const json& j, const std::string& key) {
  if (!j.contains(key)) fail("missing key \"" + key + "\"");
  return j.at(key);
}

MarkovChain chain_from_json(const json& j, int lo, int hi,
                            const std::string& name) {
  try {
    return MarkovChain(lo, hi, json_to_vec(at(j, "mu"), name + ".mu"),
                       json_to_mat(at(j, "phi"), name + ".phi"));
  } catch (const std::invalid_argument& e) {
    fail(name + ": " + e.what());
  }
}

// Unobservable / uncontrollable eigenvalue test via the rank of the PBH
// pencil at every eigenvalue with |lambda| >= 1.
bool pbh_ok(const Mat& A, const Mat& M, bool input_side, double tol) {
  const int n = static_cast<int>(A.rows());
  const Eigen::EigenSolver<Mat> eig(A);
  for (int i = 0; i < n; ++i) {
    const std::complex<double> lambda = eig.eigenvalues()(i);
    if (std::abs(lambda) < 1.0 - 1e-9) continue;
    Eigen::MatrixXcd pencil;
    if (input_side) {
      pencil.resize(n, n + M.cols());
      pencil << lambda * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>(),
          M.cast<std::complex<double>>();
    } else {
      pencil.resize(n + M.rows(), n);
      pencil << lambda * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>(),
          M.cast<std::complex<double>>();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(pencil);
    qr.setThreshold(tol);
    if (qr.rank() < n) return false;
  }
  return true;
}

}  // namespace

bool is_stabilizable(const Mat& A, const Mat& B, double tol) {
  return pbh_ok(A, B, true, tol);
}

bool is_detectable(const Mat& A, const Mat& Q, double tol) {
  // Detectability of (A, Q^{1/2}); the square root comes from the
  // self-adjoint eigendecomposition of Q.
  const Eigen::SelfAdjointEigenSolver<Mat> eig(Q);
  if (eig.eigenvalues().minCoeff() < -1e-10) return false;
  const Mat half = eig.operatorSqrt();
  return pbh_ok(A, half, false, tol);
}

SynthesisParams RunConfig::synthesis_params() const {
  return SynthesisParams::make(plant, bounds, weights, N, d_chain);
}

ExperimentSpec RunConfig::experiment_spec(Variant v, std::uint64_t seed) const {
  ExperimentSpec e = ExperimentSpec::make(synthesis_params(), v, x0,
                                          experiment.horizon, seed);
  if (h_chain) e.h_spec.chain = *h_chain;
  if (s_chain) e.s_spec.chain = *s_chain;
  if (experiment.d_script) e.script_d(*experiment.d_script);
  if (experiment.h_script) e.script_h(*experiment.h_script);
  if (experiment.s_script) e.script_s(*experiment.s_script);
  return e;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }

  RunConfig c;
  const json& plant = at(j, "plant");
  c.plant.A = json_to_mat(at(plant, "A"), "plant.A");
  c.plant.B = json_to_mat(at(plant, "B"), "plant.B");
  c.plant.Mx = json_to_mat(at(plant, "Mx"), "plant.Mx");
  c.plant.nx = json_to_vec(at(plant, "nx"), "plant.nx");
  c.plant.Mu = json_to_mat(at(plant, "Mu"), "plant.Mu");
  c.plant.nu = json_to_vec(at(plant, "nu"), "plant.nu");

  const json& net = at(j, "network");
  c.bounds.d_lo = at(net, "d").at(0).get<int>();
  c.bounds.d_hi = at(net, "d").at(1).get<int>();
  c.bounds.h_lo = at(net, "h").at(0).get<int>();
  c.bounds.h_hi = at(net, "h").at(1).get<int>();
  c.bounds.s_lo = at(net, "s").at(0).get<int>();
  c.bounds.s_hi = at(net, "s").at(1).get<int>();
  c.d_chain = chain_from_json(at(net, "d_chain"), c.bounds.d_lo, c.bounds.d_hi,
                              "network.d_chain");
  if (net.contains("h_chain"))
    c.h_chain = chain_from_json(net.at("h_chain"), c.bounds.h_lo,
                                c.bounds.h_hi, "network.h_chain");
  if (net.contains("s_chain"))
    c.s_chain = chain_from_json(net.at("s_chain"), c.bounds.s_lo,
                                c.bounds.s_hi, "network.s_chain");

  const json& ctrl = at(j, "controller");
  c.N = at(ctrl, "N").get<int>();
  c.weights.Q = json_to_mat(at(ctrl, "Q"), "controller.Q");
  c.weights.R = json_to_mat(at(ctrl, "R"), "controller.R");

  const json& exp = at(j, "experiment");
  c.x0 = json_to_vec(at(exp, "x0"), "experiment.x0");
  if (exp.contains("variant"))
    c.experiment.variant = exp.at("variant").get<std::string>();
  if (exp.contains("horizon"))
    c.experiment.horizon = exp.at("horizon").get<int>();
  if (exp.contains("seeds")) {
    c.experiment.seeds.clear();
    for (const auto& s : exp.at("seeds"))
      c.experiment.seeds.push_back(s.get<std::uint64_t>());
  }
  if (exp.contains("scripts")) {
    const json& sc = exp.at("scripts");
    if (sc.contains("D")) c.experiment.d_script = sc.at("D").get<int>();
    if (sc.contains("H")) c.experiment.h_script = sc.at("H").get<int>();
    if (sc.contains("S")) c.experiment.s_script = sc.at("S").get<int>();
  }

  // Cross-checks beyond the per-structure validation.
  try {
    c.plant.validate();
    c.bounds.validate();
    Dims::make(c.plant, c.bounds, c.N);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (c.N < c.bounds.d_hi + 1) fail("N must be at least d_hi + 1");
  if (c.weights.Q.rows() != c.plant.n() || c.weights.Q.cols() != c.plant.n())
    fail("controller.Q must be n x n");
  if (c.weights.R.rows() != c.plant.m() || c.weights.R.cols() != c.plant.m())
    fail("controller.R must be m x m");
  if (c.x0.size() != c.plant.n()) fail("experiment.x0 must have length n");
  if (c.experiment.horizon <= 0) fail("experiment.horizon must be positive");
  if (c.experiment.seeds.empty()) fail("experiment.seeds must be nonempty");
  static const char* kVariants[] = {"stochastic", "deterministic", "lqr",
                                    "unconstrained"};
  if (std::find_if(std::begin(kVariants), std::end(kVariants),
                   [&](const char* v) { return c.experiment.variant == v; }) ==
      std::end(kVariants))
    fail("unknown experiment.variant \"" + c.experiment.variant + "\"");
  auto check_script = [&](const std::optional<int>& v, int lo, int hi,
                          const char* name) {
    if (v && (*v < lo || *v > hi))
      fail(std::string("script for ") + name + " is outside its bounds");
  };
  check_script(c.experiment.d_script, c.bounds.d_lo, c.bounds.d_hi, "D");
  check_script(c.experiment.h_script, c.bounds.h_lo, c.bounds.h_hi, "H");
  check_script(c.experiment.s_script, c.bounds.s_lo, c.bounds.s_hi, "S");
  if (!is_stabilizable(c.plant.A, c.plant.B))
    fail("(A, B) is not stabilizable");
  if (!is_detectable(c.plant.A, c.weights.Q))
    fail("(A, Q^1/2) is not detectable");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["plant"] = {{"A", mat_to_json(c.plant.A)},   {"B", mat_to_json(c.plant.B)},
                {"Mx", mat_to_json(c.plant.Mx)}, {"nx", vec_to_json(c.plant.nx)},
                {"Mu", mat_to_json(c.plant.Mu)}, {"nu", vec_to_json(c.plant.nu)}};
  j["network"] = {{"d", {c.bounds.d_lo, c.bounds.d_hi}},
                  {"h", {c.bounds.h_lo, c.bounds.h_hi}},
                  {"s", {c.bounds.s_lo, c.bounds.s_hi}},
                  {"d_chain",
                   {{"mu", vec_to_json(c.d_chain.mu_vec())},
                    {"phi", mat_to_json(c.d_chain.phi_mat())}}}};
  if (c.h_chain)
    j["network"]["h_chain"] = {{"mu", vec_to_json(c.h_chain->mu_vec())},
                               {"phi", mat_to_json(c.h_chain->phi_mat())}};
  if (c.s_chain)
    j["network"]["s_chain"] = {{"mu", vec_to_json(c.s_chain->mu_vec())},
                               {"phi", mat_to_json(c.s_chain->phi_mat())}};
  j["controller"] = {{"N", c.N},
                     {"Q", mat_to_json(c.weights.Q)},
                     {"R", mat_to_json(c.weights.R)}};
  j["experiment"] = {{"x0", vec_to_json(c.x0)},
                     {"variant", c.experiment.variant},
                     {"horizon", c.experiment.horizon},
                     {"seeds", c.experiment.seeds}};
  json scripts = json::object();
  if (c.experiment.d_script) scripts["D"] = *c.experiment.d_script;
  if (c.experiment.h_script) scripts["H"] = *c.experiment.h_script;
  if (c.experiment.s_script) scripts["S"] = *c.experiment.s_script;
  if (!scripts.empty()) j["experiment"]["scripts"] = std::move(scripts);
  return j.dump(2) + "\n";
}

}  // namespace netmpc
