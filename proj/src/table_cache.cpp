#include "netmpc/table_cache.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace netmpc {

namespace {

constexpr char kMagic[4] = {'N', 'M', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

// --- primitive little-endian IO -------------------------------------------

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
void put_i32(std::string& out, std::int32_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
}
void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}
void put_mat(std::string& out, const Mat& m) {
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}
void put_vec(std::string& out, const Vec& v) { put_mat(out, Mat(v)); }

struct Reader {
  const std::string& data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw std::runtime_error("truncated cache file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos++]))
           << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos++]))
           << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  Mat mat() {
    const std::uint32_t rows = u32(), cols = u32();
    Mat m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = f64();
    return m;
  }
  Vec vec() {
    Mat m = mat();
    if (m.cols() != 1) throw std::runtime_error("expected a column vector");
    return Vec(m.col(0));
  }
};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string params_blob(const SynthesisParams& sp) {
  std::string out;
  put_mat(out, sp.plant.A);
  put_mat(out, sp.plant.B);
  put_mat(out, sp.plant.Mx);
  put_vec(out, sp.plant.nx);
  put_mat(out, sp.plant.Mu);
  put_vec(out, sp.plant.nu);
  for (int v : {sp.bounds.d_lo, sp.bounds.d_hi, sp.bounds.h_lo,
                sp.bounds.h_hi, sp.bounds.s_lo, sp.bounds.s_hi, sp.N,
                sp.chain.lo(), sp.chain.hi()})
    put_i32(out, v);
  put_mat(out, sp.weights.Q);
  put_mat(out, sp.weights.R);
  put_vec(out, sp.chain.mu_vec());
  put_mat(out, sp.chain.phi_mat());
  return out;
}

SynthesisParams read_params(Reader& in) {
  PlantModel plant;
  plant.A = in.mat();
  plant.B = in.mat();
  plant.Mx = in.mat();
  plant.nx = in.vec();
  plant.Mu = in.mat();
  plant.nu = in.vec();
  AgeBounds b;
  b.d_lo = in.i32();
  b.d_hi = in.i32();
  b.h_lo = in.i32();
  b.h_hi = in.i32();
  b.s_lo = in.i32();
  b.s_hi = in.i32();
  const int N = in.i32();
  const int c_lo = in.i32();
  const int c_hi = in.i32();
  CostWeights w;
  w.Q = in.mat();
  w.R = in.mat();
  const Vec mu = in.vec();
  const Mat phi = in.mat();
  return SynthesisParams::make(plant, b, w, N,
                               MarkovChain(c_lo, c_hi, mu, phi));
}

}  // namespace

std::uint64_t params_hash(const SynthesisParams& sp) {
  return fnv1a(params_blob(sp));
}

void save_tables(const SynthesisTables& tables, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, params_hash(tables.params));
  out += params_blob(tables.params);

  put_mat(out, tables.aux.lqr.P);
  put_mat(out, tables.aux.lqr.L);
  put_mat(out, tables.aux.terminal.set.A);
  put_vec(out, tables.aux.terminal.set.b);
  put_i32(out, tables.aux.terminal.t_star);

  put_i32(out, tables.h_tilde_lo);
  put_u32(out, static_cast<std::uint32_t>(tables.dtilde_family.size()));
  for (AgeMask m : tables.dtilde_family) put_u32(out, m);

  put_u32(out, static_cast<std::uint32_t>(tables.entries.size()));
  for (const auto& [key, entry] : tables.entries) {
    put_i32(out, key.first);
    put_u32(out, key.second);
    put_mat(out, entry.constraints.system.A);
    put_vec(out, entry.constraints.system.b);
    put_i32(out, entry.constraints.n_hat);
    put_i32(out, entry.cost.r);
    for (const Mat& m : entry.cost.R) put_mat(out, m);
    for (const Mat& m : entry.cost.H) put_mat(out, m);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !f.write(out.data(), static_cast<std::streamsize>(out.size())))
    throw std::runtime_error("cannot write cache file: " + path);
}

SynthesisTables load_tables(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open cache file: " + path);
  std::string data((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  Reader in{data};
  in.need(4);
  if (std::memcmp(data.data(), kMagic, 4) != 0)
    throw std::runtime_error("not a table cache file: " + path);
  in.pos = 4;
  if (in.u32() != kVersion)
    throw std::runtime_error("unsupported cache version in " + path);
  const std::uint64_t hash = in.u64();

  SynthesisTables t;
  t.params = read_params(in);
  if (params_hash(t.params) != hash)
    throw std::runtime_error("cache hash does not match its parameters");

  t.aux.lqr.P = in.mat();
  t.aux.lqr.L = in.mat();
  t.aux.terminal.set.A = in.mat();
  t.aux.terminal.set.b = in.vec();
  t.aux.terminal.t_star = in.i32();

  t.h_tilde_lo = in.i32();
  const std::uint32_t fam = in.u32();
  for (std::uint32_t i = 0; i < fam; ++i)
    t.dtilde_family.push_back(in.u32());

  const std::uint32_t nkeys = in.u32();
  for (std::uint32_t i = 0; i < nkeys; ++i) {
    const int h_tilde = in.i32();
    const AgeMask dtilde = in.u32();
    KeyEntry entry;
    entry.scenarios = enumerate_scenarios(t.params.chain, h_tilde, dtilde);
    entry.constraints.system.A = in.mat();
    entry.constraints.system.b = in.vec();
    entry.constraints.n_hat = in.i32();
    entry.cost.r = in.i32();
    const int cube = entry.cost.r * entry.cost.r * entry.cost.r;
    entry.cost.R.resize(cube);
    for (Mat& m : entry.cost.R) m = in.mat();
    entry.cost.H.resize(cube);
    for (Mat& m : entry.cost.H) m = in.mat();
    t.entries.emplace(std::make_pair(h_tilde, dtilde), std::move(entry));
  }
  return t;
}

std::optional<SynthesisTables> try_load_tables(const std::string& path,
                                               const SynthesisParams& sp) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) return std::nullopt;
  probe.close();
  try {
    SynthesisTables t = load_tables(path);
    if (params_hash(t.params) != params_hash(sp)) return std::nullopt;
    return t;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace netmpc
