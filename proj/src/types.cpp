#include "netmpc/types.hpp"

#include <algorithm>

namespace netmpc {

void PlantModel::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols())
    throw std::invalid_argument("A must be square and non-empty");
  if (B.rows() != A.rows() || B.cols() == 0)
    throw std::invalid_argument("B must have as many rows as A and at least one column");
  if (Mx.cols() != A.rows() || Mx.rows() != nx.size())
    throw std::invalid_argument("state constraint dimensions inconsistent");
  if (Mu.cols() != B.cols() || Mu.rows() != nu.size())
    throw std::invalid_argument("input constraint dimensions inconsistent");
}

void AgeBounds::validate() const {
  if (d_lo < 0 || d_hi < d_lo) throw std::invalid_argument("bad D age bounds");
  if (h_lo < 0 || h_hi < h_lo) throw std::invalid_argument("bad H age bounds");
  if (s_lo < 0 || s_hi < s_lo) throw std::invalid_argument("bad S age bounds");
}

Dims Dims::make(const PlantModel& plant, const AgeBounds& b, int N) {
  plant.validate();
  b.validate();
  if (N < b.d_hi + 1)
    throw std::invalid_argument("horizon must satisfy N >= d_hi + 1");
  Dims d;
  d.n = plant.n();
  d.m = plant.m();
  d.N = N;
  d.d_lo = b.d_lo;
  d.d_hi = b.d_hi;
  d.h_hi = b.h_hi;
  d.m_tilde = (b.d_hi - b.d_lo + 1) * d.m;
  d.m_hat = d.m * (N - b.d_lo);
  d.n_hat = d.n + d.m_tilde * (b.d_hi + b.h_hi);
  d.N_hat = b.d_hi + N - 1 + std::min(b.h_hi, b.s_hi - 1);
  return d;
}

}  // namespace netmpc
