#include "netmpc/polytope.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace netmpc {

bool Polyhedron::contains(const Vec& z, double tol) const {
  for (int i = 0; i < rows(); ++i)
    if (A.row(i).dot(z) > b(i) + tol) return false;
  return true;
}

Polyhedron stack(const Polyhedron& p, const Polyhedron& q) {
  if (q.rows() == 0) return p;
  if (p.rows() == 0) return q;
  if (p.dim() != q.dim()) throw std::invalid_argument("stack dimension mismatch");
  Polyhedron r;
  r.A.resize(p.rows() + q.rows(), p.dim());
  r.A << p.A, q.A;
  r.b.resize(p.rows() + q.rows());
  r.b << p.b, q.b;
  return r;
}

Polyhedron drop_duplicate_rows(const Polyhedron& p, double tol) {
  const int n = p.dim();
  std::map<std::vector<long long>, int> seen;  // normal direction -> output row
  std::vector<Vec> rows;
  std::vector<double> bs;
  for (int i = 0; i < p.rows(); ++i) {
    const double norm = p.A.row(i).cwiseAbs().maxCoeff();
    if (norm < 1e-12) {
      if (p.b(i) < -tol) {  // 0 <= negative: keep as infeasibility marker
        rows.push_back(Vec::Zero(n));
        bs.push_back(p.b(i));
      }
      continue;
    }
    const Vec a = p.A.row(i).transpose() / norm;
    const double bi = p.b(i) / norm;
    std::vector<long long> key(n);
    for (int j = 0; j < n; ++j) key[j] = std::llround(a(j) * 1e9);
    auto [it, inserted] = seen.try_emplace(key, static_cast<int>(rows.size()));
    if (inserted) {
      rows.push_back(a);
      bs.push_back(bi);
    } else {
      bs[it->second] = std::min(bs[it->second], bi);
    }
  }
  Polyhedron out;
  out.A.resize(static_cast<int>(rows.size()), n);
  out.b.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.A.row(i) = rows[i].transpose();
    out.b(i) = bs[i];
  }
  return out;
}

namespace {

/// Componentwise bounds of a polyhedron (+-inf when unbounded); used as a
/// cheap sufficient test for redundancy against the context alone.
std::pair<Vec, Vec> bounding_box(const Polyhedron& p) {
  const int n = p.dim();
  Vec lo = Vec::Constant(n, -std::numeric_limits<double>::infinity());
  Vec hi = Vec::Constant(n, std::numeric_limits<double>::infinity());
  if (p.rows() == 0) return {lo, hi};
  for (int j = 0; j < n; ++j) {
    Vec c = Vec::Zero(n);
    c(j) = 1.0;
    auto up = lp_max(c, p.A, p.b);
    if (up.status == LpStatus::Optimal) hi(j) = up.value;
    c(j) = -1.0;
    auto dn = lp_max(c, p.A, p.b);
    if (dn.status == LpStatus::Optimal) lo(j) = -dn.value;
  }
  return {lo, hi};
}

double interval_max(const Eigen::RowVectorXd& a, const Vec& lo, const Vec& hi) {
  double v = 0.0;
  for (int j = 0; j < a.size(); ++j) {
    if (a(j) == 0.0) continue;
    v += a(j) > 0.0 ? a(j) * hi(j) : a(j) * lo(j);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
  }
  return v;
}

}  // namespace

Polyhedron reduce_redundancy(const Polyhedron& p_in, const Polyhedron& context,
                             double tol) {
  Polyhedron p = drop_duplicate_rows(p_in, tol);
  const int n = p.dim();
  const int m = p.rows();
  const bool has_ctx = context.rows() > 0;
  Vec box_lo, box_hi;
  if (has_ctx) std::tie(box_lo, box_hi) = bounding_box(context);

  std::vector<bool> keep(m, true);
  for (int i = 0; i < m; ++i) {
    if (has_ctx) {
      const double iv = interval_max(p.A.row(i), box_lo, box_hi);
      if (iv <= p.b(i) + tol) {
        keep[i] = false;  // implied by the context alone
        continue;
      }
    }
    // Assemble the remaining rows plus the context.
    int cnt = context.rows();
    for (int r = 0; r < m; ++r) cnt += (r != i && keep[r]) ? 1 : 0;
    Mat A_test(cnt, n);
    Vec b_test(cnt);
    int w = 0;
    for (int r = 0; r < m; ++r) {
      if (r == i || !keep[r]) continue;
      A_test.row(w) = p.A.row(r);
      b_test(w++) = p.b(r);
    }
    if (has_ctx) {
      A_test.bottomRows(context.rows()) = context.A;
      b_test.tail(context.rows()) = context.b;
    }
    const auto r = lp_max(p.A.row(i).transpose(), A_test, b_test);
    if (r.status == LpStatus::Optimal && r.value <= p.b(i) + tol) keep[i] = false;
  }

  int cnt = 0;
  for (bool k : keep) cnt += k;
  Polyhedron out;
  out.A.resize(cnt, n);
  out.b.resize(cnt);
  int w = 0;
  for (int i = 0; i < m; ++i) {
    if (!keep[i]) continue;
    out.A.row(w) = p.A.row(i);
    out.b(w++) = p.b(i);
  }
  return out;
}

Polyhedron project_to_first(const Polyhedron& p_in, int keep_dims, int max_rows) {
  if (keep_dims < 0 || keep_dims > p_in.dim())
    throw std::invalid_argument("bad projection dimension");
  Polyhedron p = p_in;
  while (p.dim() > keep_dims) {
    // Pick the eliminable column with the smallest product of positive and
    // negative occurrences (least fill-in first).
    int best_col = -1;
    long best_score = 0;
    for (int j = keep_dims; j < p.dim(); ++j) {
      long pos = 0, neg = 0;
      for (int i = 0; i < p.rows(); ++i) {
        if (p.A(i, j) > 1e-11) ++pos;
        else if (p.A(i, j) < -1e-11) ++neg;
      }
      const long score = pos * neg - (pos + neg);
      if (best_col < 0 || score < best_score) {
        best_col = j;
        best_score = score;
      }
    }
    const int c = best_col;

    std::vector<int> pos, neg, zero;
    for (int i = 0; i < p.rows(); ++i) {
      if (p.A(i, c) > 1e-11) pos.push_back(i);
      else if (p.A(i, c) < -1e-11) neg.push_back(i);
      else zero.push_back(i);
    }
    const long out_rows = static_cast<long>(zero.size()) +
                          static_cast<long>(pos.size()) * static_cast<long>(neg.size());
    if (out_rows > max_rows)
      throw std::runtime_error("projection exceeded the row budget");

    Polyhedron q;
    q.A.resize(out_rows, p.dim() - 1);
    q.b.resize(out_rows);
    auto strip = [&](int row) {
      Eigen::RowVectorXd r(p.dim() - 1);
      r << p.A.row(row).head(c), p.A.row(row).tail(p.dim() - c - 1);
      return r;
    };
    int w = 0;
    for (int i : zero) {
      q.A.row(w) = strip(i);
      q.b(w++) = p.b(i);
    }
    for (int ip : pos)
      for (int in : neg) {
        const double ap = p.A(ip, c), an = -p.A(in, c);
        q.A.row(w) = an * strip(ip) + ap * strip(in);
        q.b(w++) = an * p.b(ip) + ap * p.b(in);
      }
    p = reduce_redundancy(q);
  }
  return p;
}

}  // namespace netmpc
