#include "reaxkit/qeq.hpp"

#include <cmath>

#include "reaxkit/bonded.hpp"
#include "reaxkit/error.hpp"

namespace reaxkit {
namespace {

struct Dual {
  double a = 0.0;
  double b = 0.0;
  Dual& operator+=(const Dual& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
};

void check_dim(const SparseHalfMatrix& h, std::size_t len) {
  if (len != h.n) {
    throw InputError("dimension mismatch: matrix is " + std::to_string(h.n) + ", vector is " + std::to_string(len));
  }
}

}  // namespace

SparseHalfMatrix build_qeq_matrix(const HalfNeighborList& nbrs, std::span<const int> types, const ForceField& ff,
                                  const ExecContext& ctx) {
  const std::size_t n = nbrs.num_atoms();
  SparseHalfMatrix h;
  h.n = n;
  h.diag.resize(n);
  h.offsets.assign(n + 1, 0);
  const double cutoff = ff.r_nonb;

  std::vector<std::size_t> counts(n, 0);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      h.diag[i] = ff.types[static_cast<std::size_t>(types[i])].eta;
      std::size_t c = 0;
      for (const auto& nb : nbrs.row(i)) c += nb.r < cutoff ? 1 : 0;
      counts[i] = c;
    }
  });
  for (std::size_t i = 0; i < n; ++i) h.offsets[i + 1] = h.offsets[i] + counts[i];
  h.cols.resize(h.offsets[n]);
  h.values.resize(h.offsets[n]);

  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      std::size_t out = h.offsets[i];
      const auto& ti = ff.types[static_cast<std::size_t>(types[i])];
      for (const auto& nb : nbrs.row(i)) {
        if (nb.r >= cutoff) continue;
        const auto& tj = ff.types[static_cast<std::size_t>(types[nb.j])];
        h.cols[out] = nb.j;
        h.values[out] = shielded_coulomb_kernel(nb.r, std::sqrt(ti.gamma * tj.gamma), ff);
        ++out;
      }
    }
  });
  return h;
}

void spmv_half(const SparseHalfMatrix& h, std::span<const double> x, std::span<double> y, const ExecContext& ctx) {
  check_dim(h, x.size());
  check_dim(h, y.size());
  Privatized<double> partial(ctx.threads(), h.n);
  ctx.for_each(h.n, [&](std::size_t b, std::size_t e, int tid) {
    auto& yt = partial.local(tid);
    for (std::size_t i = b; i < e; ++i) {
      double yi = h.diag[i] * x[i];
      const double xi = x[i];
      for (std::size_t k = h.offsets[i]; k < h.offsets[i + 1]; ++k) {
        const std::size_t j = h.cols[k];
        yi += h.values[k] * x[j];
        yt[j] += h.values[k] * xi;
      }
      yt[i] += yi;
    }
  });
  partial.reduce(*ctx.pool, y);
}

std::vector<double> spmv_half(const SparseHalfMatrix& h, std::span<const double> x, const ExecContext& ctx) {
  std::vector<double> y(h.n, 0.0);
  spmv_half(h, x, y, ctx);
  return y;
}

void spmv_half_dual(const SparseHalfMatrix& h, std::span<const double> x1, std::span<const double> x2,
                    std::span<double> y1, std::span<double> y2, const ExecContext& ctx) {
  check_dim(h, x1.size());
  check_dim(h, x2.size());
  check_dim(h, y1.size());
  check_dim(h, y2.size());
  Privatized<Dual> partial(ctx.threads(), h.n);
  ctx.for_each(h.n, [&](std::size_t b, std::size_t e, int tid) {
    auto& yt = partial.local(tid);
    for (std::size_t i = b; i < e; ++i) {
      Dual yi{h.diag[i] * x1[i], h.diag[i] * x2[i]};
      const double xa = x1[i];
      const double xb = x2[i];
      for (std::size_t k = h.offsets[i]; k < h.offsets[i + 1]; ++k) {
        const std::size_t j = h.cols[k];
        const double v = h.values[k];
        yi.a += v * x1[j];
        yi.b += v * x2[j];
        yt[j].a += v * xa;
        yt[j].b += v * xb;
      }
      yt[i] += yi;
    }
  });
  std::vector<Dual> y(h.n);
  partial.reduce(*ctx.pool, std::span<Dual>(y));
  for (std::size_t i = 0; i < h.n; ++i) {
    y1[i] = y[i].a;
    y2[i] = y[i].b;
  }
}

double parallel_dot(std::span<const double> a, std::span<const double> b, const ExecContext& ctx) {
  const int nt = ctx.threads();
  std::vector<double> partial(static_cast<std::size_t>(nt), 0.0);
  const std::size_t n = a.size();
  const std::size_t block = (n + static_cast<std::size_t>(nt) - 1) / static_cast<std::size_t>(nt);
  ctx.pool->run([&](int tid) {
    const std::size_t first = std::min(n, block * static_cast<std::size_t>(tid));
    const std::size_t last = std::min(n, first + block);
    double s = 0.0;
    for (std::size_t i = first; i < last; ++i) s += a[i] * b[i];
    partial[static_cast<std::size_t>(tid)] = s;
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

void QEqState::push_history() {
  s_history.push_front(s);
  t_history.push_front(t);
  while (s_history.size() > 3) s_history.pop_back();
  while (t_history.size() > 3) t_history.pop_back();
}

void QEqState::clear_history() {
  s_history.clear();
  t_history.clear();
}

QEqGuess extrapolate_guess(const QEqState& state, std::span<const double> chi, std::span<const double> eta,
                           ExtrapolationOrder order) {
  const std::size_t n = chi.size();
  QEqGuess g;
  g.s.resize(n);
  g.t.resize(n);
  const std::size_t depth = std::min(state.s_history.size(), state.t_history.size());
  const bool usable = depth > 0 && state.s_history.front().size() == n;
  if (!usable) {
    for (std::size_t i = 0; i < n; ++i) {
      g.s[i] = -chi[i] / eta[i];
      g.t[i] = -1.0 / eta[i];
    }
    return g;
  }
  const auto& s1 = state.s_history[0];
  const auto& t1 = state.t_history[0];
  if (depth >= 3 && order == ExtrapolationOrder::kQuadratic) {
    const auto& s2 = state.s_history[1];
    const auto& t2 = state.t_history[1];
    const auto& s3 = state.s_history[2];
    const auto& t3 = state.t_history[2];
    for (std::size_t i = 0; i < n; ++i) {
      g.s[i] = 3.0 * s1[i] - 3.0 * s2[i] + s3[i];
      g.t[i] = 3.0 * t1[i] - 3.0 * t2[i] + t3[i];
    }
  } else if (depth >= 2) {
    const auto& s2 = state.s_history[1];
    const auto& t2 = state.t_history[1];
    for (std::size_t i = 0; i < n; ++i) {
      g.s[i] = 2.0 * s1[i] - s2[i];
      g.t[i] = 2.0 * t1[i] - t2[i];
    }
  } else {
    g.s = s1;
    g.t = t1;
  }
  return g;
}

namespace {

/// CG iterate for one system; the matrix-vector product is supplied by the
/// caller so two systems can share a traversal.
struct CgSystem {
  std::vector<double> x, r, z, p, q;
  double rz = 0.0;
  double norm_b = 1.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> precond_history;

  void start(std::span<const double> b, std::span<const double> hx, std::span<const double> diag, double tol,
             const ExecContext& ctx) {
    const std::size_t n = b.size();
    r.resize(n);
    z.resize(n);
    p.resize(n);
    q.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = b[i] - hx[i];
      z[i] = r[i] / diag[i];
      p[i] = z[i];
    }
    norm_b = std::sqrt(parallel_dot(b, b, ctx));
    if (norm_b == 0.0) norm_b = 1.0;
    rz = parallel_dot(r, z, ctx);
    residual = std::sqrt(parallel_dot(r, r, ctx)) / norm_b;
    converged = residual <= tol;
  }

  // Uses q = H p.
  void step(std::span<const double> diag, double tol, const ExecContext& ctx) {
    const std::size_t n = x.size();
    const double pq = parallel_dot(p, q, ctx);
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = r[i] / diag[i];
    }
    const double rz_new = parallel_dot(r, z, ctx);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++iterations;
    residual = std::sqrt(parallel_dot(r, r, ctx)) / norm_b;
    precond_history.push_back(std::sqrt(std::max(rz, 0.0)));
    converged = residual <= tol;
  }
};

}  // namespace

QEqState cg_dual(const SparseHalfMatrix& h, std::span<const double> chi, double tol, int max_iter,
                 const QEqGuess& guess, const ExecContext& ctx) {
  if (!(tol > 0.0)) throw InputError("QEq tolerance must be positive");
  const std::size_t n = h.n;
  check_dim(h, chi.size());
  check_dim(h, guess.s.size());
  check_dim(h, guess.t.size());

  std::vector<double> bs(n), bt(n, -1.0);
  for (std::size_t i = 0; i < n; ++i) bs[i] = -chi[i];

  CgSystem s, t;
  s.x = guess.s;
  t.x = guess.t;
  std::vector<double> hs(n), ht(n);
  spmv_half_dual(h, s.x, t.x, hs, ht, ctx);
  s.start(bs, hs, h.diag, tol, ctx);
  t.start(bt, ht, h.diag, tol, ctx);

  int iter = 0;
  while (!(s.converged && t.converged) && iter < max_iter) {
    spmv_half_dual(h, s.p, t.p, s.q, t.q, ctx);
    if (!s.converged) s.step(h.diag, tol, ctx);
    if (!t.converged) t.step(h.diag, tol, ctx);
    ++iter;
  }

  // Report the true residual rather than the recurrence.
  spmv_half_dual(h, s.x, t.x, hs, ht, ctx);
  double rs = 0.0, rt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rs += (bs[i] - hs[i]) * (bs[i] - hs[i]);
    rt += (bt[i] - ht[i]) * (bt[i] - ht[i]);
  }
  QEqState out;
  out.residual_s = std::sqrt(rs) / s.norm_b;
  out.residual_t = std::sqrt(rt) / t.norm_b;
  out.iterations_s = s.iterations;
  out.iterations_t = t.iterations;
  out.precond_residual_s = std::move(s.precond_history);
  out.precond_residual_t = std::move(t.precond_history);
  if (!(s.converged && t.converged)) {
    throw ConvergenceError("QEq solver did not converge in " + std::to_string(max_iter) +
                               " iterations (residual_s=" + std::to_string(out.residual_s) +
                               ", residual_t=" + std::to_string(out.residual_t) + ")",
                           out.residual_s, out.residual_t);
  }
  out.s = std::move(s.x);
  out.t = std::move(t.x);
  return out;
}

CgResult cg_solve(const SparseHalfMatrix& h, std::span<const double> b, std::span<const double> x0, double tol,
                  int max_iter, const ExecContext& ctx) {
  check_dim(h, b.size());
  check_dim(h, x0.size());
  CgSystem sys;
  sys.x.assign(x0.begin(), x0.end());
  const auto hx = spmv_half(h, sys.x, ctx);
  sys.start(b, hx, h.diag, tol, ctx);
  while (!sys.converged && sys.iterations < max_iter) {
    spmv_half(h, sys.p, sys.q, ctx);
    sys.step(h.diag, tol, ctx);
  }
  if (!sys.converged) throw ConvergenceError("CG did not converge", sys.residual, 0.0);
  return {std::move(sys.x), sys.iterations, sys.residual};
}

std::vector<double> charges_from_st(std::span<const double> s, std::span<const double> t, double net_charge) {
  if (s.size() != t.size()) throw InputError("s and t differ in length");
  double sum_s = 0.0;
  double sum_t = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum_s += s[i];
    sum_t += t[i];
  }
  if (sum_t == 0.0) throw Error("internal error: Σt vanished in charge equilibration");
  const double mu = (sum_s - net_charge) / sum_t;
  std::vector<double> q(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) q[i] = s[i] - mu * t[i];
  return q;
}

}  // namespace reaxkit
