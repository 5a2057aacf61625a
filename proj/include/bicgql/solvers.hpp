// Krylov solvers (CG, BiCG, BiCGSTAB) instrumented to record, per iteration,
// the handful of scalars the error estimators need: the step coefficient,
// the squared residual norm, the direction Rayleigh quotient mu(p) =
// (p, A p)/(p, p), and the shadow inner product. Iterate snapshots can be
// recorded on demand so true errors can be reconstructed afterwards.
//
// Record k always describes the step taking iterate x_k to x_{k+1}:
// res_norm_sq is ||r_k||^2 on entry, x_snapshot is x_k, and beta is the
// direction-update coefficient computed after the step (0 when the solver
// stopped before producing one).
#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <utility>

#include "bicgql/errors.hpp"
#include "bicgql/linear_operator.hpp"
#include "bicgql/stopping.hpp"
#include "bicgql/trace.hpp"
#include "bicgql/vector_ops.hpp"

namespace bicgql {

struct SolverOptions {
  std::size_t max_iterations = 0;  // 0 means 10 * dim
  StoppingCriterion criterion;
  bool record_snapshots = false;
  Vector x0;              // empty means zero
  Vector shadow;          // BiCG/BiCGSTAB shadow vector; empty means r_0
  double breakdown_tol = 1e-14;
};

struct SolveResult {
  Vector x;
  SolveTrace trace;
};

namespace detail {

inline std::size_t effective_max_iterations(const SolverOptions& opts, std::size_t dim) {
  return opts.max_iterations ? opts.max_iterations : 10 * dim;
}

inline Vector initial_guess(const SolverOptions& opts, std::size_t dim) {
  if (opts.x0.empty()) return Vector(dim, 0.0);
  if (opts.x0.size() != dim) throw DimensionMismatch("solver: x0 has wrong size");
  return opts.x0;
}

// Residual stopping uses ||b|| as the normalizer; a zero right-hand side
// degrades to an absolute test so the quotient stays defined.
inline double residual_normalizer(const Vector& b) {
  const double n = norm(b);
  return n > 0.0 ? n : 1.0;
}

// Evaluate the stopping criterion against the freshest information in the
// trace: the final residual for the residual test, the last full record for
// the delayed estimates.
inline bool stop_now(const StoppingCriterion& c, const SolveTrace& t, double b_norm) {
  if (c.kind == CriterionKind::ResidualRelative)
    return criterion_satisfied(c, t, b_norm, t.records.size());
  if (t.records.empty()) return false;
  return criterion_satisfied(c, t, b_norm, t.records.size() - 1);
}

// Cheap randomized symmetry probe: draws two fixed-seed Gaussian vectors and
// compares (u, A v) with (v, A u). Catches the common mistake of handing a
// nonsymmetric operator to CG without requiring a full matrix scan.
template <LinearOperator Op>
void require_symmetric_probe(const Op& a) {
  const std::size_t n = a.dim();
  if (n == 0) throw DimensionMismatch("cg_solve: zero-dimensional operator");
  std::mt19937_64 rng(0xc001d00dULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = gauss(rng);
  for (std::size_t i = 0; i < n; ++i) v[i] = gauss(rng);
  const Vector au = a.apply(u);
  const Vector av = a.apply(v);
  const double s1 = dot(u, av);
  const double s2 = dot(v, au);
  const double scale = norm(u) * norm(av) + norm(v) * norm(au);
  if (std::abs(s1 - s2) > 1e-12 * (scale > 0.0 ? scale : 1.0))
    throw Error("cg_solve: operator failed the symmetry probe; use bicg or bicgstab");
}

}  // namespace detail

// Conjugate gradients for symmetric positive definite systems. The operator
// must pass a randomized symmetry probe; positive definiteness is enforced
// on the fly through the breakdown guard on (p, A p).
template <LinearOperator Op>
SolveResult cg_solve(const Op& a, const Vector& b, const SolverOptions& opts = {}) {
  const std::size_t n = a.dim();
  if (b.size() != n) throw DimensionMismatch("cg_solve: rhs has wrong size");
  detail::require_symmetric_probe(a);

  SolveResult out;
  out.x = detail::initial_guess(opts, n);
  SolveTrace& t = out.trace;
  t.method = Method::CG;

  Vector r = subtract(b, a.apply(out.x));
  double rsq = norm_sq(r);
  t.r0_norm_sq = rsq;
  t.final_res_norm_sq = rsq;
  const double b_norm = detail::residual_normalizer(b);
  t.termination = Termination::MaxIter;
  if (detail::stop_now(opts.criterion, t, b_norm) || rsq == 0.0) {
    t.termination = Termination::Converged;
    return out;
  }

  Vector p = r;
  const std::size_t max_it = detail::effective_max_iterations(opts, n);
  for (std::size_t k = 0; k < max_it; ++k) {
    const Vector ap = a.apply(p);
    const double pap = dot(p, ap);
    const double psq = norm_sq(p);
    if (pap <= opts.breakdown_tol * norm(p) * norm(ap)) {
      t.termination = Termination::Breakdown;
      return out;
    }
    const double gamma = rsq / pap;

    IterationRecord rec;
    rec.k = k;
    rec.step_coeff = gamma;
    rec.res_norm_sq = rsq;
    rec.shadow_res_dot = rsq;
    rec.mu_p = pap / psq;
    if (opts.record_snapshots) rec.x_snapshot = out.x;

    axpy(gamma, p, out.x);
    axpy(-gamma, ap, r);
    const double rsq_next = norm_sq(r);
    const double beta = rsq_next / rsq;
    rec.beta = beta;
    t.records.push_back(std::move(rec));
    t.final_res_norm_sq = rsq_next;
    rsq = rsq_next;

    if (detail::stop_now(opts.criterion, t, b_norm) || rsq == 0.0) {
      t.termination = Termination::Converged;
      return out;
    }
    update_direction(p, r, beta);
  }
  return out;
}

// Biconjugate gradients with a fixed shadow vector (defaults to r_0). On a
// symmetric positive definite system with the default shadow this reproduces
// CG coefficient-for-coefficient; on general systems the recorded scalars
// feed the same estimators as heuristics.
template <LinearOperator Op>
SolveResult bicg_solve(const Op& a, const Vector& b, const SolverOptions& opts = {}) {
  const std::size_t n = a.dim();
  if (b.size() != n) throw DimensionMismatch("bicg_solve: rhs has wrong size");

  SolveResult out;
  out.x = detail::initial_guess(opts, n);
  SolveTrace& t = out.trace;
  t.method = Method::BiCG;

  Vector r = subtract(b, a.apply(out.x));
  double rsq = norm_sq(r);
  t.r0_norm_sq = rsq;
  t.final_res_norm_sq = rsq;
  const double b_norm = detail::residual_normalizer(b);
  t.termination = Termination::MaxIter;
  if (detail::stop_now(opts.criterion, t, b_norm) || rsq == 0.0) {
    t.termination = Termination::Converged;
    return out;
  }

  Vector rt = opts.shadow.empty() ? r : opts.shadow;
  if (rt.size() != n) throw DimensionMismatch("bicg_solve: shadow has wrong size");
  Vector p = r;
  Vector pt = rt;
  double rho = dot(rt, r);

  const std::size_t max_it = detail::effective_max_iterations(opts, n);
  for (std::size_t k = 0; k < max_it; ++k) {
    if (std::abs(rho) <= opts.breakdown_tol * norm(rt) * norm(r)) {
      t.termination = Termination::Breakdown;
      return out;
    }
    const Vector ap = a.apply(p);
    const double ptap = dot(pt, ap);
    if (std::abs(ptap) <= opts.breakdown_tol * norm(pt) * norm(ap)) {
      t.termination = Termination::Breakdown;
      return out;
    }
    const double alpha = rho / ptap;

    IterationRecord rec;
    rec.k = k;
    rec.step_coeff = alpha;
    rec.res_norm_sq = rsq;
    rec.shadow_res_dot = rho;
    rec.mu_p = dot(p, ap) / norm_sq(p);
    if (opts.record_snapshots) rec.x_snapshot = out.x;

    axpy(alpha, p, out.x);
    axpy(-alpha, ap, r);
    const Vector atpt = a.apply_transpose(pt);
    axpy(-alpha, atpt, rt);
    const double rho_next = dot(rt, r);
    const double beta = rho_next / rho;
    rec.beta = beta;
    t.records.push_back(std::move(rec));
    const double rsq_next = norm_sq(r);
    t.final_res_norm_sq = rsq_next;
    rsq = rsq_next;
    rho = rho_next;

    if (detail::stop_now(opts.criterion, t, b_norm) || rsq == 0.0) {
      t.termination = Termination::Converged;
      return out;
    }
    update_direction(p, r, beta);
    update_direction(pt, rt, beta);
  }
  return out;
}

// BiCGSTAB (stabilized BiCG). Each iteration applies A twice; the recorded
// step scalars refer to the BiCG-like half step (alpha, mu(p)), and beta
// stores the direction coefficient computed at the start of the *next*
// iteration, matching the record layout of the other solvers.
template <LinearOperator Op>
SolveResult bicgstab_solve(const Op& a, const Vector& b, const SolverOptions& opts = {}) {
  const std::size_t n = a.dim();
  if (b.size() != n) throw DimensionMismatch("bicgstab_solve: rhs has wrong size");

  SolveResult out;
  out.x = detail::initial_guess(opts, n);
  SolveTrace& t = out.trace;
  t.method = Method::BiCGStab;

  Vector r = subtract(b, a.apply(out.x));
  double rsq = norm_sq(r);
  t.r0_norm_sq = rsq;
  t.final_res_norm_sq = rsq;
  const double b_norm = detail::residual_normalizer(b);
  t.termination = Termination::MaxIter;
  if (detail::stop_now(opts.criterion, t, b_norm) || rsq == 0.0) {
    t.termination = Termination::Converged;
    return out;
  }

  Vector rt = opts.shadow.empty() ? r : opts.shadow;
  if (rt.size() != n) throw DimensionMismatch("bicgstab_solve: shadow has wrong size");
  Vector p = r;
  Vector v(n, 0.0);
  double rho = dot(rt, r);
  double alpha = 1.0, omega = 1.0;

  const std::size_t max_it = detail::effective_max_iterations(opts, n);
  for (std::size_t k = 0; k < max_it; ++k) {
    if (std::abs(rho) <= opts.breakdown_tol * norm(rt) * norm(r)) {
      t.termination = Termination::Breakdown;
      return out;
    }
    if (k > 0) {
      const double beta = (rho / t.records.back().shadow_res_dot) * (alpha / omega);
      t.records.back().beta = beta;
      // p = r + beta * (p - omega * v)
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    v = a.apply(p);
    const double rtv = dot(rt, v);
    if (std::abs(rtv) <= opts.breakdown_tol * norm(rt) * norm(v)) {
      t.termination = Termination::Breakdown;
      return out;
    }
    alpha = rho / rtv;

    IterationRecord rec;
    rec.k = k;
    rec.step_coeff = alpha;
    rec.res_norm_sq = rsq;
    rec.shadow_res_dot = rho;
    rec.mu_p = dot(p, v) / norm_sq(p);
    if (opts.record_snapshots) rec.x_snapshot = out.x;
    t.records.push_back(std::move(rec));

    Vector s = r;
    axpy(-alpha, v, s);
    const double ssq = norm_sq(s);
    // Half-step shortcut: if the intermediate residual already satisfies a
    // residual-type criterion (or vanished), omit the stabilizing step.
    const bool s_small = (opts.criterion.kind == CriterionKind::ResidualRelative &&
                          std::sqrt(ssq) / b_norm <= opts.criterion.threshold) ||
                         ssq == 0.0;
    if (s_small) {
      axpy(alpha, p, out.x);
      t.final_res_norm_sq = ssq;
      t.termination = Termination::Converged;
      return out;
    }
    const Vector ts = a.apply(s);
    const double tt = norm_sq(ts);
    if (tt <= 0.0) {
      t.termination = Termination::Breakdown;
      return out;
    }
    omega = dot(ts, s) / tt;
    if (std::abs(omega) <= opts.breakdown_tol) {
      t.termination = Termination::Breakdown;
      return out;
    }
    axpy(alpha, p, out.x);
    axpy(omega, s, out.x);
    r = s;
    axpy(-omega, ts, r);
    rsq = norm_sq(r);
    t.final_res_norm_sq = rsq;

    if (detail::stop_now(opts.criterion, t, b_norm) || rsq == 0.0) {
      t.termination = Termination::Converged;
      return out;
    }
    rho = dot(rt, r);
  }
  return out;
}

// Dispatch on the method enum; used by the command-line driver.
template <LinearOperator Op>
SolveResult solve(Method m, const Op& a, const Vector& b, const SolverOptions& opts = {}) {
  switch (m) {
    case Method::CG: return cg_solve(a, b, opts);
    case Method::BiCG: return bicg_solve(a, b, opts);
    case Method::BiCGStab: return bicgstab_solve(a, b, opts);
  }
  throw Error("solve: unknown method");
}

}  // namespace bicgql
