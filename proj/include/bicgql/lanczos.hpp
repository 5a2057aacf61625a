// Tridiagonal (Jacobi) matrices and the Lanczos processes that generate
// them. The solvers never run Lanczos explicitly -- they reconstruct the
// Jacobi matrix from their own coefficients -- but the explicit processes
// are kept as an independent cross-check and for spectral experiments.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bicgql/dense_matrix.hpp"
#include "bicgql/errors.hpp"
#include "bicgql/linear_operator.hpp"
#include "bicgql/lu.hpp"
#include "bicgql/trace.hpp"
#include "bicgql/vector_ops.hpp"

namespace bicgql {

// Tridiagonal matrix with independent sub/super diagonals so both the
// symmetric (CG) and two-sided (BiCG) cases fit. sub[i] = T(i+1, i),
// super[i] = T(i, i+1).
struct JacobiMatrix {
  std::vector<double> diag;
  std::vector<double> sub;
  std::vector<double> super;

  std::size_t size() const { return diag.size(); }

  DenseMatrix to_dense() const {
    const std::size_t m = size();
    DenseMatrix t(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      t(i, i) = diag[i];
      if (i + 1 < m) {
        t(i + 1, i) = sub[i];
        t(i, i + 1) = super[i];
      }
    }
    return t;
  }

  // Leading principal submatrix of order m.
  JacobiMatrix leading(std::size_t m) const {
    if (m > size()) throw InsufficientHistory("JacobiMatrix::leading: order too large");
    JacobiMatrix out;
    out.diag.assign(diag.begin(), diag.begin() + m);
    const std::size_t offs = m ? m - 1 : 0;
    out.sub.assign(sub.begin(), sub.begin() + offs);
    out.super.assign(super.begin(), super.begin() + offs);
    return out;
  }

  // (1,1) entry of T^{-1}, via a dense solve of T y = e_1. Sizes here are
  // iteration counts, so the cubic cost is irrelevant.
  double inverse_11() const {
    if (size() == 0) throw InsufficientHistory("JacobiMatrix::inverse_11: empty matrix");
    const Vector y = direct_solve(to_dense(), canonical_basis_vector(size(), 0));
    return y[0];
  }
};

// Jacobi matrix of order k implied by the first k records of a CG-type
// trace: diagonal 1/gamma_i + beta_i/gamma_{i-1}, off-diagonal
// sqrt(beta_i)/gamma_{i-1} (beta_i produced by record i-1). Requires the
// recorded betas to be nonnegative, which CG guarantees.
inline JacobiMatrix jacobi_from_trace(const SolveTrace& t, std::size_t k) {
  if (k > t.records.size())
    throw InsufficientHistory("jacobi_from_trace: needs " + std::to_string(k) + " records");
  JacobiMatrix j;
  j.diag.resize(k);
  j.sub.resize(k ? k - 1 : 0);
  j.super.resize(k ? k - 1 : 0);
  for (std::size_t i = 0; i < k; ++i) {
    const double gamma = t.records[i].step_coeff;
    if (gamma == 0.0) throw ZeroDenominator("jacobi_from_trace: zero step coefficient");
    double a = 1.0 / gamma;
    if (i > 0) {
      const double beta = t.records[i - 1].beta;
      if (beta < 0.0)
        throw NonPositiveBeta("jacobi_from_trace: negative beta at record " +
                              std::to_string(i - 1));
      const double prev_gamma = t.records[i - 1].step_coeff;
      a += beta / prev_gamma;
      const double eta = std::sqrt(beta) / prev_gamma;
      j.sub[i - 1] = eta;
      j.super[i - 1] = eta;
    }
    j.diag[i] = a;
  }
  return j;
}

struct LanczosBasis {
  JacobiMatrix t;
  std::vector<Vector> v;  // right basis vectors
  std::vector<Vector> w;  // left basis vectors (two-sided process only)
  bool breakdown = false; // stopped early because a coupling vanished
};

// Symmetric Lanczos without reorthogonalization (deliberately, to mirror
// what CG computes in finite precision). Runs at most m steps from v1.
template <LinearOperator Op>
LanczosBasis sym_lanczos(const Op& a, const Vector& v1, std::size_t m, double tol = 1e-13) {
  if (v1.size() != a.dim()) throw DimensionMismatch("sym_lanczos: v1 has wrong size");
  const double n1 = norm(v1);
  if (n1 == 0.0) throw ZeroDirection("sym_lanczos: starting vector is zero");

  LanczosBasis out;
  out.v.push_back(scaled(v1, 1.0 / n1));
  for (std::size_t j = 0; j < m; ++j) {
    Vector h = a.apply(out.v[j]);
    const double scale = norm(h);
    const double alpha = dot(out.v[j], h);
    axpy(-alpha, out.v[j], h);
    if (j > 0) axpy(-out.t.sub[j - 1], out.v[j - 1], h);
    out.t.diag.push_back(alpha);
    const double beta = norm(h);
    if (j + 1 == m) break;
    if (beta <= tol * (scale > 0.0 ? scale : 1.0)) {
      out.breakdown = true;  // invariant subspace found
      break;
    }
    out.t.sub.push_back(beta);
    out.t.super.push_back(beta);
    out.v.push_back(scaled(h, 1.0 / beta));
  }
  return out;
}

// Two-sided (nonsymmetric) Lanczos from the pair (v1, w1). The coupling
// s = (w_hat, v_hat) is split as sub = sqrt(|s|), super = s / sub, keeping
// both diagonals real while preserving sub * super = s. Stops with
// breakdown = true on serious breakdown (s numerically zero while neither
// vector is).
template <LinearOperator Op>
LanczosBasis nonsym_lanczos(const Op& a, const Vector& v1, const Vector& w1, std::size_t m,
                            double tol = 1e-13) {
  if (v1.size() != a.dim() || w1.size() != a.dim())
    throw DimensionMismatch("nonsym_lanczos: starting vectors have wrong size");
  const double s0 = dot(w1, v1);
  if (std::abs(s0) <= tol * norm(v1) * norm(w1))
    throw ZeroDirection("nonsym_lanczos: starting pair is (nearly) biorthogonal");

  LanczosBasis out;
  const double nv = norm(v1);
  out.v.push_back(scaled(v1, 1.0 / nv));
  out.w.push_back(scaled(w1, nv / s0));  // so that (w_1, v_1) = 1
  for (std::size_t j = 0; j < m; ++j) {
    Vector vh = a.apply(out.v[j]);
    Vector wh = a.apply_transpose(out.w[j]);
    const double alpha = dot(out.w[j], vh);
    axpy(-alpha, out.v[j], vh);
    axpy(-alpha, out.w[j], wh);
    if (j > 0) {
      axpy(-out.t.super[j - 1], out.v[j - 1], vh);
      axpy(-out.t.sub[j - 1], out.w[j - 1], wh);
    }
    out.t.diag.push_back(alpha);
    if (j + 1 == m) break;
    const double s = dot(wh, vh);
    const double nvh = norm(vh), nwh = norm(wh);
    if (std::abs(s) <= tol * nvh * nwh || nvh == 0.0 || nwh == 0.0) {
      out.breakdown = true;
      break;
    }
    const double sub = std::sqrt(std::abs(s));
    const double super = s / sub;
    out.t.sub.push_back(sub);
    out.t.super.push_back(super);
    out.v.push_back(scaled(vh, 1.0 / sub));
    out.w.push_back(scaled(wh, 1.0 / super));
  }
  return out;
}

}  // namespace bicgql
