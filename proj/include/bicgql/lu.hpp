// LU factorization with partial pivoting; the ground-truth direct solver the
// iterative methods and estimators are measured against.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bicgql/dense_matrix.hpp"
#include "bicgql/errors.hpp"
#include "bicgql/vector_ops.hpp"

namespace bicgql {

class LuFactorization {
 public:
  // Factors PA = LU in place. A pivot whose magnitude falls below
  // 1e-14 * ||A||_inf marks the matrix singular; solve() then throws.
  explicit LuFactorization(const DenseMatrix& a) : lu_(a), perm_(a.dim()) {
    const std::size_t n = lu_.dim();
    pivot_tol_ = 1e-14 * a.inf_norm();
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        const double v = std::abs(lu_(i, k));
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best <= pivot_tol_) {
        singular_ = true;
        return;
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      const double d = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double m = lu_(i, k) / d;
        lu_(i, k) = m;
        if (m == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
      }
    }
  }

  bool singular() const { return singular_; }
  double pivot_tolerance() const { return pivot_tol_; }
  const DenseMatrix& packed() const { return lu_; }
  const std::vector<std::size_t>& permutation() const { return perm_; }

  Vector solve(const Vector& b) const {
    if (singular_) throw SingularMatrix("solve: matrix is singular to working precision");
    const std::size_t n = lu_.dim();
    if (b.size() != n) throw DimensionMismatch("solve: rhs size mismatch");
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
      y[i] = s;
    }
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * x[j];
      x[ii] = s / lu_(ii, ii);
    }
    return x;
  }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
  bool singular_ = false;
  double pivot_tol_ = 0.0;
};

inline Vector direct_solve(const DenseMatrix& a, const Vector& b) {
  return LuFactorization(a).solve(b);
}

// r^T A^{-1} r, the quadratic form behind the A-norm of the error
// (for r = b - Ax it equals ||x_true - x||_A^2 when A is HPD).
inline double quadratic_form_inverse(const DenseMatrix& a, const Vector& r) {
  return dot(r, direct_solve(a, r));
}

}  // namespace bicgql
