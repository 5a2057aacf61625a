// Dense symmetric eigensolver (cyclic Jacobi rotations) plus the two
// spectral quantities the rest of the library needs: extreme eigenvalues of
// a symmetric matrix and the 2-norm condition number of a general square
// matrix. Sizes here are benchmark-scale (a few hundred), where Jacobi's
// robustness beats its cubic-with-a-big-constant cost.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bicgql/dense_matrix.hpp"
#include "bicgql/errors.hpp"
#include "bicgql/estimators.hpp"

namespace bicgql {

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column j pairs with values[j]
};

namespace detail {

// One cyclic Jacobi pass; returns the rotated matrix's off-diagonal mass.
inline double jacobi_sweep(DenseMatrix& s, DenseMatrix* v) {
  const std::size_t n = s.rows();
  for (std::size_t p = 0; p + 1 < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const double apq = s(p, q);
      if (apq == 0.0) continue;
      const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
      const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                       (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double sn = t * c;
      for (std::size_t i = 0; i < n; ++i) {
        const double sip = s(i, p), siq = s(i, q);
        s(i, p) = c * sip - sn * siq;
        s(i, q) = sn * sip + c * siq;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double spi = s(p, i), sqi = s(q, i);
        s(p, i) = c * spi - sn * sqi;
        s(q, i) = sn * spi + c * sqi;
      }
      if (v) {
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = (*v)(i, p), viq = (*v)(i, q);
          (*v)(i, p) = c * vip - sn * viq;
          (*v)(i, q) = sn * vip + c * viq;
        }
      }
    }
  }
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) off += s(i, j) * s(i, j);
  return std::sqrt(off);
}

inline EigenDecomposition jacobi_eigen_impl(const DenseMatrix& a, bool want_vectors) {
  if (!a.square()) throw DimensionMismatch("jacobi_eigen: matrix must be square");
  if (!a.is_symmetric(1e-8))
    throw Error("jacobi_eigen: matrix is not symmetric (within 1e-8 relative)");
  DenseMatrix s = symmetric_part(a);  // exact bitwise symmetry for the sweeps
  const std::size_t n = s.rows();
  DenseMatrix v = want_vectors ? DenseMatrix::identity(n) : DenseMatrix(0, 0);
  const double frob = s.frobenius_norm();
  if (frob > 0.0) {
    bool converged = false;
    for (int sweep = 0; sweep < 100; ++sweep) {
      if (jacobi_sweep(s, want_vectors ? &v : nullptr) <= 1e-13 * frob) {
        converged = true;
        break;
      }
    }
    if (!converged) throw Error("jacobi_eigen: rotations failed to converge");
  }

  EigenDecomposition out;
  out.values.resize(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return s(x, x) < s(y, y); });
  for (std::size_t i = 0; i < n; ++i) out.values[i] = s(order[i], order[i]);
  if (want_vectors) {
    out.vectors = DenseMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

}  // namespace detail

inline std::vector<double> jacobi_eigenvalues(const DenseMatrix& a) {
  return detail::jacobi_eigen_impl(a, false).values;
}

inline EigenDecomposition jacobi_eigen(const DenseMatrix& a) {
  return detail::jacobi_eigen_impl(a, true);
}

// Extreme eigenvalues of a symmetric matrix.
inline SpectrumBounds spectrum_bounds(const DenseMatrix& a) {
  const std::vector<double> ev = jacobi_eigenvalues(a);
  if (ev.empty()) throw DimensionMismatch("spectrum_bounds: empty matrix");
  return {ev.front(), ev.back()};
}

// 2-norm condition number of a square matrix, through the spectrum of A^T A.
inline double cond_2(const DenseMatrix& a) {
  if (!a.square()) throw DimensionMismatch("cond_2: matrix must be square");
  const DenseMatrix ata = matmul(a.transposed(), a);
  const std::vector<double> ev = jacobi_eigenvalues(ata);
  if (ev.front() <= 0.0) throw SingularMatrix("cond_2: matrix is numerically singular");
  return std::sqrt(ev.back() / ev.front());
}

}  // namespace bicgql
