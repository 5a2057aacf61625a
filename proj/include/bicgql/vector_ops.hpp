// Dense vector type and the handful of BLAS-1 style kernels used everywhere.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bicgql/errors.hpp"

namespace bicgql {

using Vector = std::vector<double>;

inline void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(what) + ": vector sizes " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()) + " differ");
  }
}

inline double dot(const Vector& a, const Vector& b) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vector& a) { return dot(a, a); }

inline double norm(const Vector& a) { return std::sqrt(norm_sq(a)); }

// y += alpha * x
inline void axpy(double alpha, const Vector& x, Vector& y) {
  require_same_size(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(Vector& x, double alpha) {
  for (double& v : x) v *= alpha;
}

inline Vector scaled(const Vector& x, double alpha) {
  Vector y = x;
  scale(y, alpha);
  return y;
}

inline Vector subtract(const Vector& a, const Vector& b) {
  require_same_size(a, b, "subtract");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

inline Vector add(const Vector& a, const Vector& b) {
  require_same_size(a, b, "add");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

// x = r + beta * x, the direction update shared by the CG family.
inline void update_direction(Vector& p, const Vector& r, double beta) {
  require_same_size(p, r, "update_direction");
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
}

inline bool all_finite(const Vector& a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline Vector canonical_basis_vector(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionMismatch("canonical_basis_vector: index out of range");
  Vector e(dim, 0.0);
  e[index] = 1.0;
  return e;
}

}  // namespace bicgql
