// Seeded random test problems with a prescribed 2-norm condition number.
// HPD matrices are Q diag(lambda) Q^T with Q Haar-orthogonal and lambda
// log-spaced on [1, kappa]; nonsymmetric indefinite ones are U S V^T with
// independent Haar factors, log-spaced singular values on the same range,
// and exactly floor(n/2) of them sign-flipped (which changes the symmetric
// part's inertia but not the condition number). Everything is driven by
// std::mt19937_64 streams derived from a user seed through splitmix64
// mixing, so a (class, dim, kappa, seed) tuple regenerates the same matrix
// bit for bit on a given platform.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "bicgql/dense_matrix.hpp"
#include "bicgql/eigen.hpp"
#include "bicgql/errors.hpp"
#include "bicgql/vector_ops.hpp"

namespace bicgql {

enum class MatrixClass { Hpd, NonsymIndefinite };

inline const char* to_string(MatrixClass c) {
  return c == MatrixClass::Hpd ? "hpd" : "nonsym";
}

inline MatrixClass matrix_class_from_string(const std::string& s) {
  if (s == "hpd") return MatrixClass::Hpd;
  if (s == "nonsym") return MatrixClass::NonsymIndefinite;
  throw Error("unknown matrix class: " + s);
}

struct GenSpec {
  MatrixClass matrix_class = MatrixClass::Hpd;
  std::size_t dim = 100;
  double kappa = 1e3;
  std::uint64_t seed = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Collapses a base seed and up to three stream indices into one well-mixed
// 64-bit seed; used to give every (matrix, right-hand side, retry) its own
// independent deterministic stream.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a = 0, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

namespace detail {

inline DenseMatrix gaussian_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = gauss(rng);
  return g;
}

}  // namespace detail

// Haar-distributed orthogonal matrix: Householder QR of a Gaussian matrix
// with the R diagonal signs absorbed into Q.
inline DenseMatrix haar_orthogonal(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw DimensionMismatch("haar_orthogonal: dimension must be positive");
  DenseMatrix g = detail::gaussian_matrix(n, rng);

  // Householder vectors, stored column by column.
  std::vector<Vector> reflectors;
  reflectors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector v(n - k, 0.0);
    double xnorm_sq = 0.0;
    for (std::size_t i = k; i < n; ++i) {
      v[i - k] = g(i, k);
      xnorm_sq += g(i, k) * g(i, k);
    }
    const double xnorm = std::sqrt(xnorm_sq);
    const double alpha = (v[0] >= 0.0 ? -xnorm : xnorm);
    v[0] -= alpha;
    const double vnorm = norm(v);
    if (vnorm > 0.0) {
      scale(v, 1.0 / vnorm);
      for (std::size_t j = k; j < n; ++j) {  // apply I - 2 v v^T to trailing block
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += v[i - k] * g(i, j);
        for (std::size_t i = k; i < n; ++i) g(i, j) -= 2.0 * s * v[i - k];
      }
    }
    reflectors.push_back(std::move(v));
  }

  // Accumulate Q = H_0 H_1 ... H_{n-1} applied to the identity.
  DenseMatrix q = DenseMatrix::identity(n);
  for (std::size_t kk = n; kk-- > 0;) {
    const Vector& v = reflectors[kk];
    if (norm_sq(v) == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = kk; i < n; ++i) s += v[i - kk] * q(i, j);
      for (std::size_t i = kk; i < n; ++i) q(i, j) -= 2.0 * s * v[i - kk];
    }
  }
  // Make the factorization unique (R diagonal positive) so Q is Haar.
  for (std::size_t j = 0; j < n; ++j) {
    if (g(j, j) < 0.0)
      for (std::size_t i = 0; i < n; ++i) q(i, j) = -q(i, j);
  }
  return q;
}

// lambda_i = kappa^{i/(n-1)}: log-spaced on [1, kappa].
inline std::vector<double> log_spaced_spectrum(std::size_t n, double kappa) {
  if (n == 0) throw DimensionMismatch("log_spaced_spectrum: dimension must be positive");
  if (!(kappa >= 1.0)) throw Error("log_spaced_spectrum: kappa must be >= 1");
  std::vector<double> lambda(n, 1.0);
  if (n == 1) return lambda;
  for (std::size_t i = 0; i < n; ++i)
    lambda[i] = std::pow(kappa, double(i) / double(n - 1));
  return lambda;
}

namespace detail {

inline DenseMatrix sandwich(const DenseMatrix& left, const std::vector<double>& d,
                            const DenseMatrix& right_t) {
  DenseMatrix scaled_left = left;
  for (std::size_t i = 0; i < left.rows(); ++i)
    for (std::size_t j = 0; j < left.cols(); ++j) scaled_left(i, j) *= d[j];
  return matmul(scaled_left, right_t.transposed());
}

inline DenseMatrix gen_hpd(std::size_t n, double kappa, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const DenseMatrix q = haar_orthogonal(n, rng);
  const DenseMatrix a = sandwich(q, log_spaced_spectrum(n, kappa), q);
  return symmetric_part(a);  // exact bitwise symmetry
}

inline DenseMatrix gen_nonsym(std::size_t n, double kappa, std::uint64_t seed) {
  if (n < 2) throw DimensionMismatch("gen_matrix: nonsym class needs dim >= 2");
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    std::mt19937_64 rng(mix_seed(seed, attempt));
    const DenseMatrix u = haar_orthogonal(n, rng);
    const DenseMatrix v = haar_orthogonal(n, rng);
    std::vector<double> sigma = log_spaced_spectrum(n, kappa);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n / 2; ++i) sigma[order[i]] = -sigma[order[i]];
    DenseMatrix a = detail::sandwich(u, sigma, v);

    // Indefiniteness certificate for the symmetric part: mixed diagonal
    // signs suffice. Falls back to the full spectrum on the last attempt.
    const DenseMatrix s = symmetric_part(a);
    double dmin = s(0, 0), dmax = s(0, 0);
    for (std::size_t i = 1; i < n; ++i) {
      dmin = std::min(dmin, s(i, i));
      dmax = std::max(dmax, s(i, i));
    }
    if (dmin < 0.0 && dmax > 0.0) return a;
    if (attempt == 7) {
      const std::vector<double> ev = jacobi_eigenvalues(s);
      if (ev.front() < 0.0 && ev.back() > 0.0) return a;
    }
  }
  throw DegenerateCase("gen_matrix: could not certify an indefinite symmetric part");
}

}  // namespace detail

// Deterministic matrix for the given spec; same bits for the same spec on a
// given platform.
inline DenseMatrix gen_matrix(const GenSpec& spec) {
  if (spec.dim == 0) throw DimensionMismatch("gen_matrix: dimension must be positive");
  if (!(spec.kappa >= 1.0)) throw Error("gen_matrix: kappa must be >= 1");
  const std::uint64_t seed =
      mix_seed(spec.seed, std::uint64_t(spec.matrix_class), spec.dim,
               std::uint64_t(std::llround(std::log2(spec.kappa) * 4096.0)));
  return spec.matrix_class == MatrixClass::Hpd ? detail::gen_hpd(spec.dim, spec.kappa, seed)
                                               : detail::gen_nonsym(spec.dim, spec.kappa, seed);
}

// Indices of `count` distinct canonical basis vectors, drawn by a seeded
// shuffle of 0..dim-1. Used to give every benchmark case its own e_i
// right-hand side.
inline std::vector<std::size_t> rhs_index_suite(std::size_t dim, std::size_t count,
                                                std::uint64_t seed) {
  if (count > dim)
    throw DimensionMismatch("rhs_index_suite: more right-hand sides than dimensions");
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(mix_seed(seed, 0x7a5u));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  return order;
}

// Seeded unit-norm Gaussian vector; the benchmark uses these as fresh shadow
// vectors when a BiCG run breaks down.
inline Vector random_unit_vector(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw DimensionMismatch("random_unit_vector: dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  double nsq = 0.0;
  while (nsq == 0.0) {
    for (std::size_t i = 0; i < dim; ++i) v[i] = gauss(rng);
    nsq = norm_sq(v);
  }
  scale(v, 1.0 / std::sqrt(nsq));
  return v;
}

}  // namespace bicgql
