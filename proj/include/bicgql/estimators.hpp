// Error-norm estimators driven by solver trace scalars.
//
// The trace-based estimators cost O(1) arithmetic per iteration and never
// touch the operator: everything they need (step coefficients, residual
// norms, direction Rayleigh quotients) is already in the SolveTrace. The
// price is a delay: at iteration k they estimate the error of iterate
// k - d1 (A-norm) or k - d1 - d2 (l2 norm), with accuracy improving as the
// delays grow. Quadrature-style Gauss/Radau/Lobatto variants turn the same
// scalars into two-sided bounds when the extreme eigenvalues are known.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bicgql/errors.hpp"
#include "bicgql/linear_operator.hpp"
#include "bicgql/trace.hpp"
#include "bicgql/vector_ops.hpp"

namespace bicgql {

// How the l2-norm telescoping terms phi_j are assembled. Consistent solves
// the two step identities
//     ||e_j||_A^2 - ||e_{j+1}||_A^2 = a_j ||r_j||^2
//     ||e_j||_A^2 + ||e_{j+1}||_A^2 = (||e_j||^2 - ||e_{j+1}||^2) mu(p_j)
// for the l2 decrement, giving phi_j = (2 g_j - a_j ||r_j||^2) / mu(p_j).
// Literal keeps an alternative grouping, phi_j = 2 g_j / (mu(p_j) +
// a_j ||r_j||^2), that circulates in some write-ups of the method; it does
// not satisfy the telescoping identity and is kept only for comparison.
enum class L2Variant { Consistent, Literal };

inline const char* to_string(L2Variant v) {
  return v == L2Variant::Consistent ? "consistent" : "literal";
}

namespace detail {

inline const IterationRecord& record_at(const SolveTrace& t, std::size_t k, const char* what) {
  if (k >= t.records.size())
    throw InsufficientHistory(std::string(what) + ": needs record " + std::to_string(k) +
                              " but trace has " + std::to_string(t.records.size()));
  return t.records[k];
}

}  // namespace detail

// Signed delayed decrement sum: sum_{j=k-d1}^{k} a_j ||r_j||^2. Each term is
// the step decrement of the squared A-norm error, so the sum estimates
// ||e_{k-d1}||_A^2 - ||e_{k+1}||_A^2.
inline double bicgql_anorm_sum(const SolveTrace& t, std::size_t k, std::size_t d1) {
  if (k < d1)
    throw InsufficientHistory("bicgql_anorm: k=" + std::to_string(k) + " < d1=" +
                              std::to_string(d1));
  detail::record_at(t, k, "bicgql_anorm");
  double s = 0.0;
  for (std::size_t j = k - d1; j <= k; ++j)
    s += t.records[j].step_coeff * t.records[j].res_norm_sq;
  return s;
}

// Estimate of ||e_{k-d1}||_A^2 from trace scalars alone. For HPD systems the
// sum is positive and a lower bound; for indefinite ones the magnitude is
// reported and the estimate is heuristic.
inline double bicgql_anorm(const SolveTrace& t, std::size_t k, std::size_t d1) {
  return std::abs(bicgql_anorm_sum(t, k, d1));
}

// Estimate of ||e_{k-d1-d2}||_2^2: a truncated telescoping sum of per-step
// l2 decrements phi_j, each built from the delayed A-norm estimate g_j.
inline double bicgql_l2norm(const SolveTrace& t, std::size_t k, std::size_t d1, std::size_t d2,
                            L2Variant variant = L2Variant::Consistent) {
  if (k < d1 + d2)
    throw InsufficientHistory("bicgql_l2norm: k=" + std::to_string(k) + " < d1+d2=" +
                              std::to_string(d1 + d2));
  detail::record_at(t, k, "bicgql_l2norm");
  double f = 0.0;
  for (std::size_t j = k - d1 - d2; j <= k - d1; ++j) {
    const double g = bicgql_anorm(t, j + d1, d1);
    const IterationRecord& rec = t.records[j];
    const double ar = rec.step_coeff * rec.res_norm_sq;
    if (variant == L2Variant::Consistent) {
      if (std::abs(rec.mu_p) < 1e-300)
        throw ZeroDirection("bicgql_l2norm: mu(p) underflowed at j=" + std::to_string(j));
      f += (2.0 * g - ar) / rec.mu_p;
    } else {
      const double den = rec.mu_p + ar;
      if (std::abs(den) < 1e-300)
        throw ZeroDirection("bicgql_l2norm: literal denominator underflowed at j=" +
                            std::to_string(j));
      f += 2.0 * g / den;
    }
  }
  return f;
}

// ||r_k|| / ||b||: the conventional relative-residual stopping quantity,
// read from the trace (k == records.size() addresses the final residual).
inline double residual_criterion(const SolveTrace& t, double b_norm, std::size_t k) {
  if (!(b_norm > 0.0)) throw ZeroDenominator("residual_criterion: b_norm must be positive");
  return std::sqrt(t.res_norm_sq_at(k)) / b_norm;
}

// (1,1) entry of the inverse of the Jacobi matrix T_k implied by the first k
// trace records, via the closed form ||r_0||^{-2} sum_{j<k} a_j ||r_j||^2.
inline double t_inv_11(const SolveTrace& t, std::size_t k) {
  if (k > t.records.size())
    throw InsufficientHistory("t_inv_11: needs " + std::to_string(k) + " records");
  if (t.r0_norm_sq <= 0.0) throw ZeroDenominator("t_inv_11: empty initial residual");
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    s += t.records[j].step_coeff * t.records[j].res_norm_sq;
  return s / t.r0_norm_sq;
}

struct SpectrumBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

struct CgqlBounds {
  double gauss = 0.0;        // lower bound (plain Gauss rule)
  double radau_lower = 0.0;  // lower bound (Radau rule, node at lambda_max)
  double radau_upper = 0.0;  // upper bound (Radau rule, node at lambda_min)
  double lobatto = 0.0;      // upper bound (Lobatto rule, both nodes fixed)
};

// Gauss / Gauss-Radau / Gauss-Lobatto estimates of ||e_{k-d}||_A^2 for a CG
// trace on an HPD system, maintained through pivot recurrences on the Jacobi
// matrix built from the CG coefficients. lambda_min/lambda_max must bracket
// the spectrum; Radau and Lobatto modify one trailing row of the Jacobi
// matrix to pin quadrature nodes at those values. When the trace has already
// reached exact termination (beta underflow) every rule collapses onto the
// (then exact) Gauss value.
inline CgqlBounds cgql_bounds(const SolveTrace& t, const SpectrumBounds& spectrum, std::size_t k,
                              std::size_t d) {
  if (!(spectrum.lambda_min > 0.0) || !(spectrum.lambda_max >= spectrum.lambda_min))
    throw Error("cgql_bounds: need 0 < lambda_min <= lambda_max");
  if (k < d)
    throw InsufficientHistory("cgql_bounds: k=" + std::to_string(k) + " < d=" + std::to_string(d));
  detail::record_at(t, k, "cgql_bounds");
  const double lm = spectrum.lambda_min, lM = spectrum.lambda_max;

  // First pass: plain pivot recurrence over the Jacobi diagonal a_i and
  // off-diagonal eta_i, producing the Gauss increments.
  std::vector<double> diag(k + 1, 0.0), eta_sq(k + 1, 0.0), inc(k + 1, 0.0);
  double delta = 0.0;  // trailing pivot of T
  double csq = 1.0;    // squared (1, i) cofactor ratio feeding the increments
  double prev_gamma = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const IterationRecord& rec = t.records[i];
    const double gamma = rec.step_coeff;
    if (!(gamma != 0.0)) throw ZeroDenominator("cgql_bounds: zero step coefficient");
    double a = 1.0 / gamma;
    if (i > 0) {
      const double beta_in = t.records[i - 1].beta;
      if (beta_in < 0.0)
        throw NonPositiveBeta("cgql_bounds: negative beta at record " + std::to_string(i - 1));
      a += beta_in / prev_gamma;
      eta_sq[i] = beta_in / (prev_gamma * prev_gamma);
      csq *= eta_sq[i] / (delta * delta);
      delta = a - eta_sq[i] / delta;
    } else {
      delta = a;
    }
    if (!(delta > 0.0))
      throw Error("cgql_bounds: Jacobi matrix not positive definite (non-CG/HPD trace?)");
    diag[i] = a;
    inc[i] = csq / delta;
    prev_gamma = gamma;
  }
  double tail = 0.0;  // sum of the last d+1 Gauss increments
  for (std::size_t i = k - d; i <= k; ++i) tail += inc[i];

  CgqlBounds out;
  out.gauss = t.r0_norm_sq * tail;

  const double beta_ext = t.records[k].beta;
  if (beta_ext < 0.0) throw NonPositiveBeta("cgql_bounds: negative trailing beta");
  if (beta_ext <= 1e-28) {
    // Residual ratio vanished: the measure is fully resolved and the Gauss
    // value is exact, so the prescribed-node corrections are zero. The
    // shifted pivots are not needed (and at exact termination the extreme
    // Jacobi eigenvalues may legitimately touch lambda_min/lambda_max).
    out.radau_lower = out.radau_upper = out.lobatto = out.gauss;
    return out;
  }

  // Second pass: pivots of the shifted matrices T - lm I (must stay > 0) and
  // T - lM I (must stay < 0); the prescribed-node rules are meaningless when
  // either sign condition fails.
  double dm = 0.0, dM = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    if (i > 0) {
      dm = diag[i] - lm - eta_sq[i] / dm;
      dM = diag[i] - lM - eta_sq[i] / dM;
    } else {
      dm = diag[0] - lm;
      dM = diag[0] - lM;
    }
    if (!(dm > 0.0))
      throw SpectrumViolation("cgql_bounds: lambda_min pivot changed sign at step " +
                              std::to_string(i));
    if (!(dM < 0.0))
      throw SpectrumViolation("cgql_bounds: lambda_max pivot changed sign at step " +
                              std::to_string(i));
  }

  // Extend by one modified step using the beta produced by record k.
  const double eta_ext_sq = beta_ext / (prev_gamma * prev_gamma);
  const double csq_ext = csq * eta_ext_sq / (delta * delta);
  const double a_up = lm + eta_ext_sq / dm;       // modified diagonal, node at lambda_min
  const double a_lo = lM + eta_ext_sq / dM;       // modified diagonal, node at lambda_max
  const double piv_up = a_up - eta_ext_sq / delta;
  const double piv_lo = a_lo - eta_ext_sq / delta;
  if (!(piv_up > 0.0) || !(piv_lo > 0.0))
    throw SpectrumViolation("cgql_bounds: modified Radau pivot changed sign");
  out.radau_upper = out.gauss + t.r0_norm_sq * csq_ext / piv_up;
  out.radau_lower = out.gauss + t.r0_norm_sq * csq_ext / piv_lo;

  // Lobatto: choose the trailing diagonal and coupling so both lambda_min
  // and lambda_max become quadrature nodes.
  const double split = dm - dM;  // dm > 0 > dM, so split > 0
  const double eta_lob_sq = (lm - lM) * dm * dM / split;
  const double a_lob = (lm * dm - lM * dM) / split;
  if (!(eta_lob_sq > 0.0)) throw SpectrumViolation("cgql_bounds: Lobatto coupling not positive");
  const double piv_lob = a_lob - eta_lob_sq / delta;
  if (!(piv_lob > 0.0)) throw SpectrumViolation("cgql_bounds: Lobatto pivot changed sign");
  out.lobatto = out.gauss + t.r0_norm_sq * (csq * eta_lob_sq / (delta * delta)) / piv_lob;
  return out;
}

struct GolubMeurantEstimate {
  double anorm_sq_est = 0.0;  // estimate of ||e||_A^2 = r^T A^{-1} r
  double l2_sq_est = 0.0;     // estimate of ||e||_2^2 = r^T A^{-2} r
};

// One-shot moment estimates from a single residual vector. Costs exactly two
// operator applications (A r and A (A r)); all else is dot products:
//   anorm_sq_est = (r, Ar) / ((A^2 r), (Ar))
//   l2_sq_est    = (r, r)^2 / ((Ar), (Ar))
template <LinearOperator Op>
GolubMeurantEstimate golub_meurant(const Op& a, const Vector& r) {
  if (r.size() != a.dim()) throw DimensionMismatch("golub_meurant: size mismatch");
  const double rr = norm_sq(r);
  if (rr == 0.0) throw ZeroDirection("golub_meurant: residual is zero");
  const Vector ar = a.apply(r);
  const Vector a2r = a.apply(ar);
  const double r_ar = dot(r, ar);
  const double a2r_ar = dot(a2r, ar);
  const double ar_ar = dot(ar, ar);
  if (std::abs(a2r_ar) < 1e-300)
    throw ZeroDenominator("golub_meurant: (A^2 r, A r) underflowed");
  if (ar_ar < 1e-300) throw ZeroDenominator("golub_meurant: ||A r||^2 underflowed");
  return {r_ar / a2r_ar, rr * rr / ar_ar};
}

// ---------------------------------------------------------------------------
// Estimate series: one estimator evaluated along a whole trace, keyed by the
// iteration the estimate refers to.

enum class EstimateKind {
  BiCGQL_Anorm,
  BiCGQL_L2,
  CGQL_Gauss,
  CGQL_Radau,
  CGQL_Lobatto,
  GM_Anorm,
  GM_L2,
  Residual,
};

enum class BoundDirection { Lower, Upper, Heuristic };

inline const char* to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::BiCGQL_Anorm: return "BiCGQL_Anorm";
    case EstimateKind::BiCGQL_L2: return "BiCGQL_L2";
    case EstimateKind::CGQL_Gauss: return "CGQL_Gauss";
    case EstimateKind::CGQL_Radau: return "CGQL_Radau";
    case EstimateKind::CGQL_Lobatto: return "CGQL_Lobatto";
    case EstimateKind::GM_Anorm: return "GM_Anorm";
    case EstimateKind::GM_L2: return "GM_L2";
    case EstimateKind::Residual: return "Residual";
  }
  return "?";
}

inline const char* to_string(BoundDirection d) {
  switch (d) {
    case BoundDirection::Lower: return "lower";
    case BoundDirection::Upper: return "upper";
    case BoundDirection::Heuristic: return "heuristic";
  }
  return "?";
}

struct EstimateSeries {
  EstimateKind kind = EstimateKind::Residual;
  BoundDirection bound_direction = BoundDirection::Heuristic;
  std::size_t d1 = 0, d2 = 0;
  // target iteration -> estimate. Squared norms for the A-norm / l2 kinds,
  // the plain relative residual for Residual.
  std::map<std::size_t, double> values;
};

inline EstimateSeries build_anorm_series(const SolveTrace& t, std::size_t d1, bool hpd) {
  EstimateSeries s;
  s.kind = EstimateKind::BiCGQL_Anorm;
  s.bound_direction = hpd ? BoundDirection::Lower : BoundDirection::Heuristic;
  s.d1 = d1;
  for (std::size_t k = d1; k < t.records.size(); ++k)
    s.values[k - d1] = bicgql_anorm(t, k, d1);
  return s;
}

inline EstimateSeries build_l2_series(const SolveTrace& t, std::size_t d1, std::size_t d2,
                                      L2Variant variant, bool hpd) {
  EstimateSeries s;
  s.kind = EstimateKind::BiCGQL_L2;
  s.bound_direction =
      (hpd && variant == L2Variant::Consistent) ? BoundDirection::Lower : BoundDirection::Heuristic;
  s.d1 = d1;
  s.d2 = d2;
  for (std::size_t k = d1 + d2; k < t.records.size(); ++k) {
    try {
      s.values[k - d1 - d2] = bicgql_l2norm(t, k, d1, d2, variant);
    } catch (const ZeroDirection&) {
      // mu underflowed at some step in the window; skip that target.
    }
  }
  return s;
}

inline EstimateSeries build_residual_series(const SolveTrace& t, double b_norm) {
  EstimateSeries s;
  s.kind = EstimateKind::Residual;
  s.bound_direction = BoundDirection::Heuristic;
  for (std::size_t k = 0; k <= t.records.size(); ++k)
    s.values[k] = residual_criterion(t, b_norm, k);
  return s;
}

struct CgqlSeries {
  EstimateSeries gauss, radau_lower, radau_upper, lobatto;
};

// Evaluates the four quadrature rules along the trace; stops quietly at the
// first iteration where the prescribed-node pivots become invalid (the rules
// are meaningless past that point).
inline CgqlSeries build_cgql_series(const SolveTrace& t, const SpectrumBounds& spectrum,
                                    std::size_t d) {
  CgqlSeries s;
  s.gauss.kind = EstimateKind::CGQL_Gauss;
  s.gauss.bound_direction = BoundDirection::Lower;
  s.gauss.d1 = d;
  s.radau_lower.kind = EstimateKind::CGQL_Radau;
  s.radau_lower.bound_direction = BoundDirection::Lower;
  s.radau_lower.d1 = d;
  s.radau_upper.kind = EstimateKind::CGQL_Radau;
  s.radau_upper.bound_direction = BoundDirection::Upper;
  s.radau_upper.d1 = d;
  s.lobatto.kind = EstimateKind::CGQL_Lobatto;
  s.lobatto.bound_direction = BoundDirection::Upper;
  s.lobatto.d1 = d;
  for (std::size_t k = d; k < t.records.size(); ++k) {
    CgqlBounds b;
    try {
      b = cgql_bounds(t, spectrum, k, d);
    } catch (const SpectrumViolation&) {
      break;
    }
    s.gauss.values[k - d] = b.gauss;
    s.radau_lower.values[k - d] = b.radau_lower;
    s.radau_upper.values[k - d] = b.radau_upper;
    s.lobatto.values[k - d] = b.lobatto;
  }
  return s;
}

// Golub-Meurant series along a trace that stored iterate snapshots: the
// residual vector r_k = b - A x_k is rebuilt for every recorded iteration.
template <LinearOperator Op>
std::pair<EstimateSeries, EstimateSeries> build_gm_series(const Op& a, const Vector& b,
                                                          const SolveTrace& t) {
  EstimateSeries sa, sl;
  sa.kind = EstimateKind::GM_Anorm;
  sa.bound_direction = BoundDirection::Heuristic;
  sl.kind = EstimateKind::GM_L2;
  sl.bound_direction = BoundDirection::Heuristic;
  for (const IterationRecord& rec : t.records) {
    if (!rec.x_snapshot)
      throw InsufficientHistory("build_gm_series: trace lacks iterate snapshots");
    Vector r = subtract(b, a.apply(*rec.x_snapshot));
    try {
      const GolubMeurantEstimate e = golub_meurant(a, r);
      sa.values[rec.k] = e.anorm_sq_est;
      sl.values[rec.k] = e.l2_sq_est;
    } catch (const Error&) {
      // zero residual or degenerate moments; leave this iteration out.
    }
  }
  return {std::move(sa), std::move(sl)};
}

inline void write_estimate_series_csv(const std::filesystem::path& path,
                                      const std::vector<EstimateSeries>& series) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "k_target,kind,value,d1,d2,bound_direction\n";
  char buf[40];
  for (const EstimateSeries& s : series) {
    for (const auto& [k, v] : s.values) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << k << "," << to_string(s.kind) << "," << buf << "," << s.d1 << "," << s.d2 << ","
          << to_string(s.bound_direction) << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace bicgql
