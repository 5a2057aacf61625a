// Stopping criteria for the iterative solvers: either the conventional
// relative residual, or one of the online error-norm estimates. Estimate
// based criteria only become evaluable once enough history exists to cover
// their delay window, and they test the error of the *delayed* iterate --
// the iterate the estimate actually refers to.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "bicgql/errors.hpp"
#include "bicgql/estimators.hpp"
#include "bicgql/trace.hpp"

namespace bicgql {

enum class CriterionKind { ResidualRelative, ANormEstimate, L2NormEstimate };

inline const char* to_string(CriterionKind k) {
  switch (k) {
    case CriterionKind::ResidualRelative: return "residual";
    case CriterionKind::ANormEstimate: return "anorm";
    case CriterionKind::L2NormEstimate: return "l2";
  }
  return "?";
}

inline CriterionKind criterion_kind_from_string(const std::string& s) {
  if (s == "residual") return CriterionKind::ResidualRelative;
  if (s == "anorm") return CriterionKind::ANormEstimate;
  if (s == "l2") return CriterionKind::L2NormEstimate;
  throw Error("unknown stopping criterion: " + s);
}

inline L2Variant l2_variant_from_string(const std::string& s) {
  if (s == "consistent") return L2Variant::Consistent;
  if (s == "paper") return L2Variant::Literal;
  throw Error("unknown l2 variant: " + s);
}

struct StoppingCriterion {
  CriterionKind kind = CriterionKind::ResidualRelative;
  double threshold = 1e-8;  // relative for residual, absolute norm otherwise
  std::size_t d1 = 4;       // A-norm estimate delay
  std::size_t d2 = 4;       // extra l2 estimate delay
  L2Variant l2_variant = L2Variant::Consistent;
};

// True when the criterion is met given the trace so far. For the residual
// criterion k addresses r_k directly; for estimate criteria, trace record k
// must exist and the estimate refers to iterate k - d1 (- d2). The square
// root of the magnitude of the squared-norm estimate is compared against the
// threshold.
inline bool criterion_satisfied(const StoppingCriterion& c, const SolveTrace& t, double b_norm,
                                std::size_t k) {
  switch (c.kind) {
    case CriterionKind::ResidualRelative:
      return residual_criterion(t, b_norm, k) <= c.threshold;
    case CriterionKind::ANormEstimate: {
      if (k < c.d1 || k >= t.records.size()) return false;
      return std::sqrt(bicgql_anorm(t, k, c.d1)) <= c.threshold;
    }
    case CriterionKind::L2NormEstimate: {
      if (k < c.d1 + c.d2 || k >= t.records.size()) return false;
      return std::sqrt(std::abs(bicgql_l2norm(t, k, c.d1, c.d2, c.l2_variant))) <= c.threshold;
    }
  }
  return false;
}

}  // namespace bicgql
