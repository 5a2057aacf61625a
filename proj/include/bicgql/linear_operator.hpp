// Operator concept the iterative solvers are templated on, plus a counting
// adapter used to audit how many times an algorithm touches the matrix.
#pragma once

#include <concepts>
#include <cstddef>

#include "bicgql/vector_ops.hpp"

namespace bicgql {

template <class Op>
concept LinearOperator = requires(const Op& op, const Vector& x) {
  { op.dim() } -> std::convertible_to<std::size_t>;
  { op.apply(x) } -> std::convertible_to<Vector>;
  { op.apply_transpose(x) } -> std::convertible_to<Vector>;
};

// Wraps an operator and counts applications. Counters are mutable so the
// wrapper still models a const operator; not thread-safe.
template <LinearOperator Op>
class CountingOperator {
 public:
  explicit CountingOperator(const Op& inner) : inner_(&inner) {}

  std::size_t dim() const { return inner_->dim(); }

  Vector apply(const Vector& x) const {
    ++applies_;
    return inner_->apply(x);
  }

  Vector apply_transpose(const Vector& x) const {
    ++transpose_applies_;
    return inner_->apply_transpose(x);
  }

  std::size_t applies() const { return applies_; }
  std::size_t transpose_applies() const { return transpose_applies_; }
  std::size_t total_applies() const { return applies_ + transpose_applies_; }

  void reset() const {
    applies_ = 0;
    transpose_applies_ = 0;
  }

 private:
  const Op* inner_;
  mutable std::size_t applies_ = 0;
  mutable std::size_t transpose_applies_ = 0;
};

}  // namespace bicgql
