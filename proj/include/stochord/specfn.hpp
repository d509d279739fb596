#pragma once

#include <span>
#include <stdexcept>

namespace stochord::specfn {

/// Declared accuracy of a numeric evaluator.  Both bounds are promises about
/// the worst case over the evaluator's stated domain; consumers (grids,
/// order checks) may fold them into their tolerances.
struct EvalError {
  double absolute_bound = 0.0;
  double relative_bound = 0.0;

  EvalError() = default;
  /// Throws std::invalid_argument unless both bounds are finite and >= 0.
  EvalError(double abs_bound, double rel_bound);
};

/// Thrown when an iterative numeric scheme fails to reach its target
/// accuracy within its documented iteration or size limits.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ln Gamma(x) for x > 0.
///
/// Fixed-coefficient Lanczos approximation (g = 607/128, 15 terms); for
/// x < 0.5 the recurrence ln Gamma(x) = ln Gamma(x+1) - ln x keeps the
/// approximation in its accurate zone.  Relative error stays below 1e-13
/// on [1e-3, 1e6] (absolute near the zeros at x = 1 and x = 2).
/// Throws std::domain_error for x <= 0, NaN, or infinity.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a),
/// a > 0, x >= 0.  Power series for x < a + 1, continued fraction
/// (modified Lentz) for the complement otherwise; absolute error <= 1e-12.
/// Throws std::domain_error on bad arguments, ConvergenceError if either
/// scheme fails to settle.
double reg_lower_incomplete_gamma(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), evaluated
/// directly in the tail so survival probabilities keep relative accuracy.
double reg_upper_incomplete_gamma(double a, double x);

/// ln sum_i exp(values[i]), computed against the running maximum after
/// sorting the inputs in descending order (a fixed order makes the result
/// bit-for-bit independent of input permutation).  -inf entries are allowed
/// and contribute nothing; all -inf yields -inf.  Throws
/// std::invalid_argument on an empty span, std::domain_error on NaN or +inf.
double log_sum_exp(std::span<const double> values);

}  // namespace stochord::specfn
