#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stochord/dist.hpp"

namespace stochord::oracle {

enum class Order { st, hr, rh, lr, lc, disp, star };

std::string_view to_string(Order o);
std::optional<Order> order_from_string(std::string_view name);

/// Result of one definition-level scan.  `witness` is the smallest grid
/// point at which the defining inequality fails by more than `tolerance`
/// (for pairwise checks, the left endpoint of the first violating pair).
/// `marginal` means the check held but some margin came within `tolerance`
/// of equality, so the verdict could flip under a tighter tolerance; a scan
/// of two distributions that agree anywhere (e.g. in a shared tail) is
/// reported marginal.
struct OrderVerdict {
  Order relation;
  bool holds = true;
  bool marginal = false;
  std::optional<double> witness;
  double tolerance = 0.0;
  long points_checked = 0;
};

/// Evaluation grid shared by the order checks.
///
/// Discrete grids are the integers 0..x_hi, with x_hi the smallest point
/// where the two survival functions together drop below `tail_mass`.
/// Continuous grids are explicit increasing abscissae; `geometric` spans the
/// quantile range [q_lo, q_hi] of both inputs with geometric spacing, and
/// `uniform_for_lc` spans a narrower quantile range with uniform spacing
/// (second divided differences amplify evaluator noise by 1/h^2, so the
/// log-concavity scan needs step sizes bounded away from zero).
struct CheckGrid {
  bool discrete = false;
  int x_hi = 0;                // discrete grids
  std::vector<double> points;  // continuous grids

  static CheckGrid for_discrete(const dist::DiscreteDistribution& x,
                                const dist::DiscreteDistribution& y,
                                double tail_mass = 1e-10);
  static CheckGrid geometric(const dist::ContinuousDistribution& x,
                             const dist::ContinuousDistribution& y, int points = 4001,
                             double q_lo = 1e-9, double q_hi = 1.0 - 1e-9);
  static CheckGrid uniform_for_lc(const dist::ContinuousDistribution& x,
                                  const dist::ContinuousDistribution& y,
                                  int points = 1501, double q_lo = 1e-6,
                                  double q_hi = 1.0 - 1e-6);
};

/// Quantile by bisection on cdf (lower half) or survival (upper half, so the
/// far tail keeps relative accuracy), to relative bracket width 1e-12.
/// Throws std::runtime_error when no bracket can be established.
double quantile(const dist::ContinuousDistribution& d, double q);

/// Logit-spaced probabilities in (0,1) for check_disp.
std::vector<double> default_quantile_grid(int points = 1001, double q_lo = 1e-9,
                                          double q_hi = 1.0 - 1e-9);

// ---------------------------------------------------------------------------
// Definition-level checks of x ORDER y.  Each scans the grid and never
// consults closed-form criteria.

/// Usual stochastic order: P(X > t) <= P(Y > t) everywhere.
OrderVerdict check_st(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);
OrderVerdict check_st(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);

/// Hazard rate order: hazard_X >= hazard_Y pointwise.  Points where either
/// denominator P(. >= t) (discrete) or survival (continuous) is <= 1e-300
/// are skipped; more than 10% skipped raises std::runtime_error.  Discrete
/// points beyond a truncated table's stored range are skipped without
/// counting (the hazard there is a truncation artifact); the continuous form
/// compares log hazards, since near 0 hazards grow like shape/x and a linear
/// difference would amplify evaluator noise without bound.
OrderVerdict check_hr(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);
OrderVerdict check_hr(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);

/// Reversed hazard order: pmf/cdf (resp. pdf/cdf) of X <= that of Y
/// pointwise, same skip rules as check_hr; the continuous form again
/// compares on log scale.
OrderVerdict check_rh(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);
OrderVerdict check_rh(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);

/// Likelihood ratio order: f_X / f_Y nonincreasing across the grid, on the
/// set where either mass is positive, with a/0 = +inf.  A ratio that has
/// dropped to 0 (f_X = 0 < f_Y) must stay 0; +inf may only appear leading.
OrderVerdict check_lr(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);
OrderVerdict check_lr(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);

/// Relative log-concavity: ln(f_X / f_Y) concave on the support of X.
/// Discrete: exact second differences at interior support points; supports
/// must be nested intervals ({0..m} inside {0..n} or inside Z+), otherwise
/// std::invalid_argument.  Truncated tables with a positive tail bound count
/// as Z+.  Continuous: second divided differences over consecutive grid
/// triples; supports are all (0, inf) by construction.  The default
/// continuous tolerance is looser than the order checks because divided
/// differences magnify evaluator error by 1/h^2.
OrderVerdict check_lc(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol = 1e-9);
OrderVerdict check_lc(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol = 1e-7);

/// Star order: G^-1(F(t)) / t nondecreasing across the grid (G = cdf of Y).
/// Inversion inside uses survival targets in the upper half so tail
/// composition keeps accuracy; points where F's survival drops below 1e-8
/// are skipped, since targets below the series evaluators' truncation floor
/// cannot be inverted.
OrderVerdict check_star(const dist::ContinuousDistribution& x,
                        const dist::ContinuousDistribution& y, const CheckGrid& grid,
                        double tol = 1e-9);

/// Dispersive order: quantile spacings of X no wider than those of Y over
/// consecutive probabilities from quantile_grid (each in (0,1), increasing).
OrderVerdict check_disp(const dist::ContinuousDistribution& x,
                        const dist::ContinuousDistribution& y,
                        std::span<const double> quantile_grid, double tol = 1e-9);

}  // namespace stochord::oracle
