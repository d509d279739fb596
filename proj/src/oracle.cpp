#include "stochord/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stochord::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDenomFloor = 1e-300;

struct ViolationScan {
  ViolationScan(Order relation_in, double tol_in) : relation(relation_in), tol(tol_in) {}

  Order relation;
  double tol;
  bool failed = false;
  std::optional<double> witness;
  double max_violation = -kInf;
  long checked = 0;

  void observe(double point, double violation) {
    ++checked;
    if (violation > max_violation) max_violation = violation;
    if (!failed && violation > tol) {
      failed = true;
      witness = point;
    }
  }

  OrderVerdict finish() const {
    OrderVerdict v;
    v.relation = relation;
    v.tolerance = tol;
    v.points_checked = checked;
    v.holds = !failed;
    if (failed) v.witness = witness;
    v.marginal = v.holds && checked > 0 && max_violation > -tol;
    return v;
  }
};

void require_discrete(const CheckGrid& grid, const char* who) {
  if (!grid.discrete) {
    throw std::invalid_argument(std::string(who) + ": grid is not discrete");
  }
}

void require_continuous(const CheckGrid& grid, const char* who) {
  if (grid.discrete || grid.points.size() < 2) {
    throw std::invalid_argument(std::string(who) + ": grid is not continuous");
  }
}

void check_tol(double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw std::invalid_argument("tolerance must be positive and finite");
  }
}

// Consecutive-point monotonicity of the log likelihood ratio, with the
// ratio conventions a/0 = +inf and 0/a = 0.  Feeding is skipped entirely
// outside the union support (both masses zero).
class LogRatioMonotone {
 public:
  explicit LogRatioMonotone(ViolationScan& scan) : scan_(scan) {}

  void feed(double point, double lx, double ly) {
    int state;
    double l = 0.0;
    if (lx == -kInf && ly == -kInf) return;
    if (lx == -kInf) {
      state = -1;
    } else if (ly == -kInf) {
      state = +1;
    } else {
      state = 0;
      l = lx - ly;
    }
    if (have_prev_) {
      double violation;
      if (prev_state_ == +1) {
        violation = -kInf;  // from +inf every move is downhill
      } else if (state == +1) {
        violation = kInf;  // ratio rose to +inf
      } else if (prev_state_ == -1) {
        violation = (state == -1) ? -kInf : kInf;  // a zero ratio must stay zero
      } else if (state == -1) {
        violation = -kInf;
      } else {
        violation = l - prev_l_;
      }
      scan_.observe(prev_point_, violation);
    }
    have_prev_ = true;
    prev_state_ = state;
    prev_l_ = l;
    prev_point_ = point;
  }

 private:
  ViolationScan& scan_;
  bool have_prev_ = false;
  int prev_state_ = 0;
  double prev_l_ = 0.0;
  double prev_point_ = 0.0;
};

// Monotone inversion by geometric bisection; `upper` inverts the survival
// function, otherwise the cdf.  `hint` (a previous solution, or 0) seeds the
// bracket so sweeps over increasing targets stay cheap.
double invert_monotone(const dist::ContinuousDistribution& d, bool upper, double target,
                       double hint) {
  auto left_of_solution = [&](double z) {
    return upper ? d.survival(z) > target : d.cdf(z) < target;
  };
  double lo = 0.0;
  double hi = 0.0;
  if (hint > 0.0 && std::isfinite(hint)) {
    if (left_of_solution(hint)) {
      lo = hint;
    } else {
      hi = hint;
    }
  }
  if (hi == 0.0) {
    hi = (lo > 0.0) ? 2.0 * lo : 1.0;
    int guard = 0;
    while (left_of_solution(hi)) {
      hi *= 2.0;
      if (++guard > 1100 || hi > 1e300) {
        throw std::runtime_error("quantile: upper bracket not found");
      }
    }
  }
  if (lo == 0.0) {
    lo = hi / 2.0;
    int guard = 0;
    while (lo > 1e-300 && !left_of_solution(lo)) {
      lo /= 2.0;
      if (++guard > 2200) break;
    }
    if (!left_of_solution(lo)) lo = 1e-300;
  }
  for (int i = 0; i < 400 && (hi - lo) > 1e-12 * hi; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (left_of_solution(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// True once t is beyond the last stored entry of a truncated table: the pmf
// reads zero there yet real mass (bounded by tail_mass_bound) remains.
// Exact tables (tail bound 0) never count as exhausted.
bool table_exhausted(const dist::DiscreteDistribution& d, int t) {
  return d.tail_mass_bound() > 0.0 && d.pmf(t) == 0.0 &&
         d.survival(t) <= d.tail_mass_bound();
}

// Contiguous positive range of a pmf table; interior zeros are a support
// violation for the log-concavity scan.
std::pair<int, int> support_interval(const dist::DiscreteDistribution& d) {
  int lo = -1;
  int hi = -1;
  for (int t = 0; t <= d.max_support(); ++t) {
    if (d.pmf(t) > 0.0) {
      if (lo < 0) lo = t;
      hi = t;
    } else if (lo >= 0 && d.survival(t) > d.tail_mass_bound()) {
      throw std::invalid_argument("check_lc: pmf support is not an interval");
    }
  }
  if (lo < 0) throw std::invalid_argument("check_lc: empty support");
  return {lo, hi};
}

}  // namespace

std::string_view to_string(Order o) {
  switch (o) {
    case Order::st: return "st";
    case Order::hr: return "hr";
    case Order::rh: return "rh";
    case Order::lr: return "lr";
    case Order::lc: return "lc";
    case Order::disp: return "disp";
    case Order::star: return "star";
  }
  return "?";
}

std::optional<Order> order_from_string(std::string_view name) {
  if (name == "st") return Order::st;
  if (name == "hr") return Order::hr;
  if (name == "rh") return Order::rh;
  if (name == "lr") return Order::lr;
  if (name == "lc") return Order::lc;
  if (name == "disp") return Order::disp;
  if (name == "star") return Order::star;
  return std::nullopt;
}

CheckGrid CheckGrid::for_discrete(const dist::DiscreteDistribution& x,
                                  const dist::DiscreteDistribution& y,
                                  double tail_mass) {
  if (!(tail_mass > 0.0) || !(tail_mass < 1.0)) {
    throw std::invalid_argument("CheckGrid: tail_mass must be in (0,1)");
  }
  const int cap = std::max(x.max_support(), y.max_support());
  CheckGrid g;
  g.discrete = true;
  g.x_hi = cap;
  for (int t = 0; t <= cap; ++t) {
    if (x.survival(t) + y.survival(t) <= tail_mass) {
      g.x_hi = t;
      break;
    }
  }
  return g;
}

CheckGrid CheckGrid::geometric(const dist::ContinuousDistribution& x,
                               const dist::ContinuousDistribution& y, int points,
                               double q_lo, double q_hi) {
  if (points < 3) throw std::invalid_argument("CheckGrid: need at least 3 points");
  if (!(q_lo > 0.0) || !(q_lo < q_hi) || !(q_hi < 1.0)) {
    throw std::invalid_argument("CheckGrid: quantile range must satisfy 0 < lo < hi < 1");
  }
  const double lo = std::min(quantile(x, q_lo), quantile(y, q_lo));
  const double hi = std::max(quantile(x, q_hi), quantile(y, q_hi));
  if (!(lo > 0.0) || !(hi > lo)) {
    throw std::runtime_error("CheckGrid: degenerate quantile range");
  }
  CheckGrid g;
  g.points.resize(static_cast<std::size_t>(points));
  const double span = std::log(hi / lo);
  for (int i = 0; i < points; ++i) {
    g.points[static_cast<std::size_t>(i)] =
        lo * std::exp(span * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  g.points.front() = lo;
  g.points.back() = hi;
  for (std::size_t i = 1; i < g.points.size(); ++i) {
    if (!(g.points[i] > g.points[i - 1])) {
      throw std::runtime_error("CheckGrid: grid points are not strictly increasing");
    }
  }
  return g;
}

CheckGrid CheckGrid::uniform_for_lc(const dist::ContinuousDistribution& x,
                                    const dist::ContinuousDistribution& y, int points,
                                    double q_lo, double q_hi) {
  if (points < 3) throw std::invalid_argument("CheckGrid: need at least 3 points");
  if (!(q_lo > 0.0) || !(q_lo < q_hi) || !(q_hi < 1.0)) {
    throw std::invalid_argument("CheckGrid: quantile range must satisfy 0 < lo < hi < 1");
  }
  const double lo = std::min(quantile(x, q_lo), quantile(y, q_lo));
  const double hi = std::max(quantile(x, q_hi), quantile(y, q_hi));
  if (!(lo > 0.0) || !(hi > lo)) {
    throw std::runtime_error("CheckGrid: degenerate quantile range");
  }
  CheckGrid g;
  g.points.resize(static_cast<std::size_t>(points));
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) {
    g.points[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
  }
  g.points.back() = hi;
  return g;
}

double quantile(const dist::ContinuousDistribution& d, double q) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::invalid_argument("quantile: probability must be in (0,1)");
  }
  if (q <= 0.5) return invert_monotone(d, false, q, 0.0);
  return invert_monotone(d, true, 1.0 - q, 0.0);
}

std::vector<double> default_quantile_grid(int points, double q_lo, double q_hi) {
  if (points < 3) throw std::invalid_argument("default_quantile_grid: need >= 3 points");
  if (!(q_lo > 0.0) || !(q_lo < q_hi) || !(q_hi < 1.0)) {
    throw std::invalid_argument("default_quantile_grid: need 0 < lo < hi < 1");
  }
  auto logit = [](double u) { return std::log(u / (1.0 - u)); };
  const double a = logit(q_lo);
  const double b = logit(q_hi);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double v = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    grid[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-v));
  }
  return grid;
}

// ---------------------------------------------------------------------------
// st

OrderVerdict check_st(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_discrete(grid, "check_st");
  check_tol(tol);
  ViolationScan scan{Order::st, tol};
  for (int t = 0; t <= grid.x_hi; ++t) {
    scan.observe(t, x.survival(t) - y.survival(t));
  }
  return scan.finish();
}

OrderVerdict check_st(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_continuous(grid, "check_st");
  check_tol(tol);
  ViolationScan scan{Order::st, tol};
  for (double t : grid.points) {
    scan.observe(t, x.survival(t) - y.survival(t));
  }
  return scan.finish();
}

// ---------------------------------------------------------------------------
// hr

OrderVerdict check_hr(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_discrete(grid, "check_hr");
  check_tol(tol);
  ViolationScan scan{Order::hr, tol};
  long skipped = 0;
  const long total = grid.x_hi + 1;
  for (int t = 0; t <= grid.x_hi; ++t) {
    // Past a truncated table's end the stored hazard is 0/tail_bound, an
    // artifact of truncation (the grid can outrun the lighter tail's table).
    // Such points carry no information and do not count against the budget.
    if (table_exhausted(x, t) || table_exhausted(y, t)) continue;
    const double dx = x.pmf(t) + x.survival(t);  // P(X >= t)
    const double dy = y.pmf(t) + y.survival(t);
    if (dx <= kDenomFloor || dy <= kDenomFloor) {
      ++skipped;
      continue;
    }
    scan.observe(t, y.pmf(t) / dy - x.pmf(t) / dx);
  }
  if (skipped * 10 > total) {
    throw std::runtime_error("check_hr: degenerate denominators at more than 10% of grid");
  }
  return scan.finish();
}

OrderVerdict check_hr(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_continuous(grid, "check_hr");
  check_tol(tol);
  ViolationScan scan{Order::hr, tol};
  long skipped = 0;
  for (double t : grid.points) {
    const double sx = x.survival(t);
    const double sy = y.survival(t);
    if (sx <= kDenomFloor || sy <= kDenomFloor) {
      ++skipped;
      continue;
    }
    // Log-scale comparison: hazards grow like shape/x toward 0, so a linear
    // difference there amplifies evaluator noise past any fixed tolerance.
    const double lx = x.log_pdf(t);
    const double ly = y.log_pdf(t);
    if (lx == -kInf && ly == -kInf) continue;
    scan.observe(t, (ly - std::log(sy)) - (lx - std::log(sx)));
  }
  if (skipped * 10 > static_cast<long>(grid.points.size())) {
    throw std::runtime_error("check_hr: degenerate denominators at more than 10% of grid");
  }
  return scan.finish();
}

// ---------------------------------------------------------------------------
// rh

OrderVerdict check_rh(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_discrete(grid, "check_rh");
  check_tol(tol);
  ViolationScan scan{Order::rh, tol};
  long skipped = 0;
  const long total = grid.x_hi + 1;
  for (int t = 0; t <= grid.x_hi; ++t) {
    const double cx = x.cdf(t);
    const double cy = y.cdf(t);
    if (cx <= kDenomFloor || cy <= kDenomFloor) {
      ++skipped;
      continue;
    }
    scan.observe(t, x.pmf(t) / cx - y.pmf(t) / cy);
  }
  if (skipped * 10 > total) {
    throw std::runtime_error("check_rh: degenerate denominators at more than 10% of grid");
  }
  return scan.finish();
}

OrderVerdict check_rh(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_continuous(grid, "check_rh");
  check_tol(tol);
  ViolationScan scan{Order::rh, tol};
  long skipped = 0;
  for (double t : grid.points) {
    const double cx = x.cdf(t);
    const double cy = y.cdf(t);
    if (cx <= kDenomFloor || cy <= kDenomFloor) {
      ++skipped;
      continue;
    }
    // Log scale for the same reason as the continuous hazard check.
    const double lx = x.log_pdf(t);
    const double ly = y.log_pdf(t);
    if (lx == -kInf && ly == -kInf) continue;
    scan.observe(t, (lx - std::log(cx)) - (ly - std::log(cy)));
  }
  if (skipped * 10 > static_cast<long>(grid.points.size())) {
    throw std::runtime_error("check_rh: degenerate denominators at more than 10% of grid");
  }
  return scan.finish();
}

// ---------------------------------------------------------------------------
// lr

OrderVerdict check_lr(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_discrete(grid, "check_lr");
  check_tol(tol);
  ViolationScan scan{Order::lr, tol};
  LogRatioMonotone mono(scan);
  for (int t = 0; t <= grid.x_hi; ++t) {
    mono.feed(t, x.log_pmf(t), y.log_pmf(t));
  }
  return scan.finish();
}

OrderVerdict check_lr(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_continuous(grid, "check_lr");
  check_tol(tol);
  ViolationScan scan{Order::lr, tol};
  LogRatioMonotone mono(scan);
  for (double t : grid.points) {
    mono.feed(t, x.log_pdf(t), y.log_pdf(t));
  }
  return scan.finish();
}

// ---------------------------------------------------------------------------
// lc

OrderVerdict check_lc(const dist::DiscreteDistribution& x,
                      const dist::DiscreteDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_discrete(grid, "check_lc");
  check_tol(tol);
  const auto [ax, bx] = support_interval(x);
  const auto [ay, by] = support_interval(y);
  const bool y_extends = y.tail_mass_bound() > 0.0;  // truncated stand-in for Z+
  if (ax < ay || (bx > by && !y_extends)) {
    throw std::invalid_argument("check_lc: supports are not nested intervals");
  }
  ViolationScan scan{Order::lc, tol};
  const int hi = std::min({bx, by, grid.x_hi});
  for (int t = ax + 1; t + 1 <= hi; ++t) {
    const double d2 = (x.log_pmf(t + 1) - y.log_pmf(t + 1)) -
                      2.0 * (x.log_pmf(t) - y.log_pmf(t)) +
                      (x.log_pmf(t - 1) - y.log_pmf(t - 1));
    scan.observe(t, d2);
  }
  return scan.finish();
}

OrderVerdict check_lc(const dist::ContinuousDistribution& x,
                      const dist::ContinuousDistribution& y, const CheckGrid& grid,
                      double tol) {
  require_continuous(grid, "check_lc");
  check_tol(tol);
  ViolationScan scan{Order::lc, tol};
  const auto& pts = grid.points;
  auto lratio = [&](double t) { return x.log_pdf(t) - y.log_pdf(t); };
  for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
    const double l1 = lratio(pts[i]);
    const double l2 = lratio(pts[i + 1]);
    const double l3 = lratio(pts[i + 2]);
    if (!std::isfinite(l1) || !std::isfinite(l2) || !std::isfinite(l3)) continue;
    const double s12 = (l2 - l1) / (pts[i + 1] - pts[i]);
    const double s23 = (l3 - l2) / (pts[i + 2] - pts[i + 1]);
    scan.observe(pts[i], (s23 - s12) / (pts[i + 2] - pts[i]));
  }
  return scan.finish();
}

// ---------------------------------------------------------------------------
// star

OrderVerdict check_star(const dist::ContinuousDistribution& x,
                        const dist::ContinuousDistribution& y, const CheckGrid& grid,
                        double tol) {
  require_continuous(grid, "check_star");
  check_tol(tol);
  ViolationScan scan{Order::star, tol};
  double hint = 0.0;
  bool have_prev = false;
  double prev_ratio = 0.0;
  double prev_t = 0.0;
  for (double t : grid.points) {
    const double u = x.cdf(t);
    const double s = x.survival(t);
    // Survival targets far below the grid's quantile band are not reliably
    // invertible (series evaluators truncate around 1e-12), so the scan stays
    // inside the region where the composed quantile is well conditioned.
    if (u <= kDenomFloor || s < 1e-8) continue;
    const double z = (s < 0.5) ? invert_monotone(y, true, s, hint)
                               : invert_monotone(y, false, u, hint);
    hint = z;
    const double ratio = z / t;
    if (have_prev) {
      scan.observe(prev_t, prev_ratio - ratio);
    }
    have_prev = true;
    prev_ratio = ratio;
    prev_t = t;
  }
  return scan.finish();
}

// ---------------------------------------------------------------------------
// disp

OrderVerdict check_disp(const dist::ContinuousDistribution& x,
                        const dist::ContinuousDistribution& y,
                        std::span<const double> quantile_grid, double tol) {
  check_tol(tol);
  if (quantile_grid.size() < 2) {
    throw std::invalid_argument("check_disp: need at least two probabilities");
  }
  for (std::size_t i = 0; i < quantile_grid.size(); ++i) {
    if (!(quantile_grid[i] > 0.0) || !(quantile_grid[i] < 1.0) ||
        (i > 0 && !(quantile_grid[i] > quantile_grid[i - 1]))) {
      throw std::invalid_argument("check_disp: probabilities must increase within (0,1)");
    }
  }
  auto sweep = [](const dist::ContinuousDistribution& d,
                  std::span<const double> us) {
    std::vector<double> qs(us.size());
    double hint = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
      const double u = us[i];
      qs[i] = (u <= 0.5) ? invert_monotone(d, false, u, hint)
                         : invert_monotone(d, true, 1.0 - u, hint);
      hint = qs[i];
    }
    return qs;
  };
  const std::vector<double> qx = sweep(x, quantile_grid);
  const std::vector<double> qy = sweep(y, quantile_grid);
  ViolationScan scan{Order::disp, tol};
  for (std::size_t i = 0; i + 1 < quantile_grid.size(); ++i) {
    const double spacing_x = qx[i + 1] - qx[i];
    const double spacing_y = qy[i + 1] - qy[i];
    scan.observe(quantile_grid[i], spacing_x - spacing_y);
  }
  return scan.finish();
}

}  // namespace stochord::oracle
