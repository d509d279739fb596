#include "stochord/specfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace stochord::specfn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lanczos approximation with g = 607/128 and the 15 Godfrey coefficients.
// Uniformly accurate to ~1e-15 relative for shifted argument z >= -0.5.
constexpr double kLanczosG = 607.0 / 128.0;
constexpr std::array<double, 15> kLanczosCoef = {
    0.99999999999999709182,    57.156235665862923517,
    -59.597960355475491248,    14.136097974741747174,
    -0.49191381609762019978,   0.33994649984811888699e-4,
    0.46523628927048575665e-4, -0.98374475304879564677e-4,
    0.15808870322491248884e-3, -0.21026444172410488319e-3,
    0.21743961811521264320e-3, -0.16431810653676389022e-3,
    0.84418223983852743293e-4, -0.26190838401581408670e-4,
    0.36899182659531622704e-5};

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // ln(2*pi)/2

constexpr int kMaxIncompleteIter = 20000;

// Lower series: P(a, x) = x^a e^-x / Gamma(a+1) * sum_{n>=0} x^n / (a+1)...(a+n).
double lower_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < kMaxIncompleteIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17) {
      const double lg = a * std::log(x) - x - log_gamma(a);
      return sum * std::exp(lg);
    }
  }
  throw ConvergenceError("incomplete gamma series did not converge");
}

// Upper continued fraction by modified Lentz:
// Q(a, x) = x^a e^-x / Gamma(a) * 1/(x+1-a- 1*(1-a)/(x+3-a- ...)).
double upper_cf(double a, double x) {
  constexpr double kFpMin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIncompleteIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) {
      const double lg = a * std::log(x) - x - log_gamma(a);
      return h * std::exp(lg);
    }
  }
  throw ConvergenceError("incomplete gamma continued fraction did not converge");
}

void check_incomplete_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error("incomplete gamma: shape must be positive and finite");
  }
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::domain_error("incomplete gamma: argument must be nonnegative and finite");
  }
}

}  // namespace

EvalError::EvalError(double abs_bound, double rel_bound)
    : absolute_bound(abs_bound), relative_bound(rel_bound) {
  if (!(abs_bound >= 0.0) || !std::isfinite(abs_bound) || !(rel_bound >= 0.0) ||
      !std::isfinite(rel_bound)) {
    throw std::invalid_argument("EvalError bounds must be finite and nonnegative");
  }
}

double log_gamma(double x) {
  if (std::isnan(x) || !(x > 0.0) || x == kInf) {
    throw std::domain_error("log_gamma: argument must be positive and finite");
  }
  if (x < 0.5) {
    return log_gamma(x + 1.0) - std::log(x);
  }
  const double z = x - 1.0;
  double sum = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) {
    sum += kLanczosCoef[i] / (z + static_cast<double>(i));
  }
  const double t = z + kLanczosG + 0.5;
  return kHalfLogTwoPi + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double reg_lower_incomplete_gamma(double a, double x) {
  check_incomplete_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_cf(a, x);
}

double reg_upper_incomplete_gamma(double a, double x) {
  check_incomplete_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_cf(a, x);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("log_sum_exp: empty input");
  }
  for (double v : values) {
    if (std::isnan(v) || v == kInf) {
      throw std::domain_error("log_sum_exp: NaN and +inf are not summable");
    }
  }
  std::vector<double> ordered(values.begin(), values.end());
  std::sort(ordered.begin(), ordered.end(), std::greater<>());
  const double m = ordered.front();
  if (m == -kInf) return -kInf;
  double acc = 0.0;
  for (double v : ordered) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace stochord::specfn
