#include "stochord/criteria.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace stochord::criteria {

namespace {

void check_in_range(const ExponentialFamilyKernel& kernel, double theta,
                    const dist::FiniteMixingMeasure& mu) {
  if (!kernel.in_range(theta)) {
    throw std::domain_error("mixture criterion: component parameter out of range");
  }
  for (const auto& a : mu.atoms) {
    if (!kernel.in_range(a.t)) {
      throw std::domain_error("mixture criterion: mixing atom out of range");
    }
  }
}

void check_prob(double p, const char* what) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in (0,1)");
  }
}

double log_ratio_at(const dist::ContinuousDistribution& x,
                    const dist::ContinuousDistribution& y, double t) {
  const double l = x.log_pdf(t) - y.log_pdf(t);
  if (!std::isfinite(l)) {
    throw specfn::ConvergenceError(
        "boundary_conditions: log density ratio not finite near 0");
  }
  return l;
}

// First adjacent pair of extrapolants within 1e-8 wins; none converging is
// an error, not a silent best guess.
double settle(const std::vector<double>& extrapolants, const char* what) {
  for (std::size_t i = 0; i + 1 < extrapolants.size(); ++i) {
    if (std::fabs(extrapolants[i + 1] - extrapolants[i]) < 1e-8) {
      return extrapolants[i + 1];
    }
  }
  throw specfn::ConvergenceError(std::string("boundary_conditions: ") + what +
                                 " did not converge along the dyadic grid");
}

}  // namespace

ExponentialFamilyKernel poisson_kernel() {
  return {Family::poisson, true, [](double t) { return std::log(t); },
          [](double t) { return std::exp(-t); },
          [](double t) { return t > 0.0 && std::isfinite(t); }};
}

ExponentialFamilyKernel binomial_kernel(int n) {
  if (n < 1) throw std::domain_error("binomial_kernel: n must be >= 1");
  const double nn = static_cast<double>(n);
  return {Family::binomial, true,
          [](double p) { return std::log(p) - std::log1p(-p); },
          [nn](double p) { return std::exp(nn * std::log1p(-p)); },
          [](double p) { return p > 0.0 && p < 1.0; }};
}

ExponentialFamilyKernel negbin_kernel(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::domain_error("negbin_kernel: size must be positive");
  }
  return {Family::negbin, true, [](double p) { return std::log1p(-p); },
          [k](double p) { return std::exp(k * std::log(p)); },
          [](double p) { return p > 0.0 && p < 1.0; }};
}

ExponentialFamilyKernel gamma_kernel(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::domain_error("gamma_kernel: shape must be positive");
  }
  return {Family::gamma, false, [](double b) { return -1.0 / b; },
          [alpha](double b) { return std::exp(-alpha * std::log(b)); },
          [](double b) { return b > 0.0 && std::isfinite(b); }};
}

CriterionResult expfam_mixture_st_criterion(const ExponentialFamilyKernel& kernel,
                                            double theta,
                                            const dist::FiniteMixingMeasure& mu) {
  check_in_range(kernel, theta, mu);
  double mixed_h = 0.0;
  for (const auto& a : mu.atoms) mixed_h += a.w * kernel.h(a.t);
  CriterionResult r;
  r.st_hr = Inequality::less_equal(mixed_h, kernel.h(theta));
  return r;
}

CriterionResult expfam_mixture_lr_criterion(const ExponentialFamilyKernel& kernel,
                                            double theta,
                                            const dist::FiniteMixingMeasure& mu) {
  check_in_range(kernel, theta, mu);
  double den = 0.0;
  double num = 0.0;
  for (const auto& a : mu.atoms) {
    const double wh = a.w * kernel.h(a.t);
    den += wh;
    num += wh * (kernel.discrete_support ? std::exp(kernel.b(a.t)) : kernel.b(a.t));
  }
  CriterionResult r;
  const double lhs = kernel.discrete_support ? std::exp(kernel.b(theta)) : kernel.b(theta);
  r.lr_rh = Inequality::less_equal(lhs, num / den);
  return r;
}

CriterionResult binomial_mixture_criteria(int n, double p,
                                          const dist::FiniteMixingMeasure& mu,
                                          Direction direction) {
  if (n < 1) throw std::domain_error("binomial_mixture_criteria: n must be >= 1");
  check_prob(p, "binomial success probability");
  for (const auto& a : mu.atoms) check_prob(a.t, "binomial mixing atom");
  const double nn = static_cast<double>(n);
  CriterionResult r;
  if (direction == Direction::component_le_mixture) {
    double mixed_qn = 0.0;   // sum w (1-t)^n
    double mixed_qn1 = 0.0;  // sum w (1-t)^(n-1)
    double mixed_tq = 0.0;   // sum w t (1-t)^(n-1)
    for (const auto& a : mu.atoms) {
      const double qn1 = std::exp((nn - 1.0) * std::log1p(-a.t));
      mixed_qn1 += a.w * qn1;
      mixed_qn += a.w * qn1 * (1.0 - a.t);
      mixed_tq += a.w * qn1 * a.t;
    }
    r.st_hr = Inequality::less_equal(mixed_qn, std::exp(nn * std::log1p(-p)));
    r.lr_rh = Inequality::less_equal(p, mixed_tq / mixed_qn1);
  } else {
    // Binomial(n,p) <= mixture; st pairs with rh and lr with hr here.
    double mixed_tn = 0.0;   // sum w t^n
    double mixed_tn1 = 0.0;  // sum w t^(n-1)
    for (const auto& a : mu.atoms) {
      const double tn1 = std::exp((nn - 1.0) * std::log(a.t));
      mixed_tn1 += a.w * tn1;
      mixed_tn += a.w * tn1 * a.t;
    }
    r.st_hr = Inequality::less_equal(mixed_tn, std::exp(nn * std::log(p)));
    r.lr_rh = Inequality::less_equal(mixed_tn / mixed_tn1, p);
  }
  return r;
}

CriterionResult negbin_mixture_criteria(double k, double p,
                                        const dist::FiniteMixingMeasure& mu) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::domain_error("negbin_mixture_criteria: size must be positive");
  }
  check_prob(p, "negbin success probability");
  for (const auto& a : mu.atoms) check_prob(a.t, "negbin mixing atom");
  double mixed_tk = 0.0;   // sum w t^k
  double mixed_tk1 = 0.0;  // sum w t^(k+1)
  for (const auto& a : mu.atoms) {
    const double tk = std::exp(k * std::log(a.t));
    mixed_tk += a.w * tk;
    mixed_tk1 += a.w * tk * a.t;
  }
  CriterionResult r;
  r.st_hr = Inequality::less_equal(mixed_tk, std::exp(k * std::log(p)));
  r.lr_rh = Inequality::less_equal(mixed_tk1 / mixed_tk, p);
  return r;
}

CriterionResult gamma_mixture_criteria(double alpha, double beta,
                                       const dist::FiniteMixingMeasure& mu) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::domain_error("gamma_mixture_criteria: shape must be positive");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("gamma_mixture_criteria: scale must be positive");
  }
  for (const auto& a : mu.atoms) {
    if (!(a.t > 0.0)) throw std::domain_error("gamma_mixture_criteria: atom must be > 0");
  }
  double mixed_a = 0.0;   // sum w t^-alpha
  double mixed_a1 = 0.0;  // sum w t^-(alpha+1)
  for (const auto& a : mu.atoms) {
    const double ta = std::exp(-alpha * std::log(a.t));
    mixed_a += a.w * ta;
    mixed_a1 += a.w * ta / a.t;
  }
  CriterionResult r;
  r.st_hr = Inequality::less_equal(mixed_a, std::exp(-alpha * std::log(beta)));
  r.lr_rh = Inequality::less_equal(beta * mixed_a1, mixed_a);
  return r;
}

PoissonBinomialThresholds poisson_binomial_thresholds(
    const dist::PoissonBinomialSpec& spec) {
  const double n = static_cast<double>(spec.trials());
  double log_q = 0.0;  // sum ln(1-p_i)
  double inv_q = 0.0;  // sum 1/(1-p_i)
  double log_p = 0.0;  // sum ln p_i
  double inv_p = 0.0;  // sum 1/p_i
  for (double p : spec.probs) {
    log_q += std::log1p(-p);
    inv_q += 1.0 / (1.0 - p);
    log_p += std::log(p);
    inv_p += 1.0 / p;
  }
  PoissonBinomialThresholds t;
  t.st_upper = 1.0 - std::exp(log_q / n);
  t.lr_upper = 1.0 - n / inv_q;
  t.st_lower = std::exp(log_p / n);
  t.lr_lower = n / inv_p;
  return t;
}

ThresholdPair gamma_convolution_thresholds(const dist::GammaConvolutionSpec& spec) {
  const double a_plus = spec.total_shape();
  double log_mean = 0.0;
  double inv_mean = 0.0;
  for (std::size_t i = 0; i < spec.shapes.size(); ++i) {
    log_mean += spec.shapes[i] * std::log(spec.scales[i]);
    inv_mean += spec.shapes[i] / spec.scales[i];
  }
  ThresholdPair t;
  t.st_hr = std::exp(log_mean / a_plus);
  t.lr_rh = a_plus / inv_mean;
  t.direction = ThresholdPair::Direction::parameter_le_threshold;
  return t;
}

ThresholdPair negbin_convolution_thresholds(const dist::NegBinConvolutionSpec& spec) {
  const double k_plus = spec.total_size();
  double log_mean = 0.0;
  double arith = 0.0;
  for (std::size_t i = 0; i < spec.sizes.size(); ++i) {
    log_mean += spec.sizes[i] * std::log(spec.probs[i]);
    arith += spec.sizes[i] * spec.probs[i];
  }
  ThresholdPair t;
  t.st_hr = std::exp(log_mean / k_plus);
  t.lr_rh = arith / k_plus;
  t.direction = ThresholdPair::Direction::parameter_ge_threshold;
  return t;
}

double dirichlet_negative_moment(const dist::GammaConvolutionSpec& spec,
                                 NegativeMomentOrder order) {
  double log_prod = 0.0;
  double inv_sum = 0.0;
  for (std::size_t i = 0; i < spec.shapes.size(); ++i) {
    log_prod += -spec.shapes[i] * std::log(spec.scales[i]);
    inv_sum += spec.shapes[i] / spec.scales[i];
  }
  const double base = std::exp(log_prod);
  if (order == NegativeMomentOrder::total_shape) return base;
  return base * inv_sum / spec.total_shape();
}

bool gamma_disp_criterion(const dist::GammaConvolutionSpec& spec, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("gamma_disp_criterion: scale must be positive");
  }
  return beta <= gamma_convolution_thresholds(spec).st_hr;
}

ContinuousBoundary boundary_conditions(const dist::ContinuousDistribution& x,
                                       const dist::ContinuousDistribution& y) {
  constexpr int kJLo = 10;
  constexpr int kJHi = 40;
  std::vector<double> l;
  std::vector<double> t;
  for (int j = kJLo; j <= kJHi; ++j) {
    const double point = std::ldexp(1.0, -j);
    t.push_back(point);
    l.push_back(log_ratio_at(x, y, point));
  }
  std::vector<double> limit_ex;
  for (std::size_t i = 0; i + 1 < l.size(); ++i) {
    limit_ex.push_back(2.0 * l[i + 1] - l[i]);
  }
  std::vector<double> slope;
  for (std::size_t i = 0; i + 1 < l.size(); ++i) {
    slope.push_back((l[i] - l[i + 1]) / (t[i] - t[i + 1]));
  }
  std::vector<double> slope_ex;
  for (std::size_t i = 0; i + 1 < slope.size(); ++i) {
    slope_ex.push_back(2.0 * slope[i + 1] - slope[i]);
  }
  ContinuousBoundary b;
  b.log_ratio_limit = settle(limit_ex, "log ratio limit");
  b.log_ratio_slope_limit = settle(slope_ex, "log ratio slope");
  return b;
}

DiscreteBoundary boundary_conditions(const dist::DiscreteDistribution& x,
                                     const dist::DiscreteDistribution& y) {
  if (!(y.pmf(0) > 0.0) || !(y.pmf(1) > 0.0)) {
    throw std::domain_error("boundary_conditions: reference pmf vanishes at 0 or 1");
  }
  DiscreteBoundary b;
  b.ratio0 = x.pmf(0) / y.pmf(0);
  b.ratio1 = x.pmf(1) / y.pmf(1);
  b.ratio1_le_ratio0 = b.ratio1 <= b.ratio0;
  return b;
}

}  // namespace stochord::criteria
