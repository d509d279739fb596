#pragma once

#include <functional>
#include <optional>

#include "stochord/dist.hpp"

namespace stochord::criteria {

enum class Family { poisson, binomial, negbin, gamma };

/// One-parameter exponential family written as f(x; theta) =
/// f0(x) exp[b(theta) x] h(theta).  Only the pieces the order criteria
/// consume are carried: the natural-parameter map b, the normalizing factor
/// h, the support kind, and the legal parameter range.
struct ExponentialFamilyKernel {
  Family family;
  bool discrete_support;  // Z+ or {0..n} vs (0, inf)
  std::function<double(double)> b;
  std::function<double(double)> h;
  std::function<bool(double)> in_range;
};

/// Poisson(lambda): b = ln lambda, h = exp(-lambda), lambda > 0.
ExponentialFamilyKernel poisson_kernel();
/// Binomial(n, p): b = ln(p/(1-p)), h = (1-p)^n, p in (0,1).
ExponentialFamilyKernel binomial_kernel(int n);
/// NegBin(k, p) counting failures: b = ln(1-p), h = p^k, p in (0,1).
ExponentialFamilyKernel negbin_kernel(double k);
/// Gamma(alpha, scale beta): b = -1/beta, h = beta^-alpha, beta > 0.
ExponentialFamilyKernel gamma_kernel(double alpha);

/// A decided inequality lhs <= rhs; `holds` always reproduces from the two
/// stored sides.
struct Inequality {
  double lhs;
  double rhs;
  bool holds;
  static Inequality less_equal(double lhs, double rhs) { return {lhs, rhs, lhs <= rhs}; }
};

/// Closed-form verdicts for the paired orders.  Criteria that decide only
/// one pair leave the other slot empty.
struct CriterionResult {
  std::optional<Inequality> st_hr;
  std::optional<Inequality> lr_rh;
};

/// Whether the closed form decides component <= mixture or mixture <=
/// component (the latter exists only for the binomial family).
enum class Direction { component_le_mixture, mixture_le_component };

// ---------------------------------------------------------------------------
// Mixture criteria: X ~ f(.; theta), Y ~ integral of f(.; t) dmu(t).
// Mixtures are relatively log-convex over their component, so within a
// family: st and hr coincide, as do lr and rh, and each pair reduces to one
// scalar inequality.

/// X <= Y in st (equivalently hr) iff sum_i w_i h(t_i) <= h(theta).
CriterionResult expfam_mixture_st_criterion(const ExponentialFamilyKernel& kernel,
                                            double theta,
                                            const dist::FiniteMixingMeasure& mu);

/// X <= Y in lr (equivalently rh).  Continuous support:
///   b(theta) <= sum_i w_i b(t_i) h(t_i) / sum_i w_i h(t_i).
/// Lattice support:
///   exp(b(theta)) <= sum_i w_i exp(b(t_i)) h(t_i) / sum_i w_i h(t_i).
CriterionResult expfam_mixture_lr_criterion(const ExponentialFamilyKernel& kernel,
                                            double theta,
                                            const dist::FiniteMixingMeasure& mu);

/// Family-specific forms (algebraically equal to the kernel criteria for the
/// forward direction; the binomial one also covers mixture <= component via
/// the n - X reflection).  For Direction::mixture_le_component the pairing
/// crosses: st_hr holds the {st, rh} inequality and lr_rh the {lr, hr} one.
CriterionResult binomial_mixture_criteria(int n, double p,
                                          const dist::FiniteMixingMeasure& mu,
                                          Direction direction);
CriterionResult negbin_mixture_criteria(double k, double p,
                                        const dist::FiniteMixingMeasure& mu);
CriterionResult gamma_mixture_criteria(double alpha, double beta,
                                       const dist::FiniteMixingMeasure& mu);

// ---------------------------------------------------------------------------
// Threshold criteria.

/// Sum of heterogeneous Bernoullis X vs Binomial(n, p) Y; all four
/// directions reduce to comparing p against a mean of the success
/// probabilities.
struct PoissonBinomialThresholds {
  /// X <= Y in st and hr iff p >= st_upper = 1 - geometric mean of (1-p_i).
  double st_upper;
  /// X <= Y in lr and rh iff p >= lr_upper = 1 - harmonic mean of (1-p_i).
  double lr_upper;
  /// Y <= X in st and rh iff p <= st_lower = geometric mean of p_i.
  double st_lower;
  /// Y <= X in lr and hr iff p <= lr_lower = harmonic mean of p_i.
  double lr_lower;
};
PoissonBinomialThresholds poisson_binomial_thresholds(
    const dist::PoissonBinomialSpec& spec);

/// A scale/probability cutoff for the paired orders, with the inequality
/// direction that makes the order hold.
struct ThresholdPair {
  enum class Direction { parameter_le_threshold, parameter_ge_threshold };
  double st_hr;
  double lr_rh;
  Direction direction;
};

/// Gamma(total shape, beta) <= convolution in st/hr iff beta <= weighted
/// geometric mean of the scales; in lr/rh iff beta <= weighted harmonic
/// mean.  Harmonic <= geometric, so the lr/rh cutoff is the tighter one.
ThresholdPair gamma_convolution_thresholds(const dist::GammaConvolutionSpec& spec);

/// NegBin(total size, p) <= convolution in st/hr iff p >= weighted geometric
/// mean of the probs; in lr/rh iff p >= weighted arithmetic mean.
ThresholdPair negbin_convolution_thresholds(const dist::NegBinConvolutionSpec& spec);

/// E[(sum_i beta_i D_i)^-q] for (D_1..D_n) ~ Dirichlet(alpha_1..alpha_n),
/// at q = total shape (prod beta_i^-alpha_i) and q = total shape + 1
/// (the same product scaled by the weighted harmonic-mean reciprocal).
enum class NegativeMomentOrder { total_shape, total_shape_plus_one };
double dirichlet_negative_moment(const dist::GammaConvolutionSpec& spec,
                                 NegativeMomentOrder order);

/// Gamma(total shape, beta) precedes the convolution in the dispersive order
/// exactly when it does in st, i.e. beta <= the st/hr threshold.
bool gamma_disp_criterion(const dist::GammaConvolutionSpec& spec, double beta);

// ---------------------------------------------------------------------------
// Boundary behavior of the log likelihood ratio l = ln(f_X / f_Y).  With X
// relatively log-concave over Y these limits decide the orders: l(0+) >= 0
// gives st and hr; l'(0+) <= 0 gives lr and rh.

/// Limits at 0+ along x = 2^-j, j = 10..40, with one Richardson step;
/// adjacent extrapolants must settle within 1e-8 or
/// specfn::ConvergenceError is thrown.
struct ContinuousBoundary {
  double log_ratio_limit;
  double log_ratio_slope_limit;
};
ContinuousBoundary boundary_conditions(const dist::ContinuousDistribution& x,
                                       const dist::ContinuousDistribution& y);

/// Exact pmf ratios at the bottom of the lattice: ratio0 = f(0)/g(0),
/// ratio1 = f(1)/g(1); ratio1 <= ratio0 is the lr/rh condition, ratio0 >= 1
/// the st/hr one.
struct DiscreteBoundary {
  double ratio0;
  double ratio1;
  bool ratio1_le_ratio0;
};
DiscreteBoundary boundary_conditions(const dist::DiscreteDistribution& x,
                                     const dist::DiscreteDistribution& y);

}  // namespace stochord::criteria
