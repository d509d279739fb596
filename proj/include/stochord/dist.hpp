#pragma once

#include <functional>
#include <vector>

#include "stochord/specfn.hpp"

namespace stochord::dist {

/// Hard cap on probability table sizes.  Builders that cannot reach their
/// requested tail bound under this cap throw specfn::ConvergenceError.
inline constexpr std::size_t kMaxTableSize = 1'000'000;

/// Probability mass table on the contiguous integer range {0, ..., max_support}.
///
/// Conventions used throughout: survival(x) = P(X > x) and
/// hazard(x) = pmf(x) / P(X >= x).  Mass beyond the table is accounted for by
/// tail_mass_bound, so survival stays a (slightly conservative) upper bound
/// near the truncation point.  Construction checks entries >= 0 and
/// sum + tail within 1e-12 of one.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<double> pmf_table,
                                double tail_mass_bound = 0.0);

  int max_support() const { return static_cast<int>(pmf_.size()) - 1; }
  double tail_mass_bound() const { return tail_; }

  double pmf(int x) const;
  double log_pmf(int x) const;
  double cdf(int x) const;       // P(X <= x)
  double survival(int x) const;  // P(X > x), includes the truncated tail
  /// pmf(x) / P(X >= x); throws std::domain_error when x < 0 or the
  /// denominator falls below 1e-300.
  double hazard(int x) const;
  /// pmf(x) / P(X <= x); same domain rules as hazard.
  double reversed_hazard(int x) const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  std::vector<double> surv_;  // surv_[x] = P(X > x), backward-accumulated
  double tail_;
};

/// Distribution on the open half line (0, inf) given by evaluators.
/// pdf/cdf return 0 and survival returns 1 at x <= 0; limits toward 0 are the
/// caller's business via a shrinking grid (x = 2^-j, j up to 40), see
/// criteria::boundary_conditions.  A direct survival evaluator is carried so
/// hazards in the far tail do not lose accuracy to 1 - cdf cancellation, and
/// log_pdf so likelihood-ratio scans work where pdf underflows.
class ContinuousDistribution {
 public:
  using Evaluator = std::function<double(double)>;

  ContinuousDistribution(Evaluator pdf, Evaluator cdf, Evaluator survival,
                         Evaluator log_pdf, specfn::EvalError eval_error);

  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double survival(double x) const;
  /// pdf(x) / survival(x); throws std::domain_error when x <= 0 or the
  /// denominator falls below 1e-300.
  double hazard(double x) const;
  /// pdf(x) / cdf(x); same domain rules as hazard.
  double reversed_hazard(double x) const;
  const specfn::EvalError& eval_error() const { return err_; }

 private:
  Evaluator pdf_, cdf_, surv_, log_pdf_;
  specfn::EvalError err_;
};

// ---------------------------------------------------------------------------
// Family kernels.  All throw std::domain_error on out-of-range parameters.

/// P(X = x) for X ~ Poisson(lambda), lambda > 0.  Evaluated in log space
/// (-lambda + x ln lambda - ln x!), so far-tail values underflow gracefully
/// to subnormals or 0 instead of producing NaN.
double poisson_pmf(double lambda, int x);

/// P(X = x) for X ~ Binomial(n, p), n >= 1, p in (0,1), x in [0, n].
double binomial_pmf(int n, double p, int x);

/// P(X = x) for X ~ NegBin(k, p): number of failures before the k-th success,
/// success probability p; k > 0 real, p in (0,1).
/// pmf(x) = Gamma(k+x) / (Gamma(k) x!) * p^k (1-p)^x.
double negbin_pmf(double k, double p, int x);

/// Gamma density with shape alpha > 0 and *scale* beta > 0:
/// f(x) = x^(alpha-1) e^(-x/beta) / (Gamma(alpha) beta^alpha); 0 for x <= 0.
double gamma_pdf(double alpha, double beta, double x);
double gamma_log_pdf(double alpha, double beta, double x);
double gamma_cdf(double alpha, double beta, double x);
double gamma_survival(double alpha, double beta, double x);

// ---------------------------------------------------------------------------
// Structured specs.

/// Independent Bernoulli success probabilities, each strictly inside (0,1).
struct PoissonBinomialSpec {
  std::vector<double> probs;
  explicit PoissonBinomialSpec(std::vector<double> probs_in);
  int trials() const { return static_cast<int>(probs.size()); }
};

/// Finitely supported mixing measure: atoms t_i with weights w_i > 0 summing
/// to one (within 1e-12).  Parameter-range checks on the t_i belong to the
/// family-specific builders.
struct FiniteMixingMeasure {
  struct Atom {
    double t;
    double w;
  };
  std::vector<Atom> atoms;
  explicit FiniteMixingMeasure(std::vector<Atom> atoms_in);
};

/// Sum of independent Gamma(shape_i, scale_i) variables.
struct GammaConvolutionSpec {
  std::vector<double> shapes;
  std::vector<double> scales;
  GammaConvolutionSpec(std::vector<double> shapes_in, std::vector<double> scales_in);
  double total_shape() const;
};

/// Sum of independent NegBin(size_i, prob_i) variables.
struct NegBinConvolutionSpec {
  std::vector<double> sizes;
  std::vector<double> probs;
  NegBinConvolutionSpec(std::vector<double> sizes_in, std::vector<double> probs_in);
  double total_size() const;
};

// ---------------------------------------------------------------------------
// Builders.

/// Exact distribution of a sum of independent non-identical Bernoullis,
/// by the standard O(n^2) convolution fold.  tail_mass_bound is 0.
DiscreteDistribution poisson_binomial_pmf(const PoissonBinomialSpec& spec);

/// Truncated family tables.  Truncation stops once the remaining mass is
/// below tail_tol; the leftover is recorded as tail_mass_bound.
DiscreteDistribution poisson_table(double lambda, double tail_tol = 1e-12);
DiscreteDistribution binomial_table(int n, double p);
DiscreteDistribution negbin_table(double k, double p, double tail_tol = 1e-12);

/// Exact convolution of truncated tables.  Requires every component's
/// tail_mass_bound <= tail_tol / (2 * components), so the result's total
/// truncated mass stays below tail_tol.
DiscreteDistribution discrete_convolution_pmf(
    const std::vector<DiscreteDistribution>& components, double tail_tol = 1e-12);

/// Plain Gamma(alpha, scale beta) as a ContinuousDistribution.
ContinuousDistribution gamma_distribution(double alpha, double beta);

/// Distribution of sum_i beta_i * G_i with G_i ~ Gamma(alpha_i, 1),
/// as a single-scale gamma series: the density is a nonnegative mixture
/// sum_m w_m Gamma(alpha_plus + m, beta_min) whose weights follow the
/// recursion delta_0 = 1,
///   delta_{m+1} = (m+1)^-1 sum_{j=1}^{m+1} [sum_i alpha_i (1-beta_min/beta_i)^j] delta_{m+1-j},
/// w_m = prod_i (beta_min/beta_i)^{alpha_i} * delta_m.  The series is cut
/// once the unassigned weight drops below 1e-12.  Throws
/// specfn::ConvergenceError when max(beta)/min(beta) > 1e4 or the term cap
/// is hit first.
ContinuousDistribution gamma_convolution_pdf(const GammaConvolutionSpec& spec);

/// Mixtures over a finitely supported mixing measure on the family parameter
/// (Poisson rate, binomial/negbin success probability, gamma scale).
DiscreteDistribution poisson_mixture(const FiniteMixingMeasure& mu,
                                     double tail_tol = 1e-12);
DiscreteDistribution binomial_mixture(int n, const FiniteMixingMeasure& mu);
DiscreteDistribution negbin_mixture(double k, const FiniteMixingMeasure& mu,
                                    double tail_tol = 1e-12);
ContinuousDistribution gamma_mixture(double alpha, const FiniteMixingMeasure& mu);

}  // namespace stochord::dist
