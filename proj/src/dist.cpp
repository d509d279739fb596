#include "stochord/dist.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stochord::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDenomFloor = 1e-300;

// Compensated accumulation; table builders compare running sums against
// tail tolerances as small as 1e-12, which plain summation over ~1e6 terms
// would wash out.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_prob_open(double p, const char* what) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error(std::string(what) + " must lie strictly in (0,1)");
  }
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string(what) + " must be positive and finite");
  }
}

void check_tail_tol(double tol) {
  if (!(tol >= 1e-14) || !(tol <= 0.1)) {
    throw std::domain_error("tail tolerance must lie in [1e-14, 0.1]");
  }
}

// Extends a pmf table entry by entry until the remaining mass drops below
// tail_tol.  term(x) must be the exact pmf at x of a distribution on Z+.
template <typename TermFn>
DiscreteDistribution build_truncated_table(TermFn&& term, double tail_tol,
                                           const char* what) {
  std::vector<double> pmf;
  KahanSum sum;
  for (std::size_t x = 0; x < kMaxTableSize; ++x) {
    const double t = term(static_cast<int>(x));
    pmf.push_back(t);
    sum.add(t);
    if (1.0 - sum.value() <= tail_tol) {
      return DiscreteDistribution(std::move(pmf),
                                  std::max(0.0, 1.0 - sum.value()));
    }
  }
  throw specfn::ConvergenceError(std::string(what) +
                                 ": tail tolerance unreachable within table cap");
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteDistribution

DiscreteDistribution::DiscreteDistribution(std::vector<double> pmf_table,
                                           double tail_mass_bound)
    : pmf_(std::move(pmf_table)), tail_(tail_mass_bound) {
  if (pmf_.empty()) {
    throw std::invalid_argument("DiscreteDistribution: empty pmf table");
  }
  if (!(tail_ >= 0.0) || !(tail_ <= 1.0)) {
    throw std::invalid_argument("DiscreteDistribution: tail mass bound outside [0,1]");
  }
  KahanSum sum;
  for (double v : pmf_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("DiscreteDistribution: pmf entries must be >= 0");
    }
    sum.add(v);
  }
  if (std::fabs(sum.value() + tail_ - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "DiscreteDistribution: pmf plus tail bound must sum to one within 1e-12");
  }
  cdf_.resize(pmf_.size());
  surv_.resize(pmf_.size());
  KahanSum run;
  for (std::size_t i = 0; i < pmf_.size(); ++i) {
    run.add(pmf_[i]);
    cdf_[i] = std::min(1.0, run.value());
  }
  surv_.back() = tail_;
  for (std::size_t i = pmf_.size() - 1; i-- > 0;) {
    surv_[i] = surv_[i + 1] + pmf_[i + 1];
  }
}

double DiscreteDistribution::pmf(int x) const {
  if (x < 0 || x > max_support()) return 0.0;
  return pmf_[static_cast<std::size_t>(x)];
}

double DiscreteDistribution::log_pmf(int x) const {
  const double p = pmf(x);
  return p > 0.0 ? std::log(p) : -kInf;
}

double DiscreteDistribution::cdf(int x) const {
  if (x < 0) return 0.0;
  if (x > max_support()) return cdf_.back();
  return cdf_[static_cast<std::size_t>(x)];
}

double DiscreteDistribution::survival(int x) const {
  if (x < 0) return 1.0;
  if (x > max_support()) return tail_;
  return surv_[static_cast<std::size_t>(x)];
}

double DiscreteDistribution::hazard(int x) const {
  if (x < 0) throw std::domain_error("hazard: x must be >= 0");
  const double denom = pmf(x) + survival(x);  // P(X >= x)
  if (denom <= kDenomFloor) {
    throw std::domain_error("hazard: P(X >= x) below 1e-300");
  }
  return pmf(x) / denom;
}

double DiscreteDistribution::reversed_hazard(int x) const {
  if (x < 0) throw std::domain_error("reversed_hazard: x must be >= 0");
  const double denom = cdf(x);
  if (denom <= kDenomFloor) {
    throw std::domain_error("reversed_hazard: P(X <= x) below 1e-300");
  }
  return pmf(x) / denom;
}

// ---------------------------------------------------------------------------
// ContinuousDistribution

ContinuousDistribution::ContinuousDistribution(Evaluator pdf, Evaluator cdf,
                                               Evaluator survival, Evaluator log_pdf,
                                               specfn::EvalError eval_error)
    : pdf_(std::move(pdf)),
      cdf_(std::move(cdf)),
      surv_(std::move(survival)),
      log_pdf_(std::move(log_pdf)),
      err_(eval_error) {
  if (!pdf_ || !cdf_ || !surv_ || !log_pdf_) {
    throw std::invalid_argument("ContinuousDistribution: missing evaluator");
  }
}

double ContinuousDistribution::pdf(double x) const { return x > 0.0 ? pdf_(x) : 0.0; }

double ContinuousDistribution::log_pdf(double x) const {
  return x > 0.0 ? log_pdf_(x) : -kInf;
}

double ContinuousDistribution::cdf(double x) const { return x > 0.0 ? cdf_(x) : 0.0; }

double ContinuousDistribution::survival(double x) const {
  return x > 0.0 ? surv_(x) : 1.0;
}

double ContinuousDistribution::hazard(double x) const {
  if (!(x > 0.0)) throw std::domain_error("hazard: x must be > 0");
  const double denom = survival(x);
  if (denom <= kDenomFloor) {
    throw std::domain_error("hazard: survival below 1e-300");
  }
  return pdf(x) / denom;
}

double ContinuousDistribution::reversed_hazard(double x) const {
  if (!(x > 0.0)) throw std::domain_error("reversed_hazard: x must be > 0");
  const double denom = cdf(x);
  if (denom <= kDenomFloor) {
    throw std::domain_error("reversed_hazard: cdf below 1e-300");
  }
  return pdf(x) / denom;
}

// ---------------------------------------------------------------------------
// Family kernels

double poisson_pmf(double lambda, int x) {
  check_positive(lambda, "poisson rate");
  if (x < 0) throw std::domain_error("poisson_pmf: x must be >= 0");
  const double lx = static_cast<double>(x);
  return std::exp(-lambda + lx * std::log(lambda) - specfn::log_gamma(lx + 1.0));
}

double binomial_pmf(int n, double p, int x) {
  if (n < 1) throw std::domain_error("binomial_pmf: n must be >= 1");
  check_prob_open(p, "binomial success probability");
  if (x < 0 || x > n) throw std::domain_error("binomial_pmf: x outside [0, n]");
  const double nn = static_cast<double>(n);
  const double xx = static_cast<double>(x);
  const double log_coef = specfn::log_gamma(nn + 1.0) - specfn::log_gamma(xx + 1.0) -
                          specfn::log_gamma(nn - xx + 1.0);
  return std::exp(log_coef + xx * std::log(p) + (nn - xx) * std::log1p(-p));
}

double negbin_pmf(double k, double p, int x) {
  check_positive(k, "negbin size");
  check_prob_open(p, "negbin success probability");
  if (x < 0) throw std::domain_error("negbin_pmf: x must be >= 0");
  const double xx = static_cast<double>(x);
  const double log_coef =
      specfn::log_gamma(k + xx) - specfn::log_gamma(k) - specfn::log_gamma(xx + 1.0);
  return std::exp(log_coef + k * std::log(p) + xx * std::log1p(-p));
}

double gamma_log_pdf(double alpha, double beta, double x) {
  check_positive(alpha, "gamma shape");
  check_positive(beta, "gamma scale");
  if (!(x > 0.0)) return -kInf;
  return (alpha - 1.0) * std::log(x) - x / beta - specfn::log_gamma(alpha) -
         alpha * std::log(beta);
}

double gamma_pdf(double alpha, double beta, double x) {
  const double lp = gamma_log_pdf(alpha, beta, x);
  return lp == -kInf ? 0.0 : std::exp(lp);
}

double gamma_cdf(double alpha, double beta, double x) {
  check_positive(alpha, "gamma shape");
  check_positive(beta, "gamma scale");
  if (!(x > 0.0)) return 0.0;
  return specfn::reg_lower_incomplete_gamma(alpha, x / beta);
}

double gamma_survival(double alpha, double beta, double x) {
  check_positive(alpha, "gamma shape");
  check_positive(beta, "gamma scale");
  if (!(x > 0.0)) return 1.0;
  return specfn::reg_upper_incomplete_gamma(alpha, x / beta);
}

// ---------------------------------------------------------------------------
// Specs

PoissonBinomialSpec::PoissonBinomialSpec(std::vector<double> probs_in)
    : probs(std::move(probs_in)) {
  if (probs.empty()) {
    throw std::invalid_argument("PoissonBinomialSpec: needs at least one trial");
  }
  for (double p : probs) {
    if (!(p > 0.0) || !(p < 1.0)) {
      throw std::invalid_argument("PoissonBinomialSpec: probabilities must be in (0,1)");
    }
  }
}

FiniteMixingMeasure::FiniteMixingMeasure(std::vector<Atom> atoms_in)
    : atoms(std::move(atoms_in)) {
  if (atoms.empty()) {
    throw std::invalid_argument("FiniteMixingMeasure: needs at least one atom");
  }
  double wsum = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.t)) {
      throw std::invalid_argument("FiniteMixingMeasure: atom parameter must be finite");
    }
    if (!(a.w > 0.0) || !std::isfinite(a.w)) {
      throw std::invalid_argument("FiniteMixingMeasure: weights must be positive");
    }
    wsum += a.w;
  }
  if (std::fabs(wsum - 1.0) > 1e-12) {
    throw std::invalid_argument("FiniteMixingMeasure: weights must sum to one within 1e-12");
  }
}

GammaConvolutionSpec::GammaConvolutionSpec(std::vector<double> shapes_in,
                                           std::vector<double> scales_in)
    : shapes(std::move(shapes_in)), scales(std::move(scales_in)) {
  if (shapes.empty() || shapes.size() != scales.size()) {
    throw std::invalid_argument("GammaConvolutionSpec: shapes/scales size mismatch");
  }
  for (double a : shapes) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("GammaConvolutionSpec: shapes must be positive");
    }
  }
  for (double b : scales) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("GammaConvolutionSpec: scales must be positive");
    }
  }
}

double GammaConvolutionSpec::total_shape() const {
  return std::accumulate(shapes.begin(), shapes.end(), 0.0);
}

NegBinConvolutionSpec::NegBinConvolutionSpec(std::vector<double> sizes_in,
                                             std::vector<double> probs_in)
    : sizes(std::move(sizes_in)), probs(std::move(probs_in)) {
  if (sizes.empty() || sizes.size() != probs.size()) {
    throw std::invalid_argument("NegBinConvolutionSpec: sizes/probs size mismatch");
  }
  for (double k : sizes) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw std::invalid_argument("NegBinConvolutionSpec: sizes must be positive");
    }
  }
  for (double p : probs) {
    if (!(p > 0.0) || !(p < 1.0)) {
      throw std::invalid_argument("NegBinConvolutionSpec: probs must be in (0,1)");
    }
  }
}

double NegBinConvolutionSpec::total_size() const {
  return std::accumulate(sizes.begin(), sizes.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Builders

DiscreteDistribution poisson_binomial_pmf(const PoissonBinomialSpec& spec) {
  std::vector<double> pmf{1.0};
  for (double p : spec.probs) {
    std::vector<double> next(pmf.size() + 1, 0.0);
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      next[k] += pmf[k] * (1.0 - p);
      next[k + 1] += pmf[k] * p;
    }
    pmf.swap(next);
  }
  return DiscreteDistribution(std::move(pmf), 0.0);
}

DiscreteDistribution poisson_table(double lambda, double tail_tol) {
  check_positive(lambda, "poisson rate");
  check_tail_tol(tail_tol);
  return build_truncated_table([lambda](int x) { return poisson_pmf(lambda, x); },
                               tail_tol, "poisson_table");
}

DiscreteDistribution binomial_table(int n, double p) {
  if (n < 1) throw std::domain_error("binomial_table: n must be >= 1");
  check_prob_open(p, "binomial success probability");
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  for (int x = 0; x <= n; ++x) pmf[static_cast<std::size_t>(x)] = binomial_pmf(n, p, x);
  return DiscreteDistribution(std::move(pmf), 0.0);
}

DiscreteDistribution negbin_table(double k, double p, double tail_tol) {
  check_positive(k, "negbin size");
  check_prob_open(p, "negbin success probability");
  check_tail_tol(tail_tol);
  return build_truncated_table([k, p](int x) { return negbin_pmf(k, p, x); }, tail_tol,
                               "negbin_table");
}

DiscreteDistribution discrete_convolution_pmf(
    const std::vector<DiscreteDistribution>& components, double tail_tol) {
  if (components.empty()) {
    throw std::invalid_argument("discrete_convolution_pmf: no components");
  }
  check_tail_tol(tail_tol);
  const double per_component = tail_tol / (2.0 * static_cast<double>(components.size()));
  std::size_t result_size = 1;
  for (const DiscreteDistribution& c : components) {
    if (c.tail_mass_bound() > per_component) {
      throw std::invalid_argument(
          "discrete_convolution_pmf: component tail bound exceeds tail_tol/(2*count)");
    }
    result_size += static_cast<std::size_t>(c.max_support());
  }
  if (result_size > kMaxTableSize) {
    throw specfn::ConvergenceError(
        "discrete_convolution_pmf: result table would exceed the size cap");
  }
  std::vector<double> acc{1.0};
  for (const DiscreteDistribution& c : components) {
    const std::size_t m = static_cast<std::size_t>(c.max_support()) + 1;
    std::vector<double> next(acc.size() + m - 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      if (acc[i] == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        next[i + j] += acc[i] * c.pmf(static_cast<int>(j));
      }
    }
    acc.swap(next);
  }
  KahanSum sum;
  for (double v : acc) sum.add(v);
  return DiscreteDistribution(std::move(acc), std::max(0.0, 1.0 - sum.value()));
}

ContinuousDistribution gamma_distribution(double alpha, double beta) {
  check_positive(alpha, "gamma shape");
  check_positive(beta, "gamma scale");
  return ContinuousDistribution(
      [alpha, beta](double x) { return gamma_pdf(alpha, beta, x); },
      [alpha, beta](double x) { return gamma_cdf(alpha, beta, x); },
      [alpha, beta](double x) { return gamma_survival(alpha, beta, x); },
      [alpha, beta](double x) { return gamma_log_pdf(alpha, beta, x); },
      specfn::EvalError(1e-12, 1e-12));
}

DiscreteDistribution poisson_mixture(const FiniteMixingMeasure& mu, double tail_tol) {
  check_tail_tol(tail_tol);
  for (const auto& a : mu.atoms) check_positive(a.t, "poisson mixture rate atom");
  return build_truncated_table(
      [&mu](int x) {
        double s = 0.0;
        for (const auto& a : mu.atoms) s += a.w * poisson_pmf(a.t, x);
        return s;
      },
      tail_tol, "poisson_mixture");
}

DiscreteDistribution binomial_mixture(int n, const FiniteMixingMeasure& mu) {
  if (n < 1) throw std::domain_error("binomial_mixture: n must be >= 1");
  for (const auto& a : mu.atoms) check_prob_open(a.t, "binomial mixture atom");
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  for (int x = 0; x <= n; ++x) {
    double s = 0.0;
    for (const auto& a : mu.atoms) s += a.w * binomial_pmf(n, a.t, x);
    pmf[static_cast<std::size_t>(x)] = s;
  }
  return DiscreteDistribution(std::move(pmf), 0.0);
}

DiscreteDistribution negbin_mixture(double k, const FiniteMixingMeasure& mu,
                                    double tail_tol) {
  check_positive(k, "negbin size");
  check_tail_tol(tail_tol);
  for (const auto& a : mu.atoms) check_prob_open(a.t, "negbin mixture atom");
  return build_truncated_table(
      [k, &mu](int x) {
        double s = 0.0;
        for (const auto& a : mu.atoms) s += a.w * negbin_pmf(k, a.t, x);
        return s;
      },
      tail_tol, "negbin_mixture");
}

ContinuousDistribution gamma_mixture(double alpha, const FiniteMixingMeasure& mu) {
  check_positive(alpha, "gamma shape");
  for (const auto& a : mu.atoms) check_positive(a.t, "gamma mixture scale atom");
  const FiniteMixingMeasure m = mu;  // captured by value below
  return ContinuousDistribution(
      [alpha, m](double x) {
        double s = 0.0;
        for (const auto& a : m.atoms) s += a.w * gamma_pdf(alpha, a.t, x);
        return s;
      },
      [alpha, m](double x) {
        double s = 0.0;
        for (const auto& a : m.atoms) s += a.w * gamma_cdf(alpha, a.t, x);
        return s;
      },
      [alpha, m](double x) {
        double s = 0.0;
        for (const auto& a : m.atoms) s += a.w * gamma_survival(alpha, a.t, x);
        return s;
      },
      [alpha, m](double x) {
        std::vector<double> terms;
        terms.reserve(m.atoms.size());
        for (const auto& a : m.atoms) {
          terms.push_back(std::log(a.w) + gamma_log_pdf(alpha, a.t, x));
        }
        return specfn::log_sum_exp(terms);
      },
      specfn::EvalError(1e-12, 1e-11));
}

}  // namespace stochord::dist
