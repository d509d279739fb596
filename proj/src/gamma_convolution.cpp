#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "stochord/dist.hpp"

namespace stochord::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxSeriesTerms = 20000;
constexpr double kScaleRatioCap = 1e4;
constexpr double kWeightTail = 1e-12;

// Single-scale representation of sum_i beta_i * Gamma(alpha_i, 1): a mixture
// over shapes a0 + m at scale beta_min.  Weights are nonnegative and sum to
// one up to `tail`.
struct Series {
  double a0;
  double beta_min;
  std::vector<double> w;
  double tail;
};

Series build_series(const GammaConvolutionSpec& spec) {
  const std::size_t n = spec.shapes.size();
  const double beta_min = *std::min_element(spec.scales.begin(), spec.scales.end());
  const double beta_max = *std::max_element(spec.scales.begin(), spec.scales.end());
  if (beta_max / beta_min > kScaleRatioCap) {
    throw specfn::ConvergenceError(
        "gamma_convolution_pdf: scale ratio above 1e4, series would converge too slowly");
  }

  Series s;
  s.a0 = spec.total_shape();
  s.beta_min = beta_min;

  double log_c = 0.0;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = 1.0 - beta_min / spec.scales[i];
    log_c += spec.shapes[i] * std::log(beta_min / spec.scales[i]);
  }
  const double c0 = std::exp(log_c);

  std::vector<double> delta{1.0};
  std::vector<double> coef;          // coef[j-1] = sum_i alpha_i r_i^j
  std::vector<double> rpow(n, 1.0);  // running r_i^j
  double wsum = c0;
  while (1.0 - wsum > kWeightTail) {
    if (delta.size() >= kMaxSeriesTerms) {
      throw specfn::ConvergenceError(
          "gamma_convolution_pdf: series term cap hit before reaching weight tail");
    }
    double cj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rpow[i] *= r[i];
      cj += spec.shapes[i] * rpow[i];
    }
    coef.push_back(cj);
    const std::size_t m1 = delta.size();
    double acc = 0.0;
    for (std::size_t j = 1; j <= m1; ++j) acc += coef[j - 1] * delta[m1 - j];
    delta.push_back(acc / static_cast<double>(m1));
    wsum += c0 * delta.back();
  }

  s.w.resize(delta.size());
  for (std::size_t m = 0; m < delta.size(); ++m) s.w[m] = c0 * delta[m];
  s.tail = std::max(0.0, 1.0 - wsum);
  return s;
}

double series_pdf(const Series& s, double x) {
  const double y = x / s.beta_min;
  double g = std::exp((s.a0 - 1.0) * std::log(x) - y - specfn::log_gamma(s.a0) -
                      s.a0 * std::log(s.beta_min));
  double acc = 0.0;
  for (std::size_t m = 0; m < s.w.size(); ++m) {
    acc += s.w[m] * g;
    g *= y / (s.a0 + static_cast<double>(m));
  }
  return acc;
}

// P and Q walk the shape ladder by P(a+1,y) = P(a,y) - y^a e^-y / Gamma(a+1),
// so one incomplete-gamma call covers the whole series.
double series_cdf(const Series& s, double x) {
  const double y = x / s.beta_min;
  double p = specfn::reg_lower_incomplete_gamma(s.a0, y);
  double d = std::exp(s.a0 * std::log(y) - y - specfn::log_gamma(s.a0 + 1.0));
  double acc = 0.0;
  for (std::size_t m = 0; m < s.w.size(); ++m) {
    acc += s.w[m] * p;
    p = std::max(0.0, p - d);
    d *= y / (s.a0 + static_cast<double>(m) + 1.0);
  }
  return std::clamp(acc, 0.0, 1.0);
}

double series_survival(const Series& s, double x) {
  const double y = x / s.beta_min;
  double q = specfn::reg_upper_incomplete_gamma(s.a0, y);
  double d = std::exp(s.a0 * std::log(y) - y - specfn::log_gamma(s.a0 + 1.0));
  double acc = s.tail;  // unassigned weight sits at high shapes, which survive
  for (std::size_t m = 0; m < s.w.size(); ++m) {
    acc += s.w[m] * q;
    q = std::min(1.0, q + d);
    d *= y / (s.a0 + static_cast<double>(m) + 1.0);
  }
  return std::clamp(acc, 0.0, 1.0);
}

}  // namespace

ContinuousDistribution gamma_convolution_pdf(const GammaConvolutionSpec& spec) {
  auto series = std::make_shared<const Series>(build_series(spec));
  return ContinuousDistribution(
      [series](double x) { return series_pdf(*series, x); },
      [series](double x) { return series_cdf(*series, x); },
      [series](double x) { return series_survival(*series, x); },
      [series](double x) {
        const double f = series_pdf(*series, x);
        return f > 0.0 ? std::log(f) : -kInf;
      },
      specfn::EvalError(1e-9, 1e-9));
}

}  // namespace stochord::dist
