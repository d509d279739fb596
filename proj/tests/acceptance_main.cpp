// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit when
// anything fails.  argv[1] must point at the stochord CLI binary.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "stochord/criteria.hpp"
#include "stochord/dist.hpp"
#include "stochord/oracle.hpp"
#include "support.hpp"

using namespace stochord;
using oracle::CheckGrid;

namespace {

struct Gate {
  int failures = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      notes.push_back(what);
    }
  }
};

bool approx(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

dist::FiniteMixingMeasure random_mixture(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_int_distribution<int> natoms(2, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int m = natoms(rng);
  std::vector<double> w = testsupport::sample_dirichlet(rng, std::vector<double>(m, 1.0));
  std::vector<dist::FiniteMixingMeasure::Atom> atoms;
  for (int i = 0; i < m; ++i) {
    atoms.push_back({lo * std::exp(u(rng) * std::log(hi / lo)), w[i]});
  }
  return dist::FiniteMixingMeasure(atoms);
}

// --------------------------------------------------------------------------
// 1. Two-component gamma convolution: closed-form cutoffs and verdict flips.

void criterion_1(Gate& g) {
  dist::GammaConvolutionSpec spec({1.0, 2.0}, {1.0, 2.0});
  auto thr = criteria::gamma_convolution_thresholds(spec);
  g.expect(approx(thr.st_hr, std::cbrt(4.0), 1e-9), "st/hr cutoff != 4^(1/3)");
  g.expect(approx(thr.lr_rh, 1.5, 1e-12), "lr/rh cutoff != 1.5");

  auto y = dist::gamma_convolution_pdf(spec);
  auto run_pair = [&](double beta, bool stpair) {
    auto x = dist::gamma_distribution(3.0, beta);
    auto grid = CheckGrid::geometric(x, y, 1001);
    if (stpair) {
      return std::pair{oracle::check_st(x, y, grid), oracle::check_hr(x, y, grid)};
    }
    return std::pair{oracle::check_lr(x, y, grid), oracle::check_rh(x, y, grid)};
  };
  auto [st_lo, hr_lo] = run_pair(1.5715, true);
  auto [st_hi, hr_hi] = run_pair(1.6033, true);
  g.expect(st_lo.holds && hr_lo.holds, "st/hr do not hold at beta=1.5715");
  g.expect(!st_hi.holds && !hr_hi.holds, "st/hr do not fail at beta=1.6033");
  g.expect(st_hi.witness.has_value() && hr_hi.witness.has_value(),
           "failing st/hr scans carry no witness");
  auto [lr_lo, rh_lo] = run_pair(1.485, false);
  auto [lr_hi, rh_hi] = run_pair(1.515, false);
  g.expect(lr_lo.holds && rh_lo.holds, "lr/rh do not hold at beta=1.485");
  g.expect(!lr_hi.holds && !rh_hi.holds, "lr/rh do not fail at beta=1.515");
}

// --------------------------------------------------------------------------
// 2. All shapes 1 (hypoexponential), scales (1,2,4): geometric mean 2 and
// harmonic mean 12/7, oracle agreement at +-1% offsets.

void criterion_2(Gate& g) {
  dist::GammaConvolutionSpec spec({1.0, 1.0, 1.0}, {1.0, 2.0, 4.0});
  auto thr = criteria::gamma_convolution_thresholds(spec);
  g.expect(approx(thr.st_hr, 2.0, 1e-12), "geometric-mean cutoff != 2");
  g.expect(approx(thr.lr_rh, 12.0 / 7.0, 1e-12), "harmonic-mean cutoff != 12/7");

  auto y = dist::gamma_convolution_pdf(spec);
  for (double off : {0.99, 1.01}) {
    const bool want = off < 1.0;
    {
      auto x = dist::gamma_distribution(3.0, thr.st_hr * off);
      auto grid = CheckGrid::geometric(x, y, 1001);
      g.expect(oracle::check_st(x, y, grid).holds == want, "st disagrees at offset");
      g.expect(oracle::check_hr(x, y, grid).holds == want, "hr disagrees at offset");
    }
    {
      auto x = dist::gamma_distribution(3.0, thr.lr_rh * off);
      auto grid = CheckGrid::geometric(x, y, 1001);
      g.expect(oracle::check_lr(x, y, grid).holds == want, "lr disagrees at offset");
      g.expect(oracle::check_rh(x, y, grid).holds == want, "rh disagrees at offset");
    }
  }
}

// --------------------------------------------------------------------------
// 3. Negative binomial convolution, sizes (1,2), probs (0.3,0.6).

void criterion_3(Gate& g) {
  dist::NegBinConvolutionSpec spec({1.0, 2.0}, {0.3, 0.6});
  auto thr = criteria::negbin_convolution_thresholds(spec);
  g.expect(approx(thr.st_hr, std::cbrt(0.108), 1e-12), "st/hr cutoff != 0.108^(1/3)");
  g.expect(approx(thr.lr_rh, 0.5, 1e-12), "lr/rh cutoff != 0.5");

  std::vector<dist::DiscreteDistribution> comps{dist::negbin_table(1.0, 0.3, 1e-13),
                                                dist::negbin_table(2.0, 0.6, 1e-13)};
  auto y = dist::discrete_convolution_pmf(comps, 1e-12);
  for (double off : {0.98, 1.02}) {
    const bool want = off > 1.0;  // holds for p >= cutoff
    {
      auto x = dist::negbin_table(3.0, thr.st_hr * off);
      auto grid = CheckGrid::for_discrete(x, y);
      g.expect(oracle::check_st(x, y, grid).holds == want, "st disagrees at offset");
      g.expect(oracle::check_hr(x, y, grid).holds == want, "hr disagrees at offset");
    }
    {
      auto x = dist::negbin_table(3.0, thr.lr_rh * off);
      auto grid = CheckGrid::for_discrete(x, y);
      g.expect(oracle::check_lr(x, y, grid).holds == want, "lr disagrees at offset");
      g.expect(oracle::check_rh(x, y, grid).holds == want, "rh disagrees at offset");
    }
  }
}

// --------------------------------------------------------------------------
// 4. Poisson binomial (0.2,0.4,0.6) vs binomial(3,p): all four cutoffs, both
// directions, and the hazard-rate check at p = 0.43 / 0.41.

void criterion_4(Gate& g) {
  dist::PoissonBinomialSpec spec({0.2, 0.4, 0.6});
  auto thr = criteria::poisson_binomial_thresholds(spec);
  g.expect(approx(thr.st_upper, 1.0 - std::cbrt(0.192), 1e-12), "st_upper formula");
  g.expect(approx(thr.lr_upper, 1.0 - 3.0 / (1.25 + 5.0 / 3.0 + 2.5), 1e-12),
           "lr_upper formula");
  g.expect(approx(thr.st_lower, std::cbrt(0.048), 1e-12), "st_lower formula");
  g.expect(approx(thr.lr_lower, 3.0 / (5.0 + 2.5 + 5.0 / 3.0), 1e-12), "lr_lower formula");
  g.expect(approx(thr.lr_upper, 0.446154, 1e-6), "lr_upper decimal");
  g.expect(approx(thr.st_lower, 0.363424, 1e-6), "st_lower decimal");
  g.expect(approx(thr.lr_lower, 0.327273, 1e-6), "lr_lower decimal");

  auto pb = dist::poisson_binomial_pmf(spec);
  auto forward = [&](double p, bool stpair) {
    auto bin = dist::binomial_table(3, p);
    auto grid = CheckGrid::for_discrete(pb, bin);
    return stpair ? std::pair{oracle::check_st(pb, bin, grid).holds,
                              oracle::check_hr(pb, bin, grid).holds}
                  : std::pair{oracle::check_lr(pb, bin, grid).holds,
                              oracle::check_rh(pb, bin, grid).holds};
  };
  auto reverse = [&](double p, bool stpair) {
    auto bin = dist::binomial_table(3, p);
    auto grid = CheckGrid::for_discrete(bin, pb);
    return stpair ? std::pair{oracle::check_st(bin, pb, grid).holds,
                              oracle::check_rh(bin, pb, grid).holds}
                  : std::pair{oracle::check_lr(bin, pb, grid).holds,
                              oracle::check_hr(bin, pb, grid).holds};
  };
  for (double off : {-0.02, 0.02}) {
    const bool up = off > 0.0;
    auto [a, b] = forward(thr.st_upper + off, true);
    g.expect(a == up && b == up, "forward st/hr disagree at offset");
    auto [c, d] = forward(thr.lr_upper + off, false);
    g.expect(c == up && d == up, "forward lr/rh disagree at offset");
    auto [e, f] = reverse(thr.st_lower + off, true);
    g.expect(e == !up && f == !up, "reverse st/rh disagree at offset");
    auto [h, i] = reverse(thr.lr_lower + off, false);
    g.expect(h == !up && i == !up, "reverse lr/hr disagree at offset");
  }
  auto hi = dist::binomial_table(3, 0.43);
  auto lo = dist::binomial_table(3, 0.41);
  g.expect(oracle::check_hr(pb, hi, CheckGrid::for_discrete(pb, hi)).holds,
           "hr fails at p=0.43");
  g.expect(!oracle::check_hr(pb, lo, CheckGrid::for_discrete(pb, lo)).holds,
           "hr holds at p=0.41");
}

// --------------------------------------------------------------------------
// 5. Paired-order equivalences on random component-vs-mixture instances,
// which are relatively log-concave pairs: st <=> hr, lr <=> rh, no
// exceptions allowed.

void criterion_5(Gate& g) {
  std::mt19937_64 rng(90210);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nd(2, 8);
  int checked = 0;
  int mismatches = 0;
  int lc_failures = 0;

  auto tally_discrete = [&](const dist::DiscreteDistribution& x,
                            const dist::DiscreteDistribution& y) {
    auto grid = CheckGrid::for_discrete(x, y);
    if (!oracle::check_lc(x, y, grid).holds) ++lc_failures;
    const bool st = oracle::check_st(x, y, grid).holds;
    const bool hr = oracle::check_hr(x, y, grid).holds;
    const bool rh = oracle::check_rh(x, y, grid).holds;
    const bool lr = oracle::check_lr(x, y, grid).holds;
    if (st != hr || lr != rh) ++mismatches;
    ++checked;
  };

  for (int trial = 0; trial < 200; ++trial) {
    {
      auto mu = random_mixture(rng, 0.2, 8.0);
      const double lam = 0.2 * std::exp(u(rng) * std::log(40.0));
      tally_discrete(dist::poisson_table(lam), dist::poisson_mixture(mu));
    }
    {
      const int n = nd(rng);
      auto mu = random_mixture(rng, 0.08, 0.9);
      const double p = 0.05 + 0.9 * u(rng);
      tally_discrete(dist::binomial_table(n, p), dist::binomial_mixture(n, mu));
    }
    {
      const double k = 0.5 * std::exp(u(rng) * std::log(5.0));
      auto mu = random_mixture(rng, 0.25, 0.9);
      const double p = 0.25 + 0.65 * u(rng);
      tally_discrete(dist::negbin_table(k, p), dist::negbin_mixture(k, mu));
    }
    {
      const double alpha = 0.5 * std::exp(u(rng) * std::log(6.0));
      auto mu = random_mixture(rng, 0.3, 3.0);
      const double beta = 0.3 * std::exp(u(rng) * std::log(10.0));
      auto x = dist::gamma_distribution(alpha, beta);
      auto y = dist::gamma_mixture(alpha, mu);
      if (!oracle::check_lc(x, y, CheckGrid::uniform_for_lc(x, y)).holds) ++lc_failures;
      auto grid = CheckGrid::geometric(x, y, 1001);
      const bool st = oracle::check_st(x, y, grid).holds;
      const bool hr = oracle::check_hr(x, y, grid).holds;
      const bool rh = oracle::check_rh(x, y, grid).holds;
      const bool lr = oracle::check_lr(x, y, grid).holds;
      if (st != hr || lr != rh) ++mismatches;
      ++checked;
    }
  }
  g.expect(checked == 800, "instance count");
  g.expect(lc_failures == 0, "a mixture pair failed the log-concavity scan");
  g.expect(mismatches == 0, "paired orders disagreed on " + std::to_string(mismatches) +
                                " instances");
}

// --------------------------------------------------------------------------
// 6. Dirichlet negative moments vs a seeded 1e7-draw Monte Carlo.

void criterion_6(Gate& g) {
  dist::GammaConvolutionSpec spec({1.0, 2.0}, {1.0, 2.0});
  const double exact0 =
      criteria::dirichlet_negative_moment(spec, criteria::NegativeMomentOrder::total_shape);
  const double exact1 = criteria::dirichlet_negative_moment(
      spec, criteria::NegativeMomentOrder::total_shape_plus_one);
  g.expect(approx(exact0, 0.25, 1e-13), "order-3 closed form != 1/4");
  g.expect(approx(exact1, 1.0 / 6.0, 1e-13), "order-4 closed form != 1/6");

  std::mt19937_64 rng(20260814);
  const int n = 10'000'000;
  const double q0 = spec.total_shape();
  double sum0 = 0.0, sq0 = 0.0, sum1 = 0.0, sq1 = 0.0;
  for (int i = 0; i < n; ++i) {
    auto d = testsupport::sample_dirichlet(rng, spec.shapes);
    double base = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) base += spec.scales[j] * d[j];
    const double v0 = std::pow(base, -q0);
    const double v1 = v0 / base;
    sum0 += v0;
    sq0 += v0 * v0;
    sum1 += v1;
    sq1 += v1 * v1;
  }
  const double m0 = sum0 / n, se0 = std::sqrt((sq0 / n - m0 * m0) / n);
  const double m1 = sum1 / n, se1 = std::sqrt((sq1 / n - m1 * m1) / n);
  g.expect(std::fabs(m0 - exact0) < 4.0 * se0, "order-3 Monte Carlo outside 4 SE");
  g.expect(std::fabs(m1 - exact1) < 4.0 * se1, "order-4 Monte Carlo outside 4 SE");
}

// --------------------------------------------------------------------------
// 7. Dispersive verdict tracks the st cutoff at +-5% offsets; the star order
// holds unconditionally for gamma(total shape) vs the convolution.

void criterion_7(Gate& g) {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nd(2, 4);
  auto qgrid = oracle::default_quantile_grid();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> shapes, scales;
    for (int i = 0, n = nd(rng); i < n; ++i) {
      shapes.push_back(0.4 * std::exp(u(rng) * std::log(6.0)));
      scales.push_back(0.4 * std::exp(u(rng) * std::log(6.0)));
    }
    dist::GammaConvolutionSpec spec(shapes, scales);
    const double cutoff = criteria::gamma_convolution_thresholds(spec).st_hr;
    auto y = dist::gamma_convolution_pdf(spec);
    for (double off : {0.95, 1.05}) {
      const double beta = cutoff * off;
      auto x = dist::gamma_distribution(spec.total_shape(), beta);
      const bool want = beta <= cutoff;
      g.expect(criteria::gamma_disp_criterion(spec, beta) == want, "disp criterion");
      g.expect(oracle::check_disp(x, y, qgrid).holds == want, "disp scan vs st cutoff");
      auto grid = CheckGrid::geometric(x, y, 1001);
      g.expect(oracle::check_star(x, y, grid).holds, "star scan failed");
    }
  }
}

// --------------------------------------------------------------------------
// 8. Distribution correctness: sampling KS for the convolution density, the
// two-scale hypoexponential closed form, and negative binomial as a
// Poisson-gamma mixture.

void criterion_8(Gate& g) {
  {
    dist::GammaConvolutionSpec spec({1.0, 2.0}, {1.0, 2.0});
    auto y = dist::gamma_convolution_pdf(spec);
    std::mt19937_64 rng(424242);
    const int n = 1'000'000;
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < spec.shapes.size(); ++j) {
        acc += testsupport::sample_gamma(rng, spec.shapes[j], spec.scales[j]);
      }
      s[static_cast<std::size_t>(i)] = acc;
    }
    std::sort(s.begin(), s.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = y.cdf(s[static_cast<std::size_t>(i)]);
      const double lo = static_cast<double>(i) / n;
      const double hi = static_cast<double>(i + 1) / n;
      ks = std::max({ks, std::fabs(f - lo), std::fabs(f - hi)});
    }
    g.expect(ks <= 0.002, "convolution KS distance " + std::to_string(ks));
  }
  {
    auto hypo = dist::gamma_convolution_pdf(dist::GammaConvolutionSpec({1.0, 1.0}, {1.0, 2.0}));
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = 0.01 + (20.0 - 0.01) * i / 2000.0;
      const double exact = std::exp(-x / 2.0) - std::exp(-x);
      worst = std::max(worst, std::fabs(hypo.pdf(x) - exact));
    }
    g.expect(worst <= 1e-8, "hypoexponential max error " + std::to_string(worst));
  }
  {
    // NB(k,p) pmf as a Poisson rate mixture against Gamma(k, (1-p)/p),
    // integrated with Gauss-Legendre after the lambda = u^2 substitution.
    double worst = 0.0;
    for (double k : {1.0, 2.5}) {
      for (double p : {0.4, 0.7}) {
        const double scale = (1.0 - p) / p;
        const int kMaxX = 40;
        const double lam_hi =
            scale * (k + kMaxX + 40.0 * std::sqrt(k + kMaxX) + 40.0);
        auto quad = testsupport::gauss_legendre(4096, 0.0, std::sqrt(lam_hi));
        auto nb = dist::negbin_table(k, p, 1e-14);
        auto gam = dist::gamma_distribution(k, scale);
        for (int x = 0; x <= kMaxX; ++x) {
          double acc = 0.0;
          for (std::size_t j = 0; j < quad.nodes.size(); ++j) {
            const double uu = quad.nodes[j];
            const double lam = uu * uu;
            if (lam <= 0.0) continue;
            const double log_po =
                -lam + x * std::log(lam) - std::lgamma(x + 1.0);
            acc += quad.weights[j] * std::exp(log_po + gam.log_pdf(lam)) * 2.0 * uu;
          }
          worst = std::max(worst, std::fabs(acc - nb.pmf(x)));
        }
      }
    }
    g.expect(worst <= 2e-4, "Poisson-gamma mixture max error " + std::to_string(worst));
  }
}

// --------------------------------------------------------------------------
// 9. CLI example invocations: exit codes and byte-stable 12-digit cutoffs.

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& binary, const std::string& args) {
  CliResult res;
  const std::string cmd = "\"" + binary + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return res;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.output.append(buf, got);
  const int status = pclose(pipe);
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  return res;
}

void criterion_9(Gate& g, const std::string& binary) {
  auto a = run_cli(binary, "compare 'gamma(3,1.5)' 'gconv(1:1, 2:2)' --orders st,hr,lr,rh");
  g.expect(a.exit_code == 0, "worked gconv compare exit code " + std::to_string(a.exit_code));
  g.expect(a.output.find("\"all_hold\":true") != std::string::npos,
           "worked gconv compare does not report all_hold");

  auto b = run_cli(binary, "compare 'poisson(2)' 'poisson(2)'");
  g.expect(b.exit_code == 0, "identity compare exit code " + std::to_string(b.exit_code));

  auto c = run_cli(binary, "compare 'negbin(3,0.49)' 'nbconv(1:0.3, 2:0.6)' --orders lr");
  g.expect(c.exit_code == 1, "failing lr compare exit code " + std::to_string(c.exit_code));
  g.expect(c.output.find("\"witness\":") != std::string::npos, "failing compare lacks witness");

  auto t1 = run_cli(binary, "threshold 'gconv(1:1, 2:2)'");
  g.expect(t1.exit_code == 0, "gconv threshold exit code");
  g.expect(t1.output.find("1.58740105197") != std::string::npos, "gconv st/hr digits");
  g.expect(t1.output.find("\"threshold\":1.5}") != std::string::npos, "gconv lr/rh digits");

  auto t2 = run_cli(binary, "threshold 'nbconv(1:0.3, 2:0.6)'");
  g.expect(t2.exit_code == 0, "nbconv threshold exit code");
  g.expect(t2.output.find("0.47622031559") != std::string::npos, "nbconv st/hr digits");
  g.expect(t2.output.find("\"threshold\":0.5}") != std::string::npos, "nbconv lr/rh digits");

  for (int i = 0; i < 2; ++i) {
    auto r1 = run_cli(binary, "threshold 'gconv(1:1, 2:2)'");
    auto r2 = run_cli(binary, "threshold 'nbconv(1:0.3, 2:0.6)'");
    g.expect(r1.output == t1.output, "gconv threshold output not byte stable");
    g.expect(r2.output == t2.output, "nbconv threshold output not byte stable");
  }
}

int run_all(const std::string& binary) {
  struct Entry {
    const char* name;
    std::function<void(Gate&)> fn;
    double budget_s;  // 0 = no pinned budget
  };
  const std::vector<Entry> entries = {
      {"1 gamma convolution cutoffs + oracle verdict flips", criterion_1, 30.0},
      {"2 unit-shape scales (1,2,4): geometric 2, harmonic 12/7", criterion_2, 0.0},
      {"3 negbin convolution cutoffs + oracle at +-2%", criterion_3, 0.0},
      {"4 poisson-binomial cutoffs, both directions, hr at 0.43/0.41", criterion_4, 0.0},
      {"5 st<=>hr and lr<=>rh on 800 random log-concave pairs", criterion_5, 0.0},
      {"6 Dirichlet negative moments vs 1e7-draw Monte Carlo", criterion_6, 60.0},
      {"7 disp tracks the st cutoff, star always holds (50 instances)", criterion_7, 0.0},
      {"8 convolution KS, hypoexponential, Poisson-gamma mixture", criterion_8, 0.0},
  };

  int failed = 0;
  auto report = [&](const char* name, const Gate& g, double secs, double budget) {
    const bool over = budget > 0.0 && secs > budget;
    const bool ok = g.failures == 0 && !over;
    std::printf("[%s] %s (%.1fs)\n", ok ? "PASS" : "FAIL", name, secs);
    for (const auto& n : g.notes) std::printf("       - %s\n", n.c_str());
    if (over) std::printf("       - exceeded %.0fs budget\n", budget);
    if (!ok) ++failed;
  };

  for (const auto& e : entries) {
    Gate g;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      e.fn(g);
    } catch (const std::exception& ex) {
      g.expect(false, std::string("exception: ") + ex.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(e.name, g, secs, e.budget_s);
  }

  {
    Gate g;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criterion_9(g, binary);
    } catch (const std::exception& ex) {
      g.expect(false, std::string("exception: ") + ex.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report("9 CLI invocations: exit codes and byte-stable digits", g, secs, 0.0);
  }

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-stochord-cli>\n");
    return 2;
  }
  return run_all(argv[1]);
}
