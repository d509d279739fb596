#pragma once

// Shared helpers for the test binaries: Gauss-Legendre nodes and seeded
// gamma/Dirichlet samplers.  Test-only; not part of the library surface.

#include <cmath>
#include <random>
#include <vector>

namespace testsupport {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [a, b] by Newton iteration on the Legendre
/// recurrence.  Machine-accurate nodes; n up to a few thousand is fine.
inline Quadrature gauss_legendre(int n, double a, double b) {
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 1e-15) break;
    }
    q.nodes[i] = mid - half * z;
    q.nodes[n - 1 - i] = mid + half * z;
    q.weights[i] = q.weights[n - 1 - i] = 2.0 * half / ((1.0 - z * z) * pp * pp);
  }
  return q;
}

inline double sample_gamma(std::mt19937_64& rng, double shape, double scale) {
  std::gamma_distribution<double> g(shape, scale);
  return g(rng);
}

/// One Dirichlet(alpha) draw via normalized gamma variates.
inline std::vector<double> sample_dirichlet(std::mt19937_64& rng,
                                            const std::vector<double>& alpha) {
  std::vector<double> d(alpha.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    d[i] = sample_gamma(rng, alpha[i], 1.0);
    sum += d[i];
  }
  for (double& v : d) v /= sum;
  return d;
}

}  // namespace testsupport
