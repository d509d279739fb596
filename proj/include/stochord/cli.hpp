#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stochord/criteria.hpp"
#include "stochord/dist.hpp"

namespace stochord::cli {

inline constexpr std::string_view kToolName = "stochord";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct PoissonSpec {
  double lambda;
};
struct BinomialSpec {
  int n;
  double p;
};
struct NegBinSpec {
  double k;
  double p;
};
struct GammaSpec {
  double alpha;
  double beta;
};
/// mix(FAMILY; t1:w1, ...): the mixed parameter is the Poisson rate,
/// binomial/negbin success probability, or gamma scale; the fixed structure
/// (n, k, alpha) rides along on the family token.
struct MixSpec {
  criteria::Family family;
  int n;         // binomial
  double k;      // negbin
  double alpha;  // gamma
  dist::FiniteMixingMeasure mu;
};

using SpecValue =
    std::variant<PoissonSpec, BinomialSpec, NegBinSpec, GammaSpec,
                 dist::PoissonBinomialSpec, MixSpec, dist::GammaConvolutionSpec,
                 dist::NegBinConvolutionSpec>;

/// A parsed distribution expression plus its canonical re-rendering
/// (lower-case name, numbers at 12 significant digits).  Parsing the
/// canonical form reproduces it byte for byte.
struct DistSpec {
  SpecValue value;
  std::string canonical;
  bool discrete;
};

/// Grammar:
///   poisson(l) | binomial(n,p) | negbin(k,p) | gamma(a,b)
///   | pbin(p1,...,pn)
///   | mix(poisson; t1:w1, ...) | mix(binomial(n); ...) | mix(negbin(k); ...)
///   | mix(gamma(a); ...)
///   | gconv(a1:b1, ...) | nbconv(k1:p1, ...)
/// Throws std::invalid_argument with a position-annotated message.
DistSpec parse_dist_spec(std::string_view text);

/// Locale-independent rendering with 12 significant digits (printf %.12g
/// semantics via std::to_chars).
std::string format_real(double v);

struct RunResult {
  int exit_code = 0;
  std::string output;
  std::string error;
};

/// Runs the CLI on `args` (program name excluded), capturing stdout/stderr
/// payloads.  Exit codes: 0 all requested orders hold, 1 some order fails,
/// 2 usage or parse or incompatible-input errors, 3 criterion vs oracle
/// discrepancy.
RunResult run(const std::vector<std::string>& args);

/// Thin wrapper for main(): prints the captured streams and returns the code.
int main_entry(int argc, char** argv);

}  // namespace stochord::cli
