#include "stochord/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <CLI11.hpp>

#include "stochord/oracle.hpp"

namespace stochord::cli {
namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

// ---------------------------------------------------------------------------
// JSON / CSV emission.

class JsonWriter {
 public:
  std::string take() && { return std::move(out_); }

  void begin_object() {
    separate();
    out_ += '{';
    fresh_ = true;
  }
  void end_object() {
    out_ += '}';
    fresh_ = false;
  }
  void begin_array() {
    separate();
    out_ += '[';
    fresh_ = true;
  }
  void end_array() {
    out_ += ']';
    fresh_ = false;
  }
  void key(std::string_view k) {
    separate();
    quote(k);
    out_ += ':';
    after_key_ = true;
  }
  void value(std::string_view s) {
    separate();
    quote(s);
  }
  void value(const char* s) { value(std::string_view(s)); }
  void value(double v) {
    separate();
    if (std::isfinite(v)) {
      out_ += format_real(v);
    } else {
      out_ += "null";
    }
  }
  void value(long v) {
    separate();
    out_ += std::to_string(v);
  }
  void value(int v) { value(static_cast<long>(v)); }
  void value(bool b) {
    separate();
    out_ += b ? "true" : "false";
  }
  void value_null() {
    separate();
    out_ += "null";
  }

 private:
  void separate() {
    if (after_key_) {
      after_key_ = false;
      return;
    }
    if (!fresh_ && !out_.empty() && out_.back() != '{' && out_.back() != '[') out_ += ',';
    fresh_ = false;
  }
  void quote(std::string_view s) {
    out_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  bool fresh_ = true;
  bool after_key_ = false;
};

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// ---------------------------------------------------------------------------
// Spec grammar.

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  SpecValue parse() {
    skip_ws();
    std::string name = ident();
    SpecValue v = [&]() -> SpecValue {
      if (name == "poisson") return parse_poisson();
      if (name == "binomial") return parse_binomial();
      if (name == "negbin") return parse_negbin();
      if (name == "gamma") return parse_gamma();
      if (name == "pbin") return parse_pbin();
      if (name == "mix") return parse_mix();
      if (name == "gconv") return parse_gconv();
      if (name == "nbconv") return parse_nbconv();
      fail("unknown distribution '" + name + "'");
    }();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return v;
  }

 private:
  SpecValue parse_poisson() {
    expect('(');
    double l = number();
    expect(')');
    return PoissonSpec{l};
  }
  SpecValue parse_binomial() {
    expect('(');
    int n = integer();
    expect(',');
    double p = number();
    expect(')');
    return BinomialSpec{n, p};
  }
  SpecValue parse_negbin() {
    expect('(');
    double k = number();
    expect(',');
    double p = number();
    expect(')');
    return NegBinSpec{k, p};
  }
  SpecValue parse_gamma() {
    expect('(');
    double a = number();
    expect(',');
    double b = number();
    expect(')');
    return GammaSpec{a, b};
  }
  SpecValue parse_pbin() {
    expect('(');
    std::vector<double> ps;
    ps.push_back(number());
    while (eat(',')) ps.push_back(number());
    expect(')');
    return dist::PoissonBinomialSpec(std::move(ps));
  }
  SpecValue parse_mix() {
    expect('(');
    skip_ws();
    std::string fam = ident();
    criteria::Family family;
    int n = 0;
    double k = 0.0, alpha = 0.0;
    if (fam == "poisson") {
      family = criteria::Family::poisson;
    } else if (fam == "binomial") {
      family = criteria::Family::binomial;
      expect('(');
      n = integer();
      expect(')');
    } else if (fam == "negbin") {
      family = criteria::Family::negbin;
      expect('(');
      k = number();
      expect(')');
    } else if (fam == "gamma") {
      family = criteria::Family::gamma;
      expect('(');
      alpha = number();
      expect(')');
    } else {
      fail("unknown mixture family '" + fam + "'");
    }
    expect(';');
    std::vector<dist::FiniteMixingMeasure::Atom> atoms;
    do {
      double t = number();
      expect(':');
      double w = number();
      atoms.push_back({t, w});
    } while (eat(','));
    expect(')');
    return MixSpec{family, n, k, alpha, dist::FiniteMixingMeasure(std::move(atoms))};
  }
  SpecValue parse_gconv() {
    expect('(');
    std::vector<double> shapes, scales;
    do {
      shapes.push_back(number());
      expect(':');
      scales.push_back(number());
    } while (eat(','));
    expect(')');
    return dist::GammaConvolutionSpec(std::move(shapes), std::move(scales));
  }
  SpecValue parse_nbconv() {
    expect('(');
    std::vector<double> sizes, probs;
    do {
      sizes.push_back(number());
      expect(':');
      probs.push_back(number());
    } while (eat(','));
    expect(')');
    return dist::NegBinConvolutionSpec(std::move(sizes), std::move(probs));
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }
  double number() {
    skip_ws();
    double v = 0.0;
    auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc()) fail("expected a number");
    pos_ = static_cast<std::size_t>(p - text_.data());
    return v;
  }
  int integer() {
    skip_ws();
    int v = 0;
    auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc()) fail("expected an integer");
    pos_ = static_cast<std::size_t>(p - text_.data());
    return v;
  }
  [[noreturn]] void fail(const std::string& why) {
    throw std::invalid_argument("spec parse error at position " + std::to_string(pos_) +
                                ": " + why + " in '" + std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string render(const SpecValue& v) {
  auto F = [](double x) { return format_real(x); };
  return std::visit(
      Overload{
          [&](const PoissonSpec& s) { return "poisson(" + F(s.lambda) + ")"; },
          [&](const BinomialSpec& s) {
            return "binomial(" + std::to_string(s.n) + ", " + F(s.p) + ")";
          },
          [&](const NegBinSpec& s) { return "negbin(" + F(s.k) + ", " + F(s.p) + ")"; },
          [&](const GammaSpec& s) { return "gamma(" + F(s.alpha) + ", " + F(s.beta) + ")"; },
          [&](const dist::PoissonBinomialSpec& s) {
            std::string out = "pbin(";
            for (std::size_t i = 0; i < s.probs.size(); ++i) {
              if (i) out += ", ";
              out += F(s.probs[i]);
            }
            return out + ")";
          },
          [&](const MixSpec& s) {
            std::string out = "mix(";
            switch (s.family) {
              case criteria::Family::poisson: out += "poisson"; break;
              case criteria::Family::binomial: out += "binomial(" + std::to_string(s.n) + ")"; break;
              case criteria::Family::negbin: out += "negbin(" + F(s.k) + ")"; break;
              case criteria::Family::gamma: out += "gamma(" + F(s.alpha) + ")"; break;
            }
            out += "; ";
            for (std::size_t i = 0; i < s.mu.atoms.size(); ++i) {
              if (i) out += ", ";
              out += F(s.mu.atoms[i].t) + ":" + F(s.mu.atoms[i].w);
            }
            return out + ")";
          },
          [&](const dist::GammaConvolutionSpec& s) {
            std::string out = "gconv(";
            for (std::size_t i = 0; i < s.shapes.size(); ++i) {
              if (i) out += ", ";
              out += F(s.shapes[i]) + ":" + F(s.scales[i]);
            }
            return out + ")";
          },
          [&](const dist::NegBinConvolutionSpec& s) {
            std::string out = "nbconv(";
            for (std::size_t i = 0; i < s.sizes.size(); ++i) {
              if (i) out += ", ";
              out += F(s.sizes[i]) + ":" + F(s.probs[i]);
            }
            return out + ")";
          },
      },
      v);
}

bool spec_is_discrete(const SpecValue& v) {
  return std::visit(Overload{
                        [](const GammaSpec&) { return false; },
                        [](const dist::GammaConvolutionSpec&) { return false; },
                        [](const MixSpec& s) { return s.family != criteria::Family::gamma; },
                        [](const auto&) { return true; },
                    },
                    v);
}

// ---------------------------------------------------------------------------
// Building and dispatch.

using AnyDist = std::variant<dist::DiscreteDistribution, dist::ContinuousDistribution>;

AnyDist build_distribution(const SpecValue& v, double tail_tol) {
  return std::visit(
      Overload{
          [&](const PoissonSpec& s) -> AnyDist { return dist::poisson_table(s.lambda, tail_tol); },
          [&](const BinomialSpec& s) -> AnyDist { return dist::binomial_table(s.n, s.p); },
          [&](const NegBinSpec& s) -> AnyDist { return dist::negbin_table(s.k, s.p, tail_tol); },
          [&](const GammaSpec& s) -> AnyDist { return dist::gamma_distribution(s.alpha, s.beta); },
          [&](const dist::PoissonBinomialSpec& s) -> AnyDist {
            return dist::poisson_binomial_pmf(s);
          },
          [&](const MixSpec& s) -> AnyDist {
            switch (s.family) {
              case criteria::Family::poisson: return dist::poisson_mixture(s.mu, tail_tol);
              case criteria::Family::binomial: return dist::binomial_mixture(s.n, s.mu);
              case criteria::Family::negbin: return dist::negbin_mixture(s.k, s.mu, tail_tol);
              case criteria::Family::gamma: return dist::gamma_mixture(s.alpha, s.mu);
            }
            throw std::logic_error("unreachable mixture family");
          },
          [&](const dist::GammaConvolutionSpec& s) -> AnyDist {
            return dist::gamma_convolution_pdf(s);
          },
          [&](const dist::NegBinConvolutionSpec& s) -> AnyDist {
            std::vector<dist::DiscreteDistribution> comps;
            double per = tail_tol / (2.0 * static_cast<double>(s.sizes.size()));
            for (std::size_t i = 0; i < s.sizes.size(); ++i)
              comps.push_back(dist::negbin_table(s.sizes[i], s.probs[i], per));
            return dist::discrete_convolution_pmf(comps, tail_tol);
          },
      },
      v);
}

struct CriterionEntry {
  std::string rule;
  criteria::Inequality ineq;
};
using CriteriaMap = std::map<oracle::Order, CriterionEntry>;

void add_criterion(CriteriaMap& m, std::initializer_list<oracle::Order> orders,
                   const std::string& rule, const criteria::Inequality& ineq) {
  for (auto o : orders) m.insert({o, CriterionEntry{rule, ineq}});
}

bool param_match(double a, double b) {
  return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

dist::FiniteMixingMeasure point_mass(double t) {
  return dist::FiniteMixingMeasure({{t, 1.0}});
}

/// Every closed form that decides "x <= y" for some orders.  Pairs with no
/// closed form get an empty map and run oracle-only.
CriteriaMap closed_forms(const SpecValue& x, const SpecValue& y) {
  using criteria::Direction;
  using criteria::Family;
  using oracle::Order;
  CriteriaMap m;

  if (const auto* px = std::get_if<PoissonSpec>(&x)) {
    std::optional<dist::FiniteMixingMeasure> mu;
    if (const auto* py = std::get_if<PoissonSpec>(&y)) {
      mu = point_mass(py->lambda);
    } else if (const auto* my = std::get_if<MixSpec>(&y); my && my->family == Family::poisson) {
      mu = my->mu;
    }
    if (mu) {
      auto kern = criteria::poisson_kernel();
      auto stc = criteria::expfam_mixture_st_criterion(kern, px->lambda, *mu);
      auto lrc = criteria::expfam_mixture_lr_criterion(kern, px->lambda, *mu);
      add_criterion(m, {Order::st, Order::hr},
                    "sum_i w_i exp(-t_i) <= exp(-lambda)", *stc.st_hr);
      add_criterion(m, {Order::lr, Order::rh},
                    "lambda <= sum_i w_i t_i exp(-t_i) / sum_i w_i exp(-t_i)", *lrc.lr_rh);
    }
  }

  if (const auto* bx = std::get_if<BinomialSpec>(&x)) {
    std::optional<dist::FiniteMixingMeasure> mu;
    if (const auto* by = std::get_if<BinomialSpec>(&y); by && by->n == bx->n) {
      mu = point_mass(by->p);
    } else if (const auto* my = std::get_if<MixSpec>(&y);
               my && my->family == Family::binomial && my->n == bx->n) {
      mu = my->mu;
    }
    if (mu) {
      auto r = criteria::binomial_mixture_criteria(bx->n, bx->p, *mu,
                                                   Direction::component_le_mixture);
      add_criterion(m, {Order::st, Order::hr},
                    "sum_i w_i (1-t_i)^n <= (1-p)^n", *r.st_hr);
      add_criterion(m, {Order::lr, Order::rh},
                    "p <= sum_i w_i t_i (1-t_i)^(n-1) / sum_i w_i (1-t_i)^(n-1)", *r.lr_rh);
    }
  }

  // Binomial is the one family with a closed form for mixture <= component;
  // the pairing crosses there (st with rh, lr with hr).
  if (const auto* by = std::get_if<BinomialSpec>(&y)) {
    if (const auto* mx = std::get_if<MixSpec>(&x);
        mx && mx->family == Family::binomial && mx->n == by->n) {
      auto r = criteria::binomial_mixture_criteria(by->n, by->p, mx->mu,
                                                   Direction::mixture_le_component);
      add_criterion(m, {Order::st, Order::rh}, "sum_i w_i t_i^n <= p^n", *r.st_hr);
      add_criterion(m, {Order::lr, Order::hr},
                    "sum_i w_i t_i^n / sum_i w_i t_i^(n-1) <= p", *r.lr_rh);
    }
  }

  if (const auto* nx = std::get_if<NegBinSpec>(&x)) {
    std::optional<dist::FiniteMixingMeasure> mu;
    if (const auto* ny = std::get_if<NegBinSpec>(&y); ny && param_match(ny->k, nx->k)) {
      mu = point_mass(ny->p);
    } else if (const auto* my = std::get_if<MixSpec>(&y);
               my && my->family == Family::negbin && param_match(my->k, nx->k)) {
      mu = my->mu;
    }
    if (mu) {
      auto r = criteria::negbin_mixture_criteria(nx->k, nx->p, *mu);
      add_criterion(m, {Order::st, Order::hr}, "sum_i w_i t_i^k <= p^k", *r.st_hr);
      add_criterion(m, {Order::lr, Order::rh},
                    "sum_i w_i t_i^(k+1) / sum_i w_i t_i^k <= p", *r.lr_rh);
    }
    if (const auto* cy = std::get_if<dist::NegBinConvolutionSpec>(&y);
        cy && param_match(nx->k, cy->total_size())) {
      auto thr = criteria::negbin_convolution_thresholds(*cy);
      add_criterion(m, {Order::st, Order::hr},
                    "weighted geometric mean of component probs <= p",
                    criteria::Inequality::less_equal(thr.st_hr, nx->p));
      add_criterion(m, {Order::lr, Order::rh},
                    "weighted arithmetic mean of component probs <= p",
                    criteria::Inequality::less_equal(thr.lr_rh, nx->p));
    }
  }

  if (const auto* gx = std::get_if<GammaSpec>(&x)) {
    std::optional<dist::FiniteMixingMeasure> mu;
    if (const auto* gy = std::get_if<GammaSpec>(&y); gy && param_match(gy->alpha, gx->alpha)) {
      mu = point_mass(gy->beta);
    } else if (const auto* my = std::get_if<MixSpec>(&y);
               my && my->family == Family::gamma && param_match(my->alpha, gx->alpha)) {
      mu = my->mu;
    }
    if (mu) {
      auto r = criteria::gamma_mixture_criteria(gx->alpha, gx->beta, *mu);
      add_criterion(m, {Order::st, Order::hr},
                    "sum_i w_i t_i^(-a) <= beta^(-a)", *r.st_hr);
      add_criterion(m, {Order::lr, Order::rh},
                    "beta * sum_i w_i t_i^(-a-1) <= sum_i w_i t_i^(-a)", *r.lr_rh);
    }
    if (const auto* cy = std::get_if<dist::GammaConvolutionSpec>(&y);
        cy && param_match(gx->alpha, cy->total_shape())) {
      auto thr = criteria::gamma_convolution_thresholds(*cy);
      add_criterion(m, {Order::st, Order::hr},
                    "beta <= weighted geometric mean of component scales",
                    criteria::Inequality::less_equal(gx->beta, thr.st_hr));
      add_criterion(m, {Order::lr, Order::rh},
                    "beta <= weighted harmonic mean of component scales",
                    criteria::Inequality::less_equal(gx->beta, thr.lr_rh));
      add_criterion(m, {Order::disp},
                    "beta <= weighted geometric mean of component scales",
                    criteria::Inequality::less_equal(gx->beta, thr.st_hr));
      add_criterion(m, {Order::star}, "holds for every scale beta",
                    criteria::Inequality{0.0, 0.0, true});
    }
  }

  if (const auto* px = std::get_if<dist::PoissonBinomialSpec>(&x)) {
    if (const auto* by = std::get_if<BinomialSpec>(&y); by && by->n == px->trials()) {
      auto t = criteria::poisson_binomial_thresholds(*px);
      add_criterion(m, {Order::st, Order::hr},
                    "1 - geometric mean of (1-p_i) <= p",
                    criteria::Inequality::less_equal(t.st_upper, by->p));
      add_criterion(m, {Order::lr, Order::rh},
                    "1 - harmonic mean of (1-p_i) <= p",
                    criteria::Inequality::less_equal(t.lr_upper, by->p));
    }
  }
  if (const auto* bx = std::get_if<BinomialSpec>(&x)) {
    if (const auto* py = std::get_if<dist::PoissonBinomialSpec>(&y);
        py && bx->n == py->trials()) {
      auto t = criteria::poisson_binomial_thresholds(*py);
      add_criterion(m, {Order::st, Order::rh},
                    "p <= geometric mean of p_i",
                    criteria::Inequality::less_equal(bx->p, t.st_lower));
      add_criterion(m, {Order::lr, Order::hr},
                    "p <= harmonic mean of p_i",
                    criteria::Inequality::less_equal(bx->p, t.lr_lower));
    }
  }

  return m;
}

struct GridDesc {
  std::string kind;
  long count = 0;
  double lo = 0.0;
  double hi = 0.0;
};

struct OrderRow {
  oracle::Order order;
  std::optional<CriterionEntry> criterion;
  std::optional<oracle::OrderVerdict> verdict;
  std::string oracle_error;
  GridDesc grid;
  bool holds = false;
  std::optional<bool> agree;
};

struct CompareOptions {
  std::string orders_csv = "st,hr,rh,lr";
  double tol = 1e-9;
  int grid_points = 4001;
  double tail_tol = 1e-12;
  unsigned long long seed = 0;
  std::string format = "json";
};

std::vector<oracle::Order> parse_orders(const std::string& csv, bool discrete) {
  std::vector<oracle::Order> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t c = csv.find(',', pos);
    std::size_t end = (c == std::string::npos) ? csv.size() : c;
    std::string_view tok(csv.data() + pos, end - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok.empty()) throw std::invalid_argument("--orders: empty order name");
    auto o = oracle::order_from_string(tok);
    if (!o) throw std::invalid_argument("--orders: unknown order '" + std::string(tok) + "'");
    if (discrete && (*o == oracle::Order::disp || *o == oracle::Order::star))
      throw std::invalid_argument("--orders: '" + std::string(tok) +
                                  "' needs continuous distributions");
    if (std::find(out.begin(), out.end(), *o) == out.end()) out.push_back(*o);
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  if (out.empty()) throw std::invalid_argument("--orders: no orders requested");
  return out;
}

void emit_compare_json(std::string& out, const DistSpec& xs, const DistSpec& ys,
                       const CompareOptions& opts, const std::vector<oracle::Order>& orders,
                       const std::vector<OrderRow>& rows, bool all_hold, bool discrepancy,
                       int exit_code, const std::string& x_input, const std::string& y_input) {
  JsonWriter w;
  w.begin_object();
  w.key("tool");
  w.value(kToolName);
  w.key("version");
  w.value(kToolVersion);
  w.key("command");
  w.value("compare");
  for (auto [label, spec, input] :
       {std::tuple{"x", &xs, &x_input}, std::tuple{"y", &ys, &y_input}}) {
    w.key(label);
    w.begin_object();
    w.key("input");
    w.value(*input);
    w.key("canonical");
    w.value(spec->canonical);
    w.key("discrete");
    w.value(spec->discrete);
    w.end_object();
  }
  w.key("settings");
  w.begin_object();
  w.key("orders");
  w.begin_array();
  for (auto o : orders) w.value(oracle::to_string(o));
  w.end_array();
  w.key("tol");
  w.value(opts.tol);
  w.key("grid_points");
  w.value(opts.grid_points);
  w.key("tail_tol");
  w.value(opts.tail_tol);
  w.key("seed");
  w.value(static_cast<long>(opts.seed));
  w.end_object();
  w.key("orders");
  w.begin_array();
  for (const auto& row : rows) {
    w.begin_object();
    w.key("order");
    w.value(oracle::to_string(row.order));
    w.key("criterion");
    if (row.criterion) {
      w.begin_object();
      w.key("rule");
      w.value(row.criterion->rule);
      w.key("lhs");
      w.value(row.criterion->ineq.lhs);
      w.key("rhs");
      w.value(row.criterion->ineq.rhs);
      w.key("holds");
      w.value(row.criterion->ineq.holds);
      w.end_object();
    } else {
      w.value_null();
    }
    w.key("oracle");
    w.begin_object();
    if (row.verdict) {
      w.key("holds");
      w.value(row.verdict->holds);
      w.key("marginal");
      w.value(row.verdict->marginal);
      w.key("witness");
      if (row.verdict->witness) {
        w.value(*row.verdict->witness);
      } else {
        w.value_null();
      }
      w.key("tolerance");
      w.value(row.verdict->tolerance);
      w.key("points_checked");
      w.value(row.verdict->points_checked);
      w.key("grid");
      w.begin_object();
      w.key("kind");
      w.value(row.grid.kind);
      w.key("points");
      w.value(row.grid.count);
      w.key("lo");
      w.value(row.grid.lo);
      w.key("hi");
      w.value(row.grid.hi);
      w.end_object();
    } else {
      w.key("error");
      w.value(row.oracle_error);
    }
    w.end_object();
    w.key("holds");
    w.value(row.holds);
    w.key("agree");
    if (row.agree) {
      w.value(*row.agree);
    } else {
      w.value_null();
    }
    w.end_object();
  }
  w.end_array();
  w.key("all_hold");
  w.value(all_hold);
  w.key("discrepancy");
  w.value(discrepancy);
  w.key("exit_code");
  w.value(exit_code);
  w.end_object();
  out = std::move(w).take();
  out += '\n';
}

void emit_compare_csv(std::string& out, const std::vector<OrderRow>& rows) {
  out = "order,criterion_rule,criterion_lhs,criterion_rhs,criterion_holds,oracle_holds,"
        "oracle_marginal,oracle_witness,oracle_tolerance,oracle_points,oracle_error,holds,agree\n";
  for (const auto& row : rows) {
    out += std::string(oracle::to_string(row.order));
    out += ',';
    if (row.criterion) {
      out += csv_field(row.criterion->rule);
      out += ',' + format_real(row.criterion->ineq.lhs);
      out += ',' + format_real(row.criterion->ineq.rhs);
      out += row.criterion->ineq.holds ? ",true" : ",false";
    } else {
      out += ",,,";
    }
    if (row.verdict) {
      out += row.verdict->holds ? ",true" : ",false";
      out += row.verdict->marginal ? ",true" : ",false";
      out += ',';
      if (row.verdict->witness) out += format_real(*row.verdict->witness);
      out += ',' + format_real(row.verdict->tolerance);
      out += ',' + std::to_string(row.verdict->points_checked);
      out += ',';
    } else {
      out += ",,,,,," + csv_field(row.oracle_error);
    }
    out += row.holds ? ",true" : ",false";
    if (row.agree) {
      out += *row.agree ? ",true" : ",false";
    } else {
      out += ',';
    }
    out += '\n';
  }
}

int cmd_compare(std::string& out, std::string& err, const std::string& x_text,
                const std::string& y_text, const CompareOptions& opts) {
  DistSpec xs, ys;
  std::vector<oracle::Order> orders;
  std::optional<AnyDist> X, Y;
  CriteriaMap crit;
  try {
    xs = parse_dist_spec(x_text);
    ys = parse_dist_spec(y_text);
    if (xs.discrete != ys.discrete) {
      throw std::invalid_argument("cannot compare a discrete spec with a continuous one");
    }
    orders = parse_orders(opts.orders_csv, xs.discrete);
    if (!(opts.tol > 0.0) || !std::isfinite(opts.tol))
      throw std::invalid_argument("--tol must be a positive real");
    if (opts.grid_points < 3 || opts.grid_points > 2'000'000)
      throw std::invalid_argument("--grid-points out of range [3, 2e6]");
    X = build_distribution(xs.value, opts.tail_tol);
    Y = build_distribution(ys.value, opts.tail_tol);
    crit = closed_forms(xs.value, ys.value);
  } catch (const std::exception& e) {
    err = std::string("error: ") + e.what() + "\n";
    return 2;
  }

  std::vector<OrderRow> rows;
  if (xs.discrete) {
    const auto& dx = std::get<dist::DiscreteDistribution>(*X);
    const auto& dy = std::get<dist::DiscreteDistribution>(*Y);
    oracle::CheckGrid grid = oracle::CheckGrid::for_discrete(dx, dy);
    GridDesc desc{"integer", grid.x_hi + 1L, 0.0, static_cast<double>(grid.x_hi)};
    for (auto o : orders) {
      OrderRow row;
      row.order = o;
      row.grid = desc;
      try {
        switch (o) {
          case oracle::Order::st: row.verdict = oracle::check_st(dx, dy, grid, opts.tol); break;
          case oracle::Order::hr: row.verdict = oracle::check_hr(dx, dy, grid, opts.tol); break;
          case oracle::Order::rh: row.verdict = oracle::check_rh(dx, dy, grid, opts.tol); break;
          case oracle::Order::lr: row.verdict = oracle::check_lr(dx, dy, grid, opts.tol); break;
          case oracle::Order::lc: row.verdict = oracle::check_lc(dx, dy, grid, opts.tol); break;
          default: throw std::logic_error("order not applicable to discrete distributions");
        }
      } catch (const std::exception& e) {
        row.oracle_error = e.what();
      }
      rows.push_back(std::move(row));
    }
  } else {
    const auto& cx = std::get<dist::ContinuousDistribution>(*X);
    const auto& cy = std::get<dist::ContinuousDistribution>(*Y);
    std::optional<oracle::CheckGrid> geom, unif;
    std::vector<double> qgrid;
    auto need_geom = [&]() -> const oracle::CheckGrid& {
      if (!geom) geom = oracle::CheckGrid::geometric(cx, cy, opts.grid_points);
      return *geom;
    };
    auto need_unif = [&]() -> const oracle::CheckGrid& {
      if (!unif) unif = oracle::CheckGrid::uniform_for_lc(cx, cy);
      return *unif;
    };
    for (auto o : orders) {
      OrderRow row;
      row.order = o;
      try {
        switch (o) {
          case oracle::Order::st:
            row.verdict = oracle::check_st(cx, cy, need_geom(), opts.tol);
            break;
          case oracle::Order::hr:
            row.verdict = oracle::check_hr(cx, cy, need_geom(), opts.tol);
            break;
          case oracle::Order::rh:
            row.verdict = oracle::check_rh(cx, cy, need_geom(), opts.tol);
            break;
          case oracle::Order::lr:
            row.verdict = oracle::check_lr(cx, cy, need_geom(), opts.tol);
            break;
          case oracle::Order::lc:
            // Second divided differences amplify evaluator noise; never run
            // the lc scan tighter than its 1e-7 default.
            row.verdict = oracle::check_lc(cx, cy, need_unif(), std::max(opts.tol, 1e-7));
            break;
          case oracle::Order::star:
            row.verdict = oracle::check_star(cx, cy, need_geom(), opts.tol);
            break;
          case oracle::Order::disp:
            if (qgrid.empty()) qgrid = oracle::default_quantile_grid();
            row.verdict = oracle::check_disp(cx, cy, qgrid, opts.tol);
            break;
        }
        if (o == oracle::Order::disp) {
          row.grid = GridDesc{"quantile", static_cast<long>(qgrid.size()), qgrid.front(),
                              qgrid.back()};
        } else if (o == oracle::Order::lc) {
          row.grid = GridDesc{"uniform", static_cast<long>(unif->points.size()),
                              unif->points.front(), unif->points.back()};
        } else {
          row.grid = GridDesc{"geometric", static_cast<long>(geom->points.size()),
                              geom->points.front(), geom->points.back()};
        }
      } catch (const std::exception& e) {
        row.oracle_error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }

  bool all_hold = true;
  bool discrepancy = false;
  for (auto& row : rows) {
    auto it = crit.find(row.order);
    if (it != crit.end()) row.criterion = it->second;
    // The oracle is the ground truth for holds; a criterion alone never
    // upgrades a failed or errored scan.
    row.holds = row.verdict && row.verdict->holds;
    if (row.criterion && row.verdict) {
      row.agree = row.criterion->ineq.holds == row.verdict->holds;
      if (!*row.agree) discrepancy = true;
    }
    if (!row.holds) all_hold = false;
  }
  int exit_code = discrepancy ? 3 : (all_hold ? 0 : 1);

  if (opts.format == "csv") {
    emit_compare_csv(out, rows);
  } else {
    emit_compare_json(out, xs, ys, opts, orders, rows, all_hold, discrepancy, exit_code,
                      x_text, y_text);
  }
  return exit_code;
}

// ---------------------------------------------------------------------------
// threshold subcommand.

struct ThresholdRow {
  std::string comparison;
  std::vector<std::string> orders;
  std::string holds_when;
  double threshold;
};

int cmd_threshold(std::string& out, std::string& err, const std::string& text,
                  const std::string& format) {
  DistSpec spec;
  try {
    spec = parse_dist_spec(text);
  } catch (const std::exception& e) {
    err = std::string("error: ") + e.what() + "\n";
    return 2;
  }

  std::string kind;
  std::vector<ThresholdRow> rows;
  if (const auto* g = std::get_if<dist::GammaConvolutionSpec>(&spec.value)) {
    kind = "gconv";
    auto t = criteria::gamma_convolution_thresholds(*g);
    std::string cmp = "gamma(" + format_real(g->total_shape()) + ", beta) <= convolution";
    rows.push_back({cmp, {"st", "hr"}, "beta <= threshold", t.st_hr});
    rows.push_back({cmp, {"lr", "rh"}, "beta <= threshold", t.lr_rh});
  } else if (const auto* nb = std::get_if<dist::NegBinConvolutionSpec>(&spec.value)) {
    kind = "nbconv";
    auto t = criteria::negbin_convolution_thresholds(*nb);
    std::string cmp = "negbin(" + format_real(nb->total_size()) + ", p) <= convolution";
    rows.push_back({cmp, {"st", "hr"}, "p >= threshold", t.st_hr});
    rows.push_back({cmp, {"lr", "rh"}, "p >= threshold", t.lr_rh});
  } else if (const auto* pb = std::get_if<dist::PoissonBinomialSpec>(&spec.value)) {
    kind = "pbin";
    auto t = criteria::poisson_binomial_thresholds(*pb);
    std::string n = std::to_string(pb->trials());
    rows.push_back({"pbin <= binomial(" + n + ", p)", {"st", "hr"}, "p >= threshold", t.st_upper});
    rows.push_back({"pbin <= binomial(" + n + ", p)", {"lr", "rh"}, "p >= threshold", t.lr_upper});
    rows.push_back({"binomial(" + n + ", p) <= pbin", {"st", "rh"}, "p <= threshold", t.st_lower});
    rows.push_back({"binomial(" + n + ", p) <= pbin", {"lr", "hr"}, "p <= threshold", t.lr_lower});
  } else {
    err = "error: threshold needs a gconv, nbconv, or pbin spec\n";
    return 2;
  }

  if (format == "csv") {
    out = "comparison,orders,holds_when,threshold\n";
    for (const auto& r : rows) {
      std::string orders = r.orders[0];
      for (std::size_t i = 1; i < r.orders.size(); ++i) orders += "+" + r.orders[i];
      out += csv_field(r.comparison) + ',' + orders + ',' + csv_field(r.holds_when) + ',' +
             format_real(r.threshold) + '\n';
    }
  } else {
    JsonWriter w;
    w.begin_object();
    w.key("tool");
    w.value(kToolName);
    w.key("version");
    w.value(kToolVersion);
    w.key("command");
    w.value("threshold");
    w.key("input");
    w.value(text);
    w.key("canonical");
    w.value(spec.canonical);
    w.key("kind");
    w.value(kind);
    w.key("thresholds");
    w.begin_array();
    for (const auto& r : rows) {
      w.begin_object();
      w.key("comparison");
      w.value(r.comparison);
      w.key("orders");
      w.begin_array();
      for (const auto& o : r.orders) w.value(o);
      w.end_array();
      w.key("holds_when");
      w.value(r.holds_when);
      w.key("threshold");
      w.value(r.threshold);
      w.end_object();
    }
    w.end_array();
    w.end_object();
    out = std::move(w).take();
    out += '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// curves subcommand.

struct CurveOptions {
  int grid_points = 4001;
  double tail_tol = 1e-12;
  std::string grid_override;  // lo:hi:n[:linear|geom]
};

std::vector<double> parse_grid_override(const std::string& text) {
  // lo:hi:n with optional :linear|:geom suffix.
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t c = text.find(':', pos);
    parts.push_back(text.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  if (parts.size() < 3 || parts.size() > 4)
    throw std::invalid_argument("--grid: expected lo:hi:n[:linear|geom]");
  auto to_real = [](const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw std::invalid_argument("--grid: bad number '" + s + "'");
    return v;
  };
  double lo = to_real(parts[0]);
  double hi = to_real(parts[1]);
  long n = std::lround(to_real(parts[2]));
  bool geom = parts.size() == 4 ? (parts[3] == "geom") : false;
  if (parts.size() == 4 && parts[3] != "geom" && parts[3] != "linear")
    throw std::invalid_argument("--grid: spacing must be linear or geom");
  if (!(lo < hi) || n < 2 || n > 2'000'000)
    throw std::invalid_argument("--grid: need lo < hi and 2 <= n <= 2e6");
  if (geom && !(lo > 0.0)) throw std::invalid_argument("--grid: geom spacing needs lo > 0");
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    double f = static_cast<double>(i) / static_cast<double>(n - 1);
    pts[static_cast<std::size_t>(i)] =
        geom ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
             : lo + f * (hi - lo);
  }
  pts.front() = lo;
  pts.back() = hi;
  return pts;
}

constexpr std::string_view kCurvesHeader =
    "x,pdf_pmf_x,pdf_pmf_y,cdf_x,cdf_y,survival_x,survival_y,hazard_x,hazard_y,log_ratio\n";

int cmd_curves(std::string& out, std::string& err, const std::string& x_text,
               const std::string& y_text, const std::string& path, const CurveOptions& opts) {
  DistSpec xs, ys;
  std::optional<AnyDist> X, Y;
  std::vector<double> pts;
  try {
    xs = parse_dist_spec(x_text);
    ys = parse_dist_spec(y_text);
    if (xs.discrete != ys.discrete)
      throw std::invalid_argument("cannot mix a discrete spec with a continuous one");
    if (xs.discrete && !opts.grid_override.empty())
      throw std::invalid_argument("--grid applies to continuous pairs only");
    X = build_distribution(xs.value, opts.tail_tol);
    Y = build_distribution(ys.value, opts.tail_tol);
    if (!xs.discrete) {
      const auto& cx = std::get<dist::ContinuousDistribution>(*X);
      const auto& cy = std::get<dist::ContinuousDistribution>(*Y);
      pts = opts.grid_override.empty()
                ? oracle::CheckGrid::geometric(cx, cy, opts.grid_points).points
                : parse_grid_override(opts.grid_override);
    }
  } catch (const std::exception& e) {
    err = std::string("error: ") + e.what() + "\n";
    return 2;
  }

  std::string body{kCurvesHeader};
  auto guarded = [](double num, double den) {
    return den > 1e-300 ? num / den : std::numeric_limits<double>::quiet_NaN();
  };
  if (xs.discrete) {
    const auto& dx = std::get<dist::DiscreteDistribution>(*X);
    const auto& dy = std::get<dist::DiscreteDistribution>(*Y);
    auto grid = oracle::CheckGrid::for_discrete(dx, dy);
    for (int t = 0; t <= grid.x_hi; ++t) {
      double fx = dx.pmf(t), fy = dy.pmf(t);
      double hx = guarded(fx, dx.pmf(t) + dx.survival(t));
      double hy = guarded(fy, dy.pmf(t) + dy.survival(t));
      body += format_real(t) + ',' + format_real(fx) + ',' + format_real(fy) + ',' +
              format_real(dx.cdf(t)) + ',' + format_real(dy.cdf(t)) + ',' +
              format_real(dx.survival(t)) + ',' + format_real(dy.survival(t)) + ',' +
              format_real(hx) + ',' + format_real(hy) + ',' +
              format_real(dx.log_pmf(t) - dy.log_pmf(t)) + '\n';
    }
  } else {
    const auto& cx = std::get<dist::ContinuousDistribution>(*X);
    const auto& cy = std::get<dist::ContinuousDistribution>(*Y);
    for (double x : pts) {
      double fx = cx.pdf(x), fy = cy.pdf(x);
      body += format_real(x) + ',' + format_real(fx) + ',' + format_real(fy) + ',' +
              format_real(cx.cdf(x)) + ',' + format_real(cy.cdf(x)) + ',' +
              format_real(cx.survival(x)) + ',' + format_real(cy.survival(x)) + ',' +
              format_real(guarded(fx, cx.survival(x))) + ',' +
              format_real(guarded(fy, cy.survival(x))) + ',' +
              format_real(cx.log_pdf(x) - cy.log_pdf(x)) + '\n';
    }
  }

  if (path == "-") {
    out = std::move(body);
  } else {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      err = "error: cannot open '" + path + "' for writing\n";
      return 2;
    }
    file << body;
    file.flush();
    if (!file) {
      err = "error: write to '" + path + "' failed\n";
      return 2;
    }
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface.

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

DistSpec parse_dist_spec(std::string_view text) {
  SpecValue v = SpecParser(text).parse();
  std::string canonical = render(v);
  bool discrete = spec_is_discrete(v);
  return DistSpec{std::move(v), std::move(canonical), discrete};
}

RunResult run(const std::vector<std::string>& args) {
  RunResult res;

  CLI::App app{"decide stochastic orders between exponential-family distributions, "
               "their finite mixtures, and gamma / negative-binomial convolutions"};
  app.name(std::string(kToolName));
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string x_text, y_text, path;
  CompareOptions copts;
  CurveOptions cuopts;
  std::string thr_format = "json";

  CLI::App* cmp = app.add_subcommand(
      "compare", "run closed-form criteria and definition-level oracle checks for X <= Y");
  cmp->add_option("x", x_text, "left distribution spec")->required();
  cmp->add_option("y", y_text, "right distribution spec")->required();
  cmp->add_option("--orders", copts.orders_csv,
                  "comma-separated subset of st,hr,rh,lr,lc,disp,star");
  cmp->add_option("--tol", copts.tol, "oracle comparison tolerance");
  cmp->add_option("--grid-points", copts.grid_points, "points in the continuous scan grid");
  cmp->add_option("--tail-tol", copts.tail_tol, "truncation bound for discrete tables");
  cmp->add_option("--seed", copts.seed, "seed echoed into the report");
  cmp->add_option("--format", copts.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* thr = app.add_subcommand(
      "threshold", "print closed-form order thresholds for a gconv, nbconv, or pbin spec");
  std::string thr_text;
  thr->add_option("spec", thr_text, "distribution spec")->required();
  thr->add_option("--format", thr_format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* cur = app.add_subcommand("curves", "write pmf/pdf, cdf, survival, hazard curves as CSV");
  cur->add_option("x", x_text, "left distribution spec")->required();
  cur->add_option("y", y_text, "right distribution spec")->required();
  cur->add_option("output", path, "output file path, or - for standard output")->required();
  cur->add_option("--grid-points", cuopts.grid_points, "points in the default continuous grid");
  cur->add_option("--tail-tol", cuopts.tail_tol, "truncation bound for discrete tables");
  cur->add_option("--grid", cuopts.grid_override, "continuous grid override lo:hi:n[:linear|geom]");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out_stream, err_stream;
    int code = app.exit(e, out_stream, err_stream);
    res.output = out_stream.str();
    res.error = err_stream.str();
    res.exit_code = code == 0 ? 0 : 2;
    return res;
  }

  if (cmp->parsed()) {
    res.exit_code = cmd_compare(res.output, res.error, x_text, y_text, copts);
  } else if (thr->parsed()) {
    res.exit_code = cmd_threshold(res.output, res.error, thr_text, thr_format);
  } else if (cur->parsed()) {
    res.exit_code = cmd_curves(res.output, res.error, x_text, y_text, path, cuopts);
  }
  return res;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  RunResult res = run(args);
  if (!res.output.empty()) std::fwrite(res.output.data(), 1, res.output.size(), stdout);
  if (!res.error.empty()) std::fwrite(res.error.data(), 1, res.error.size(), stderr);
  return res.exit_code;
}

}  // namespace stochord::cli
