#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include <set>

#include "expr_builtins.hpp"
#include "nfgen/expr.hpp"

namespace nfgen {
namespace {

struct Evaluator {
  double x;
  const EvalOptions& opts;

  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError(fmt::format("{} at x={}", what, x));
  }

  double eval(const Node& n) const {
    switch (n.kind) {
      case NodeKind::number:
      case NodeKind::constant:
        return n.value;
      case NodeKind::variable:
        return x;
      case NodeKind::negate:
        return -eval(*n.args[0]);
      case NodeKind::add:
        return eval(*n.args[0]) + eval(*n.args[1]);
      case NodeKind::sub:
        return eval(*n.args[0]) - eval(*n.args[1]);
      case NodeKind::mul:
        return eval(*n.args[0]) * eval(*n.args[1]);
      case NodeKind::div: {
        const double num = eval(*n.args[0]);
        const double den = eval(*n.args[1]);
        if (den == 0) fail("division by zero");
        return num / den;
      }
      case NodeKind::pow:
        return power(eval(*n.args[0]), eval(*n.args[1]));
      case NodeKind::call:
        return call(n);
    }
    return 0;
  }

  double power(double base, double expo) const {
    if (base < 0 && expo != std::floor(expo)) fail("negative base with non-integer exponent");
    if (base == 0 && expo < 0) fail("zero raised to a negative power");
    return std::pow(base, expo);
  }

  double call(const Node& n) const {
    const std::string& f = n.name;
    const double a = eval(*n.args[0]);
    if (f == "exp") return std::exp(a);
    if (f == "ln" || f == "log2") {
      if (a <= 0) fail(f + " of non-positive value");
      return f == "ln" ? std::log(a) : std::log2(a);
    }
    if (f == "sqrt") {
      if (a < 0) fail("sqrt of negative value");
      return std::sqrt(a);
    }
    if (f == "abs") return std::fabs(a);
    if (f == "tanh") return std::tanh(a);
    if (f == "sign") return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
    if (f == "floor") return std::floor(a);
    if (f == "erf") return quad_erf(a, opts.quadrature_tol);
    if (f == "normal_cdf") return quad_normal_cdf(a, opts.quadrature_tol);
    if (f == "normal_pdf") return std::exp(-0.5 * a * a) / std::sqrt(2 * std::numbers::pi);
    if (f == "ite") return a > 0 ? eval(*n.args[1]) : eval(*n.args[2]);

    const double b = eval(*n.args[1]);
    if (f == "min") return std::fmin(a, b);
    if (f == "max") return std::fmax(a, b);
    if (f == "pow") return power(a, b);
    if (f == "lower_inc_gamma" || f == "upper_inc_gamma") {
      if (a < 0) fail(f + " of negative x");
      if (b <= 0) fail(f + " with non-positive shape");
      return f == "lower_inc_gamma" ? quad_lower_inc_gamma(a, b, opts.quadrature_tol)
                                    : quad_upper_inc_gamma(a, b, opts.quadrature_tol);
    }
    fail("unknown function " + f);
  }
};

bool depends_on_x(const Node& n) {
  if (n.kind == NodeKind::variable) return true;
  for (const auto& a : n.args) {
    if (depends_on_x(*a)) return true;
  }
  return false;
}

class Census {
 public:
  OpCensus counts;

  // Returns whether the subtree depends on x. Repeated x-dependent
  // subtrees (exp(x) in a written-out tanh) are computed once.
  bool visit(const Node& n) {
    if (!n.args.empty()) {
      std::string key;
      print_node(n, key);
      if (!seen_.insert(key).second) return depends_on_x(n);
    }
    switch (n.kind) {
      case NodeKind::number:
      case NodeKind::constant:
        return false;
      case NodeKind::variable:
        return true;
      case NodeKind::negate:
        return visit(*n.args[0]);
      case NodeKind::add:
      case NodeKind::sub: {
        const bool l = visit(*n.args[0]), r = visit(*n.args[1]);
        if (l || r) ++counts.add;
        return l || r;
      }
      case NodeKind::mul: {
        const bool l = visit(*n.args[0]), r = visit(*n.args[1]);
        if (l || r) ++counts.mul;
        return l || r;
      }
      case NodeKind::div: {
        const bool l = visit(*n.args[0]), r = visit(*n.args[1]);
        if (r) {
          ++counts.div;
        } else if (l) {
          ++counts.mul;
        }
        return l || r;
      }
      case NodeKind::pow:
        return visit_pow(*n.args[0], *n.args[1]);
      case NodeKind::call:
        return visit_call(n);
    }
    return false;
  }

 private:
  bool visit_pow(const Node& base, const Node& expo) {
    const bool b = visit(base), e = visit(expo);
    if (!b && !e) return false;
    price_pow(expo, e);
    return true;
  }

  // Integer exponents become repeated multiplication (plus a reciprocal when
  // negative); anything else goes through exp(e * ln(b)).
  void price_pow(const Node& expo, bool expo_depends) {
    if (!expo_depends) {
      const double v = constant_value(expo);
      if (v == std::floor(v) && std::fabs(v) <= 64) {
        const int k = static_cast<int>(std::fabs(v));
        if (k > 1) counts.mul += k - 1;
        if (v < 0) ++counts.div;
        return;
      }
    }
    ++counts.exp;
    ++counts.log;
    ++counts.mul;
  }

  bool visit_call(const Node& n) {
    bool dep = false;
    for (const auto& a : n.args) dep = visit(*a) || dep;
    if (!dep) return false;
    const std::string& f = n.name;
    if (f == "exp") {
      ++counts.exp;
    } else if (f == "ln") {
      ++counts.log;
    } else if (f == "log2") {
      ++counts.log;
      ++counts.mul;
    } else if (f == "sqrt") {
      ++counts.sqrt;
    } else if (f == "abs") {
      ++counts.comparison;
      ++counts.mul;
    } else if (f == "sign") {
      ++counts.comparison;
    } else if (f == "min" || f == "max" || f == "ite") {
      ++counts.comparison;
      ++counts.mul;
      ++counts.add;
    } else if (f == "tanh") {
      counts.exp += 2;
      counts.div += 1;
      counts.add += 2;
    } else if (f == "normal_pdf") {
      ++counts.exp;
      counts.mul += 2;
    } else if (f == "pow") {
      price_pow(*n.args[1], depends_on_x(*n.args[1]));
    } else {
      // floor, erf, normal_cdf, incomplete gamma
      ++counts.other;
    }
    return true;
  }

  std::set<std::string> seen_;

  static double constant_value(const Node& n) {
    static const EvalOptions opts;
    return Evaluator{0.0, opts}.eval(n);
  }
};

}  // namespace

double Expression::eval(double x) const {
  if (!root_) throw UsageError("evaluating an empty expression");
  const double y = Evaluator{x, options_}.eval(*root_);
  if (!std::isfinite(y)) throw DomainError(fmt::format("non-finite value {} at x={}", y, x));
  return y;
}

std::map<std::string, int> OpCensus::counts() const {
  std::map<std::string, int> out;
  auto put = [&](const char* k, int v) {
    if (v) out[k] = v;
  };
  put("add", add);
  put("mul", mul);
  put("div", div);
  put("comparison", comparison);
  put("exp", exp);
  put("log", log);
  put("sqrt", sqrt);
  put("other", other);
  return out;
}

OpCensus census(const Expression& e) {
  Census c;
  c.visit(e.root());
  return c.counts;
}

}  // namespace nfgen
