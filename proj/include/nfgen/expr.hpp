#pragma once

// Plaintext target functions: a small expression language in one variable
// `x`, double-precision evaluation, and a static census of the operations
// a direct (non-polynomial) secure evaluation would need.

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nfgen/errors.hpp"

namespace nfgen {

using RealFunction = std::function<double(double)>;

enum class NodeKind { number, constant, variable, negate, add, sub, mul, div, pow, call };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::number;
  double value = 0;       // number / constant
  std::string name;       // constant / call
  std::vector<NodePtr> args;  // operands, or call arguments
};

struct EvalOptions {
  // Relative tolerance for the integral-defined builtins (erf, normal_cdf,
  // lower_inc_gamma, upper_inc_gamma).
  double quadrature_tol = 1e-13;
};

class Expression {
 public:
  Expression() = default;

  // Throws SyntaxError (with byte offset) for malformed text, unknown
  // identifiers and arity mismatches.
  static Expression parse(std::string_view text);

  // Throws DomainError (naming x) when the value is undefined or not finite.
  double eval(double x) const;

  // Fully parenthesised text that parses back to an equal tree.
  std::string print() const;

  const Node& root() const { return *root_; }
  const std::string& source() const { return source_; }

  Expression with_options(EvalOptions options) const;
  const EvalOptions& options() const { return options_; }

  // Adapter for APIs taking a plain real function.
  RealFunction as_function() const;

  friend bool structurally_equal(const Expression& a, const Expression& b);

 private:
  NodePtr root_;
  std::string source_;
  EvalOptions options_;
};

inline Expression parse(std::string_view text) { return Expression::parse(text); }
inline double eval_real(const Expression& e, double x) { return e.eval(x); }

struct OpCensus {
  int add = 0;
  int mul = 0;
  int div = 0;
  int comparison = 0;
  int exp = 0;
  int log = 0;
  int sqrt = 0;
  int other = 0;

  bool contains_exp() const { return exp > 0; }
  int nonlinear_step_count() const { return div + comparison + exp + log + sqrt + other; }
  // Non-zero counts keyed by kind name.
  std::map<std::string, int> counts() const;
};

// Counts only operations on x-dependent subtrees; constant subexpressions
// are folded for free.
OpCensus census(const Expression& e);

// Adaptive Simpson quadrature to absolute tolerance `tol`. Reversed bounds
// give the negated integral. Throws ConvergenceError when the recursion
// depth limit is reached, DomainError for non-finite integrand values.
double integrate_simpson(const RealFunction& f, double lo, double hi, double tol,
                         int max_depth = 50);

// Builtins backed by quadrature, exposed for testing.
double quad_erf(double x, double rel_tol = 1e-13);
double quad_normal_cdf(double x, double rel_tol = 1e-13);
// Integral of t^(z-1) e^-t over [0, x] and over [x, inf).
double quad_lower_inc_gamma(double x, double z, double rel_tol = 1e-13);
double quad_upper_inc_gamma(double x, double z, double rel_tol = 1e-13);

}  // namespace nfgen
