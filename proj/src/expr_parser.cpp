#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "expr_builtins.hpp"
#include "nfgen/expr.hpp"

namespace nfgen {
namespace {

NodePtr make(NodeKind kind, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    skip_space();
    if (pos_ == text_.size()) throw SyntaxError("empty expression", pos_);
    NodePtr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) {
      throw SyntaxError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw SyntaxError(fmt::format("expected '{}' before end", c), pos_);
      throw SyntaxError(fmt::format("expected '{}'", c), pos_);
    }
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = make(NodeKind::add, {lhs, parse_product()});
      } else if (accept('-')) {
        lhs = make(NodeKind::sub, {lhs, parse_product()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(NodeKind::mul, {lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make(NodeKind::div, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(NodeKind::negate, {parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  // '^' binds tighter than unary minus and is right associative; its
  // exponent may itself carry a sign (x^-2).
  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make(NodeKind::pow, {base, parse_unary()});
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw SyntaxError("expected expression before end", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError(fmt::format("unexpected '{}'", c), pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
        pos_ = p;
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    char* end = nullptr;
    const double value = std::strtod(literal.c_str(), &end);
    if (end != literal.c_str() + literal.size() || !std::isfinite(value)) {
      throw SyntaxError(fmt::format("malformed number '{}'", literal), start);
    }
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::number;
    n->value = value;
    return n;
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));
    skip_space();
    const bool is_call = pos_ < text_.size() && text_[pos_] == '(';

    if (!is_call) {
      if (name == "x") return make(NodeKind::variable);
      if (const double* value = builtin_constant(name)) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::constant;
        n->name = name;
        n->value = *value;
        return n;
      }
      throw SyntaxError(fmt::format("unknown identifier '{}'", name), start);
    }

    const int arity = builtin_arity(name);
    if (arity < 0) throw SyntaxError(fmt::format("unknown function '{}'", name), start);
    ++pos_;  // '('
    std::vector<NodePtr> args;
    if (!accept(')')) {
      args.push_back(parse_sum());
      while (accept(',')) args.push_back(parse_sum());
      expect(')');
    }
    if (static_cast<int>(args.size()) != arity) {
      throw SyntaxError(
          fmt::format("{} takes {} argument(s), got {}", name, arity, args.size()), start);
    }
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::call;
    n->name = name;
    n->args = std::move(args);
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

void print_node(const Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.args[0], out);
    out += op;
    print_node(*n.args[1], out);
    out += ')';
  };
  switch (n.kind) {
    case NodeKind::number:
      out += fmt::format("{}", n.value);
      break;
    case NodeKind::constant:
      out += n.name;
      break;
    case NodeKind::variable:
      out += 'x';
      break;
    case NodeKind::negate:
      out += "(-";
      print_node(*n.args[0], out);
      out += ')';
      break;
    case NodeKind::add: binary(" + "); break;
    case NodeKind::sub: binary(" - "); break;
    case NodeKind::mul: binary(" * "); break;
    case NodeKind::div: binary(" / "); break;
    case NodeKind::pow: binary(" ^ "); break;
    case NodeKind::call:
      out += n.name;
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.args[i], out);
      }
      out += ')';
      break;
  }
}

namespace {

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.name != b.name || a.args.size() != b.args.size()) return false;
  if ((a.kind == NodeKind::number || a.kind == NodeKind::constant) && a.value != b.value) {
    return false;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!equal_nodes(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

}  // namespace

const double* builtin_constant(const std::string& name) {
  static const double pi = std::numbers::pi;
  static const double e = std::numbers::e;
  if (name == "pi") return &pi;
  if (name == "e") return &e;
  return nullptr;
}

int builtin_arity(const std::string& name) {
  static const std::map<std::string, int> table = {
      {"exp", 1},        {"ln", 1},         {"log2", 1},
      {"sqrt", 1},       {"abs", 1},        {"tanh", 1},
      {"erf", 1},        {"sign", 1},       {"floor", 1},
      {"min", 2},        {"max", 2},        {"pow", 2},
      {"ite", 3},        {"normal_cdf", 1}, {"normal_pdf", 1},
      {"lower_inc_gamma", 2}, {"upper_inc_gamma", 2},
  };
  const auto it = table.find(name);
  return it == table.end() ? -1 : it->second;
}

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.root_ = Parser(text).parse_all();
  e.source_ = std::string(text);
  return e;
}

std::string Expression::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

Expression Expression::with_options(EvalOptions options) const {
  Expression copy = *this;
  copy.options_ = options;
  return copy;
}

RealFunction Expression::as_function() const {
  Expression copy = *this;
  return [copy](double x) { return copy.eval(x); };
}

bool structurally_equal(const Expression& a, const Expression& b) {
  return equal_nodes(*a.root_, *b.root_);
}

}  // namespace nfgen
