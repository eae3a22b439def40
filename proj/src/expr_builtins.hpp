#pragma once

#include <string>

#include "nfgen/expr.hpp"

namespace nfgen {

// nullptr when `name` is not a named constant.
const double* builtin_constant(const std::string& name);
// -1 when `name` is not a builtin function.
int builtin_arity(const std::string& name);
// Appends the fully parenthesised text of a subtree.
void print_node(const Node& n, std::string& out);

}  // namespace nfgen
