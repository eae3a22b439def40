#pragma once

// Polynomial interpolation in double precision. Polynomials are monomial
// coefficient vectors c[0] + c[1] x + ... + c[k] x^k.

#include <vector>

#include "nfgen/expr.hpp"

namespace nfgen {

using Polynomial = std::vector<double>;

double eval_polynomial(const Polynomial& p, double x);

// The k+1 Chebyshev roots mapped onto [a, b], in the order j = 0..k.
std::vector<double> chebyshev_nodes(double a, double b, int k);

// Interpolates F on the k+1 Chebyshev nodes of [a, b]. Throws DomainError
// when F is not finite at a node.
Polynomial cheby_interpolate(const RealFunction& F, double a, double b, int k);

// Interpolates F through every point (degree = points - 1). Throws
// UsageError on duplicate or empty input.
Polynomial lagrange_interpolate(const RealFunction& F, const std::vector<double>& points);

// Newton divided differences on (xs, ys) expanded to monomial form.
Polynomial newton_to_monomial(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace nfgen
