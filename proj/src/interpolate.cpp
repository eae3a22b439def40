#include "nfgen/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace nfgen {

double eval_polynomial(const Polynomial& p, double x) {
  double acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> chebyshev_nodes(double a, double b, int k) {
  if (k < 0) throw UsageError("chebyshev_nodes: negative order");
  std::vector<double> xs(k + 1);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int j = 0; j <= k; ++j) {
    xs[j] = mid + half * std::cos((2.0 * j + 1) * std::numbers::pi / (2.0 * (k + 1)));
  }
  return xs;
}

Polynomial newton_to_monomial(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n == 0 || ys.size() != n) throw UsageError("interpolation needs matching non-empty points");

  // divided differences in place: dd[i] = f[x0..xi]
  std::vector<double> dd = ys;
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = n - 1; i >= level; --i) {
      dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
    }
  }

  // Horner-style expansion: p = dd[n-1]; p = p*(x - x_i) + dd[i]
  Polynomial p(n, 0.0);
  p[0] = dd[n - 1];
  std::size_t degree = 0;
  for (std::size_t step = n - 1; step-- > 0;) {
    // multiply by (x - xs[step])
    for (std::size_t d = degree + 1; d > 0; --d) p[d] = p[d - 1] - xs[step] * p[d];
    p[0] = -xs[step] * p[0];
    ++degree;
    p[0] += dd[step];
  }
  return p;
}

Polynomial cheby_interpolate(const RealFunction& F, double a, double b, int k) {
  if (!(a < b)) throw DomainError(fmt::format("interpolation interval [{}, {}] is empty", a, b));
  const std::vector<double> xs = chebyshev_nodes(a, b, k);
  std::vector<double> ys(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    ys[j] = F(xs[j]);
    if (!std::isfinite(ys[j])) {
      throw DomainError(fmt::format("function not finite at Chebyshev node {}", xs[j]));
    }
  }
  return newton_to_monomial(xs, ys);
}

Polynomial lagrange_interpolate(const RealFunction& F, const std::vector<double>& points) {
  if (points.empty()) throw UsageError("lagrange_interpolate: no points");
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw UsageError("lagrange_interpolate: duplicate points");
  }
  std::vector<double> ys(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    ys[j] = F(points[j]);
    if (!std::isfinite(ys[j])) {
      throw DomainError(fmt::format("function not finite at point {}", points[j]));
    }
  }
  return newton_to_monomial(points, ys);
}

}  // namespace nfgen
