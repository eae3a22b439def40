#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "nfgen/expr.hpp"

namespace nfgen {
namespace {

struct Simpson {
  const RealFunction& f;
  int max_depth;

  double value(double t) const {
    const double y = f(t);
    if (!std::isfinite(y)) throw DomainError(fmt::format("integrand not finite at t={}", t));
    return y;
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = value(lm), frm = value(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15 * tol) return left + right + delta / 15;
    if (depth >= max_depth) {
      throw ConvergenceError(
          fmt::format("adaptive Simpson exceeded depth {} near [{}, {}]", max_depth, a, b));
    }
    return recurse(a, m, fa, flm, fm, left, tol / 2, depth + 1) +
           recurse(m, b, fm, frm, fb, right, tol / 2, depth + 1);
  }
};

// Composite Simpson with a fixed panel count; used to turn a relative
// tolerance into an absolute one.
double rough_integral(const RealFunction& f, double lo, double hi) {
  constexpr int panels = 64;
  const double h = (hi - lo) / panels;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) sum += f(lo + i * h) * (i % 2 ? 4 : 2);
  return sum * h / 3;
}

double integrate_relative(const RealFunction& f, double lo, double hi, double rel_tol) {
  const double scale = std::fabs(rough_integral(f, lo, hi));
  const double tol = std::max(rel_tol * scale, std::numeric_limits<double>::min());
  return integrate_simpson(f, lo, hi, tol);
}

}  // namespace

double integrate_simpson(const RealFunction& f, double lo, double hi, double tol, int max_depth) {
  if (!(tol > 0)) throw UsageError("integrate_simpson: tolerance must be positive");
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("integrate_simpson: bounds must be finite");
  }
  if (lo == hi) return 0;
  if (hi < lo) return -integrate_simpson(f, hi, lo, tol, max_depth);
  const Simpson s{f, max_depth};
  const double fa = s.value(lo), fb = s.value(hi), fm = s.value(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6 * (fa + 4 * fm + fb);
  return s.recurse(lo, hi, fa, fm, fb, whole, tol, 0);
}

double quad_erf(double x, double rel_tol) {
  if (!std::isfinite(x)) throw DomainError("erf of non-finite value");
  if (x == 0) return 0;
  // beyond 8 the remaining mass is below 1e-28
  const double hi = std::min(std::fabs(x), 8.0);
  const double v = integrate_relative([](double t) { return std::exp(-t * t); }, 0, hi, rel_tol);
  return std::copysign(2 / std::sqrt(std::numbers::pi) * v, x);
}

double quad_normal_cdf(double x, double rel_tol) {
  if (!std::isfinite(x)) throw DomainError("normal_cdf of non-finite value");
  const double c = 1 / std::sqrt(2 * std::numbers::pi);
  auto pdf = [](double t) { return std::exp(-0.5 * t * t); };
  if (x >= 0) return 0.5 + c * integrate_relative(pdf, 0, std::min(x, 40.0), rel_tol);
  // integrate the tail directly so small probabilities keep relative accuracy
  const double a = -x;
  if (a > 38) return 0;
  return c * integrate_relative(pdf, a, a + 40, rel_tol);
}

double quad_lower_inc_gamma(double x, double z, double rel_tol) {
  if (!(x >= 0) || !std::isfinite(x)) throw DomainError("lower_inc_gamma needs finite x >= 0");
  if (!(z > 0)) throw DomainError("lower_inc_gamma needs shape z > 0");
  if (x == 0) return 0;
  if (z >= 1) {
    return integrate_relative([z](double t) { return std::pow(t, z - 1) * std::exp(-t); }, 0, x,
                              rel_tol);
  }
  // t = v^(1/z) removes the t^(z-1) singularity at 0
  const double inv = 1 / z;
  return inv * integrate_relative([inv](double v) { return std::exp(-std::pow(v, inv)); }, 0,
                                  std::pow(x, z), rel_tol);
}

double quad_upper_inc_gamma(double x, double z, double rel_tol) {
  if (!(x >= 0) || !std::isfinite(x)) throw DomainError("upper_inc_gamma needs finite x >= 0");
  if (!(z > 0)) throw DomainError("upper_inc_gamma needs shape z > 0");
  if (x == 0) return std::tgamma(z);
  // t = x + u; the integrand (x+u)^(z-1) e^-u is negligible past the cutoff
  const double cutoff = 60 + 4 * z;
  const double v = integrate_relative(
      [x, z](double u) { return std::pow(x + u, z - 1) * std::exp(-u); }, 0, cutoff, rel_tol);
  return std::exp(-x) * v;
}

}  // namespace nfgen
