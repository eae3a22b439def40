#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "nfgen/fitter.hpp"

namespace nfgen {

double srd(double x, double y, double soft_zero) {
  const double d = std::fabs(x - y);
  return std::fabs(x) > soft_zero ? d / std::fabs(x) : d;
}

namespace {

bool power_chain_safe(const FxpValue& x, int k) {
  if (x.is_zero()) return true;
  const Mantissa max = x.format().max_mantissa();
  auto ok = [&](const FxpValue& p) { return !p.is_zero() && p.mantissa() < max && p.mantissa() > -max; };
  if (!ok(power_table(x, k)[k])) return false;
  FxpValue p = x;
  for (int i = 1; i < k; ++i) p = fxp_mul(p, x);
  return ok(p);
}

}  // namespace

int constrain_k(double a, double b, FxpFormat fmt, int k) {
  if (!(a < b)) throw DomainError(fmt::format("constrain_k: need a < b, got [{}, {}]", a, b));
  if (k < 1) throw UsageError("constrain_k: order must be at least 1");
  const double xmax = std::max(std::fabs(a), std::fabs(b));
  const double xmin = std::min(std::fabs(a), std::fabs(b));

  double k_o = k;
  if (xmax > 1) k_o = std::floor((fmt.n - fmt.f - 1) / std::log2(xmax));

  double k_u = k;
  if (a * b <= 0) {
    // touches or spans zero: powers of tiny inputs underflow regardless
    k_u = 3;
  } else if (xmin < 1) {
    k_u = std::floor(fmt.f / -std::log2(xmin));
  }

  int kbar = static_cast<int>(std::max(1.0, std::min({static_cast<double>(k), k_o, k_u})));

  // The bound is exact in real arithmetic; truncating multiplications can
  // still tip the extreme grid values over (or under) the edge.
  const FxpValue ends[] = {flp_sim_fxp(a, fmt), flp_sim_fxp(b, fmt)};
  while (kbar > 1 && !(power_chain_safe(ends[0], kbar) && power_chain_safe(ends[1], kbar))) {
    --kbar;
  }
  return kbar;
}

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_rational exact(double v) {
  int e = 0;
  const double frac = std::frexp(v, &e);
  cpp_rational r(static_cast<long long>(std::ldexp(frac, 53)));
  const int shift = e - 53;
  if (shift >= 0) return r * cpp_rational(cpp_int(1) << shift);
  return r / cpp_rational(cpp_int(1) << -shift);
}

Mantissa to_mantissa(const cpp_int& v) {
  const bool negative = v < 0;
  const cpp_int mag = negative ? cpp_int(-v) : v;
  const unsigned __int128 lo = static_cast<unsigned long long>(mag & 0xFFFFFFFFFFFFFFFFULL);
  const unsigned __int128 hi = static_cast<unsigned long long>(mag >> 64);
  const Mantissa m = static_cast<Mantissa>((hi << 64) | lo);
  return negative ? -m : m;
}

}  // namespace

std::pair<FxpValue, FxpValue> scale_c(double c, FxpFormat fmt, int i, double x_char) {
  if (!std::isfinite(c)) throw DomainError(fmt::format("coefficient {} is not finite", c));
  if (!std::isfinite(x_char)) throw DomainError(fmt::format("x_char {} is not finite", x_char));
  if (c == 0) return {FxpValue::zero(fmt), FxpValue::one(fmt)};
  // Exact rational arithmetic: the scaler is rounded up onto the grid once
  // and the coefficient truncated once, with no intermediate double rounding.
  const cpp_int grid = cpp_int(1) << fmt.f;
  const cpp_rational mag = exact(std::fabs(c));
  cpp_rational x_pow = 1;
  const cpp_rational xc = exact(std::fabs(x_char));
  for (int j = 0; j < i; ++j) x_pow *= xc;
  const cpp_int max_m = (cpp_int(1) << (fmt.n - 1)) - 1;

  const cpp_rational s_underflow(cpp_int(1), grid);
  const cpp_rational s_overflow = mag * x_pow / cpp_rational(cpp_int(1) << (fmt.n - fmt.f - 1));
  const cpp_rational s_represent = mag * cpp_rational(grid) / cpp_rational(max_m);
  const cpp_rational s =
      std::min(std::max({s_underflow, s_overflow, s_represent}), cpp_rational(1));

  // ceil(s * 2^f) as an integer mantissa
  const cpp_rational scaled = s * cpp_rational(grid);
  cpp_int s_m = numerator(scaled) / denominator(scaled);
  if (cpp_rational(s_m) < scaled) ++s_m;

  // trunc(c / s_hat * 2^f) = trunc(c * 2^(2f) / s_m)
  const cpp_rational q = exact(c) * cpp_rational(grid) * cpp_rational(grid) / cpp_rational(s_m);
  cpp_int c_m = numerator(q) / denominator(q);  // truncates toward zero
  if (c_m > max_m) c_m = max_m;
  if (c_m < -max_m) c_m = -max_m;
  return {FxpValue(to_mantissa(c_m), fmt), FxpValue(to_mantissa(s_m), fmt)};
}

ScaledPolynomial scale_poly(const Polynomial& p, double a, double b, FxpFormat fmt,
                            bool enable_scaling) {
  const double x_char = std::max(std::fabs(a), std::fabs(b));
  ScaledPolynomial out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (enable_scaling) {
      auto [c_hat, s_hat] = scale_c(p[i], fmt, static_cast<int>(i), x_char);
      out.coeff.push_back(c_hat);
      out.scaler.push_back(s_hat);
    } else {
      out.coeff.push_back(flp_sim_fxp(p[i], fmt));
      out.scaler.push_back(FxpValue::one(fmt));
    }
  }
  return out;
}

}  // namespace nfgen
