#include "nfgen/fxp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace nfgen {
namespace {

using U128 = unsigned __int128;

// Minimal unsigned 256-bit integer, enough for a 128x128 product and a
// right shift.
struct U256 {
  U128 lo = 0;
  U128 hi = 0;
};

U256 mul_128(U128 a, U128 b) {
  const std::uint64_t a0 = static_cast<std::uint64_t>(a), a1 = static_cast<std::uint64_t>(a >> 64);
  const std::uint64_t b0 = static_cast<std::uint64_t>(b), b1 = static_cast<std::uint64_t>(b >> 64);
  const U128 p00 = static_cast<U128>(a0) * b0;
  const U128 p01 = static_cast<U128>(a0) * b1;
  const U128 p10 = static_cast<U128>(a1) * b0;
  const U128 p11 = static_cast<U128>(a1) * b1;

  // middle = p01 + p10 + carry-in from p00's high half, may exceed 128 bits
  U128 mid = (p00 >> 64) + static_cast<std::uint64_t>(p01) + static_cast<std::uint64_t>(p10);
  U256 r;
  r.lo = (mid << 64) | static_cast<std::uint64_t>(p00);
  r.hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
  return r;
}

U256 shr(const U256& v, int s) {
  if (s == 0) return v;
  U256 r;
  if (s >= 128) {
    r.lo = v.hi >> (s - 128);
    r.hi = 0;
  } else {
    r.lo = (v.lo >> s) | (v.hi << (128 - s));
    r.hi = v.hi >> s;
  }
  return r;
}

bool low_bits_nonzero(const U256& v, int s) {
  if (s == 0) return false;
  if (s >= 128) {
    const U128 mask = s == 128 ? U128{0} : ((U128{1} << (s - 128)) - 1);
    return v.lo != 0 || (v.hi & mask) != 0;
  }
  return (v.lo & ((U128{1} << s) - 1)) != 0;
}

U256 add_one(U256 v) {
  v.lo += 1;
  if (v.lo == 0) v.hi += 1;
  return v;
}

Mantissa max_of(const FxpFormat& fmt) { return fmt.max_mantissa(); }

Mantissa saturate(bool negative, const U128& magnitude, const FxpFormat& fmt) {
  const Mantissa max = max_of(fmt);
  if (magnitude > static_cast<U128>(max)) return negative ? -max : max;
  const Mantissa m = static_cast<Mantissa>(magnitude);
  return negative ? -m : m;
}

// Reduces a two's complement bit pattern to n bits and sign-extends. The
// one pattern outside the symmetric range (-2^(n-1)) is mapped to its
// neighbour so the representability invariant holds.
Mantissa wrap_bits(U128 bits, const FxpFormat& fmt) {
  if (fmt.n < 128) bits &= (U128{1} << fmt.n) - 1;
  const U128 sign = U128{1} << (fmt.n - 1);
  Mantissa m = static_cast<Mantissa>(bits);
  if ((bits & sign) && fmt.n < 128) m -= static_cast<Mantissa>(U128{1} << fmt.n);
  if (m < -max_of(fmt)) m = -max_of(fmt);
  return m;
}

void require_same(const FxpValue& a, const FxpValue& b, const char* op) {
  if (!(a.format() == b.format())) {
    throw UsageError(fmt::format("{}: format mismatch {} vs {}", op, to_string(a.format()),
                                 to_string(b.format())));
  }
}

}  // namespace

FxpFormat::FxpFormat(int n_bits, int f_bits) : n(n_bits), f(f_bits) {
  if (n < 2 || n > 128) throw UsageError(fmt::format("fixed-point width n={} outside [2,128]", n));
  if (f < 1 || f > n - 2) {
    throw UsageError(fmt::format("fraction bits f={} outside [1,{}] for n={}", f, n - 2, n));
  }
}

Mantissa FxpFormat::max_mantissa() const {
  return static_cast<Mantissa>((U128{1} << (n - 1)) - 1);
}

double FxpFormat::resolution() const { return std::ldexp(1.0, -f); }

double FxpFormat::overflow_bound() const { return std::ldexp(1.0, n - f - 1); }

double FxpFormat::max_value() const {
  return std::ldexp(static_cast<double>(max_mantissa()), -f);
}

std::string to_string(const FxpFormat& fmt) { return fmt::format("<{},{}>", fmt.n, fmt.f); }

FxpValue::FxpValue(Mantissa mantissa, FxpFormat fmt) : mantissa_(mantissa), fmt_(fmt) {
  const Mantissa max = fmt_.max_mantissa();
  if (mantissa_ > max || mantissa_ < -max) {
    throw UsageError(fmt::format("mantissa {} not representable in {}", mantissa_to_string(mantissa),
                                 to_string(fmt)));
  }
}

FxpValue FxpValue::one(FxpFormat fmt) { return FxpValue(Mantissa{1} << fmt.f, fmt); }

FxpValue FxpValue::max(FxpFormat fmt) { return FxpValue(fmt.max_mantissa(), fmt); }

FxpValue FxpValue::lowest(FxpFormat fmt) { return FxpValue(-fmt.max_mantissa(), fmt); }

double FxpValue::to_double() const { return std::ldexp(static_cast<double>(mantissa_), -fmt_.f); }

std::strong_ordering operator<=>(const FxpValue& a, const FxpValue& b) {
  require_same(a, b, "compare");
  return a.mantissa_ <=> b.mantissa_;
}

namespace {

FxpValue snap(double x, FxpFormat fmt, bool ceil_mode) {
  if (!std::isfinite(x)) throw DomainError(fmt::format("cannot represent non-finite value {}", x));
  const double scaled = std::ldexp(x, fmt.f);
  // 2^(n-1) is exact in double; anything at or beyond it cannot fit.
  const double limit = std::ldexp(1.0, fmt.n - 1);
  if (std::fabs(scaled) >= limit) {
    return FxpValue(x < 0 ? -fmt.max_mantissa() : fmt.max_mantissa(), fmt);
  }
  const double r = ceil_mode ? std::ceil(scaled) : std::trunc(scaled);
  Mantissa m = static_cast<Mantissa>(r);
  m = std::clamp(m, -fmt.max_mantissa(), fmt.max_mantissa());
  return FxpValue(m, fmt);
}

}  // namespace

FxpValue flp_sim_fxp(double x, FxpFormat fmt) { return snap(x, fmt, false); }

FxpValue flp_sim_fxp_ceil(double x, FxpFormat fmt) { return snap(x, fmt, true); }

FxpValue fxp_add(const FxpValue& a, const FxpValue& b, ArithMode mode) {
  require_same(a, b, "fxp_add");
  const FxpFormat& fmt = a.format();
  if (mode.overflow == Overflow::wrap) {
    const U128 bits = static_cast<U128>(a.mantissa()) + static_cast<U128>(b.mantissa());
    return FxpValue(wrap_bits(bits, fmt), fmt);
  }
  Mantissa sum;
  if (__builtin_add_overflow(a.mantissa(), b.mantissa(), &sum)) {
    return FxpValue(a.mantissa() < 0 ? -fmt.max_mantissa() : fmt.max_mantissa(), fmt);
  }
  sum = std::clamp(sum, -fmt.max_mantissa(), fmt.max_mantissa());
  return FxpValue(sum, fmt);
}

FxpValue fxp_neg(const FxpValue& a) { return FxpValue(-a.mantissa(), a.format()); }

FxpValue fxp_sub(const FxpValue& a, const FxpValue& b, ArithMode mode) {
  return fxp_add(a, fxp_neg(b), mode);
}

FxpValue fxp_mul(const FxpValue& a, const FxpValue& b, ArithMode mode) {
  require_same(a, b, "fxp_mul");
  const FxpFormat& fmt = a.format();
  const bool negative = (a.mantissa() < 0) != (b.mantissa() < 0);
  const U128 ma = static_cast<U128>(a.mantissa() < 0 ? -a.mantissa() : a.mantissa());
  const U128 mb = static_cast<U128>(b.mantissa() < 0 ? -b.mantissa() : b.mantissa());

  U256 product;
  if ((ma >> 63) == 0 && (mb >> 63) == 0) {
    product.lo = ma * mb;
  } else {
    product = mul_128(ma, mb);
  }
  U256 q = shr(product, fmt.f);
  // floor(-P / 2^f) = -ceil(P / 2^f)
  if (negative && mode.truncation == Truncation::floor && low_bits_nonzero(product, fmt.f)) {
    q = add_one(q);
  }

  if (mode.overflow == Overflow::wrap) {
    U128 bits = q.lo;
    if (negative) bits = ~bits + 1;
    return FxpValue(wrap_bits(bits, fmt), fmt);
  }
  if (q.hi != 0) return FxpValue(negative ? -fmt.max_mantissa() : fmt.max_mantissa(), fmt);
  return FxpValue(saturate(negative, q.lo, fmt), fmt);
}

FxpValue fxp_ge(const FxpValue& a, const FxpValue& b) {
  require_same(a, b, "fxp_ge");
  return a.mantissa() >= b.mantissa() ? FxpValue::one(a.format()) : FxpValue::zero(a.format());
}

std::vector<FxpValue> linspace_fxp(double a, double b, std::size_t count, FxpFormat fmt) {
  if (!(a < b)) throw DomainError(fmt::format("linspace: need a < b, got [{}, {}]", a, b));
  if (count < 2) throw UsageError("linspace: count must be at least 2");
  std::vector<FxpValue> out;
  out.reserve(count);
  const double span = b - a;
  const double denom = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = (i + 1 == count) ? b : a + span * (static_cast<double>(i) / denom);
    out.push_back(flp_sim_fxp(x, fmt));
  }
  return out;
}

std::vector<FxpValue> linspace_grid(const FxpValue& a, const FxpValue& b, std::size_t count) {
  require_same(a, b, "linspace_grid");
  if (!(a < b)) throw DomainError("linspace_grid: need a < b");
  if (count < 2) throw UsageError("linspace_grid: count must be at least 2");
  // a + floor(d * j / (count - 1)) without forming d * j
  const U128 d = static_cast<U128>(b.mantissa() - a.mantissa());
  const U128 steps = count - 1;
  const U128 q = d / steps, r = d % steps;
  std::vector<FxpValue> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const U128 offset = q * j + (r * j) / steps;
    out.emplace_back(a.mantissa() + static_cast<Mantissa>(offset), a.format());
  }
  return out;
}

std::string mantissa_to_string(Mantissa m) {
  if (m == 0) return "0";
  const bool negative = m < 0;
  U128 v = negative ? static_cast<U128>(-(m + 1)) + 1 : static_cast<U128>(m);
  std::string digits;
  while (v != 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  if (negative) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

Mantissa parse_mantissa(std::string_view text) {
  if (text.empty()) throw UsageError("empty mantissa string");
  std::size_t i = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  if (i == text.size()) throw UsageError(fmt::format("bad mantissa '{}'", text));
  U128 v = 0;
  const U128 limit = (U128{1} << 127);
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') throw UsageError(fmt::format("bad mantissa '{}'", text));
    v = v * 10 + static_cast<U128>(c - '0');
    if (v > limit) throw UsageError(fmt::format("mantissa '{}' exceeds 128 bits", text));
  }
  if (!negative && v == limit) throw UsageError(fmt::format("mantissa '{}' exceeds 128 bits", text));
  return negative ? -static_cast<Mantissa>(v - 1) - 1 : static_cast<Mantissa>(v);
}

}  // namespace nfgen
