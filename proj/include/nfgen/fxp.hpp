#pragma once

// Bit-exact simulation of <n,f> fixed-point numbers.
//
// A value is an n-bit two's complement integer mantissa m scaled by 2^-f.
// The representable set is symmetric: |m| <= 2^(n-1) - 1. Arithmetic
// saturates by default; a wrap mode is available for studying ring
// overflow on real platforms.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nfgen/errors.hpp"

namespace nfgen {

using Mantissa = __int128;

struct FxpFormat {
  int n = 96;
  int f = 48;

  FxpFormat() = default;
  // Throws UsageError unless 2 <= n <= 128 and 1 <= f <= n - 2.
  FxpFormat(int n, int f);

  Mantissa max_mantissa() const;
  // 2^-f
  double resolution() const;
  // 2^(n-f-1), the magnitude bound used by the overflow checks.
  double overflow_bound() const;
  // (2^(n-1) - 1) * 2^-f
  double max_value() const;

  friend bool operator==(const FxpFormat&, const FxpFormat&) = default;
};

std::string to_string(const FxpFormat& fmt);

enum class Overflow { saturate, wrap };
// Rounding applied to the f low bits dropped after a multiplication.
enum class Truncation { floor, toward_zero };

struct ArithMode {
  Overflow overflow = Overflow::saturate;
  Truncation truncation = Truncation::floor;
};

class FxpValue {
 public:
  FxpValue() = default;
  // Throws UsageError if |mantissa| exceeds the format's bound.
  FxpValue(Mantissa mantissa, FxpFormat fmt);

  static FxpValue zero(FxpFormat fmt) { return FxpValue(0, fmt); }
  static FxpValue one(FxpFormat fmt);
  static FxpValue max(FxpFormat fmt);
  static FxpValue lowest(FxpFormat fmt);

  Mantissa mantissa() const { return mantissa_; }
  const FxpFormat& format() const { return fmt_; }
  double to_double() const;
  bool is_zero() const { return mantissa_ == 0; }

  // Ordering compares mantissas; operands must share a format.
  friend bool operator==(const FxpValue& a, const FxpValue& b) {
    return a.mantissa_ == b.mantissa_ && a.fmt_ == b.fmt_;
  }
  friend std::strong_ordering operator<=>(const FxpValue& a, const FxpValue& b);

 private:
  Mantissa mantissa_ = 0;
  FxpFormat fmt_{};
};

// Converts a real to the nearest representable value toward zero. Values
// below the resolution become 0; values beyond the range clamp to
// +-max_value. Throws DomainError for NaN/inf.
FxpValue flp_sim_fxp(double x, FxpFormat fmt);
// Same as flp_sim_fxp but rounds up (toward +inf) onto the grid.
FxpValue flp_sim_fxp_ceil(double x, FxpFormat fmt);

FxpValue fxp_add(const FxpValue& a, const FxpValue& b, ArithMode mode = {});
FxpValue fxp_sub(const FxpValue& a, const FxpValue& b, ArithMode mode = {});
FxpValue fxp_neg(const FxpValue& a);
// (ma * mb) >> f with the configured truncation, then saturate or wrap.
FxpValue fxp_mul(const FxpValue& a, const FxpValue& b, ArithMode mode = {});
// 1.0 if a >= b else 0.0, in the operands' format.
FxpValue fxp_ge(const FxpValue& a, const FxpValue& b);

// `count` evenly spaced reals in [a, b] (endpoints included), each snapped
// with flp_sim_fxp. Duplicates produced by snapping are kept.
std::vector<FxpValue> linspace_fxp(double a, double b, std::size_t count, FxpFormat fmt);

// `count` grid values evenly spaced by mantissa between a and b inclusive
// (floor of the exact fraction), computed in integer arithmetic.
std::vector<FxpValue> linspace_grid(const FxpValue& a, const FxpValue& b, std::size_t count);

std::string mantissa_to_string(Mantissa m);
// Parses an optionally signed decimal integer. Throws UsageError.
Mantissa parse_mantissa(std::string_view text);

}  // namespace nfgen
