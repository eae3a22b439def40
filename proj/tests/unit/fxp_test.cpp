#include "nfgen/fxp.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace nfgen {
namespace {

const FxpFormat k16_8{16, 8};
const FxpFormat k96_48{96, 48};

FxpValue v(double x, FxpFormat fmt = k16_8) { return flp_sim_fxp(x, fmt); }

TEST(FxpFormat, RejectsInvalidWidths) {
  EXPECT_THROW(FxpFormat(1, 0), UsageError);
  EXPECT_THROW(FxpFormat(129, 10), UsageError);
  EXPECT_THROW(FxpFormat(16, 15), UsageError);
  EXPECT_THROW(FxpFormat(16, 0), UsageError);
  EXPECT_NO_THROW(FxpFormat(128, 126));
  EXPECT_NO_THROW(FxpFormat(3, 1));
}

TEST(FxpValue, RejectsUnrepresentableMantissa) {
  EXPECT_THROW(FxpValue(32768, k16_8), UsageError);
  EXPECT_THROW(FxpValue(-32768, k16_8), UsageError);
  EXPECT_NO_THROW(FxpValue(-32767, k16_8));
}

TEST(FlpSimFxp, WorkedExamples) {
  EXPECT_EQ(v(0.0).mantissa(), 0);
  EXPECT_EQ(v(std::ldexp(1.0, -50), k96_48).mantissa(), 0);
  EXPECT_EQ(v(0.005).to_double(), 1.0 / 256);
  EXPECT_EQ(v(200).to_double(), 127.99609375);
  EXPECT_EQ(v(-200).to_double(), -127.99609375);
  // truncation is toward zero for negative inputs
  EXPECT_EQ(v(-0.005).to_double(), -1.0 / 256);
}

TEST(FlpSimFxp, NonFiniteIsDomainError) {
  EXPECT_THROW(v(NAN), DomainError);
  EXPECT_THROW(v(INFINITY), DomainError);
  EXPECT_THROW(v(-INFINITY), DomainError);
}

TEST(FlpSimFxp, CeilRoundsUp) {
  EXPECT_EQ(flp_sim_fxp_ceil(0.005, k16_8).mantissa(), 2);
  EXPECT_EQ(flp_sim_fxp_ceil(0.5, k16_8).mantissa(), 128);
  EXPECT_EQ(flp_sim_fxp_ceil(1e-30, k96_48).mantissa(), 1);
}

TEST(FlpSimFxp, FullWidth128) {
  const FxpFormat fmt(128, 64);
  const FxpValue big = flp_sim_fxp(1e300, fmt);
  EXPECT_EQ(big.mantissa(), fmt.max_mantissa());
  EXPECT_EQ(flp_sim_fxp(-3.25, fmt).to_double(), -3.25);
}

TEST(FxpAdd, Examples) {
  EXPECT_EQ(fxp_add(v(1.5), v(2.25)).to_double(), 3.75);
  const FxpValue max = FxpValue::max(k16_8);
  EXPECT_EQ(fxp_add(max, max).to_double(), 127.99609375);
  EXPECT_EQ(fxp_add(FxpValue::lowest(k16_8), FxpValue::lowest(k16_8)).to_double(), -127.99609375);
  EXPECT_EQ(fxp_add(v(3.5), FxpValue::zero(k16_8)), v(3.5));
}

TEST(FxpAdd, SaturatesAtFullWidth) {
  const FxpFormat fmt(128, 10);
  const FxpValue max = FxpValue::max(fmt);
  EXPECT_EQ(fxp_add(max, max), max);
  EXPECT_EQ(fxp_add(fxp_neg(max), fxp_neg(max)), fxp_neg(max));
}

TEST(FxpAdd, WrapMode) {
  const ArithMode wrap{Overflow::wrap, Truncation::floor};
  // 127 + 1 wraps to -128 which is outside the symmetric range; pinned to -127.99609375
  const FxpValue r = fxp_add(FxpValue::max(k16_8), FxpValue(1, k16_8), wrap);
  EXPECT_EQ(r.mantissa(), -32767);
  const FxpValue r2 = fxp_add(FxpValue::max(k16_8), FxpValue(2, k16_8), wrap);
  EXPECT_EQ(r2.mantissa(), -32767);
  const FxpValue r3 = fxp_add(FxpValue::max(k16_8), FxpValue(3, k16_8), wrap);
  EXPECT_EQ(r3.mantissa(), -32766);
}

TEST(FxpAdd, FormatMismatchIsUsageError) {
  EXPECT_THROW(fxp_add(v(1.0), v(1.0, k96_48)), UsageError);
  EXPECT_THROW(fxp_mul(v(1.0), v(1.0, k96_48)), UsageError);
  EXPECT_THROW(fxp_ge(v(1.0), v(1.0, k96_48)), UsageError);
}

TEST(FxpMul, Examples) {
  EXPECT_EQ(fxp_mul(v(2.0), v(3.0)).to_double(), 6.0);
  EXPECT_EQ(fxp_mul(v(1.0 / 256), v(1.0 / 256)).mantissa(), 0);
  EXPECT_EQ(fxp_mul(v(-1.0 / 256), v(0.5)).to_double(), -1.0 / 256);
  const ArithMode tz{Overflow::saturate, Truncation::toward_zero};
  EXPECT_EQ(fxp_mul(v(-1.0 / 256), v(0.5), tz).mantissa(), 0);
}

TEST(FxpMul, LargeOperandsUseWideProduct) {
  // 2^44 * 2^-44 in <96,48>: mantissas 2^92 and 2^4
  const FxpValue a(Mantissa{1} << 92, k96_48);
  const FxpValue b(Mantissa{1} << 4, k96_48);
  EXPECT_EQ(fxp_mul(a, b).to_double(), 1.0);
  // 2^47 - 1 ulp squared saturates
  const FxpValue m = FxpValue::max(k96_48);
  EXPECT_EQ(fxp_mul(m, m), m);
  EXPECT_EQ(fxp_mul(m, fxp_neg(m)), fxp_neg(m));
  // (2^30 + 2^-48) * 2^10 exercises the cross terms
  const FxpValue c((Mantissa{1} << 78) + 1, k96_48);
  const FxpValue d(Mantissa{1} << 58, k96_48);
  EXPECT_EQ(fxp_mul(c, d).mantissa(), (Mantissa{1} << 88) + (Mantissa{1} << 10));
}

// Brute-force oracle on plain integers for every pair at <8,3>.
TEST(FxpMul, ExhaustiveSmallWidth) {
  const FxpFormat fmt(8, 3);
  for (int ma = -127; ma <= 127; ++ma) {
    for (int mb = -127; mb <= 127; ++mb) {
      const int prod = ma * mb;
      int floor_q = prod >= 0 ? prod / 8 : -((-prod + 7) / 8);
      int trunc_q = prod / 8;
      auto sat = [](int q) { return q > 127 ? 127 : (q < -127 ? -127 : q); };
      const FxpValue a(ma, fmt), b(mb, fmt);
      ASSERT_EQ(fxp_mul(a, b).mantissa(), sat(floor_q)) << ma << "*" << mb;
      ASSERT_EQ(fxp_mul(a, b, {Overflow::saturate, Truncation::toward_zero}).mantissa(),
                sat(trunc_q));
      int wrapped = ((floor_q % 256) + 256) % 256;
      if (wrapped >= 128) wrapped -= 256;
      if (wrapped == -128) wrapped = -127;
      ASSERT_EQ(fxp_mul(a, b, {Overflow::wrap, Truncation::floor}).mantissa(), wrapped);
    }
  }
}

TEST(FxpGe, Examples) {
  EXPECT_EQ(fxp_ge(v(5), v(3)).to_double(), 1.0);
  EXPECT_EQ(fxp_ge(v(3), v(5)).to_double(), 0.0);
  EXPECT_EQ(fxp_ge(v(-2.5), v(-2.5)).to_double(), 1.0);
}

TEST(Linspace, Examples) {
  auto r = linspace_fxp(0, 1, 3, k16_8);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].to_double(), 0.0);
  EXPECT_EQ(r[1].to_double(), 0.5);
  EXPECT_EQ(r[2].to_double(), 1.0);
  r = linspace_fxp(0, 0.01, 3, k16_8);
  EXPECT_EQ(r[1].to_double(), 0.00390625);
  EXPECT_EQ(r[2].to_double(), 0.0078125);
  r = linspace_fxp(-1, 1, 2, k16_8);
  EXPECT_EQ(r[0].to_double(), -1.0);
  EXPECT_EQ(r[1].to_double(), 1.0);
  EXPECT_THROW(linspace_fxp(1, 1, 3, k16_8), DomainError);
  EXPECT_THROW(linspace_fxp(0, 1, 1, k16_8), UsageError);
}

TEST(Linspace, KeepsDuplicates) {
  const auto r = linspace_fxp(0, 1.0 / 256, 5, k16_8);
  EXPECT_EQ(r.size(), 5u);
}

TEST(MantissaText, RoundTrip) {
  const Mantissa cases[] = {0, 1, -1, 12345678901234567890ULL,
                            -(Mantissa{1} << 100),
                            static_cast<Mantissa>((static_cast<unsigned __int128>(1) << 127) - 1),
                            -static_cast<Mantissa>((static_cast<unsigned __int128>(1) << 127) - 1) - 1};
  for (Mantissa m : cases) EXPECT_EQ(parse_mantissa(mantissa_to_string(m)), m);
  EXPECT_EQ(mantissa_to_string(-42), "-42");
  EXPECT_EQ(parse_mantissa("+17"), 17);
  EXPECT_THROW(parse_mantissa(""), UsageError);
  EXPECT_THROW(parse_mantissa("12a"), UsageError);
  EXPECT_THROW(parse_mantissa("-"), UsageError);
  EXPECT_THROW(parse_mantissa("170141183460469231731687303715884105728"), UsageError);
}

TEST(FlpSimFxpProperty, RepresentableIdempotentMonotone) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> n_dist(3, 128);
  std::uniform_real_distribution<double> exp_dist(-60, 60);
  std::uniform_real_distribution<double> unit(-1, 1);
  for (int i = 0; i < 20000; ++i) {
    const int n = n_dist(rng);
    const int f = std::uniform_int_distribution<int>(1, n - 2)(rng);
    const FxpFormat fmt(n, f);
    const double x = unit(rng) * std::exp2(exp_dist(rng));
    const double y = x + std::fabs(unit(rng)) * std::exp2(exp_dist(rng));
    const FxpValue a = flp_sim_fxp(x, fmt);
    ASSERT_LE(a.mantissa(), fmt.max_mantissa());
    ASSERT_GE(a.mantissa(), -fmt.max_mantissa());
    ASSERT_EQ(flp_sim_fxp(a.to_double(), fmt), a);
    ASSERT_LE(a, flp_sim_fxp(y, fmt));
  }
}

}  // namespace
}  // namespace nfgen
