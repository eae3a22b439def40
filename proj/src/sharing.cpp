#include "nfgen/sharing.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

namespace nfgen {
namespace {

using boost::multiprecision::cpp_int;

RingElem ring_mask(const FxpFormat& fmt) {
  return fmt.n == 128 ? ~RingElem{0} : (RingElem{1} << fmt.n) - 1;
}

RingElem random_elem(std::mt19937_64& rng, const FxpFormat& fmt) {
  const RingElem hi = rng(), lo = rng();
  return ((hi << 64) | lo) & ring_mask(fmt);
}

cpp_int to_big(Mantissa m) {
  const bool negative = m < 0;
  const RingElem mag = negative ? static_cast<RingElem>(-(m + 1)) + 1 : static_cast<RingElem>(m);
  cpp_int v = static_cast<std::uint64_t>(mag >> 64);
  v <<= 64;
  v += static_cast<std::uint64_t>(mag);
  return negative ? cpp_int(-v) : v;
}

Mantissa from_big(const cpp_int& v) {
  const bool negative = v < 0;
  const cpp_int mag = negative ? cpp_int(-v) : v;
  const RingElem hi = static_cast<std::uint64_t>(mag >> 64);
  const RingElem lo = static_cast<std::uint64_t>(mag & cpp_int(0xFFFFFFFFFFFFFFFFULL));
  const Mantissa m = static_cast<Mantissa>((hi << 64) | lo);
  return negative ? -m : m;
}

}  // namespace

ShareTriple share(const FxpValue& v, std::mt19937_64& rng) {
  const FxpFormat fmt = v.format();
  ShareTriple t;
  t.format = fmt;
  t.parts[0] = random_elem(rng, fmt);
  t.parts[1] = random_elem(rng, fmt);
  t.parts[2] = (static_cast<RingElem>(v.mantissa()) - t.parts[0] - t.parts[1]) & ring_mask(fmt);
  return t;
}

ShareTriple share(const FxpValue& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return share(v, rng);
}

FxpValue reconstruct(const ShareTriple& t) {
  const FxpFormat& fmt = t.format;
  const RingElem sum = (t.parts[0] + t.parts[1] + t.parts[2]) & ring_mask(fmt);
  Mantissa m = static_cast<Mantissa>(sum);
  if (fmt.n < 128 && (sum >> (fmt.n - 1)) != 0) m -= static_cast<Mantissa>(RingElem{1} << fmt.n);
  // -2^(n-1) lies outside the symmetric range; map it to its neighbour as
  // wrapping fxp arithmetic does
  if (m < -fmt.max_mantissa()) m = -fmt.max_mantissa();
  return FxpValue(m, fmt);
}

MockSharing::MockSharing(FxpFormat fmt, SharingOptions opts) : fmt_(fmt), opts_(opts), rng_(opts.seed) {}

ShareTriple MockSharing::share(const FxpValue& v) {
  if (!(v.format() == fmt_)) throw UsageError("share: value format differs from the sharing format");
  return nfgen::share(v, rng_);
}

ShareTriple MockSharing::add(const ShareTriple& a, const ShareTriple& b) const {
  if (!(a.format == fmt_) || !(b.format == fmt_)) throw UsageError("add: share format mismatch");
  ShareTriple t;
  t.format = fmt_;
  for (int i = 0; i < 3; ++i) t.parts[i] = (a.parts[i] + b.parts[i]) & ring_mask(fmt_);
  return t;
}

ShareTriple MockSharing::mul(const ShareTriple& a, const ShareTriple& b) {
  if (!(a.format == fmt_) || !(b.format == fmt_)) throw UsageError("mul: share format mismatch");
  const cpp_int product = to_big(reconstruct(a).mantissa()) * to_big(reconstruct(b).mantissa());
  const cpp_int unit = cpp_int(1) << fmt_.f;
  // floor division and the non-negative remainder it leaves
  cpp_int q = product / unit;
  if (product < 0 && q * unit != product) --q;
  const cpp_int rem = product - q * unit;
  if (opts_.probabilistic_truncation && rem != 0) {
    const RingElem draw = (static_cast<RingElem>(rng_()) << 64 | rng_()) &
                          ((RingElem{1} << fmt_.f) - 1);
    if (to_big(static_cast<Mantissa>(draw)) < rem) ++q;
  }
  const cpp_int max = (cpp_int(1) << (fmt_.n - 1)) - 1;
  if (q > max) q = max;
  if (q < -max) q = -max;
  return share(FxpValue(from_big(q), fmt_));
}

}  // namespace nfgen
