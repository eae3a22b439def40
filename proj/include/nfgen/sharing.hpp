#pragma once

// Mock three-party additive secret sharing over the ring Z_{2^n}. Only the
// arithmetic is modelled: shares carry no security, and products are
// computed on reconstructed mantissas before resharing.

#include <array>
#include <cstdint>
#include <random>

#include "nfgen/fxp.hpp"

namespace nfgen {

using RingElem = unsigned __int128;

struct ShareTriple {
  std::array<RingElem, 3> parts{};
  FxpFormat format;
};

// Fresh random shares of v; parts sum to the mantissa modulo 2^n.
ShareTriple share(const FxpValue& v, std::uint64_t seed);
ShareTriple share(const FxpValue& v, std::mt19937_64& rng);
FxpValue reconstruct(const ShareTriple& t);

struct SharingOptions {
  // Round the truncated product up with probability equal to the dropped
  // fraction instead of always flooring.
  bool probabilistic_truncation = false;
  std::uint64_t seed = 0;
};

class MockSharing {
 public:
  explicit MockSharing(FxpFormat fmt, SharingOptions opts = {});

  ShareTriple share(const FxpValue& v);
  FxpValue reconstruct(const ShareTriple& t) const { return nfgen::reconstruct(t); }

  // Local share-wise addition; wraps modulo 2^n like the ring it models.
  ShareTriple add(const ShareTriple& a, const ShareTriple& b) const;
  // Product truncated by f bits and saturated to the format, then reshared.
  // With deterministic truncation this matches fxp_mul bit for bit.
  ShareTriple mul(const ShareTriple& a, const ShareTriple& b);

 private:
  FxpFormat fmt_;
  SharingOptions opts_;
  std::mt19937_64 rng_;
};

}  // namespace nfgen
