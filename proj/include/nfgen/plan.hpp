#pragma once

// Discrete piecewise polynomials: the artifact produced by the fitter,
// evaluated by the oblivious simulator and rendered by codegen.

#include <string>
#include <vector>

#include "nfgen/fxp.hpp"

namespace nfgen {

// One piece: sum_i (coeff_i * x^i) * scaler_i.
struct ScaledPolynomial {
  std::vector<FxpValue> coeff;
  std::vector<FxpValue> scaler;

  int order() const { return static_cast<int>(coeff.size()) - 1; }
  // Appends zero terms (coefficient 0, scaler 1) up to order k.
  void pad_to(int k, FxpFormat fmt);
  // Throws UsageError when lengths differ, formats disagree or a scaler is
  // outside (0, 1].
  void validate(FxpFormat fmt) const;

  friend bool operator==(const ScaledPolynomial&, const ScaledPolynomial&) = default;
};

struct PiecewisePlan {
  FxpFormat format;
  // Left edges of the pieces, strictly increasing; piece j covers
  // [breaks[j], breaks[j+1]) and the last one [breaks[m-1], end].
  std::vector<FxpValue> breaks;
  FxpValue end;
  std::vector<ScaledPolynomial> pieces;
  int k = 0;
  FxpValue default_left;
  FxpValue default_right;
  // Set once sentinel pieces for out-of-domain inputs have been installed.
  bool finalized = false;

  std::size_t m() const { return pieces.size(); }
  void validate() const;

  friend bool operator==(const PiecewisePlan&, const PiecewisePlan&) = default;
};

// [1, x, x^2, ..., x^k] using the vectorised doubling schedule shared with
// the oblivious evaluator: res = [1, x, ..., x]; for shift = 1, 2, 4, ...
// while shift <= k, res[j] *= res[j - shift] for every j >= shift.
std::vector<FxpValue> power_table(const FxpValue& x, int k, ArithMode mode = {});

// Sum over i of fxp_mul(fxp_mul(coeff_i, x^i), scaler_i), accumulated from
// i = 0 upwards with fxp_add.
FxpValue eval_scaled_poly_fxp(const ScaledPolynomial& p, const FxpValue& x, ArithMode mode = {});
// Same, with a precomputed power table of at least p.order() + 1 entries.
FxpValue eval_scaled_poly_fxp(const ScaledPolynomial& p, const std::vector<FxpValue>& powers,
                              ArithMode mode = {});

// Index of the piece whose interval holds x (greatest j with x >= breaks[j]),
// or -1 when x is left of every break.
int select_piece(const PiecewisePlan& plan, const FxpValue& x);

// Piece lookup followed by scalar evaluation; x left of the first break
// evaluates to zero, matching an all-zero selection mask.
FxpValue eval_plan_direct(const PiecewisePlan& plan, const FxpValue& x, ArithMode mode = {});

}  // namespace nfgen
