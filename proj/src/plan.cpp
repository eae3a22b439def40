#include "nfgen/plan.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace nfgen {

void ScaledPolynomial::pad_to(int k, FxpFormat fmt) {
  while (order() < k) {
    coeff.push_back(FxpValue::zero(fmt));
    scaler.push_back(FxpValue::one(fmt));
  }
}

void ScaledPolynomial::validate(FxpFormat fmt) const {
  if (coeff.empty() || coeff.size() != scaler.size()) {
    throw UsageError("scaled polynomial needs equal, non-empty coefficient and scaler lists");
  }
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    if (!(coeff[i].format() == fmt) || !(scaler[i].format() == fmt)) {
      throw UsageError("scaled polynomial term has a foreign format");
    }
    if (scaler[i].mantissa() <= 0 || scaler[i].mantissa() > FxpValue::one(fmt).mantissa()) {
      throw UsageError(fmt::format("scaler {} outside (0, 1]", i));
    }
  }
}

void PiecewisePlan::validate() const {
  if (pieces.empty()) throw UsageError("plan has no pieces");
  if (breaks.size() != pieces.size()) throw UsageError("plan needs one break per piece");
  for (std::size_t j = 0; j < breaks.size(); ++j) {
    if (!(breaks[j].format() == format)) throw UsageError("break has a foreign format");
    if (j > 0 && !(breaks[j - 1] < breaks[j])) throw UsageError("breaks must strictly increase");
  }
  if (!(end.format() == format)) throw UsageError("end point has a foreign format");
  if (end < breaks.back()) throw UsageError("end point lies left of the last break");
  for (const auto& p : pieces) {
    p.validate(format);
    if (p.order() != k) throw UsageError("pieces must share the plan order k");
  }
}

std::vector<FxpValue> power_table(const FxpValue& x, int k, ArithMode mode) {
  if (k < 0) throw UsageError("power_table: negative order");
  std::vector<FxpValue> res(k + 1, x);
  res[0] = FxpValue::one(x.format());
  for (int shift = 1; shift <= k; shift *= 2) {
    // update from the top so res[j - shift] still holds the previous round
    for (int j = k; j >= shift; --j) res[j] = fxp_mul(res[j], res[j - shift], mode);
  }
  return res;
}

FxpValue eval_scaled_poly_fxp(const ScaledPolynomial& p, const std::vector<FxpValue>& powers,
                              ArithMode mode) {
  if (static_cast<int>(powers.size()) < p.order() + 1) {
    throw UsageError("power table shorter than polynomial order");
  }
  FxpValue acc = FxpValue::zero(p.coeff.front().format());
  for (int i = 0; i <= p.order(); ++i) {
    const FxpValue term = fxp_mul(fxp_mul(p.coeff[i], powers[i], mode), p.scaler[i], mode);
    acc = fxp_add(acc, term, mode);
  }
  return acc;
}

FxpValue eval_scaled_poly_fxp(const ScaledPolynomial& p, const FxpValue& x, ArithMode mode) {
  return eval_scaled_poly_fxp(p, power_table(x, p.order(), mode), mode);
}

int select_piece(const PiecewisePlan& plan, const FxpValue& x) {
  const auto it = std::upper_bound(plan.breaks.begin(), plan.breaks.end(), x);
  return static_cast<int>(it - plan.breaks.begin()) - 1;
}

FxpValue eval_plan_direct(const PiecewisePlan& plan, const FxpValue& x, ArithMode mode) {
  const int j = select_piece(plan, x);
  if (j < 0) return FxpValue::zero(plan.format);
  return eval_scaled_poly_fxp(plan.pieces[j], x, mode);
}

}  // namespace nfgen
