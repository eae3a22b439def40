#include <cmath>
#include <limits>

#include "nfgen/fitter.hpp"

namespace nfgen {

VerifyReport verify_plan(const PiecewisePlan& plan, const RealFunction& F, const FitConfig& cfg,
                         std::size_t samples) {
  if (samples < 2) throw UsageError("verify_plan needs at least 2 samples");
  if (!(plan.format == cfg.format)) throw UsageError("plan format differs from the config format");
  VerifyReport rep;
  rep.worst_x = FxpValue::zero(plan.format);
  double total = 0;
  for (const FxpValue& x : linspace_fxp(cfg.a, cfg.b, samples, cfg.format)) {
    const double y = eval_plan_direct(plan, x, cfg.arith).to_double();
    double ref, d;
    try {
      ref = F(x.to_double());
      d = srd(ref, y, cfg.soft_zero);
    } catch (const DomainError&) {
      ref = std::numeric_limits<double>::quiet_NaN();
      d = std::numeric_limits<double>::infinity();
    }
    ++rep.samples;
    total += d;
    if (d > rep.max_srd || rep.samples == 1) {
      rep.max_srd = d;
      rep.worst_x = x;
      rep.worst_reference = ref;
      rep.worst_value = y;
      rep.worst_piece = select_piece(plan, x);
    }
  }
  rep.mean_srd = total / static_cast<double>(rep.samples);
  rep.pass = rep.max_srd < cfg.epsilon;
  return rep;
}

double srd_bound_report(double lipschitz_F, double lipschitz_p, double r, const FitConfig& cfg,
                        double f_abs) {
  const double C = lipschitz_F + lipschitz_p + cfg.epsilon * lipschitz_F;
  return f_abs > cfg.soft_zero ? C * r / f_abs + cfg.epsilon : C * r + cfg.epsilon;
}

}  // namespace nfgen
