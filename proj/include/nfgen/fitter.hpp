#pragma once

// Fitting discrete piecewise polynomials that meet a soft-relative accuracy
// target under <n,f> fixed-point evaluation.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nfgen/expr.hpp"
#include "nfgen/fxp.hpp"
#include "nfgen/interpolate.hpp"
#include "nfgen/plan.hpp"

namespace nfgen {

struct FitConfig {
  double a = 0;
  double b = 1;
  double epsilon = 1e-3;
  double soft_zero = 1e-6;
  FxpFormat format{96, 48};
  int k_min = 3;
  int k_max = 10;
  int m_max = 50;
  std::size_t max_samples = 1000;
  // Values returned left of a and right of b once a plan is finalized.
  // When unset they default to F(a) and F(b).
  std::optional<std::pair<double, double>> defaults;

  // Ablation switches.
  bool enable_boosting = true;
  bool enable_scaling = true;
  bool enable_merge = true;
  // Retry a failing piece at lower effective orders before splitting.
  bool enable_order_fallback = true;
  ArithMode arith{};

  // Throws UsageError for a >= b, soft_zero >= epsilon, empty k range, ...
  void validate() const;
};

// Soft relative distance of y from the reference x.
double srd(double x, double y, double soft_zero);

// Largest order <= k whose powers stay inside the format over [a, b].
// The closed-form bound is followed by a check of the extreme grid values
// under truncating multiplication; see the implementation for details.
int constrain_k(double a, double b, FxpFormat fmt, int k);

// (c_hat, s_hat) with c_hat * s_hat ~ c, 0 < s_hat <= 1 and
// |c_hat| * x_char^i within the overflow bound. c = 0 gives (0, 1).
std::pair<FxpValue, FxpValue> scale_c(double c, FxpFormat fmt, int i, double x_char);

// scale_c per coefficient with x_char = max(|a|, |b|). With scaling
// disabled every scaler is 1 and coefficients are snapped directly.
ScaledPolynomial scale_poly(const Polynomial& p, double a, double b, FxpFormat fmt,
                            bool enable_scaling = true);

// Fixed sample set of one piece with cached reference values and power
// tables, so repeated accuracy checks only redo the polynomial sums.
class PieceSamples {
 public:
  PieceSamples(const RealFunction& F, FxpValue a, FxpValue b, int k, const FitConfig& cfg);

  std::size_t size() const { return xs_.size(); }
  const std::vector<FxpValue>& xs() const { return xs_; }
  // Max SRD of p over the samples; infinity if F was undefined anywhere.
  double max_srd(const ScaledPolynomial& p) const;

 private:
  std::vector<FxpValue> xs_;
  std::vector<double> fx_;
  std::vector<std::vector<FxpValue>> powers_;
  double soft_zero_;
  ArithMode arith_;
  bool defined_ = true;
};

ScaledPolynomial residual_boost(const ScaledPolynomial& p, const RealFunction& F, FxpValue a,
                                FxpValue b, const FitConfig& cfg, const PieceSamples& samples);

struct PieceFit {
  std::optional<ScaledPolynomial> poly;
  double max_srd = 0;
  std::string reason;  // why poly is absent
};

// One piece on the grid interval [a, b]; absent (with a reason) when the
// accuracy check fails or F is undefined somewhere in the interval.
PieceFit fit_one_piece(const RealFunction& F, FxpValue a, FxpValue b, int k,
                       const FitConfig& cfg);

struct FitOutcome {
  int k = 0;
  std::optional<PiecewisePlan> plan;
  std::string failure_reason;
  double max_srd = 0;      // over the fitting samples of all pieces
  double seconds = 0;
  int one_piece_calls = 0;
  int pieces_before_merge = 0;
};

// Bisection plus a single left-to-right merge pass for one order k.
FitOutcome fit_piecewise(const RealFunction& F, const FitConfig& cfg, int k);

struct CandidateSet {
  std::vector<PiecewisePlan> plans;  // ordered by k
  std::vector<FitOutcome> outcomes;  // one per k in the range
  int failures() const;
};

// fit_piecewise for every k in [k_min, k_max]. jobs > 1 runs orders on
// worker threads; results are identical for any job count.
CandidateSet fit_candidates(const RealFunction& F, const FitConfig& cfg, int jobs = 1);

// Build-time evaluation of F: quadrature builtins use eps/100 relative
// tolerance so their error stays negligible against the target.
Expression fit_time_expression(const Expression& e, double epsilon);

struct VerifyReport {
  std::size_t samples = 0;
  double max_srd = 0;
  double mean_srd = 0;
  FxpValue worst_x;
  double worst_reference = 0;
  double worst_value = 0;
  int worst_piece = -1;
  bool pass = false;
};

// Evaluates `samples` evenly spaced grid points of [cfg.a, cfg.b] through
// piece selection and eval_scaled_poly_fxp; pass iff max SRD < epsilon.
VerifyReport verify_plan(const PiecewisePlan& plan, const RealFunction& F, const FitConfig& cfg,
                         std::size_t samples = 10000);

// Upper bound on the max SRD between grid samples spaced r apart, given
// Lipschitz constants of F and of the plan and |F| at the point of interest.
double srd_bound_report(double lipschitz_F, double lipschitz_p, double r, const FitConfig& cfg,
                        double f_abs);

}  // namespace nfgen
