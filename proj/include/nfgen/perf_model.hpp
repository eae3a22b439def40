#pragma once

// Cost prediction and plan selection: a regression model of OPPE cost over
// (k, m) fitted to profiling samples, a census-based price for evaluating
// the expression directly, and the fallback rule choosing between them.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nfgen/expr.hpp"
#include "nfgen/plan.hpp"

namespace nfgen {

// Unit costs keyed by op name (add, mul, gt, reciprocal, sqrt, log, exp,
// optionally mul_pc and other), in milliseconds per 100-element vector op.
using TimeDict = std::map<std::string, double>;

struct PerfSample {
  int k = 0;
  int m = 0;
  double time = 0;
};

struct PerfProfile {
  std::string name;
  TimeDict time_dict;
  std::vector<PerfSample> samples;
  // Fraction of a vector op's cost paid per record regardless of length;
  // used only by the synthetic cost accountant.
  double latency_share = 0;

  // Throws ConfigError on non-positive costs or malformed samples.
  void validate() const;
};

inline constexpr int kCostFeatures = 7;
// [1, k, m, k*m, k*log2(k), m^2, k^2]
std::array<double, kCostFeatures> cost_features(int k, int m);

struct CostModel {
  std::array<double, kCostFeatures> coeff{};
  int k_lo = 0, k_hi = 0, m_lo = 0, m_hi = 0;  // trained range
  double rms_residual = 0;
  double max_abs_residual = 0;
};

// Least squares over the samples. Throws FittingError with fewer samples
// than features or a rank-deficient design matrix.
CostModel fit_cost_model(const PerfProfile& profile);

// Feature dot product; `extrapolated` (if given) reports a (k, m) outside
// the trained range.
double predict_oppe_cost(const CostModel& model, int k, int m, bool* extrapolated = nullptr);

// Sum over the census of count times unit cost: division costs a
// reciprocal plus a multiplication and comparisons cost gt. Throws
// ConfigError naming the first op kind the table cannot price.
double predict_direct_cost(const TimeDict& time_dict, const Expression& e);

struct Decision {
  enum class Kind { plan, direct_eval };
  Kind kind = Kind::plan;
  std::optional<PiecewisePlan> plan;
  double predicted_cost = 0;
  std::optional<double> direct_cost;      // absent when not priceable
  std::vector<double> candidate_costs;    // parallel to the candidate list
  std::string reason;
};

// Direct evaluation iff the expression avoids exp, has fewer than three
// nonlinear steps and is cheaper than every candidate; otherwise the
// cheapest candidate, ties broken by smaller m then smaller k. Throws
// NoFeasiblePlanError when there is neither a candidate nor an eligible
// direct evaluation.
Decision select_plan(const std::vector<PiecewisePlan>& candidates, const CostModel& model,
                     const TimeDict& time_dict, const Expression& e);

struct SuiteEntry {
  int k = 0;
  int m = 0;
  PiecewisePlan plan;  // random valid parameters, not finalized
};

// Random plans over the (k, m) grid. repeats = 0 picks the count per grid
// point that brings the total closest to 2000.
std::vector<SuiteEntry> generate_profiling_suite(std::pair<int, int> k_range,
                                                 std::pair<int, int> m_range, int repeats = 0,
                                                 std::uint64_t seed = 0,
                                                 FxpFormat format = FxpFormat{96, 48});

// Synthetic cost of one finalized plan from its OPPE trace: each record
// costs unit * (latency_share + (1 - latency_share) * length). Plaintext
// multiplications are priced as mul_pc when present, else as add.
double accountant_cost(const PiecewisePlan& finalized, const TimeDict& time_dict,
                       double latency_share);

// Profiles every suite entry with the accountant (plans are finalized
// first), producing the samples of a PerfProfile.
std::vector<PerfSample> profile_suite(const std::vector<SuiteEntry>& suite, const TimeDict& time_dict,
                                      double latency_share);

}  // namespace nfgen
