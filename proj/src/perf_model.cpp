#include "nfgen/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "nfgen/oppe.hpp"

namespace nfgen {

void PerfProfile::validate() const {
  for (const auto& [op, cost] : time_dict) {
    if (!(cost >= 0) || !std::isfinite(cost)) {
      throw ConfigError(fmt::format("time_dict.{}: cost {} must be finite and non-negative", op, cost));
    }
  }
  for (const char* op : {"add", "mul", "gt"}) {
    if (!time_dict.count(op)) throw ConfigError(fmt::format("time_dict.{} is missing", op));
  }
  if (!(latency_share >= 0 && latency_share <= 1)) {
    throw ConfigError(fmt::format("latency_share {} outside [0, 1]", latency_share));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.k < 1 || s.m < 1 || !std::isfinite(s.time) || s.time < 0) {
      throw ConfigError(fmt::format("samples[{}] = ({}, {}, {}) is malformed", i, s.k, s.m, s.time));
    }
  }
}

std::array<double, kCostFeatures> cost_features(int k, int m) {
  const double kd = k, md = m;
  return {1.0, kd, md, kd * md, k > 0 ? kd * std::log2(kd) : 0.0, md * md, kd * kd};
}

CostModel fit_cost_model(const PerfProfile& profile) {
  const auto& samples = profile.samples;
  if (samples.size() < kCostFeatures) {
    throw FittingError(fmt::format("cost model needs at least {} samples, got {}", kCostFeatures,
                                   samples.size()));
  }
  Eigen::MatrixXd A(samples.size(), kCostFeatures);
  Eigen::VectorXd t(samples.size());
  CostModel model;
  model.k_lo = model.m_lo = std::numeric_limits<int>::max();
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto f = cost_features(samples[r].k, samples[r].m);
    for (int c = 0; c < kCostFeatures; ++c) A(r, c) = f[c];
    t(r) = samples[r].time;
    model.k_lo = std::min(model.k_lo, samples[r].k);
    model.k_hi = std::max(model.k_hi, samples[r].k);
    model.m_lo = std::min(model.m_lo, samples[r].m);
    model.m_hi = std::max(model.m_hi, samples[r].m);
  }
  // column scaling keeps the rank decision independent of feature magnitude
  const Eigen::VectorXd norms = A.colwise().norm();
  for (int c = 0; c < kCostFeatures; ++c) {
    if (norms(c) == 0) throw FittingError(fmt::format("cost feature {} is identically zero", c));
    A.col(c) /= norms(c);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < kCostFeatures) {
    throw FittingError(fmt::format("design matrix is rank deficient (rank {} of {}); profile more "
                                   "distinct (k, m) pairs",
                                   qr.rank(), kCostFeatures));
  }
  const Eigen::VectorXd x = qr.solve(t);
  for (int c = 0; c < kCostFeatures; ++c) model.coeff[c] = x(c) / norms(c);
  const Eigen::VectorXd res = A * x - t;
  model.rms_residual = std::sqrt(res.squaredNorm() / static_cast<double>(samples.size()));
  model.max_abs_residual = res.cwiseAbs().maxCoeff();
  return model;
}

double predict_oppe_cost(const CostModel& model, int k, int m, bool* extrapolated) {
  if (extrapolated) {
    *extrapolated = k < model.k_lo || k > model.k_hi || m < model.m_lo || m > model.m_hi;
  }
  const auto f = cost_features(k, m);
  double cost = 0;
  for (int c = 0; c < kCostFeatures; ++c) cost += model.coeff[c] * f[c];
  return cost;
}

namespace {

double price(const TimeDict& td, const std::string& op, const std::string& census_kind) {
  const auto it = td.find(op);
  if (it == td.end()) {
    throw ConfigError(fmt::format("time_dict has no price for '{}' (needed by census kind '{}')", op,
                                  census_kind));
  }
  return it->second;
}

}  // namespace

double predict_direct_cost(const TimeDict& td, const Expression& e) {
  double cost = 0;
  for (const auto& [kind, count] : census(e).counts()) {
    double unit;
    if (kind == "div") {
      unit = price(td, "reciprocal", kind) + price(td, "mul", kind);
    } else if (kind == "comparison") {
      unit = price(td, "gt", kind);
    } else {
      unit = price(td, kind, kind);
    }
    cost += unit * count;
  }
  return cost;
}

Decision select_plan(const std::vector<PiecewisePlan>& candidates, const CostModel& model,
                     const TimeDict& time_dict, const Expression& e) {
  Decision d;
  int best = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& p = candidates[i];
    const double c = predict_oppe_cost(model, p.k, static_cast<int>(p.m()));
    d.candidate_costs.push_back(c);
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const auto& b = candidates[best];
    const double bc = d.candidate_costs[best];
    // regression predictions carry rounding noise, so near-equal costs tie
    const bool tie = std::fabs(c - bc) <= 1e-9 * std::max(std::fabs(c), std::fabs(bc));
    if (tie ? std::pair(p.m(), p.k) < std::pair(b.m(), b.k) : c < bc) best = static_cast<int>(i);
  }

  const OpCensus cen = census(e);
  std::string why_not;
  if (cen.contains_exp()) {
    why_not = "expression contains exp";
  } else if (cen.nonlinear_step_count() >= 3) {
    why_not = fmt::format("{} nonlinear steps (direct evaluation needs fewer than 3)",
                          cen.nonlinear_step_count());
  } else {
    try {
      d.direct_cost = predict_direct_cost(time_dict, e);
    } catch (const ConfigError& err) {
      why_not = fmt::format("direct cost unavailable: {}", err.what());
    }
  }
  if (why_not.empty() && d.direct_cost) {
    const bool beats_all = std::all_of(d.candidate_costs.begin(), d.candidate_costs.end(),
                                       [&](double c) { return *d.direct_cost < c; });
    if (beats_all) {
      d.kind = Decision::Kind::direct_eval;
      d.predicted_cost = *d.direct_cost;
      d.reason = candidates.empty() ? "no candidate plan; direct evaluation is eligible"
                                    : "direct evaluation is cheaper than every candidate";
      return d;
    }
    why_not = "a candidate plan is cheaper than direct evaluation";
  }
  if (best < 0) {
    throw NoFeasiblePlanError(fmt::format("no candidate plan and direct evaluation is ineligible: {}",
                                          why_not));
  }
  d.kind = Decision::Kind::plan;
  d.plan = candidates[best];
  d.predicted_cost = d.candidate_costs[best];
  d.reason = why_not;
  return d;
}

std::vector<SuiteEntry> generate_profiling_suite(std::pair<int, int> k_range,
                                                 std::pair<int, int> m_range, int repeats,
                                                 std::uint64_t seed, FxpFormat format) {
  const auto [k_lo, k_hi] = k_range;
  const auto [m_lo, m_hi] = m_range;
  if (k_lo < 1 || k_lo > k_hi || m_lo < 1 || m_lo > m_hi) {
    throw UsageError(fmt::format("profiling ranges k=[{},{}] m=[{},{}] are invalid", k_lo, k_hi,
                                 m_lo, m_hi));
  }
  if (repeats < 0) throw UsageError("repeats must be non-negative");
  const int cells = (k_hi - k_lo + 1) * (m_hi - m_lo + 1);
  if (repeats == 0) repeats = std::max(1, static_cast<int>(std::lround(2000.0 / cells)));

  std::mt19937_64 rng(seed);
  const FxpValue one = FxpValue::one(format);
  // breaks spread over [-64, 64), a typical fitted domain size
  const Mantissa span = std::min<Mantissa>(format.max_mantissa() / 2, one.mantissa() * 64);
  std::uniform_int_distribution<long long> unit(1, 1LL << 30);
  std::vector<SuiteEntry> suite;
  suite.reserve(static_cast<std::size_t>(cells) * repeats);
  for (int r = 0; r < repeats; ++r) {
    for (int k = k_lo; k <= k_hi; ++k) {
      for (int m = m_lo; m <= m_hi; ++m) {
        PiecewisePlan plan;
        plan.format = format;
        plan.k = k;
        const Mantissa step = std::max<Mantissa>(1, 2 * span / (m + 1));
        for (int j = 0; j < m; ++j) plan.breaks.emplace_back(-span + step * j, format);
        plan.end = FxpValue(-span + step * m, format);
        for (int j = 0; j < m; ++j) {
          ScaledPolynomial p;
          for (int i = 0; i <= k; ++i) {
            // coefficient in [-1, 1), scaler in (0, 1]
            const Mantissa c = (one.mantissa() * unit(rng)) >> 30;
            p.coeff.emplace_back(rng() % 2 ? c : -c, format);
            p.scaler.emplace_back(std::max<Mantissa>(1, (one.mantissa() * unit(rng)) >> 30), format);
          }
          plan.pieces.push_back(std::move(p));
        }
        plan.default_left = FxpValue::zero(format);
        plan.default_right = FxpValue::zero(format);
        plan.validate();
        suite.push_back({k, m, std::move(plan)});
      }
    }
  }
  return suite;
}

double accountant_cost(const PiecewisePlan& finalized, const TimeDict& td, double latency_share) {
  const OpTrace trace = trace_of(finalized, FxpValue::zero(finalized.format));
  const double add = price(td, "add", "ADD");
  const double mul = price(td, "mul", "MUL_cc");
  const double gt = price(td, "gt", "GT");
  const auto pc = td.find("mul_pc");
  const double mul_pc = pc == td.end() ? add : pc->second;
  double total = 0;
  for (const auto& r : trace.records()) {
    double unit = 0;
    switch (r.kind) {
      case OpKind::add: unit = add; break;
      case OpKind::mul_cc: unit = mul; break;
      case OpKind::mul_pc: unit = mul_pc; break;
      case OpKind::gt: unit = gt; break;
    }
    total += unit * (latency_share + (1 - latency_share) * static_cast<double>(r.length));
  }
  return total;
}

std::vector<PerfSample> profile_suite(const std::vector<SuiteEntry>& suite, const TimeDict& td,
                                      double latency_share) {
  std::vector<PerfSample> out;
  out.reserve(suite.size());
  for (const auto& e : suite) {
    out.push_back({e.k, e.m, accountant_cost(finalize_plan(e.plan), td, latency_share)});
  }
  return out;
}

}  // namespace nfgen
