#pragma once

// JSON documents: plans, candidate sets, function definitions (NFD) and
// performance profiles (PPD).

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfgen/expr.hpp"
#include "nfgen/fitter.hpp"
#include "nfgen/perf_model.hpp"
#include "nfgen/plan.hpp"

namespace nfgen {

// Exact decimal form of mantissa * 2^-f, e.g. "-7.5" or "3.0".
std::string format_exact(const FxpValue& v);
// Inverse of format_exact. Accepts integers, fractions and exponents, and
// throws ConfigError unless the value lies exactly on the format's grid.
FxpValue parse_exact(std::string_view text, FxpFormat fmt);

// Plan JSON with mantissas as decimal-string integers:
// {"format":{"n","f"}, "k", "m", "breaks", "end", "coeff", "scaler",
//  "defaults":[l,r], "finalized"}. A document with "encoding":"decimal"
// holds exact decimal values instead (the shape the sim template emits).
std::string plan_to_json(const PiecewisePlan& plan, int indent = 2);
// Throws ConfigError naming the offending field.
PiecewisePlan plan_from_json(std::string_view text);

std::string read_text_file(const std::string& path);  // ConfigError if unreadable
void write_text_file(const std::string& path, std::string_view text);

PiecewisePlan load_plan(const std::string& path);

struct NfdDocument {
  std::string name = "f";
  std::string function;
  Expression expression;
  double a = 0, b = 1;
  double tol = 1e-3;
  double zero_mask = 1e-6;
  int n = 96, f = 48;
  std::optional<std::pair<double, double>> default_values;
  // Nonlinear ops the target platform offers; empty means all of them.
  std::vector<std::string> ops;
  std::string template_id = "sim";
  std::string output;
  int k_min = 3, k_max = 10;
  int m_max = 50;
  std::size_t max_samples = 1000;

  FitConfig fit_config() const;
  // F evaluated at fit time (quadrature builtins at tol/100).
  RealFunction fit_function() const;
};

// Throws ConfigError naming the field for schema or validation failures.
NfdDocument parse_nfd_json(std::string_view text);
NfdDocument parse_nfd(const std::string& path);

// {"name", "time_dict", "samples":[[k,m,t],...], "metadata":{...}}.
PerfProfile parse_ppd_json(std::string_view text);
PerfProfile parse_ppd(const std::string& path);
std::string ppd_to_json(const PerfProfile& profile);

// time_dict restricted to what the NFD's op list allows.
TimeDict available_ops(const TimeDict& time_dict, const std::vector<std::string>& ops);

// All candidates of one fit with their per-k summary.
std::string candidates_to_json(const CandidateSet& set, const std::string& name);
std::vector<PiecewisePlan> candidates_from_json(std::string_view text);

}  // namespace nfgen
