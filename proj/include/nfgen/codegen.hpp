#pragma once

// Rendering plans into target source through placeholder templates, and
// the end-to-end fit, select, finalize, render and verify pipeline.

#include <map>
#include <optional>
#include <string>

#include "nfgen/fitter.hpp"
#include "nfgen/io.hpp"
#include "nfgen/perf_model.hpp"

namespace nfgen {

struct Template {
  std::string id;
  std::string text;
};

// Directory holding the bundled templates; NFGEN_TEMPLATE_DIR in the
// environment overrides the build-time location.
std::string template_dir();

// "sim" and "spdz-style" name bundled templates; anything else is read as
// a file path. Throws ConfigError when the file is missing.
Template load_template(const std::string& id_or_path);

// Replaces every {identifier} in the text. Braces not wrapping an
// identifier are copied as is. Throws TemplateError for an identifier
// missing from `bindings`.
std::string substitute(const std::string& text, const std::map<std::string, std::string>& bindings);

// Bindings for a finalized plan: breaks, coeffA, scaler (exact decimal
// literals), k, m, n, f, format, end, default_left, default_right and
// function_name.
std::map<std::string, std::string> plan_bindings(const PiecewisePlan& plan, const std::string& name);

// Throws UsageError for an unfinalized plan.
std::string render(const PiecewisePlan& plan, const Template& tmpl, const std::string& name);

struct CandidateSummary {
  int k = 0;
  int m = 0;  // 0 when the order failed
  double max_srd = 0;
  double seconds = 0;
  std::string failure;
};

std::vector<CandidateSummary> summarize(const CandidateSet& set);

struct PipelineReport {
  std::string name;
  std::string decision;  // "plan" or "direct_eval"
  std::string reason;
  int k = 0;
  int m = 0;  // pieces before finalize
  double predicted_cost = 0;
  std::optional<double> direct_cost;
  bool extrapolated = false;
  double fit_seconds = 0;
  std::vector<CandidateSummary> candidates;
  std::optional<VerifyReport> verify;

  std::string to_json() const;
};

struct PipelineResult {
  PipelineReport report;
  std::optional<PiecewisePlan> plan;  // finalized, when decision is "plan"
  std::string source;                 // empty for direct_eval
};

// fit_candidates -> select_plan -> finalize_plan -> render -> verify_plan.
// Throws NoFeasiblePlanError carrying the per-k failure reasons.
PipelineResult run_pipeline(const NfdDocument& nfd, const PerfProfile& ppd, int jobs = 1,
                            std::size_t verify_samples = 10000);

}  // namespace nfgen
