#include "nfgen/codegen.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>

#include <fmt/format.h>

#include "json.hpp"
#include "nfgen/oppe.hpp"

namespace nfgen {
namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string literal_list(const std::vector<FxpValue>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_exact(values[i]);
  }
  return out + "]";
}

std::string literal_rows(const std::vector<ScaledPolynomial>& pieces, bool coeff) {
  std::string out = "[";
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (j) out += ",\n        ";
    out += literal_list(coeff ? pieces[j].coeff : pieces[j].scaler);
  }
  return out + "]";
}

}  // namespace

std::string template_dir() {
  if (const char* env = std::getenv("NFGEN_TEMPLATE_DIR"); env && *env) return env;
  return NFGEN_TEMPLATE_DIR;
}

Template load_template(const std::string& id_or_path) {
  if (id_or_path == "sim" || id_or_path == "spdz-style") {
    const std::string path = (std::filesystem::path(template_dir()) / (id_or_path + ".tmpl")).string();
    return {id_or_path, read_text_file(path)};
  }
  return {std::filesystem::path(id_or_path).stem().string(), read_text_file(id_or_path)};
}

std::string substitute(const std::string& text, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{' && i + 1 < text.size() && ident_start(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < text.size() && ident_char(text[j])) ++j;
      if (j < text.size() && text[j] == '}') {
        const std::string name = text.substr(i + 1, j - i - 1);
        const auto it = bindings.find(name);
        if (it == bindings.end()) {
          const auto line = std::count(text.begin(), text.begin() + static_cast<long>(i), '\n') + 1;
          throw TemplateError(fmt::format("unbound placeholder {{{}}} on line {}", name, line));
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

std::map<std::string, std::string> plan_bindings(const PiecewisePlan& plan, const std::string& name) {
  return {
      {"function_name", name},
      {"breaks", literal_list(plan.breaks)},
      {"coeffA", literal_rows(plan.pieces, true)},
      {"scaler", literal_rows(plan.pieces, false)},
      {"k", std::to_string(plan.k)},
      {"m", std::to_string(plan.m())},
      {"n", std::to_string(plan.format.n)},
      {"f", std::to_string(plan.format.f)},
      {"format", to_string(plan.format)},
      {"end", format_exact(plan.end)},
      {"default_left", format_exact(plan.default_left)},
      {"default_right", format_exact(plan.default_right)},
  };
}

std::string render(const PiecewisePlan& plan, const Template& tmpl, const std::string& name) {
  if (!plan.finalized) throw UsageError("render: plan must be finalized first");
  plan.validate();
  return substitute(tmpl.text, plan_bindings(plan, name));
}

std::vector<CandidateSummary> summarize(const CandidateSet& set) {
  std::vector<CandidateSummary> out;
  for (const auto& o : set.outcomes) {
    out.push_back({o.k, o.plan ? static_cast<int>(o.plan->m()) : 0, o.max_srd, o.seconds,
                   o.failure_reason});
  }
  return out;
}

std::string PipelineReport::to_json() const {
  using nlohmann::json;
  json j;
  j["name"] = name;
  j["decision"] = decision;
  j["reason"] = reason;
  j["predicted_cost"] = predicted_cost;
  j["direct_cost"] = direct_cost ? json(*direct_cost) : json(nullptr);
  if (decision == "plan") {
    j["k"] = k;
    j["m"] = m;
    j["cost_extrapolated"] = extrapolated;
  }
  j["fit_seconds"] = fit_seconds;
  json per_k = json::array();
  for (const auto& c : candidates) {
    json row = {{"k", c.k}, {"seconds", c.seconds}};
    if (c.m > 0) {
      row["m"] = c.m;
      row["max_srd"] = c.max_srd;
    } else {
      row["failure"] = c.failure;
    }
    per_k.push_back(row);
  }
  j["candidates"] = per_k;
  if (verify) {
    j["verify"] = {{"samples", verify->samples},
                   {"max_srd", verify->max_srd},
                   {"mean_srd", verify->mean_srd},
                   {"worst_x", verify->worst_x.to_double()},
                   {"pass", verify->pass}};
  }
  return j.dump(2) + "\n";
}

PipelineResult run_pipeline(const NfdDocument& nfd, const PerfProfile& ppd, int jobs,
                            std::size_t verify_samples) {
  const FitConfig cfg = nfd.fit_config();
  const RealFunction F = nfd.fit_function();
  const auto t0 = std::chrono::steady_clock::now();
  const CandidateSet set = fit_candidates(F, cfg, jobs);
  const double fit_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  PipelineResult result;
  PipelineReport& rep = result.report;
  rep.name = nfd.name;
  rep.fit_seconds = fit_seconds;
  rep.candidates = summarize(set);

  const CostModel model = fit_cost_model(ppd);
  Decision d;
  try {
    d = select_plan(set.plans, model, available_ops(ppd.time_dict, nfd.ops), nfd.expression);
  } catch (const NoFeasiblePlanError& e) {
    std::string why = e.what();
    for (const auto& o : set.outcomes) why += fmt::format("\n  k={}: {}", o.k, o.failure_reason);
    throw NoFeasiblePlanError(why);
  }
  rep.reason = d.reason;
  rep.predicted_cost = d.predicted_cost;
  rep.direct_cost = d.direct_cost;
  if (d.kind == Decision::Kind::direct_eval) {
    rep.decision = "direct_eval";
    return result;
  }
  rep.decision = "plan";
  rep.k = d.plan->k;
  rep.m = static_cast<int>(d.plan->m());
  predict_oppe_cost(model, rep.k, rep.m, &rep.extrapolated);
  result.plan = finalize_plan(*d.plan);
  result.source = render(*result.plan, load_template(nfd.template_id), nfd.name);
  rep.verify = verify_plan(*result.plan, F, cfg, verify_samples);
  return result;
}

}  // namespace nfgen
