// nfgen command-line driver.
//
// Exit codes: 0 success, 1 unreadable/invalid input, 2 no feasible plan,
// 3 verification failed.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "nfgen/codegen.hpp"
#include "nfgen/io.hpp"
#include "nfgen/oppe.hpp"
#include "nfgen/perf_model.hpp"

namespace {

using namespace nfgen;

constexpr int kExitInput = 1;
constexpr int kExitNoPlan = 2;
constexpr int kExitVerifyFail = 3;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("NFGEN_SEED"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("NFGEN_SEED=\"{}\" is not an unsigned integer", env));
    }
  }
  return 0;
}

void print_candidate_table(const std::vector<CandidateSummary>& rows) {
  fmt::print("{:>3} {:>4} {:>12} {:>9}  {}\n", "k", "m", "max_srd", "seconds", "note");
  for (const auto& r : rows) {
    if (r.m > 0) {
      fmt::print("{:>3} {:>4} {:>12.4e} {:>9.2f}\n", r.k, r.m, r.max_srd, r.seconds);
    } else {
      fmt::print("{:>3} {:>4} {:>12} {:>9.2f}  {}\n", r.k, "-", "-", r.seconds, r.failure);
    }
  }
}

int cmd_fit(const std::string& nfd_path, const std::string& out_path, int jobs) {
  const NfdDocument nfd = parse_nfd(nfd_path);
  const CandidateSet set = fit_candidates(nfd.fit_function(), nfd.fit_config(), jobs);
  const auto rows = summarize(set);
  double total = 0;
  for (const auto& r : rows) total += r.seconds;
  print_candidate_table(rows);
  fmt::print("{} candidate(s), {:.2f} s fitting\n", set.plans.size(), total);
  if (!out_path.empty()) write_text_file(out_path, candidates_to_json(set, nfd.name));
  if (set.plans.empty()) {
    fmt::print(stderr, "no candidate plan for any k in [{}, {}]\n", nfd.k_min, nfd.k_max);
    return kExitNoPlan;
  }
  return 0;
}

int cmd_select(const std::string& nfd_path, const std::string& ppd_path,
               const std::string& candidates_path, int jobs) {
  const NfdDocument nfd = parse_nfd(nfd_path);
  const PerfProfile ppd = parse_ppd(ppd_path);
  std::vector<PiecewisePlan> candidates;
  if (!candidates_path.empty()) {
    candidates = candidates_from_json(read_text_file(candidates_path));
  } else {
    candidates = fit_candidates(nfd.fit_function(), nfd.fit_config(), jobs).plans;
  }
  const CostModel model = fit_cost_model(ppd);
  const Decision d =
      select_plan(candidates, model, available_ops(ppd.time_dict, nfd.ops), nfd.expression);
  fmt::print("{:>3} {:>4} {:>12}\n", "k", "m", "cost");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    fmt::print("{:>3} {:>4} {:>12.2f}\n", candidates[i].k, candidates[i].m(), d.candidate_costs[i]);
  }
  if (d.direct_cost) fmt::print("direct evaluation cost {:.2f}\n", *d.direct_cost);
  if (d.kind == Decision::Kind::direct_eval) {
    fmt::print("decision: direct_eval ({})\n", d.reason);
  } else {
    fmt::print("decision: plan k={} m={} cost {:.2f} ({})\n", d.plan->k, d.plan->m(), d.predicted_cost,
               d.reason);
  }
  return 0;
}

int cmd_gen(const std::string& nfd_path, const std::string& ppd_path, std::string out_path,
            std::string report_path, int jobs) {
  const NfdDocument nfd = parse_nfd(nfd_path);
  const PerfProfile ppd = parse_ppd(ppd_path);
  const PipelineResult res = run_pipeline(nfd, ppd, jobs);
  if (out_path.empty()) out_path = nfd.output.empty() ? nfd.name + ".out" : nfd.output;
  if (report_path.empty()) report_path = out_path + ".report.json";
  write_text_file(report_path, res.report.to_json());
  if (res.report.decision == "direct_eval") {
    fmt::print("{}: direct_eval ({}); no source emitted\n", nfd.name, res.report.reason);
  } else {
    write_text_file(out_path, res.source);
    fmt::print("{}: plan k={} m={}, max SRD {:.3e}; wrote {}\n", nfd.name, res.report.k,
               res.report.m, res.report.verify->max_srd, out_path);
  }
  fmt::print("report: {}\n", report_path);
  return 0;
}

int cmd_verify(const std::string& plan_path, const std::string& nfd_path, std::size_t samples) {
  const NfdDocument nfd = parse_nfd(nfd_path);
  const PiecewisePlan plan = load_plan(plan_path);
  const FitConfig cfg = nfd.fit_config();
  if (!(plan.format == cfg.format)) {
    fmt::print(stderr, "plan format {} does not match the NFD format {}\n", to_string(plan.format),
               to_string(cfg.format));
    return kExitInput;
  }
  const VerifyReport r = verify_plan(plan, nfd.fit_function(), cfg, samples);
  fmt::print("samples {}\nmax_srd {:.6e}\nmean_srd {:.6e}\n", r.samples, r.max_srd, r.mean_srd);
  fmt::print("worst x {} (piece {}): reference {:.9g}, plan {:.9g}\n", format_exact(r.worst_x),
             r.worst_piece, r.worst_reference, r.worst_value);
  fmt::print("{}\n", r.pass ? "PASS" : fmt::format("FAIL: max SRD >= tol {}", cfg.epsilon));
  return r.pass ? 0 : kExitVerifyFail;
}

std::vector<double> split_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("\"{}\" is not a number", item));
    }
  }
  return out;
}

struct SuiteArgs {
  std::string name = "synthetic";
  double mul = 1;
  std::string ratios = "1:11:67:55:118:44";
  double add = -1;
  double latency_share = 0;
  std::pair<int, int> k_range{3, 10};
  std::pair<int, int> m_range{2, 50};
  int repeats = 0;
  std::string out;
};

int cmd_profile_suite(const SuiteArgs& a, std::uint64_t seed) {
  const auto r = split_numbers(a.ratios, ':');
  if (r.size() != 6) throw ConfigError("--ratios needs mul:gt:reciprocal:sqrt:log:exp");
  PerfProfile p;
  p.name = a.name;
  p.latency_share = a.latency_share;
  const double unit = a.mul / r[0];
  p.time_dict = {{"mul", a.mul},          {"gt", unit * r[1]},  {"reciprocal", unit * r[2]},
                 {"sqrt", unit * r[3]},   {"log", unit * r[4]}, {"exp", unit * r[5]},
                 {"add", a.add >= 0 ? a.add : 0.01 * a.mul}};
  p.validate();
  const auto suite = generate_profiling_suite(a.k_range, a.m_range, a.repeats, seed);
  p.samples = profile_suite(suite, p.time_dict, p.latency_share);
  const CostModel model = fit_cost_model(p);
  fmt::print(stderr, "{} samples, regression rms residual {:.4g} (max {:.4g})\n", p.samples.size(),
             model.rms_residual, model.max_abs_residual);
  const std::string text = ppd_to_json(p);
  if (a.out.empty()) {
    fmt::print("{}", text);
  } else {
    write_text_file(a.out, text);
  }
  return 0;
}

int cmd_trace(const std::string& plan_path, const std::vector<double>& inputs) {
  PiecewisePlan plan = load_plan(plan_path);
  if (!plan.finalized) {
    fmt::print(stderr, "note: plan is not finalized; tracing its finalized form\n");
    plan = finalize_plan(plan);
  }
  std::vector<OpTrace> traces;
  for (double x : inputs) {
    const FxpValue xv = flp_sim_fxp(x, plan.format);
    const OppeResult r = oppe_run(plan, xv);
    fmt::print("# input {} -> {}\n{}", format_exact(xv), format_exact(r.value), r.trace.dump());
    traces.push_back(r.trace);
  }
  if (traces.size() >= 2) {
    bool same = true;
    for (const auto& t : traces) same = same && t == traces.front();
    fmt::print("verdict: {}\n", same ? "identical" : "different");
  }
  const OpTrace t = traces.empty() ? trace_of(plan, FxpValue::zero(plan.format)) : traces.front();
  const int k = plan.k;
  const std::size_t m = plan.m();
  fmt::print("GT {} (m = {})\n", t.elements(OpKind::gt), m);
  fmt::print("MUL_cc in CalculateKx {} (formula {})\n", t.elements(OpKind::mul_cc, Stream::powers),
             kx_mul_count(k));
  fmt::print("MUL_pc in selection {} (formula 2(k+1)m = {})\n",
             t.elements(OpKind::mul_pc, Stream::select), 2 * (k + 1) * m);
  return traces.size() >= 2 && !(traces.back() == traces.front()) ? kExitVerifyFail : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fit, select and emit piecewise polynomial approximations for fixed-point MPC"};
  app.require_subcommand(1);
  int jobs = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--jobs", jobs, "worker threads for fitting")->check(CLI::PositiveNumber);
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) {
        seed = s;
        seed_given = true;
      },
      "seed for randomized steps (default: NFGEN_SEED or 0)");

  std::string nfd, ppd, out, plan, report, candidates;
  std::size_t samples = 10000;
  std::vector<double> inputs;
  SuiteArgs suite;

  auto* fit = app.add_subcommand("fit", "fit candidate plans for every order k");
  fit->add_option("nfd", nfd, "NFD JSON")->required();
  fit->add_option("-o,--out", out, "candidate set output JSON");

  auto* sel = app.add_subcommand("select", "choose between candidate plans and direct evaluation");
  sel->add_option("nfd", nfd, "NFD JSON")->required();
  sel->add_option("ppd", ppd, "PPD JSON")->required();
  sel->add_option("--candidates", candidates, "candidate set from 'fit' (fits anew if omitted)");

  auto* gen = app.add_subcommand("gen", "run the whole pipeline and emit source");
  gen->add_option("nfd", nfd, "NFD JSON")->required();
  gen->add_option("ppd", ppd, "PPD JSON")->required();
  gen->add_option("-o,--out", out, "source output path (default: the NFD's output field)");
  gen->add_option("--report", report, "report JSON path (default: <out>.report.json)");

  auto* ver = app.add_subcommand("verify", "check a plan against its NFD on an even grid");
  ver->add_option("plan", plan, "plan JSON (plain or sim template output)")->required();
  ver->add_option("nfd", nfd, "NFD JSON")->required();
  ver->add_option("--samples", samples, "grid size")->check(CLI::PositiveNumber);

  auto* prof = app.add_subcommand("profile-suite", "build a PPD from the synthetic cost accountant");
  prof->add_option("--name", suite.name, "profile name");
  prof->add_option("--mul", suite.mul, "MUL time in ms")->check(CLI::PositiveNumber);
  prof->add_option("--ratios", suite.ratios, "mul:gt:reciprocal:sqrt:log:exp time ratios");
  prof->add_option("--add", suite.add, "ADD time in ms (default 1% of MUL)");
  prof->add_option("--latency-share", suite.latency_share, "per-op fixed share of the cost")
      ->check(CLI::Range(0.0, 1.0));
  prof->add_option("--k-range", suite.k_range, "k range as two integers");
  prof->add_option("--m-range", suite.m_range, "m range as two integers");
  prof->add_option("--repeats", suite.repeats, "plans per (k, m); 0 targets ~2000 in total");
  prof->add_option("-o,--out", suite.out, "PPD output path (default: stdout)");

  auto* tr = app.add_subcommand("trace", "dump OPPE traces and check obliviousness");
  tr->add_option("plan", plan, "plan JSON")->required();
  tr->add_option("--inputs", inputs, "input values")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (!seed_given) seed = default_seed();
    if (*fit) return cmd_fit(nfd, out, jobs);
    if (*sel) return cmd_select(nfd, ppd, candidates, jobs);
    if (*gen) return cmd_gen(nfd, ppd, out, report, jobs);
    if (*ver) return cmd_verify(plan, nfd, samples);
    if (*prof) return cmd_profile_suite(suite, seed);
    if (*tr) return cmd_trace(plan, inputs);
  } catch (const NoFeasiblePlanError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitNoPlan;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInput;
  }
  return 0;
}
