// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion, followed by
// indented detail lines, and exits non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "nfgen/codegen.hpp"
#include "nfgen/fitter.hpp"
#include "nfgen/io.hpp"
#include "nfgen/oppe.hpp"
#include "nfgen/perf_model.hpp"
#include "random_plan.hpp"

namespace nfgen {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string repo_path(const std::string& rel) { return std::string(NFGEN_TEST_DATA_DIR) + "/" + rel; }

struct Result {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

// ---------------------------------------------------------------------------
// Shared fits of the fifteen benchmark functions.

const char* kBench[] = {"sigmoid",    "tanh",       "soft_plus",  "elu",           "selu",
                        "gelu",       "soft_sign",  "isru",       "normal_dis",    "cauchy_dis",
                        "gamma_dis",  "chi_square_dis", "exp_dis", "log_dis",      "bs_dis"};

// Platform rows A-F and the bundled profiles standing in for them.
const char* kRowNames = "ABCDEF";
const char* kPpds[] = {"privpy_rep2k", "rep2k", "repf", "shamir", "ps_rep2k", "ps_repf"};

// Published piece counts per platform row; 0 where direct evaluation was
// reported instead of a plan.
const std::map<std::string, std::array<int, 6>> kReferenceM = {
    {"sigmoid", {8, 10, 14, 14, 14, 14}},    {"tanh", {8, 9, 9, 9, 9, 9}},
    {"soft_plus", {7, 9, 11, 11, 19, 11}},   {"elu", {4, 7, 7, 7, 7, 7}},
    {"selu", {4, 4, 8, 8, 8, 8}},            {"gelu", {6, 9, 9, 9, 9, 9}},
    {"soft_sign", {8, 0, 0, 0, 0, 0}},       {"isru", {8, 8, 13, 13, 0, 0}},
    {"normal_dis", {12, 12, 12, 12, 22, 12}}, {"cauchy_dis", {10, 0, 0, 0, 0, 0}},
    {"gamma_dis", {19, 21, 27, 27, 27, 27}}, {"chi_square_dis", {5, 5, 6, 6, 10, 6}},
    {"exp_dis", {3, 5, 5, 5, 5, 5}},         {"log_dis", {10, 12, 12, 12, 17, 12}},
    {"bs_dis", {8, 11, 16, 16, 16, 16}},
};

struct Fitted {
  NfdDocument nfd;
  FitConfig cfg;
  RealFunction F;
  CandidateSet set;
  double seconds = 0;
  std::array<std::optional<Decision>, 6> decisions;
};

struct Profiles {
  std::vector<PerfProfile> ppd;
  std::vector<CostModel> model;
};

const Profiles& profiles() {
  static const Profiles p = [] {
    Profiles out;
    for (const char* name : kPpds) {
      out.ppd.push_back(parse_ppd(repo_path(fmt::format("data/ppd/{}.json", name))));
      out.model.push_back(fit_cost_model(out.ppd.back()));
    }
    return out;
  }();
  return p;
}

std::map<std::string, Fitted>& bench() {
  static std::map<std::string, Fitted> fits;
  return fits;
}

const Fitted& fitted(const std::string& name) {
  auto& fits = bench();
  auto it = fits.find(name);
  if (it != fits.end()) return it->second;
  Fitted f;
  f.nfd = parse_nfd(repo_path(fmt::format("data/nfd/bench/{}.json", name)));
  f.cfg = f.nfd.fit_config();
  f.F = f.nfd.fit_function();
  const auto t0 = Clock::now();
  f.set = fit_candidates(f.F, f.cfg);
  f.seconds = seconds_since(t0);
  const Profiles& pr = profiles();
  for (std::size_t row = 0; row < 6; ++row) {
    try {
      f.decisions[row] = select_plan(f.set.plans, pr.model[row],
                                     available_ops(pr.ppd[row].time_dict, f.nfd.ops), f.nfd.expression);
    } catch (const NoFeasiblePlanError&) {
      f.decisions[row].reset();
    }
  }
  return fits.emplace(name, std::move(f)).first->second;
}

std::size_t grid_points(const FxpValue& lo, const FxpValue& hi) {
  const Mantissa d = hi.mantissa() - lo.mantissa() + 1;
  return d > (Mantissa{1} << 40) ? std::size_t{1} << 40 : static_cast<std::size_t>(d);
}

// Closed interval of piece j as fitted: [breaks[j], breaks[j+1]] or [.., end].
std::pair<FxpValue, FxpValue> piece_interval(const PiecewisePlan& p, std::size_t j) {
  return {p.breaks[j], j + 1 < p.m() ? p.breaks[j + 1] : p.end};
}

// ---------------------------------------------------------------------------
// 1. Fitting coverage

Result fitting_coverage() {
  Result r;
  int ok = 0;
  for (const char* name : kBench) {
    const Fitted& f = fitted(name);
    const auto& ref = kReferenceM.at(name);
    const int ref_min = *std::min_element(ref.begin(), ref.end(), [](int a, int b) {
      return (a == 0 ? 1 << 30 : a) < (b == 0 ? 1 << 30 : b);
    });
    bool pass = !f.set.plans.empty() &&
                std::any_of(f.set.plans.begin(), f.set.plans.end(),
                            [](const PiecewisePlan& p) { return p.k >= 3 && p.k <= 10; });
    double seconds = f.seconds;
    std::map<int, double> verified;  // k -> max srd
    const auto check = [&](const PiecewisePlan& p) {
      auto it = verified.find(p.k);
      if (it == verified.end()) {
        const auto t0 = Clock::now();
        it = verified.emplace(p.k, verify_plan(p, f.F, f.cfg, 10000).max_srd).first;
        seconds += seconds_since(t0);
      }
      return it->second;
    };

    std::string rows;
    bool any_plan = false;
    for (std::size_t row = 0; row < 6; ++row) {
      const auto& d = f.decisions[row];
      if (!d) {
        rows += fmt::format(" {}:none", kRowNames[row]);
        pass = false;
        continue;
      }
      if (d->kind == Decision::Kind::direct_eval) {
        rows += fmt::format(" {}:direct", kRowNames[row]);
        continue;
      }
      any_plan = true;
      const int limit = 2 * (ref[row] ? ref[row] : ref_min);
      const int m = static_cast<int>(d->plan->m());
      const double srd_max = check(*d->plan);
      const bool row_ok = m <= limit && srd_max <= 1e-3;
      pass = pass && row_ok;
      rows += fmt::format(" {}:({},{})/{}{}", kRowNames[row], d->plan->k, m, limit, row_ok ? "" : "!");
    }
    if (!any_plan && !f.set.plans.empty()) {
      // every profile preferred direct evaluation; hold the smallest plan to the tightest limit
      const PiecewisePlan& p = *std::min_element(
          f.set.plans.begin(), f.set.plans.end(),
          [](const PiecewisePlan& a, const PiecewisePlan& b) { return a.m() < b.m(); });
      const bool row_ok = static_cast<int>(p.m()) <= 2 * ref_min && check(p) <= 1e-3;
      pass = pass && row_ok;
      rows += fmt::format(" min:({},{})/{}{}", p.k, p.m(), 2 * ref_min, row_ok ? "" : "!");
    }
    double worst = 0;
    for (const auto& [k, s] : verified) worst = std::max(worst, s);
    pass = pass && seconds <= 60;
    ok += pass;
    r.details.push_back(fmt::format("{:<15} {} candidates, {:.1f}s, max srd {:.3g};{}{}", name,
                                    f.set.plans.size(), seconds, worst, rows, pass ? "" : "  FAIL"));
  }
  r.pass = ok == 15;
  r.summary = fmt::format("{}/15 functions fit, verify <= 1e-3 and stay within 2x the reference m", ok);
  return r;
}

// ---------------------------------------------------------------------------
// 2. Low-width adaptation

Result low_width() {
  Result r;
  struct Case {
    std::string name;
    FitConfig cfg;
    RealFunction F;
    int m_limit;
  };
  std::vector<Case> cases;
  {
    const NfdDocument nfd = parse_nfd(repo_path("data/nfd/tanh_lowbit.json"));
    cases.push_back({"tanh", nfd.fit_config(), nfd.fit_function(), 12});
  }
  {
    FitConfig cfg;
    cfg.a = -4.7;
    cfg.b = 4.7;
    cfg.epsilon = 5e-2;
    cfg.soft_zero = 1e-2;
    cfg.format = FxpFormat(32, 16);
    cases.push_back({"normal_dis", cfg, parse("exp(-x^2/2)/sqrt(2*pi)").as_function(), 14});
  }
  bool pass = true;
  for (auto& c : cases) {
    c.cfg.k_min = 3;
    c.cfg.k_max = 5;
    const CandidateSet set = fit_candidates(c.F, c.cfg);
    std::string found = "none";
    bool ok = false;
    std::size_t best_m = 0;
    for (const auto& p : set.plans) {
      if (static_cast<int>(p.m()) > c.m_limit) continue;
      const VerifyReport v = verify_plan(p, c.F, c.cfg);
      if (!v.pass || (ok && p.m() >= best_m)) continue;
      ok = true;
      best_m = p.m();
      found = fmt::format("({},{}) srd {:.3g}", p.k, p.m(), v.max_srd);
    }
    std::string all;
    for (const auto& o : set.outcomes) {
      all += o.plan ? fmt::format(" ({},{})", o.k, o.plan->m()) : fmt::format(" ({},-)", o.k);
    }
    r.details.push_back(fmt::format("{:<10} <32,16> k<=5 m<={}: best {}; candidates{}", c.name, c.m_limit,
                                    found, all));
    pass = pass && ok;
  }
  r.pass = pass;
  r.summary = "tanh and normal_dis fit at <32,16> with k <= 5 within the piece limits";
  return r;
}

// ---------------------------------------------------------------------------
// 3. FLPsimFXP representability

Result flp_sim_property() {
  Result r;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> n_dist(3, 128);
  std::uniform_real_distribution<double> exp_dist(-70, 70);
  std::uniform_real_distribution<double> unit(-1, 1);
  int range = 0, idem = 0, mono = 0;
  const int total = 100000;
  for (int i = 0; i < total; ++i) {
    const int n = n_dist(rng);
    const FxpFormat fmt(n, std::uniform_int_distribution<int>(1, n - 2)(rng));
    const double x = unit(rng) * std::exp2(exp_dist(rng));
    const double y = x + std::fabs(unit(rng)) * std::exp2(exp_dist(rng));
    const FxpValue a = flp_sim_fxp(x, fmt);
    // 2^(n-1) - 1 without forming 2^127
    const Mantissa max = ((Mantissa{1} << (n - 2)) - 1) * 2 + 1;
    range += a.mantissa() <= max && a.mantissa() >= -max;
    idem += flp_sim_fxp(a.to_double(), fmt) == a;
    mono += a <= flp_sim_fxp(y, fmt);
  }
  const double secs = seconds_since(t0);
  r.pass = range == total && idem == total && mono == total && secs < 5;
  r.summary = fmt::format("{} random reals: range {}, idempotent {}, monotone {}, {:.2f}s", total, range,
                          idem, mono, secs);
  return r;
}

// ---------------------------------------------------------------------------
// 4. ConstrainK safety

struct PowerCheck {
  int clamped = 0;
  int underflowed = 0;
};

PowerCheck scan_powers(double a, double b, FxpFormat fmt, int kbar) {
  PowerCheck out;
  const Mantissa max = fmt.max_mantissa();
  for (const FxpValue& x : linspace_fxp(a, b, 1000, fmt)) {
    if (x.is_zero()) continue;
    FxpValue p = x;
    bool clamp = false;
    for (int i = 2; i <= kbar; ++i) {
      p = fxp_mul(p, x);
      clamp = clamp || p.mantissa() == max || p.mantissa() == -max;
    }
    out.clamped += clamp;
    out.underflowed += p.is_zero();
  }
  return out;
}

Result constrain_k_safety() {
  Result r;
  struct Case {
    double a, b;
    FxpFormat fmt;
    int k;
  };
  std::vector<Case> cases = {{-50, 50, FxpFormat(96, 48), 10},
                             {1, 2, FxpFormat(96, 48), 10},
                             {0.25, 0.5, FxpFormat(96, 48), 10}};
  std::mt19937_64 rng(4);
  while (cases.size() < 103) {
    const int n = std::uniform_int_distribution<int>(16, 128)(rng);
    const int f = std::clamp(std::uniform_int_distribution<int>(n / 4, 3 * n / 4)(rng), 1, n - 2);
    const FxpFormat fmt(n, f);
    const double lim = std::min(fmt.max_value() / 2, 1e6);
    const auto draw = [&] {
      const double mag = std::exp2(std::uniform_real_distribution<double>(-6, std::log2(lim))(rng));
      return (rng() % 2 ? -1.0 : 1.0) * mag;
    };
    double a = draw(), b = draw();
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    cases.push_back({a, b, fmt, std::uniform_int_distribution<int>(1, 10)(rng)});
  }
  int bad = 0, bad_spanning = 0, spanning = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const int kbar = constrain_k(c.a, c.b, c.fmt, c.k);
    const PowerCheck pc = scan_powers(c.a, c.b, c.fmt, kbar);
    const bool spans = c.a * c.b <= 0;
    spanning += spans;
    if (i < 3) {
      r.details.push_back(fmt::format("example [{}, {}] {} k={}: kbar {}, clamped {}, underflowed {}", c.a, c.b,
                                      to_string(c.fmt), c.k, kbar, pc.clamped, pc.underflowed));
    }
    if (pc.clamped || pc.underflowed) {
      ++bad;
      bad_spanning += spans;
      if (bad <= 8) {
        r.details.push_back(fmt::format("case {} [{:.6g}, {:.6g}] {} k={}: kbar {}, clamped {}, underflowed {}", i,
                                        c.a, c.b, to_string(c.fmt), c.k, kbar, pc.clamped, pc.underflowed));
      }
    }
  }
  r.details.push_back(fmt::format("violations: {} of {} cases spanning zero, {} of {} same-sign cases", bad_spanning,
                                  spanning, bad - bad_spanning, cases.size() - spanning));
  r.pass = bad == 0;
  r.summary = fmt::format("{} of {} domains keep x^kbar unclamped and nonzero on a 1000-point grid",
                          cases.size() - bad, cases.size());
  return r;
}

// ---------------------------------------------------------------------------
// 5. OPPE against select-then-evaluate

// Scalar reference: linear scan for the piece, doubling power schedule,
// sum of (c_i * x^i) * s_i from i = 0.
FxpValue select_then_evaluate(const PiecewisePlan& plan, const FxpValue& x) {
  int j = -1;
  for (std::size_t i = 0; i < plan.breaks.size(); ++i) {
    if (x >= plan.breaks[i]) j = static_cast<int>(i);
  }
  if (j < 0) return FxpValue::zero(plan.format);
  const ScaledPolynomial& p = plan.pieces[static_cast<std::size_t>(j)];
  const int k = p.order();
  std::vector<FxpValue> pw(static_cast<std::size_t>(k + 1), x);
  pw[0] = FxpValue::one(plan.format);
  for (int shift = 1; shift <= k; shift *= 2) {
    for (int i = k; i >= shift; --i) pw[i] = fxp_mul(pw[i], pw[i - shift]);
  }
  FxpValue acc = FxpValue::zero(plan.format);
  for (int i = 0; i <= k; ++i) acc = fxp_add(acc, fxp_mul(fxp_mul(p.coeff[i], pw[i]), p.scaler[i]));
  return acc;
}

Result oppe_oracle() {
  Result r;
  std::mt19937_64 rng(5);
  long mismatches = 0, evaluated = 0;
  for (int t = 0; t < 1000; ++t) {
    const FxpFormat fmt = testing::random_format(rng, 8, 128);
    const PiecewisePlan plan = finalize_plan(testing::random_plan(
        rng, fmt, 1 + static_cast<int>(rng() % 8), static_cast<int>(rng() % 11)));
    for (int s = 0; s < 100; ++s) {
      const FxpValue x = testing::random_value(rng, fmt);
      mismatches += !(oppe_run(plan, x).value == select_then_evaluate(plan, x));
      ++evaluated;
    }
  }
  long exhaustive = 0, ex_mismatch = 0;
  const FxpFormat small(8, 3);
  for (int t = 0; t < 50; ++t) {
    const PiecewisePlan plan = finalize_plan(testing::random_plan(
        rng, small, 1 + static_cast<int>(rng() % 6), static_cast<int>(rng() % 6)));
    for (Mantissa m = -small.max_mantissa(); m <= small.max_mantissa(); ++m) {
      const FxpValue x(m, small);
      ex_mismatch += !(oppe_run(plan, x).value == select_then_evaluate(plan, x));
      ++exhaustive;
    }
  }
  r.pass = mismatches == 0 && ex_mismatch == 0;
  r.summary = fmt::format("random: {} mismatches in {} evaluations; <8,3> exhaustive: {} in {}", mismatches,
                          evaluated, ex_mismatch, exhaustive);
  return r;
}

// ---------------------------------------------------------------------------
// 6. Obliviousness

Result obliviousness() {
  Result r;
  std::mt19937_64 rng(6);
  int identical = 0;
  for (int t = 0; t < 100; ++t) {
    const FxpFormat fmt = testing::random_format(rng, 8, 128);
    const PiecewisePlan plan = finalize_plan(testing::random_plan(
        rng, fmt, 1 + static_cast<int>(rng() % 10), static_cast<int>(rng() % 11)));
    std::vector<FxpValue> xs;
    while (xs.size() < 10) {
      const FxpValue x = testing::random_value(rng, fmt);
      if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    }
    std::vector<OpTrace> traces;
    for (const auto& x : xs) traces.push_back(trace_of(plan, x));
    bool same = true;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      for (std::size_t j = i + 1; j < traces.size(); ++j) same = same && traces[i] == traces[j];
    }
    identical += same;
  }
  r.pass = identical == 100;
  r.summary = fmt::format("{}/100 plans give pairwise identical traces over 10 inputs", identical);
  return r;
}

// ---------------------------------------------------------------------------
// 7. Operation counts

Result complexity_counts() {
  Result r;
  std::mt19937_64 rng(7);
  const FxpFormat fmt(96, 48);
  int ok = 0, total = 0;
  for (int k = 3; k <= 10; ++k) {
    for (int m : {2, 10, 50}) {
      ++total;
      const PiecewisePlan plan = finalize_plan(testing::random_plan(rng, fmt, m, k));
      const std::size_t mp = plan.m();
      const OpTrace tr = trace_of(plan, testing::random_value(rng, fmt));
      const int lg = static_cast<int>(std::floor(std::log2(k)));
      const std::size_t kx = static_cast<std::size_t>((lg + 1) * (k + 1) - (1 << (lg + 1)) + 1);
      const bool good = mp == static_cast<std::size_t>(m + 2) && tr.elements(OpKind::gt) == mp &&
                        tr.elements(OpKind::mul_cc, Stream::powers) == kx &&
                        tr.elements(OpKind::mul_pc, Stream::select) == 2 * static_cast<std::size_t>(k + 1) * mp;
      ok += good;
      if (!good || (m == 10 && (k == 3 || k == 10))) {
        r.details.push_back(fmt::format("k={} m={}: GT {} (m+2={}), CalculateKx MUL {} (formula {}), selection MUL_pc {} "
                                        "(2(k+1)m'={})",
                                        k, m, tr.elements(OpKind::gt), m + 2,
                                        tr.elements(OpKind::mul_cc, Stream::powers), kx,
                                        tr.elements(OpKind::mul_pc, Stream::select), 2 * (k + 1) * mp));
      }
    }
  }
  r.pass = ok == total;
  r.summary = fmt::format("{}/{} (k, m) settings match GT = m+2, CalculateKx and selection counts", ok, total);
  return r;
}

// ---------------------------------------------------------------------------
// 8. Ablation

std::string outcome_list(const CandidateSet& set) {
  std::string s;
  for (const auto& o : set.outcomes) {
    s += o.plan ? fmt::format(" ({},{})", o.k, o.plan->m()) : fmt::format(" ({},-)", o.k);
  }
  return s;
}

Result ablation() {
  Result r;
  // Gamma_dis, residual boosting off
  const Fitted& g = fitted("gamma_dis");
  FitConfig nb = g.cfg;
  nb.enable_boosting = false;
  const CandidateSet g_off = fit_candidates(g.F, nb);
  const int g_fail_on = g.set.failures(), g_fail_off = g_off.failures();

  // equal (k, m) between the two independent runs
  int equal_km = 0, equal_km_higher = 0;
  for (std::size_t i = 0; i < g.set.outcomes.size(); ++i) {
    const auto& a = g.set.outcomes[i];
    const auto& b = g_off.outcomes[i];
    if (a.plan && b.plan && a.plan->m() == b.plan->m()) {
      ++equal_km;
      equal_km_higher += b.max_srd > a.max_srd;
    }
  }
  // the boosted partition refitted piece by piece without boosting
  int fixed_orders = 0, fixed_higher = 0;
  std::string fixed;
  for (const auto& o : g.set.outcomes) {
    if (!o.plan) continue;
    ++fixed_orders;
    double with = 0, without = 0;
    int failing = 0;
    for (std::size_t j = 0; j < o.plan->m(); ++j) {
      const auto [lo, hi] = piece_interval(*o.plan, j);
      const PieceFit on = fit_one_piece(g.F, lo, hi, o.k, g.cfg);
      const PieceFit off = fit_one_piece(g.F, lo, hi, o.k, nb);
      with = std::max(with, on.max_srd);
      without = std::max(without, off.max_srd);
      failing += !off.poly;
    }
    fixed_higher += without > with;
    fixed += fmt::format(" k={}:{:.3g}/{:.3g}", o.k, with, without);
    if (failing) fixed += fmt::format("[{} failing]", failing);
  }
  const bool gamma_ok = g_fail_off > g_fail_on || (equal_km > 0 && equal_km_higher == equal_km) ||
                        (fixed_orders > 0 && fixed_higher == fixed_orders);
  r.details.push_back(fmt::format("gamma_dis boosted{}", outcome_list(g.set)));
  r.details.push_back(fmt::format("gamma_dis unboosted{}", outcome_list(g_off)));
  r.details.push_back(fmt::format("gamma_dis failures {} -> {}; equal (k,m) higher srd {}/{}", g_fail_on, g_fail_off,
                                  equal_km_higher, equal_km));
  r.details.push_back(
      fmt::format("gamma_dis same partition, max srd boosted/unboosted:{} -> higher at {}/{}", fixed,
                  fixed_higher, fixed_orders));

  // selu, scaling off
  const Fitted& s = fitted("selu");
  FitConfig ns = s.cfg;
  ns.enable_scaling = false;
  const CandidateSet s_off = fit_candidates(s.F, ns);
  const bool selu_ok = s_off.failures() >= s.set.failures() + 1;
  r.details.push_back(fmt::format("selu scaled{}", outcome_list(s.set)));
  r.details.push_back(fmt::format("selu unscaled{}", outcome_list(s_off)));
  r.details.push_back(fmt::format("selu failures {} -> {}", s.set.failures(), s_off.failures()));

  r.pass = gamma_ok && selu_ok;
  r.summary = fmt::format("gamma_dis without boosting: {}; selu without scaling: {}",
                          gamma_ok ? "worse" : "not worse", selu_ok ? "extra failure" : "no extra failure");
  return r;
}

// ---------------------------------------------------------------------------
// 9. Selection behaviour

Result selection() {
  Result r;
  const Fitted& ss = fitted("soft_sign");
  const Fitted& sg = fitted("sigmoid");
  const auto kind = [](const std::optional<Decision>& d) {
    if (!d) return std::string("none");
    return d->kind == Decision::Kind::plan ? fmt::format("plan({},{})", d->plan->k, d->plan->m())
                                           : std::string("direct_eval");
  };
  const bool a_ok = ss.decisions[0] && ss.decisions[0]->kind == Decision::Kind::plan;
  const bool b_ok = ss.decisions[1] && ss.decisions[1]->kind == Decision::Kind::direct_eval;
  bool sig_ok = true;
  std::string sig;
  for (std::size_t row = 0; row < 6; ++row) {
    sig_ok = sig_ok && sg.decisions[row] && sg.decisions[row]->kind == Decision::Kind::plan;
    sig += fmt::format(" {}:{}", kPpds[row], kind(sg.decisions[row]));
  }
  std::string soft;
  for (std::size_t row = 0; row < 6; ++row) soft += fmt::format(" {}:{}", kPpds[row], kind(ss.decisions[row]));
  r.details.push_back("soft_sign" + soft);
  r.details.push_back("sigmoid  " + sig);
  r.pass = a_ok && b_ok && sig_ok;
  r.summary = fmt::format("soft_sign privpy_rep2k {}, rep2k {}; sigmoid never direct_eval: {}",
                          kind(ss.decisions[0]), kind(ss.decisions[1]), sig_ok ? "yes" : "no");
  return r;
}

// ---------------------------------------------------------------------------
// 10. Codegen round-trip

Result codegen_round_trip() {
  Result r;
  const Template sim = load_template("sim");
  const Template spdz = load_template("spdz-style");
  bool pass = true;
  for (const char* name : {"constant", "random", "sigmoid"}) {
    const PiecewisePlan p = load_plan(repo_path(fmt::format("tests/golden/{}.plan.json", name)));
    const PiecewisePlan back = plan_from_json(render(p, sim, name));
    // the fitted domain plus an eighth of its width on each side
    const double lo = p.breaks[1].to_double(), hi = p.end.to_double(), pad = (hi - lo) / 8;
    const double max = p.format.max_value();
    long diff = 0;
    for (const FxpValue& x :
         linspace_fxp(std::max(-max, lo - pad), std::min(max, hi + pad), 10000, p.format)) {
      diff += !(oppe_run(back, x).value == oppe_run(p, x).value);
    }
    const bool golden =
        render(p, spdz, name) == read_text_file(repo_path(fmt::format("tests/golden/{}.spdz-style.txt", name)));
    pass = pass && diff == 0 && back == p && golden;
    r.details.push_back(fmt::format("{:<8} sim reload {}, {} differing outputs of 10000, spdz-style golden {}", name,
                                    back == p ? "equal" : "DIFFERENT", diff, golden ? "match" : "MISMATCH"));
  }
  r.pass = pass;
  r.summary = "sim output reloads bit-identically and spdz-style output matches the golden files";
  return r;
}

// ---------------------------------------------------------------------------
// 11. SRD bound diagnostic

struct BoundCheck {
  long points = 0;
  long violations = 0;
  double worst_ratio = 0;  // measured / bound
  double max_srd = 0;
};

void check_bound(const PiecewisePlan& plan, const RealFunction& F, const FitConfig& cfg, BoundCheck& out) {
  for (std::size_t j = 0; j < plan.m(); ++j) {
    const auto [lo, hi] = piece_interval(plan, j);
    const std::size_t grid = grid_points(lo, hi);
    const std::size_t fit_count = std::min(cfg.max_samples, grid);
    if (fit_count < 2) continue;
    const auto fit_xs = linspace_grid(lo, hi, fit_count);
    double r = 0;
    for (std::size_t i = 1; i < fit_xs.size(); ++i) {
      r = std::max(r, fit_xs[i].to_double() - fit_xs[i - 1].to_double());
    }
    const auto xs = linspace_grid(lo, hi, std::min(grid, 10 * (fit_count - 1) + 1));
    std::vector<double> fx, px;
    for (const auto& x : xs) {
      fx.push_back(F(x.to_double()));
      px.push_back(eval_scaled_poly_fxp(plan.pieces[j], x, cfg.arith).to_double());
    }
    double lf = 0, lp = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double dx = xs[i].to_double() - xs[i - 1].to_double();
      if (dx <= 0) continue;
      lf = std::max(lf, std::fabs(fx[i] - fx[i - 1]) / dx);
      lp = std::max(lp, std::fabs(px[i] - px[i - 1]) / dx);
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double measured = srd(fx[i], px[i], cfg.soft_zero);
      const double bound = srd_bound_report(lf, lp, r, cfg, std::fabs(fx[i]));
      ++out.points;
      out.violations += measured > bound;
      out.worst_ratio = std::max(out.worst_ratio, measured / bound);
      out.max_srd = std::max(out.max_srd, measured);
    }
  }
}

Result srd_bound() {
  Result r;
  bool pass = true;
  for (const char* name : {"sigmoid", "tanh"}) {
    const Fitted& f = fitted(name);
    BoundCheck bc;
    for (const auto& p : f.set.plans) check_bound(p, f.F, f.cfg, bc);
    pass = pass && bc.violations == 0 && bc.points > 0;
    r.details.push_back(fmt::format("{:<8} {} plans, {} points: max srd {:.3g}, worst measured/bound {:.3g}, "
                                    "violations {}",
                                    name, f.set.plans.size(), bc.points, bc.max_srd, bc.worst_ratio,
                                    bc.violations));
  }
  r.pass = pass;
  r.summary = "measured SRD on a 10x denser grid stays under the reported bound";
  return r;
}

}  // namespace
}  // namespace nfgen

int main() {
  using namespace nfgen;
  struct Criterion {
    int id;
    const char* name;
    std::function<Result()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "fitting coverage", fitting_coverage},
      {2, "low-width adaptation", low_width},
      {3, "FLPsimFXP representability", flp_sim_property},
      {4, "ConstrainK safety", constrain_k_safety},
      {5, "OPPE oracle equivalence", oppe_oracle},
      {6, "obliviousness", obliviousness},
      {7, "complexity counts", complexity_counts},
      {8, "ablation", ablation},
      {9, "selection behaviour", selection},
      {10, "codegen round-trip", codegen_round_trip},
      {11, "SRD bound diagnostic", srd_bound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Result res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.pass = false;
      res.summary = fmt::format("exception: {}", e.what());
    }
    failed += !res.pass;
    fmt::print("[{}] {} {}: {} ({:.1f}s)\n", res.pass ? "PASS" : "FAIL", c.id, c.name, res.summary,
               seconds_since(t0));
    for (const auto& d : res.details) fmt::print("    {}\n", d);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
