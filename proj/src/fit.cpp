#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>

#include <fmt/format.h>

#include "nfgen/fitter.hpp"

namespace nfgen {

void FitConfig::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw UsageError(fmt::format("fit domain [{}, {}] must be finite with a < b", a, b));
  }
  if (!(soft_zero > 0) || !(soft_zero < epsilon)) {
    throw UsageError(fmt::format("need 0 < soft_zero ({}) < epsilon ({})", soft_zero, epsilon));
  }
  if (k_min < 1 || k_min > k_max) {
    throw UsageError(fmt::format("order range [{}, {}] is invalid", k_min, k_max));
  }
  if (m_max < 1) throw UsageError("m_max must be at least 1");
  if (max_samples < 2) throw UsageError("max_samples must be at least 2");
}

namespace {

double piece_seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Grid points in [a, b] inclusive, saturating at size_t range.
std::size_t grid_count(const FxpValue& a, const FxpValue& b) {
  const Mantissa d = b.mantissa() - a.mantissa();
  if (d >= static_cast<Mantissa>(std::numeric_limits<std::size_t>::max() / 2)) {
    return std::numeric_limits<std::size_t>::max() / 2;
  }
  return static_cast<std::size_t>(d) + 1;
}

}  // namespace

PieceSamples::PieceSamples(const RealFunction& F, FxpValue a, FxpValue b, int k,
                           const FitConfig& cfg)
    : soft_zero_(cfg.soft_zero), arith_(cfg.arith) {
  const std::size_t count = std::min(cfg.max_samples, grid_count(a, b));
  xs_ = count >= 2 ? linspace_grid(a, b, count) : std::vector<FxpValue>{a};
  fx_.reserve(xs_.size());
  powers_.reserve(xs_.size());
  for (const FxpValue& x : xs_) {
    fx_.push_back(F(x.to_double()));
    powers_.push_back(power_table(x, k, arith_));
  }
}

double PieceSamples::max_srd(const ScaledPolynomial& p) const {
  double worst = 0;
  for (std::size_t j = 0; j < xs_.size(); ++j) {
    const double y = eval_scaled_poly_fxp(p, powers_[j], arith_).to_double();
    worst = std::max(worst, srd(fx_[j], y, soft_zero_));
  }
  return worst;
}

ScaledPolynomial residual_boost(const ScaledPolynomial& p, const RealFunction& F, FxpValue a,
                                FxpValue b, const FitConfig& cfg, const PieceSamples& samples) {
  const FxpFormat fmt = cfg.format;
  const double lo = a.to_double(), hi = b.to_double();
  const int k = p.order();
  ScaledPolynomial best = p;
  double best_err = samples.max_srd(best);

  for (int kp = k - 1; kp >= 0 && best_err > 0; --kp) {
    // residual against the polynomial as the fixed-point evaluator sees it
    auto residual = [&](double x) {
      const FxpValue xh = flp_sim_fxp(x, fmt);
      const double approx = eval_scaled_poly_fxp(best, power_table(xh, k, cfg.arith), cfg.arith)
                                .to_double();
      return F(xh.to_double()) - approx;
    };
    const Polynomial r = cheby_interpolate(residual, lo, hi, kp);

    Polynomial merged(kp + 1);
    for (int i = 0; i <= kp; ++i) {
      merged[i] = best.coeff[i].to_double() * best.scaler[i].to_double() + r[i];
    }
    const ScaledPolynomial low = scale_poly(merged, lo, hi, fmt, cfg.enable_scaling);
    ScaledPolynomial candidate = best;
    for (int i = 0; i <= kp; ++i) {
      candidate.coeff[i] = low.coeff[i];
      candidate.scaler[i] = low.scaler[i];
    }
    const double err = samples.max_srd(candidate);
    if (err < best_err) {
      best = std::move(candidate);
      best_err = err;
    }
  }
  return best;
}

namespace {

// Single attempt at an effective order no larger than kbar.
PieceFit fit_at_order(const RealFunction& F, FxpValue a, FxpValue b, int kbar, int k,
                      const FitConfig& cfg, const PieceSamples& samples) {
  PieceFit out;
  const FxpFormat fmt = cfg.format;
  const double lo = a.to_double(), hi = b.to_double();
  const std::size_t points = grid_count(a, b);
  Polynomial p;
  if (points > static_cast<std::size_t>(kbar) + 1) {
    p = cheby_interpolate(F, lo, hi, kbar);
  } else {
    // too few grid values for the order: interpolate through all of them
    std::vector<double> xs;
    for (std::size_t j = 0; j < points; ++j) {
      xs.push_back(FxpValue(a.mantissa() + static_cast<Mantissa>(j), fmt).to_double());
    }
    p = lagrange_interpolate(F, xs);
  }
  ScaledPolynomial ph = scale_poly(p, lo, hi, fmt, cfg.enable_scaling);
  if (cfg.enable_boosting) ph = residual_boost(ph, F, a, b, cfg, samples);
  ph.pad_to(k, fmt);
  out.max_srd = samples.max_srd(ph);
  if (out.max_srd < cfg.epsilon) {
    out.poly = std::move(ph);
  } else {
    out.reason = fmt::format("max SRD {:.3g} >= {}", out.max_srd, cfg.epsilon);
  }
  return out;
}

}  // namespace

PieceFit fit_one_piece(const RealFunction& F, FxpValue a, FxpValue b, int k,
                       const FitConfig& cfg) {
  try {
    int kbar = constrain_k(a.to_double(), b.to_double(), cfg.format, k);
    kbar = std::min<std::size_t>(kbar, grid_count(a, b) - 1);
    const PieceSamples samples(F, a, b, k, cfg);
    PieceFit best = fit_at_order(F, a, b, kbar, k, cfg, samples);
    // Close to zero the top powers keep only a few significant bits, so a
    // lower order can beat the largest safe one.
    for (int order = kbar - 1; cfg.enable_order_fallback && !best.poly && order >= 1; --order) {
      PieceFit fit = fit_at_order(F, a, b, order, k, cfg, samples);
      if (fit.poly || fit.max_srd < best.max_srd) best = std::move(fit);
    }
    return best;
  } catch (const DomainError& e) {
    PieceFit out;
    out.max_srd = std::numeric_limits<double>::infinity();
    out.reason = e.what();
    return out;
  }
}

namespace {

struct Piece {
  FxpValue lo, hi;
  ScaledPolynomial poly;
  double max_srd;
};

class PiecewiseFitter {
 public:
  PiecewiseFitter(const RealFunction& F, const FitConfig& cfg, int k, FitOutcome& out)
      : F_(F), cfg_(cfg), k_(k), out_(out) {}

  bool bisect(FxpValue lo, FxpValue hi) {
    PieceFit fit = attempt(lo, hi);
    if (fit.poly) {
      pieces_.push_back({lo, hi, std::move(*fit.poly), fit.max_srd});
      return true;
    }
    if (hi.mantissa() - lo.mantissa() < 2) {
      out_.failure_reason = fmt::format("interval [{}, {}] cannot be split further ({})",
                                        lo.to_double(), hi.to_double(), fit.reason);
      return false;
    }
    if (++splits_ > cfg_.m_max) {
      out_.failure_reason = fmt::format("more than m_max={} splits", cfg_.m_max);
      return false;
    }
    const FxpValue mid(lo.mantissa() + (hi.mantissa() - lo.mantissa()) / 2, cfg_.format);
    return bisect(lo, mid) && bisect(mid, hi);
  }

  void merge() {
    std::size_t i = 0;
    while (i + 1 < pieces_.size()) {
      PieceFit fit = attempt(pieces_[i].lo, pieces_[i + 1].hi);
      if (fit.poly) {
        pieces_[i] = {pieces_[i].lo, pieces_[i + 1].hi, std::move(*fit.poly), fit.max_srd};
        pieces_.erase(pieces_.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      } else {
        ++i;
      }
    }
  }

  std::vector<Piece>& pieces() { return pieces_; }

 private:
  PieceFit attempt(FxpValue lo, FxpValue hi) {
    ++out_.one_piece_calls;
    return fit_one_piece(F_, lo, hi, k_, cfg_);
  }

  const RealFunction& F_;
  const FitConfig& cfg_;
  int k_;
  FitOutcome& out_;
  std::vector<Piece> pieces_;
  int splits_ = 0;
};

}  // namespace

FitOutcome fit_piecewise(const RealFunction& F, const FitConfig& cfg, int k) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  FitOutcome out;
  out.k = k;
  const FxpValue a = flp_sim_fxp(cfg.a, cfg.format);
  const FxpValue b = flp_sim_fxp(cfg.b, cfg.format);
  if (!(a < b)) {
    out.failure_reason = "domain collapses to a single grid value";
    out.seconds = piece_seconds_since(t0);
    return out;
  }

  PiecewiseFitter fitter(F, cfg, k, out);
  if (!fitter.bisect(a, b)) {
    out.seconds = piece_seconds_since(t0);
    return out;
  }
  out.pieces_before_merge = static_cast<int>(fitter.pieces().size());
  if (cfg.enable_merge) fitter.merge();
  auto& pieces = fitter.pieces();
  if (static_cast<int>(pieces.size()) > cfg.m_max) {
    out.failure_reason = fmt::format("{} pieces exceed m_max={}", pieces.size(), cfg.m_max);
    out.seconds = piece_seconds_since(t0);
    return out;
  }

  PiecewisePlan plan;
  plan.format = cfg.format;
  plan.k = k;
  plan.end = b;
  for (auto& p : pieces) {
    plan.breaks.push_back(p.lo);
    plan.pieces.push_back(std::move(p.poly));
    out.max_srd = std::max(out.max_srd, p.max_srd);
  }
  try {
    const auto [left, right] =
        cfg.defaults ? *cfg.defaults : std::pair{F(a.to_double()), F(b.to_double())};
    plan.default_left = flp_sim_fxp(left, cfg.format);
    plan.default_right = flp_sim_fxp(right, cfg.format);
  } catch (const DomainError&) {
    // F undefined exactly at an endpoint (possible when only sampled
    // interiors were checked); fall back to zero defaults
    plan.default_left = FxpValue::zero(cfg.format);
    plan.default_right = FxpValue::zero(cfg.format);
  }
  plan.validate();
  out.plan = std::move(plan);
  out.seconds = piece_seconds_since(t0);
  return out;
}

int CandidateSet::failures() const {
  return static_cast<int>(std::count_if(outcomes.begin(), outcomes.end(),
                                        [](const FitOutcome& o) { return !o.plan; }));
}

CandidateSet fit_candidates(const RealFunction& F, const FitConfig& cfg, int jobs) {
  cfg.validate();
  const int count = cfg.k_max - cfg.k_min + 1;
  std::vector<FitOutcome> outcomes(count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) outcomes[i] = fit_piecewise(F, cfg, cfg.k_min + i);
  } else {
    // static round-robin assignment keeps the result independent of timing
    std::vector<std::future<void>> workers;
    for (int w = 0; w < std::min(jobs, count); ++w) {
      workers.push_back(std::async(std::launch::async, [&, w] {
        for (int i = w; i < count; i += jobs) outcomes[i] = fit_piecewise(F, cfg, cfg.k_min + i);
      }));
    }
    for (auto& w : workers) w.get();
  }
  CandidateSet set;
  for (auto& o : outcomes) {
    if (o.plan) set.plans.push_back(*o.plan);
  }
  set.outcomes = std::move(outcomes);
  return set;
}

Expression fit_time_expression(const Expression& e, double epsilon) {
  EvalOptions opts = e.options();
  opts.quadrature_tol = epsilon / 100;
  return e.with_options(opts);
}

}  // namespace nfgen
