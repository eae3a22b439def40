#include "nfgen/oppe.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include <fmt/format.h>

namespace nfgen {

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::add: return "ADD";
    case OpKind::mul_cc: return "MUL_cc";
    case OpKind::mul_pc: return "MUL_pc";
    case OpKind::gt: return "GT";
  }
  return "?";
}

std::string to_string(Stream stream) {
  switch (stream) {
    case Stream::select: return "select";
    case Stream::powers: return "powers";
    case Stream::combine: return "combine";
  }
  return "?";
}

void OpTrace::append(const OpTrace& other) {
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

std::size_t OpTrace::elements(OpKind kind) const {
  std::size_t n = 0;
  for (const auto& r : records_) {
    if (r.kind == kind) n += r.length;
  }
  return n;
}

std::size_t OpTrace::elements(OpKind kind, Stream stream) const {
  std::size_t n = 0;
  for (const auto& r : records_) {
    if (r.kind == kind && r.stream == stream) n += r.length;
  }
  return n;
}

std::size_t OpTrace::record_count(OpKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [&](const OpRecord& r) { return r.kind == kind; }));
}

std::string OpTrace::dump() const {
  std::string out;
  for (const auto& r : records_) out += fmt::format("{} {}\n", to_string(r.kind), r.length);
  return out;
}

void SimOps::record(OpKind kind, std::size_t length) const {
  trace_.append({kind, length, stream_});
}

void SimOps::check(const CipherVec& a) const {
  for (const auto& c : a) {
    if (c.trace != &trace_) throw UsageError("ciphertext belongs to a different trace");
  }
}

CipherVec SimOps::add(const CipherVec& a, const CipherVec& b) const {
  if (a.size() != b.size()) throw UsageError("ADD: length mismatch");
  check(a);
  check(b);
  CipherVec out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(input(fxp_add(a[i].payload, b[i].payload, mode_)));
  record(OpKind::add, a.size());
  return out;
}

CipherVec SimOps::sub(const CipherVec& a, const CipherVec& b) const {
  if (a.size() != b.size()) throw UsageError("ADD: length mismatch");
  check(a);
  check(b);
  CipherVec out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(input(fxp_sub(a[i].payload, b[i].payload, mode_)));
  record(OpKind::add, a.size());
  return out;
}

CipherVec SimOps::mul(const CipherVec& a, const CipherVec& b) const {
  if (a.size() != b.size()) throw UsageError("MUL: length mismatch");
  check(a);
  check(b);
  CipherVec out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(input(fxp_mul(a[i].payload, b[i].payload, mode_)));
  record(OpKind::mul_cc, a.size());
  return out;
}

CipherVec SimOps::mul_plain(const std::vector<FxpValue>& p, const CipherVec& c) const {
  if (p.size() != c.size()) throw UsageError("MUL: length mismatch");
  check(c);
  CipherVec out;
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(input(fxp_mul(p[i], c[i].payload, mode_)));
  record(OpKind::mul_pc, c.size());
  return out;
}

CipherVec SimOps::ge_plain(const CipherVec& c, const std::vector<FxpValue>& p) const {
  if (p.size() != c.size()) throw UsageError("GT: length mismatch");
  check(c);
  CipherVec out;
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(input(fxp_ge(c[i].payload, p[i])));
  record(OpKind::gt, c.size());
  return out;
}

std::size_t kx_mul_count(int k) {
  if (k < 1) return 0;
  int lg = 0;
  while ((2 << lg) <= k) ++lg;
  return static_cast<std::size_t>((lg + 1) * (k + 1) - (2 << lg) + 1);
}

namespace {

CipherVec calculate_kx_on(const SimOps& ops, const SimCipher& x, int k) {
  const FxpFormat fmt = x.payload.format();
  CipherVec res(k + 1, x);
  res[0] = ops.input(FxpValue::one(fmt));
  for (int shift = 1; shift <= k; shift *= 2) {
    const CipherVec hi(res.begin() + shift, res.end());
    const CipherVec lo(res.begin(), res.end() - shift);
    const CipherVec prod = ops.mul(hi, lo);
    std::copy(prod.begin(), prod.end(), res.begin() + shift);
  }
  return res;
}

CipherVec piece_mask_on(const SimOps& ops, const SimCipher& x, const std::vector<FxpValue>& breaks) {
  const std::size_t m = breaks.size();
  const CipherVec comp = ops.ge_plain(CipherVec(m, x), breaks);
  // left shift by one, filling the vacated slot with 0
  CipherVec next(comp.begin() + 1, comp.end());
  next.push_back(ops.input(FxpValue::zero(x.payload.format())));
  return ops.sub(comp, next);
}

struct Selected {
  CipherVec coeff;
  CipherVec scaler;
};

// sum_j mask_j * c_{j,i} for every term i: one plaintext-ciphertext MUL per
// table over all pieces, then m-1 vector ADDs per table.
Selected select_terms(const SimOps& ops, const PiecewisePlan& plan, const SimCipher& x) {
  const std::size_t m = plan.m();
  const std::size_t terms = static_cast<std::size_t>(plan.k) + 1;
  const CipherVec mask = piece_mask_on(ops, x, plan.breaks);

  CipherVec spread;  // mask_j repeated for each term, piece-major
  std::vector<FxpValue> coeffs, scalers;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < terms; ++i) {
      spread.push_back(mask[j]);
      coeffs.push_back(plan.pieces[j].coeff[i]);
      scalers.push_back(plan.pieces[j].scaler[i]);
    }
  }
  const CipherVec pc = ops.mul_plain(coeffs, spread);
  const CipherVec ps = ops.mul_plain(scalers, spread);

  // accumulate piece by piece; only the selected piece contributes
  auto reduce = [&](const CipherVec& prod) {
    auto slice = [&](std::size_t j) {
      const auto first = prod.begin() + static_cast<std::ptrdiff_t>(j * terms);
      return CipherVec(first, first + static_cast<std::ptrdiff_t>(terms));
    };
    CipherVec acc = slice(0);
    for (std::size_t j = 1; j < m; ++j) acc = ops.add(acc, slice(j));
    return acc;
  };
  Selected s;
  s.coeff = reduce(pc);
  s.scaler = reduce(ps);
  return s;
}

}  // namespace

CipherVec calculate_kx(const SimCipher& x, int k, ArithMode mode) {
  if (k < 1) throw UsageError("calculate_kx: order must be at least 1");
  if (x.trace == nullptr) throw UsageError("calculate_kx: ciphertext has no trace");
  return calculate_kx_on(SimOps(*x.trace, mode, Stream::powers), x, k);
}

CipherVec piece_mask(const SimCipher& x, const std::vector<FxpValue>& breaks, ArithMode mode) {
  if (breaks.empty()) throw UsageError("piece_mask: no breaks");
  if (x.trace == nullptr) throw UsageError("piece_mask: ciphertext has no trace");
  for (std::size_t j = 1; j < breaks.size(); ++j) {
    if (!(breaks[j - 1] < breaks[j])) throw UsageError("piece_mask: breaks must strictly increase");
  }
  return piece_mask_on(SimOps(*x.trace, mode, Stream::select), x, breaks);
}

SimCipher oppe_eval(const PiecewisePlan& plan, const SimCipher& x, const OppeOptions& opts) {
  if (x.trace == nullptr) throw UsageError("oppe_eval: ciphertext has no trace");
  if (!(x.payload.format() == plan.format)) throw UsageError("oppe_eval: input format differs from plan");
  plan.validate();
  OpTrace& trace = *x.trace;
  const int k = plan.k;

  Selected sel;
  CipherVec powers;
  if (opts.parallel_streams) {
    // each stream records into its own trace; merged select-then-powers
    OpTrace select_trace, power_trace;
    const SimCipher xs{x.payload, &select_trace}, xp{x.payload, &power_trace};
    auto fut = std::async(std::launch::async, [&] {
      return select_terms(SimOps(select_trace, opts.arith, Stream::select), plan, xs);
    });
    if (k >= 1) powers = calculate_kx_on(SimOps(power_trace, opts.arith, Stream::powers), xp, k);
    sel = fut.get();
    trace.append(select_trace);
    trace.append(power_trace);
    for (auto* v : {&sel.coeff, &sel.scaler, &powers}) {
      for (auto& c : *v) c.trace = &trace;
    }
  } else {
    sel = select_terms(SimOps(trace, opts.arith, Stream::select), plan, x);
    if (k >= 1) powers = calculate_kx_on(SimOps(trace, opts.arith, Stream::powers), x, k);
  }
  if (k == 0) powers = {SimCipher{FxpValue::one(plan.format), &trace}};

  const SimOps ops(trace, opts.arith, Stream::combine);
  const CipherVec terms = ops.mul(ops.mul(sel.coeff, powers), sel.scaler);
  FxpValue acc = terms[0].payload;
  for (int i = 1; i <= k; ++i) acc = fxp_add(acc, terms[i].payload, opts.arith);
  if (k >= 1) trace.append({OpKind::add, static_cast<std::size_t>(k), Stream::combine});
  return {acc, &trace};
}

PiecewisePlan finalize_plan(const PiecewisePlan& plan) {
  plan.validate();
  if (plan.finalized) return plan;
  const FxpFormat fmt = plan.format;
  auto constant = [&](const FxpValue& v) {
    ScaledPolynomial p{{v}, {FxpValue::one(fmt)}};
    p.pad_to(plan.k, fmt);
    return p;
  };

  PiecewisePlan out;
  out.format = fmt;
  out.k = plan.k;
  out.default_left = plan.default_left;
  out.default_right = plan.default_right;
  const FxpValue lowest = FxpValue::lowest(fmt);
  if (lowest < plan.breaks.front()) {
    out.breaks.push_back(lowest);
    out.pieces.push_back(constant(plan.default_left));
  }
  out.breaks.insert(out.breaks.end(), plan.breaks.begin(), plan.breaks.end());
  out.pieces.insert(out.pieces.end(), plan.pieces.begin(), plan.pieces.end());
  // the fitted domain includes its end point, so the tail starts one step on
  if (plan.end < FxpValue::max(fmt)) {
    out.breaks.push_back(FxpValue(plan.end.mantissa() + 1, fmt));
    out.pieces.push_back(constant(plan.default_right));
  }
  out.end = FxpValue::max(fmt);
  out.finalized = true;
  out.validate();
  return out;
}

OppeResult oppe_run(const PiecewisePlan& plan, const FxpValue& x, const OppeOptions& opts) {
  OppeResult r{FxpValue::zero(plan.format), {}};
  r.value = oppe_eval(plan, SimCipher{x, &r.trace}, opts).payload;
  return r;
}

OpTrace trace_of(const PiecewisePlan& plan, const FxpValue& x, const OppeOptions& opts) {
  return oppe_run(plan, x, opts).trace;
}

std::vector<OppeResult> oppe_eval_batch(const PiecewisePlan& plan, const std::vector<FxpValue>& xs,
                                        const OppeOptions& opts, int jobs) {
  std::vector<OppeResult> out(xs.size(), OppeResult{FxpValue::zero(plan.format), {}});
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, xs.size()));
  const std::size_t block = (xs.size() + workers - 1) / workers;
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = oppe_run(plan, xs[i], opts);
  };
  if (workers == 1) {
    run(0, xs.size());
    return out;
  }
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(xs.size(), w * block), hi = std::min(xs.size(), lo + block);
    threads.emplace_back(run, lo, hi);
  }
  for (auto& t : threads) t.join();
  return out;
}

}  // namespace nfgen
