#pragma once

// Reference runtime for oblivious piecewise polynomial evaluation over
// simulated ciphertexts. Every vector operation appends one trace record,
// so the recorded sequence is the execution path an MPC backend would run.

#include <cstddef>
#include <string>
#include <vector>

#include "nfgen/plan.hpp"

namespace nfgen {

enum class OpKind { add, mul_cc, mul_pc, gt };

// Which independent sub-sequence an operation belongs to. The mask and
// coefficient selection never read the powers of x and vice versa, so the
// two can be scheduled side by side; combine needs both.
enum class Stream { select, powers, combine };

struct OpRecord {
  OpKind kind;
  std::size_t length;
  Stream stream;

  friend bool operator==(const OpRecord&, const OpRecord&) = default;
};

std::string to_string(OpKind kind);  // ADD, MUL_cc, MUL_pc, GT
std::string to_string(Stream stream);

class OpTrace {
 public:
  void append(OpRecord r) { records_.push_back(r); }
  void append(const OpTrace& other);
  const std::vector<OpRecord>& records() const { return records_; }

  // Element count over all records of a kind (optionally one stream).
  std::size_t elements(OpKind kind) const;
  std::size_t elements(OpKind kind, Stream stream) const;
  std::size_t record_count(OpKind kind) const;

  // One line per record: "KIND length".
  std::string dump() const;

  friend bool operator==(const OpTrace&, const OpTrace&) = default;

 private:
  std::vector<OpRecord> records_;
};

struct SimCipher {
  FxpValue payload;
  OpTrace* trace = nullptr;
};

using CipherVec = std::vector<SimCipher>;

// Vectorised primitives. Operands must share one trace; each call appends
// exactly one record whose length is the vector length.
class SimOps {
 public:
  SimOps(OpTrace& trace, ArithMode mode, Stream stream) : trace_(trace), mode_(mode), stream_(stream) {}

  SimCipher input(const FxpValue& v) const { return {v, &trace_}; }
  CipherVec add(const CipherVec& a, const CipherVec& b) const;
  CipherVec sub(const CipherVec& a, const CipherVec& b) const;
  CipherVec mul(const CipherVec& a, const CipherVec& b) const;
  CipherVec mul_plain(const std::vector<FxpValue>& p, const CipherVec& c) const;
  // (c_j >= p_j) as 0 / 1 in the value format.
  CipherVec ge_plain(const CipherVec& c, const std::vector<FxpValue>& p) const;

 private:
  void record(OpKind kind, std::size_t length) const;
  void check(const CipherVec& a) const;

  OpTrace& trace_;
  ArithMode mode_;
  Stream stream_;
};

// [1, x, ..., x^k] by the doubling schedule: for shift = 1, 2, 4, ... while
// shift <= k, res[shift:] *= res[:-shift]. One MUL_cc record per round, with
// (floor(log2 k)+1)(k+1) - 2^(floor(log2 k)+1) + 1 multiplications overall.
CipherVec calculate_kx(const SimCipher& x, int k, ArithMode mode = {});

// mask_j = (x >= w_j) - (x >= w_{j+1}) with the comparison past the last
// break taken as 0: a single one at the greatest j with x >= w_j, all zeros
// when x < w_0.
CipherVec piece_mask(const SimCipher& x, const std::vector<FxpValue>& breaks, ArithMode mode = {});

// Closed-form CalculateKx multiplication count.
std::size_t kx_mul_count(int k);

struct OppeOptions {
  ArithMode arith{};
  // Run the selection and power streams on separate threads. Values and the
  // merged trace are identical either way.
  bool parallel_streams = false;
};

// Oblivious evaluation: mask, plaintext-ciphertext selection of
// coefficients and scalers, powers, then sum_i (coeff_i * x^i) * scaler_i.
// Expects a finalized plan; on an unfinalized one inputs left of the first
// break evaluate to zero.
SimCipher oppe_eval(const PiecewisePlan& plan, const SimCipher& x, const OppeOptions& opts = {});

// Prepends a constant default_left piece starting at the most negative
// representable value and appends a constant default_right piece starting
// one grid step right of the plan end. A side is skipped when no grid value
// lies beyond it.
PiecewisePlan finalize_plan(const PiecewisePlan& plan);

struct OppeResult {
  FxpValue value;
  OpTrace trace;
};

OppeResult oppe_run(const PiecewisePlan& plan, const FxpValue& x, const OppeOptions& opts = {});
OpTrace trace_of(const PiecewisePlan& plan, const FxpValue& x, const OppeOptions& opts = {});

// Evaluates every input; jobs > 1 splits the batch into contiguous blocks
// evaluated on worker threads. Results are in input order regardless.
std::vector<OppeResult> oppe_eval_batch(const PiecewisePlan& plan, const std::vector<FxpValue>& xs,
                                        const OppeOptions& opts = {}, int jobs = 1);

}  // namespace nfgen
