#pragma once

// Deterministic interpreter for the R5RS subset used as the reference
// machine. Evaluation is metered by a fuel budget: one unit per evaluator
// dispatch (literal/variable evaluation, special-form entry, or procedure
// application). The evaluator runs on an explicit continuation stack, so
// proper tail calls take O(1) space and deep non-tail recursion is bounded
// by fuel and an explicit depth guard rather than the C++ stack.

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "glsearch/value.hpp"

namespace glsearch {

enum class ErrorKind {
  UnboundVariable,
  TypeError,
  ArityError,
  DivisionByZero,
  DomainError,  // also covers resource guards (huge integers/allocations)
  UserError,
};

const char* error_kind_name(ErrorKind k);

struct SchemeError {
  ErrorKind kind;
  std::string message;
};

struct EvalOutcome {
  enum class Status { Value, FuelExhausted, RuntimeError };
  Status status = Status::Value;
  Ref value;  // set when status == Value
  ErrorKind error_kind = ErrorKind::UserError;
  std::string message;
  long steps_used = 0;

  bool ok() const { return status == Status::Value; }
};

// Lexical environment frame. Small frames use linear lookup; the base
// frame (the whole standard library plus installed solutions) gets a
// hash index once it grows.
struct Frame {
  std::vector<std::pair<SymbolId, Ref>> slots;
  FramePtr parent;
  std::unordered_map<SymbolId, std::size_t> index;  // built when large

  Frame() = default;
  ~Frame();  // iterative, so deep recursion frames unwind without C++ recursion

  Ref* find_local(SymbolId id);
  void define(SymbolId id, Ref value);
  static Ref* lookup(Frame* frame, SymbolId id);
};

struct MachineLimits {
  long max_integer_bits = 1 << 20;      // per arithmetic result
  long max_alloc_elems = 1 << 20;       // per allocating call
  long max_total_alloc = 1 << 22;       // per evaluation
  long max_walk_nodes = 1 << 22;        // equal?, length, append guards
  long max_cont_depth = 1 << 21;        // non-tail recursion guard
};

// Facilities shared with primitives during one evaluation.
class MachineCtx {
 public:
  MachineCtx(const MachineLimits& lim, FramePtr base)
      : limits(lim), alloc_remaining(lim.max_total_alloc), base_env(std::move(base)) {}

  const MachineLimits& limits;
  long alloc_remaining;
  FramePtr base_env;

  [[noreturn]] void raise(ErrorKind k, std::string msg) const {
    throw SchemeError{k, std::move(msg)};
  }
  // Counts n elements against both the per-call and whole-run budgets.
  void charge_alloc(long n);
  void guard_integer(const mpz_class& z) const;
};

// Primitives that need to re-enter the evaluator are dispatched inside
// the evaluation loop instead of through fn.
enum class ControlKind {
  None,
  Apply,
  CallCC,
  CallWithValues,
  DynamicWind,
  Force,
  Map,
  ForEach,
  Eval,
};

struct PrimitiveDef {
  std::string name;
  int min_args = 0;
  int max_args = -1;  // -1: variadic
  std::function<Ref(MachineCtx&, std::vector<Ref>&)> fn;
  ControlKind control = ControlKind::None;
  std::vector<int> gen_arities;  // argument counts offered to the grammar
  bool in_generation_table = true;
};

class Machine {
 public:
  Machine();

  // Evaluates top-level forms left to right in a fresh frame chained onto
  // the persistent base environment; returns the value of the last form.
  // Deterministic: same program and fuel give the same outcome and the
  // same steps-used. A program's own defines and set!s never leak into
  // the base environment.
  EvalOutcome evaluate(const std::vector<Ref>& program, long fuel) const;

  // Installs a (define ...) block into the base environment, pre-evaluated
  // so later trials pay no per-run cost for it.
  void install_solution(SymbolId name, const Ref& define_form);
  bool has_solution(SymbolId name) const;
  const std::vector<SymbolId>& installed_solutions() const { return installed_; }

  const MachineLimits& limits() const { return limits_; }
  MachineLimits& limits() { return limits_; }

  // The full standard-library table (R5RS 6.1-6.5 minus I/O and the
  // system interface); also feeds the <standard-procedure> productions.
  static const std::vector<PrimitiveDef>& primitive_table();

 private:
  FramePtr base_;
  MachineLimits limits_;
  std::vector<SymbolId> installed_;
};

}  // namespace glsearch
