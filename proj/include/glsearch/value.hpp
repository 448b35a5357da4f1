#pragma once

// Scheme values: symbolic expressions plus the runtime-only kinds
// (closures, primitives, promises). Datums use exact integers and
// rationals backed by GMP; rationals are kept in lowest terms with a
// positive denominator, and rationals with denominator 1 are stored
// as integers.

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace glsearch {

using SymbolId = std::uint32_t;

// Process-wide symbol interning. Ids are stable within a run only and
// are never persisted.
class Symbols {
 public:
  static SymbolId intern(const std::string& name);
  static const std::string& name(SymbolId id);
};

struct Obj;
using Ref = std::shared_ptr<Obj>;

struct SymbolVal {
  SymbolId id;
};
struct CharVal {
  char ch;
};
struct EmptyList {};
struct Unspecified {};
// letrec slot before its initializer has run
struct Unassigned {};

struct PairVal {
  Ref car;
  Ref cdr;
};

struct VectorVal {
  std::vector<Ref> items;
};

struct Frame;
using FramePtr = std::shared_ptr<Frame>;

struct ClosureVal {
  std::vector<SymbolId> params;
  std::optional<SymbolId> rest;
  std::shared_ptr<const std::vector<Ref>> body;
  FramePtr env;
};

class MachineCtx;
struct PrimitiveDef;
struct PrimitiveVal {
  const PrimitiveDef* def;
};

struct PromiseVal {
  Ref thunk;   // closure of no arguments
  Ref value;   // set once forced
  bool forced = false;
};

struct ValuesTuple {
  std::vector<Ref> items;
};

struct EnvHandle {
  FramePtr frame;
};

struct ContinuationVal {
  std::uint64_t id;
};

struct Obj {
  std::variant<SymbolVal, mpz_class, mpq_class, double, bool, CharVal,
               std::string, PairVal, EmptyList, VectorVal, ClosureVal,
               PrimitiveVal, Unspecified, Unassigned, PromiseVal, ValuesTuple,
               EnvHandle, ContinuationVal>
      v;
  bool frozen = false;  // literals; set-car!/string-set!/... refuse these
  ~Obj();
  Obj() = default;
  template <typename T>
  explicit Obj(T&& x) : v(std::forward<T>(x)) {}
};

// Shared singletons and constructors.
Ref nil();
Ref unspecified();
Ref boolean(bool b);
Ref integer(long v);
Ref integer(const mpz_class& v);
Ref rational(const mpq_class& v);  // canonicalizes; demotes to integer
Ref real(double v);
Ref symbol(SymbolId id);
Ref symbol(const std::string& name);
Ref character(char c);
Ref string_value(std::string s);
Ref cons(Ref car, Ref cdr);
Ref vector_value(std::vector<Ref> items);
Ref list(std::initializer_list<Ref> items);
Ref list_from(const std::vector<Ref>& items);

inline bool is_pair(const Ref& r) { return std::holds_alternative<PairVal>(r->v); }
inline bool is_nil(const Ref& r) { return std::holds_alternative<EmptyList>(r->v); }
inline bool is_symbol(const Ref& r) { return std::holds_alternative<SymbolVal>(r->v); }
inline bool is_integer(const Ref& r) { return std::holds_alternative<mpz_class>(r->v); }
inline bool is_rational(const Ref& r) { return std::holds_alternative<mpq_class>(r->v); }
inline bool is_real(const Ref& r) { return std::holds_alternative<double>(r->v); }
inline bool is_number(const Ref& r) { return is_integer(r) || is_rational(r) || is_real(r); }
inline bool is_boolean(const Ref& r) { return std::holds_alternative<bool>(r->v); }
inline bool is_char(const Ref& r) { return std::holds_alternative<CharVal>(r->v); }
inline bool is_string(const Ref& r) { return std::holds_alternative<std::string>(r->v); }
inline bool is_vector(const Ref& r) { return std::holds_alternative<VectorVal>(r->v); }
inline bool is_closure(const Ref& r) { return std::holds_alternative<ClosureVal>(r->v); }
inline bool is_primitive(const Ref& r) { return std::holds_alternative<PrimitiveVal>(r->v); }
inline bool is_procedure(const Ref& r) { return is_closure(r) || is_primitive(r) || std::holds_alternative<ContinuationVal>(r->v); }
// Scheme truth: everything except #f
inline bool is_false(const Ref& r) { return is_boolean(r) && !std::get<bool>(r->v); }
inline bool is_true(const Ref& r) { return !is_false(r); }

inline SymbolId sym_id(const Ref& r) { return std::get<SymbolVal>(r->v).id; }
inline const PairVal& as_pair(const Ref& r) { return std::get<PairVal>(r->v); }

// True for readable datums (no closures/primitives/runtime-only kinds).
bool is_datum(const Ref& r);

// Marks a literal and everything under it immutable (early-out on nodes
// already frozen; sound because frozen data cannot gain new children).
void deep_freeze(const Ref& r);

// eqv? / equal? (equal? walks with a node budget; exceeding it throws
// SchemeError with DomainError, so cyclic structures fail a trial instead
// of hanging it).
bool eqv(const Ref& a, const Ref& b);
bool structurally_equal(const Ref& a, const Ref& b, std::size_t max_nodes = 1u << 22);

// Canonical writer: read(print(e)) is structurally equal to e for datums.
std::string print(const Ref& e);

struct SyntaxError : std::runtime_error {
  int line;
  int column;
  SyntaxError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg), line(line_), column(col_) {}
};

// Reads the datums of `text` in order. Quasiquote/unquote and non-decimal
// number prefixes are rejected with SyntaxError; 'x reads as (quote x).
std::vector<Ref> read(const std::string& text);
Ref read_one(const std::string& text);  // exactly one datum expected

// List helpers; improper lists surface as std::nullopt.
std::optional<std::vector<Ref>> list_to_vector(const Ref& lst, std::size_t max_nodes = 1u << 22);

}  // namespace glsearch
