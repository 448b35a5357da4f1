#include <cctype>
#include <cmath>

#include "glsearch/machine.hpp"
#include "glsearch/numeric.hpp"

namespace glsearch {

namespace {

using Args = std::vector<Ref>;

[[noreturn]] void type_err(MachineCtx& ctx, const std::string& what, const Ref& got) {
  ctx.raise(ErrorKind::TypeError, "expected " + what + ", got " + print(got));
}

void expect_number(MachineCtx& ctx, const Ref& r) {
  if (!is_number(r)) type_err(ctx, "a number", r);
}

const mpz_class& as_exact_int(MachineCtx& ctx, const Ref& r) {
  if (is_integer(r)) return std::get<mpz_class>(r->v);
  type_err(ctx, "an exact integer", r);
}

long as_index(MachineCtx& ctx, const Ref& r) {
  const mpz_class& z = as_exact_int(ctx, r);
  if (z < 0 || !z.fits_slong_p())
    ctx.raise(ErrorKind::DomainError, "index out of range: " + print(r));
  return z.get_si();
}

mpz_class as_integral(MachineCtx& ctx, const Ref& r) {
  if (is_integer(r)) return std::get<mpz_class>(r->v);
  if (is_real(r)) {
    double d = std::get<double>(r->v);
    if (std::isfinite(d) && std::nearbyint(d) == d) return mpq_class(d).get_num();
  }
  type_err(ctx, "an integer", r);
}

char as_char_v(MachineCtx& ctx, const Ref& r) {
  if (is_char(r)) return std::get<CharVal>(r->v).ch;
  type_err(ctx, "a character", r);
}

const std::string& as_string_v(MachineCtx& ctx, const Ref& r) {
  if (is_string(r)) return std::get<std::string>(r->v);
  type_err(ctx, "a string", r);
}

std::string& as_mutable_string(MachineCtx& ctx, const Ref& r) {
  if (!is_string(r)) type_err(ctx, "a string", r);
  if (r->frozen) ctx.raise(ErrorKind::TypeError, "attempt to mutate an immutable string");
  return std::get<std::string>(r->v);
}

const VectorVal& as_vector_v(MachineCtx& ctx, const Ref& r) {
  if (is_vector(r)) return std::get<VectorVal>(r->v);
  type_err(ctx, "a vector", r);
}

VectorVal& as_mutable_vector(MachineCtx& ctx, const Ref& r) {
  if (!is_vector(r)) type_err(ctx, "a vector", r);
  if (r->frozen) ctx.raise(ErrorKind::TypeError, "attempt to mutate an immutable vector");
  return std::get<VectorVal>(r->v);
}

const PairVal& as_pair_v(MachineCtx& ctx, const Ref& r) {
  if (is_pair(r)) return std::get<PairVal>(r->v);
  type_err(ctx, "a pair", r);
}

PairVal& as_mutable_pair(MachineCtx& ctx, const Ref& r) {
  if (!is_pair(r)) type_err(ctx, "a pair", r);
  if (r->frozen) ctx.raise(ErrorKind::TypeError, "attempt to mutate an immutable pair");
  return std::get<PairVal>(r->v);
}

std::vector<Ref> as_proper_list(MachineCtx& ctx, const Ref& r) {
  auto v = list_to_vector(r, static_cast<std::size_t>(ctx.limits.max_walk_nodes));
  if (!v) type_err(ctx, "a proper list", r);
  return std::move(*v);
}

Ref zero_ref() {
  static const Ref z = integer(0);
  return z;
}

Ref num_chain(MachineCtx& ctx, Args& a, bool (*ok)(CmpResult)) {
  for (const Ref& r : a) expect_number(ctx, r);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    CmpResult c = num_cmp(ctx, a[i], a[i + 1]);
    if (c == CmpResult::UNORDERED || !ok(c)) return boolean(false);
  }
  return boolean(true);
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

Ref char_chain(MachineCtx& ctx, Args& a, bool (*ok)(int), bool ci) {
  for (const Ref& r : a) (void)as_char_v(ctx, r);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    char x = as_char_v(ctx, a[i]), y = as_char_v(ctx, a[i + 1]);
    if (ci) {
      x = lower(x);
      y = lower(y);
    }
    int c = (x < y) ? -1 : (x > y ? 1 : 0);
    if (!ok(c)) return boolean(false);
  }
  return boolean(true);
}

Ref string_chain(MachineCtx& ctx, Args& a, bool (*ok)(int), bool ci) {
  for (const Ref& r : a) (void)as_string_v(ctx, r);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    std::string x = as_string_v(ctx, a[i]), y = as_string_v(ctx, a[i + 1]);
    if (ci) {
      for (char& c : x) c = lower(c);
      for (char& c : y) c = lower(c);
    }
    int c = x.compare(y);
    c = c < 0 ? -1 : (c > 0 ? 1 : 0);
    if (!ok(c)) return boolean(false);
  }
  return boolean(true);
}

Ref member_search(MachineCtx& ctx, Args& a, bool structural) {
  Ref cur = a[1];
  long guard = 0;
  while (is_pair(cur)) {
    const PairVal& p = as_pair(cur);
    bool hit = structural
                   ? structurally_equal(a[0], p.car,
                                        static_cast<std::size_t>(ctx.limits.max_walk_nodes))
                   : eqv(a[0], p.car);
    if (hit) return cur;
    cur = p.cdr;
    if (++guard > ctx.limits.max_walk_nodes)
      ctx.raise(ErrorKind::DomainError, "list traversal limit exceeded");
  }
  if (!is_nil(cur)) type_err(ctx, "a proper list", a[1]);
  return boolean(false);
}

Ref assoc_search(MachineCtx& ctx, Args& a, bool structural) {
  Ref cur = a[1];
  long guard = 0;
  while (is_pair(cur)) {
    const PairVal& p = as_pair(cur);
    const PairVal& entry = as_pair_v(ctx, p.car);
    bool hit = structural
                   ? structurally_equal(a[0], entry.car,
                                        static_cast<std::size_t>(ctx.limits.max_walk_nodes))
                   : eqv(a[0], entry.car);
    if (hit) return p.car;
    cur = p.cdr;
    if (++guard > ctx.limits.max_walk_nodes)
      ctx.raise(ErrorKind::DomainError, "list traversal limit exceeded");
  }
  if (!is_nil(cur)) type_err(ctx, "a proper list", a[1]);
  return boolean(false);
}

double dbl_arg(MachineCtx& ctx, const Ref& r) {
  expect_number(ctx, r);
  return to_double(ctx, r);
}

}  // namespace

const std::vector<PrimitiveDef>& Machine::primitive_table() {
  static const std::vector<PrimitiveDef> table = [] {
    std::vector<PrimitiveDef> t;
    auto add = [&t](std::string name, int mn, int mx, std::vector<int> gen,
                    std::function<Ref(MachineCtx&, Args&)> fn) {
      PrimitiveDef d;
      d.name = std::move(name);
      d.min_args = mn;
      d.max_args = mx;
      d.gen_arities = std::move(gen);
      d.fn = std::move(fn);
      t.push_back(std::move(d));
    };
    auto addc = [&t](std::string name, int mn, int mx, std::vector<int> gen, ControlKind ck,
                     bool in_gen = true) {
      PrimitiveDef d;
      d.name = std::move(name);
      d.min_args = mn;
      d.max_args = mx;
      d.gen_arities = std::move(gen);
      d.control = ck;
      d.in_generation_table = in_gen;
      t.push_back(std::move(d));
    };

    // --- equivalence ---
    add("eqv?", 2, 2, {2}, [](MachineCtx&, Args& a) { return boolean(eqv(a[0], a[1])); });
    add("eq?", 2, 2, {2}, [](MachineCtx&, Args& a) { return boolean(eqv(a[0], a[1])); });
    add("equal?", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      return boolean(
          structurally_equal(a[0], a[1], static_cast<std::size_t>(ctx.limits.max_walk_nodes)));
    });

    // --- numerical predicates ---
    add("number?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_number(a[0])); });
    add("complex?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_number(a[0])); });
    add("real?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_number(a[0])); });
    add("rational?", 1, 1, {1},
        [](MachineCtx&, Args& a) { return boolean(is_rational_value(a[0])); });
    add("integer?", 1, 1, {1},
        [](MachineCtx&, Args& a) { return boolean(is_integral_number(a[0])); });
    add("exact?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      expect_number(ctx, a[0]);
      return boolean(is_exact_number(a[0]));
    });
    add("inexact?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      expect_number(ctx, a[0]);
      return boolean(is_real(a[0]));
    });

    add("=", 2, -1, {2}, [](MachineCtx& ctx, Args& a) {
      return num_chain(ctx, a, [](CmpResult c) { return c == CmpResult::EQ; });
    });
    add("<", 2, -1, {2}, [](MachineCtx& ctx, Args& a) {
      return num_chain(ctx, a, [](CmpResult c) { return c == CmpResult::LT; });
    });
    add(">", 2, -1, {2}, [](MachineCtx& ctx, Args& a) {
      return num_chain(ctx, a, [](CmpResult c) { return c == CmpResult::GT; });
    });
    add("<=", 2, -1, {2}, [](MachineCtx& ctx, Args& a) {
      return num_chain(ctx, a, [](CmpResult c) { return c != CmpResult::GT; });
    });
    add(">=", 2, -1, {2}, [](MachineCtx& ctx, Args& a) {
      return num_chain(ctx, a, [](CmpResult c) { return c != CmpResult::LT; });
    });

    add("zero?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      expect_number(ctx, a[0]);
      return boolean(num_cmp(ctx, a[0], zero_ref()) == CmpResult::EQ);
    });
    add("positive?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      expect_number(ctx, a[0]);
      return boolean(num_cmp(ctx, a[0], zero_ref()) == CmpResult::GT);
    });
    add("negative?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      expect_number(ctx, a[0]);
      return boolean(num_cmp(ctx, a[0], zero_ref()) == CmpResult::LT);
    });
    add("odd?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      mpz_class z = as_integral(ctx, a[0]);
      return boolean(mpz_odd_p(z.get_mpz_t()) != 0);
    });
    add("even?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      mpz_class z = as_integral(ctx, a[0]);
      return boolean(mpz_even_p(z.get_mpz_t()) != 0);
    });

    auto minmax = [](bool want_max) {
      return [want_max](MachineCtx& ctx, Args& a) -> Ref {
        bool inexact = false;
        for (const Ref& r : a) {
          expect_number(ctx, r);
          if (is_real(r)) inexact = true;
        }
        Ref best = a[0];
        for (std::size_t i = 1; i < a.size(); ++i) {
          CmpResult c = num_cmp(ctx, best, a[i]);
          if (c == CmpResult::UNORDERED) return real(std::nan(""));
          if (want_max ? c == CmpResult::LT : c == CmpResult::GT) best = a[i];
        }
        return inexact ? exact_to_inexact(ctx, best) : best;
      };
    };
    add("max", 1, -1, {2}, minmax(true));
    add("min", 1, -1, {2}, minmax(false));

    add("+", 0, -1, {2}, [](MachineCtx& ctx, Args& a) {
      Ref acc = zero_ref();
      for (const Ref& r : a) acc = num_add(ctx, acc, r);
      return acc;
    });
    add("*", 0, -1, {2}, [](MachineCtx& ctx, Args& a) {
      Ref acc = integer(1);
      for (const Ref& r : a) acc = num_mul(ctx, acc, r);
      return acc;
    });
    add("-", 1, -1, {1, 2}, [](MachineCtx& ctx, Args& a) {
      if (a.size() == 1) return num_neg(ctx, a[0]);
      Ref acc = a[0];
      for (std::size_t i = 1; i < a.size(); ++i) acc = num_sub(ctx, acc, a[i]);
      return acc;
    });
    add("/", 1, -1, {1, 2}, [](MachineCtx& ctx, Args& a) {
      if (a.size() == 1) return num_div(ctx, integer(1), a[0]);
      Ref acc = a[0];
      for (std::size_t i = 1; i < a.size(); ++i) acc = num_div(ctx, acc, a[i]);
      return acc;
    });
    add("abs", 1, 1, {1}, [](MachineCtx& ctx, Args& a) { return num_abs(ctx, a[0]); });

    add("quotient", 2, 2, {2},
        [](MachineCtx& ctx, Args& a) { return num_quotient(ctx, a[0], a[1]); });
    add("remainder", 2, 2, {2},
        [](MachineCtx& ctx, Args& a) { return num_remainder(ctx, a[0], a[1]); });
    add("modulo", 2, 2, {2},
        [](MachineCtx& ctx, Args& a) { return num_modulo(ctx, a[0], a[1]); });
    add("gcd", 0, -1, {2}, [](MachineCtx& ctx, Args& a) {
      Ref acc = zero_ref();
      for (const Ref& r : a) acc = num_gcd2(ctx, acc, r);
      return acc;
    });
    add("lcm", 0, -1, {2}, [](MachineCtx& ctx, Args& a) {
      Ref acc = integer(1);
      for (const Ref& r : a) acc = num_lcm2(ctx, acc, r);
      return acc;
    });

    add("numerator", 1, 1, {1},
        [](MachineCtx& ctx, Args& a) { return num_numerator(ctx, a[0]); });
    add("denominator", 1, 1, {1},
        [](MachineCtx& ctx, Args& a) { return num_denominator(ctx, a[0]); });

    add("floor", 1, 1, {1}, [](MachineCtx& ctx, Args& a) { return num_floor(ctx, a[0]); });
    add("ceiling", 1, 1, {1}, [](MachineCtx& ctx, Args& a) { return num_ceiling(ctx, a[0]); });
    add("truncate", 1, 1, {1}, [](MachineCtx& ctx, Args& a) { return num_truncate(ctx, a[0]); });
    add("round", 1, 1, {1}, [](MachineCtx& ctx, Args& a) { return num_round(ctx, a[0]); });
    add("rationalize", 2, 2, {2},
        [](MachineCtx& ctx, Args& a) { return num_rationalize(ctx, a[0], a[1]); });

    add("exp", 1, 1, {1},
        [](MachineCtx& ctx, Args& a) { return real(std::exp(dbl_arg(ctx, a[0]))); });
    add("log", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      if (is_exact_number(a[0]) && num_cmp(ctx, a[0], zero_ref()) != CmpResult::GT)
        ctx.raise(ErrorKind::DomainError, "log of a non-positive exact number");
      double d = dbl_arg(ctx, a[0]);
      if (d < 0) ctx.raise(ErrorKind::DomainError, "log result is not real");
      return real(std::log(d));
    });
    add("sin", 1, 1, {1},
        [](MachineCtx& ctx, Args& a) { return real(std::sin(dbl_arg(ctx, a[0]))); });
    add("cos", 1, 1, {1},
        [](MachineCtx& ctx, Args& a) { return real(std::cos(dbl_arg(ctx, a[0]))); });
    add("tan", 1, 1, {1},
        [](MachineCtx& ctx, Args& a) { return real(std::tan(dbl_arg(ctx, a[0]))); });
    add("asin", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      double d = dbl_arg(ctx, a[0]);
      if (d < -1 || d > 1) ctx.raise(ErrorKind::DomainError, "asin result is not real");
      return real(std::asin(d));
    });
    add("acos", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      double d = dbl_arg(ctx, a[0]);
      if (d < -1 || d > 1) ctx.raise(ErrorKind::DomainError, "acos result is not real");
      return real(std::acos(d));
    });
    add("atan", 1, 2, {1, 2}, [](MachineCtx& ctx, Args& a) {
      if (a.size() == 1) return real(std::atan(dbl_arg(ctx, a[0])));
      return real(std::atan2(dbl_arg(ctx, a[0]), dbl_arg(ctx, a[1])));
    });

    add("sqrt", 1, 1, {1}, [](MachineCtx& ctx, Args& a) { return num_sqrt(ctx, a[0]); });
    add("expt", 2, 2, {2}, [](MachineCtx& ctx, Args& a) { return num_expt(ctx, a[0], a[1]); });

    add("exact->inexact", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      expect_number(ctx, a[0]);
      return exact_to_inexact(ctx, a[0]);
    });
    add("inexact->exact", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      expect_number(ctx, a[0]);
      return inexact_to_exact(ctx, a[0]);
    });

    add("number->string", 1, 2, {1, 2}, [](MachineCtx& ctx, Args& a) {
      int radix = a.size() == 2 ? static_cast<int>(as_index(ctx, a[1])) : 10;
      Ref s = number_to_string(ctx, a[0], radix);
      ctx.charge_alloc(static_cast<long>(std::get<std::string>(s->v).size()));
      return s;
    });
    add("string->number", 1, 2, {1, 2}, [](MachineCtx& ctx, Args& a) {
      const std::string& s = as_string_v(ctx, a[0]);
      int radix = a.size() == 2 ? static_cast<int>(as_index(ctx, a[1])) : 10;
      if (radix != 2 && radix != 8 && radix != 10 && radix != 16)
        ctx.raise(ErrorKind::DomainError, "unsupported radix " + std::to_string(radix));
      auto v = parse_number_token(s, /*allow_prefixes=*/true, radix);
      return v ? *v : boolean(false);
    });

    // --- booleans ---
    add("not", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_false(a[0])); });
    add("boolean?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_boolean(a[0])); });

    // --- pairs and lists ---
    add("pair?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_pair(a[0])); });
    add("cons", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      ctx.charge_alloc(1);
      return cons(a[0], a[1]);
    });
    add("car", 1, 1, {1}, [](MachineCtx& ctx, Args& a) { return as_pair_v(ctx, a[0]).car; });
    add("cdr", 1, 1, {1}, [](MachineCtx& ctx, Args& a) { return as_pair_v(ctx, a[0]).cdr; });
    add("set-car!", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      as_mutable_pair(ctx, a[0]).car = a[1];
      return unspecified();
    });
    add("set-cdr!", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      as_mutable_pair(ctx, a[0]).cdr = a[1];
      return unspecified();
    });

    for (int len = 2; len <= 4; ++len) {
      for (int combo = 0; combo < (1 << len); ++combo) {
        std::string mid;
        for (int j = 0; j < len; ++j) mid += ((combo >> (len - 1 - j)) & 1) ? 'd' : 'a';
        add("c" + mid + "r", 1, 1, {1}, [mid](MachineCtx& ctx, Args& a) {
          Ref cur = a[0];
          for (auto it = mid.rbegin(); it != mid.rend(); ++it)
            cur = (*it == 'a') ? as_pair_v(ctx, cur).car : as_pair_v(ctx, cur).cdr;
          return cur;
        });
      }
    }

    add("null?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_nil(a[0])); });
    add("list?", 1, 1, {1}, [](MachineCtx&, Args& a) {
      Ref slow = a[0], fast = a[0];
      for (;;) {
        if (is_nil(fast)) return boolean(true);
        if (!is_pair(fast)) return boolean(false);
        fast = as_pair(fast).cdr;
        if (is_nil(fast)) return boolean(true);
        if (!is_pair(fast)) return boolean(false);
        fast = as_pair(fast).cdr;
        slow = as_pair(slow).cdr;
        if (slow.get() == fast.get()) return boolean(false);
      }
    });
    add("list", 0, -1, {0, 1, 2}, [](MachineCtx& ctx, Args& a) {
      ctx.charge_alloc(static_cast<long>(a.size()));
      return list_from(a);
    });
    add("length", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      long n = 0;
      Ref cur = a[0];
      while (is_pair(cur)) {
        cur = as_pair(cur).cdr;
        if (++n > ctx.limits.max_walk_nodes)
          ctx.raise(ErrorKind::DomainError, "list traversal limit exceeded");
      }
      if (!is_nil(cur)) type_err(ctx, "a proper list", a[0]);
      return integer(n);
    });
    add("append", 0, -1, {2}, [](MachineCtx& ctx, Args& a) {
      if (a.empty()) return nil();
      Ref tail = a.back();
      for (std::size_t i = a.size() - 1; i-- > 0;) {
        std::vector<Ref> elems = as_proper_list(ctx, a[i]);
        ctx.charge_alloc(static_cast<long>(elems.size()));
        for (auto it = elems.rbegin(); it != elems.rend(); ++it) tail = cons(*it, tail);
      }
      return tail;
    });
    add("reverse", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      std::vector<Ref> elems = as_proper_list(ctx, a[0]);
      ctx.charge_alloc(static_cast<long>(elems.size()));
      Ref acc = nil();
      for (const Ref& e : elems) acc = cons(e, acc);
      return acc;
    });
    add("list-tail", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      long k = as_index(ctx, a[1]);
      Ref cur = a[0];
      for (long i = 0; i < k; ++i) cur = as_pair_v(ctx, cur).cdr;
      return cur;
    });
    add("list-ref", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      long k = as_index(ctx, a[1]);
      Ref cur = a[0];
      for (long i = 0; i < k; ++i) cur = as_pair_v(ctx, cur).cdr;
      return as_pair_v(ctx, cur).car;
    });

    add("memq", 2, 2, {2}, [](MachineCtx& ctx, Args& a) { return member_search(ctx, a, false); });
    add("memv", 2, 2, {2}, [](MachineCtx& ctx, Args& a) { return member_search(ctx, a, false); });
    add("member", 2, 2, {2},
        [](MachineCtx& ctx, Args& a) { return member_search(ctx, a, true); });
    add("assq", 2, 2, {2}, [](MachineCtx& ctx, Args& a) { return assoc_search(ctx, a, false); });
    add("assv", 2, 2, {2}, [](MachineCtx& ctx, Args& a) { return assoc_search(ctx, a, false); });
    add("assoc", 2, 2, {2}, [](MachineCtx& ctx, Args& a) { return assoc_search(ctx, a, true); });

    // --- symbols ---
    add("symbol?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_symbol(a[0])); });
    add("symbol->string", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      if (!is_symbol(a[0])) type_err(ctx, "a symbol", a[0]);
      Ref s = string_value(Symbols::name(sym_id(a[0])));
      s->frozen = true;
      return s;
    });
    add("string->symbol", 1, 1, {1},
        [](MachineCtx& ctx, Args& a) { return symbol(as_string_v(ctx, a[0])); });

    // --- characters ---
    add("char?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_char(a[0])); });
    struct ChainSpec {
      const char* name;
      bool (*ok)(int);
    };
    const ChainSpec chain_specs[] = {
        {"=?", [](int c) { return c == 0; }},  {"<?", [](int c) { return c < 0; }},
        {">?", [](int c) { return c > 0; }},   {"<=?", [](int c) { return c <= 0; }},
        {">=?", [](int c) { return c >= 0; }},
    };
    for (const auto& spec : chain_specs) {
      auto ok = spec.ok;
      add(std::string("char") + spec.name, 2, -1, {2},
          [ok](MachineCtx& ctx, Args& a) { return char_chain(ctx, a, ok, false); });
    }
    for (const auto& spec : chain_specs) {
      auto ok = spec.ok;
      add(std::string("char-ci") + spec.name, 2, -1, {2},
          [ok](MachineCtx& ctx, Args& a) { return char_chain(ctx, a, ok, true); });
    }
    add("char-alphabetic?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return boolean(std::isalpha(static_cast<unsigned char>(as_char_v(ctx, a[0]))) != 0);
    });
    add("char-numeric?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return boolean(std::isdigit(static_cast<unsigned char>(as_char_v(ctx, a[0]))) != 0);
    });
    add("char-whitespace?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return boolean(std::isspace(static_cast<unsigned char>(as_char_v(ctx, a[0]))) != 0);
    });
    add("char-upper-case?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return boolean(std::isupper(static_cast<unsigned char>(as_char_v(ctx, a[0]))) != 0);
    });
    add("char-lower-case?", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return boolean(std::islower(static_cast<unsigned char>(as_char_v(ctx, a[0]))) != 0);
    });
    add("char->integer", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return integer(static_cast<long>(static_cast<unsigned char>(as_char_v(ctx, a[0]))));
    });
    add("integer->char", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      long v = as_index(ctx, a[0]);
      if (v > 255) ctx.raise(ErrorKind::DomainError, "integer->char out of range");
      return character(static_cast<char>(static_cast<unsigned char>(v)));
    });
    add("char-upcase", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return character(
          static_cast<char>(std::toupper(static_cast<unsigned char>(as_char_v(ctx, a[0])))));
    });
    add("char-downcase", 1, 1, {1},
        [](MachineCtx& ctx, Args& a) { return character(lower(as_char_v(ctx, a[0]))); });

    // --- strings ---
    add("string?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_string(a[0])); });
    add("make-string", 1, 2, {1, 2}, [](MachineCtx& ctx, Args& a) {
      long k = as_index(ctx, a[0]);
      ctx.charge_alloc(k);
      char fill = a.size() == 2 ? as_char_v(ctx, a[1]) : ' ';
      return string_value(std::string(static_cast<std::size_t>(k), fill));
    });
    add("string", 0, -1, {1, 2}, [](MachineCtx& ctx, Args& a) {
      ctx.charge_alloc(static_cast<long>(a.size()));
      std::string s;
      s.reserve(a.size());
      for (const Ref& r : a) s += as_char_v(ctx, r);
      return string_value(std::move(s));
    });
    add("string-length", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return integer(static_cast<long>(as_string_v(ctx, a[0]).size()));
    });
    add("string-ref", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      const std::string& s = as_string_v(ctx, a[0]);
      long k = as_index(ctx, a[1]);
      if (k >= static_cast<long>(s.size()))
        ctx.raise(ErrorKind::DomainError, "string index out of range");
      return character(s[static_cast<std::size_t>(k)]);
    });
    add("string-set!", 3, 3, {3}, [](MachineCtx& ctx, Args& a) {
      std::string& s = as_mutable_string(ctx, a[0]);
      long k = as_index(ctx, a[1]);
      if (k >= static_cast<long>(s.size()))
        ctx.raise(ErrorKind::DomainError, "string index out of range");
      s[static_cast<std::size_t>(k)] = as_char_v(ctx, a[2]);
      return unspecified();
    });
    for (const auto& spec : chain_specs) {
      auto ok = spec.ok;
      add(std::string("string") + spec.name, 2, -1, {2},
          [ok](MachineCtx& ctx, Args& a) { return string_chain(ctx, a, ok, false); });
    }
    for (const auto& spec : chain_specs) {
      auto ok = spec.ok;
      add(std::string("string-ci") + spec.name, 2, -1, {2},
          [ok](MachineCtx& ctx, Args& a) { return string_chain(ctx, a, ok, true); });
    }
    add("substring", 3, 3, {3}, [](MachineCtx& ctx, Args& a) {
      const std::string& s = as_string_v(ctx, a[0]);
      long from = as_index(ctx, a[1]);
      long to = as_index(ctx, a[2]);
      if (from > to || to > static_cast<long>(s.size()))
        ctx.raise(ErrorKind::DomainError, "substring range out of bounds");
      ctx.charge_alloc(to - from);
      return string_value(s.substr(static_cast<std::size_t>(from),
                                   static_cast<std::size_t>(to - from)));
    });
    add("string-append", 0, -1, {2}, [](MachineCtx& ctx, Args& a) {
      std::string out;
      for (const Ref& r : a) {
        const std::string& s = as_string_v(ctx, r);
        ctx.charge_alloc(static_cast<long>(s.size()));
        out += s;
      }
      return string_value(std::move(out));
    });
    add("string->list", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      const std::string& s = as_string_v(ctx, a[0]);
      ctx.charge_alloc(static_cast<long>(s.size()));
      Ref acc = nil();
      for (auto it = s.rbegin(); it != s.rend(); ++it) acc = cons(character(*it), acc);
      return acc;
    });
    add("list->string", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      std::vector<Ref> elems = as_proper_list(ctx, a[0]);
      ctx.charge_alloc(static_cast<long>(elems.size()));
      std::string s;
      s.reserve(elems.size());
      for (const Ref& r : elems) s += as_char_v(ctx, r);
      return string_value(std::move(s));
    });
    add("string-copy", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      const std::string& s = as_string_v(ctx, a[0]);
      ctx.charge_alloc(static_cast<long>(s.size()));
      return string_value(std::string(s));
    });
    add("string-fill!", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      std::string& s = as_mutable_string(ctx, a[0]);
      char c = as_char_v(ctx, a[1]);
      std::fill(s.begin(), s.end(), c);
      return unspecified();
    });

    // --- vectors ---
    add("vector?", 1, 1, {1}, [](MachineCtx&, Args& a) { return boolean(is_vector(a[0])); });
    add("make-vector", 1, 2, {1, 2}, [](MachineCtx& ctx, Args& a) {
      long k = as_index(ctx, a[0]);
      ctx.charge_alloc(k);
      Ref fill = a.size() == 2 ? a[1] : zero_ref();
      return vector_value(std::vector<Ref>(static_cast<std::size_t>(k), fill));
    });
    add("vector", 0, -1, {1, 2}, [](MachineCtx& ctx, Args& a) {
      ctx.charge_alloc(static_cast<long>(a.size()));
      return vector_value(a);
    });
    add("vector-length", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      return integer(static_cast<long>(as_vector_v(ctx, a[0]).items.size()));
    });
    add("vector-ref", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      const VectorVal& v = as_vector_v(ctx, a[0]);
      long k = as_index(ctx, a[1]);
      if (k >= static_cast<long>(v.items.size()))
        ctx.raise(ErrorKind::DomainError, "vector index out of range");
      return v.items[static_cast<std::size_t>(k)];
    });
    add("vector-set!", 3, 3, {3}, [](MachineCtx& ctx, Args& a) {
      VectorVal& v = as_mutable_vector(ctx, a[0]);
      long k = as_index(ctx, a[1]);
      if (k >= static_cast<long>(v.items.size()))
        ctx.raise(ErrorKind::DomainError, "vector index out of range");
      v.items[static_cast<std::size_t>(k)] = a[2];
      return unspecified();
    });
    add("vector->list", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      const VectorVal& v = as_vector_v(ctx, a[0]);
      ctx.charge_alloc(static_cast<long>(v.items.size()));
      return list_from(v.items);
    });
    add("list->vector", 1, 1, {1}, [](MachineCtx& ctx, Args& a) {
      std::vector<Ref> elems = as_proper_list(ctx, a[0]);
      ctx.charge_alloc(static_cast<long>(elems.size()));
      return vector_value(std::move(elems));
    });
    add("vector-fill!", 2, 2, {2}, [](MachineCtx& ctx, Args& a) {
      VectorVal& v = as_mutable_vector(ctx, a[0]);
      for (Ref& slot : v.items) slot = a[1];
      return unspecified();
    });

    // --- control ---
    add("procedure?", 1, 1, {1},
        [](MachineCtx&, Args& a) { return boolean(is_procedure(a[0])); });
    addc("apply", 2, -1, {2}, ControlKind::Apply);
    addc("map", 2, -1, {2}, ControlKind::Map);
    addc("for-each", 2, -1, {2}, ControlKind::ForEach);
    addc("force", 1, 1, {1}, ControlKind::Force);
    addc("call-with-current-continuation", 1, 1, {1}, ControlKind::CallCC);
    addc("call/cc", 1, 1, {1}, ControlKind::CallCC);
    add("values", 0, -1, {1}, [](MachineCtx& ctx, Args& a) -> Ref {
      if (a.size() == 1) return a[0];
      ctx.charge_alloc(static_cast<long>(a.size()));
      return std::make_shared<Obj>(ValuesTuple{a});
    });
    addc("call-with-values", 2, 2, {2}, ControlKind::CallWithValues);
    addc("dynamic-wind", 3, 3, {3}, ControlKind::DynamicWind);

    // --- eval family: callable, but never offered to the generator, since
    // generated calls could fault on unbound variables at run time ---
    addc("eval", 2, 2, {2}, ControlKind::Eval, /*in_gen=*/false);
    auto report_env = [](MachineCtx& ctx, Args& a) -> Ref {
      const mpz_class& v = as_exact_int(ctx, a[0]);
      if (v != 5) ctx.raise(ErrorKind::DomainError, "unsupported environment version");
      return std::make_shared<Obj>(EnvHandle{ctx.base_env});
    };
    add("scheme-report-environment", 1, 1, {1}, report_env);
    t.back().in_generation_table = false;
    add("null-environment", 1, 1, {1}, report_env);
    t.back().in_generation_table = false;

    return t;
  }();
  return table;
}

}  // namespace glsearch
