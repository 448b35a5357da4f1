#include "glsearch/numeric.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "glsearch/machine.hpp"

namespace glsearch {

namespace {

enum Tier { kInt = 0, kRat = 1, kDbl = 2 };

Tier tier_of(MachineCtx& ctx, const Ref& r) {
  if (is_integer(r)) return kInt;
  if (is_rational(r)) return kRat;
  if (is_real(r)) return kDbl;
  ctx.raise(ErrorKind::TypeError, "expected a number, got " + print(r));
}

mpq_class exact_as_mpq(const Ref& r) {
  if (is_integer(r)) return mpq_class(std::get<mpz_class>(r->v));
  return std::get<mpq_class>(r->v);
}

Ref from_mpq(MachineCtx& ctx, const mpq_class& q) {
  mpq_class c = q;
  c.canonicalize();
  ctx.guard_integer(c.get_num());
  ctx.guard_integer(c.get_den());
  return rational(c);
}

double dval(const Ref& r) { return std::get<double>(r->v); }

// Compares an exact rational against a double; the double is converted
// exactly, so no precision is lost on huge magnitudes.
CmpResult cmp_exact_vs_double(const mpq_class& q, double d) {
  if (std::isnan(d)) return CmpResult::UNORDERED;
  if (std::isinf(d)) return d > 0 ? CmpResult::LT : CmpResult::GT;
  mpq_class dq(d);
  int c = cmp(q, dq);
  return c < 0 ? CmpResult::LT : (c > 0 ? CmpResult::GT : CmpResult::EQ);
}

CmpResult flip(CmpResult r) {
  if (r == CmpResult::LT) return CmpResult::GT;
  if (r == CmpResult::GT) return CmpResult::LT;
  return r;
}

mpz_class integral_as_mpz(MachineCtx& ctx, const Ref& r) {
  if (is_integer(r)) return std::get<mpz_class>(r->v);
  if (is_real(r)) {
    double d = dval(r);
    if (std::isfinite(d) && std::nearbyint(d) == d) {
      mpq_class q(d);
      return q.get_num();  // denominator is 1 for integral doubles
    }
  }
  ctx.raise(ErrorKind::TypeError, "expected an integer, got " + print(r));
}

}  // namespace

bool is_exact_number(const Ref& r) { return is_integer(r) || is_rational(r); }

bool is_integral_number(const Ref& r) {
  if (is_integer(r)) return true;
  if (is_real(r)) {
    double d = dval(r);
    return std::isfinite(d) && std::nearbyint(d) == d;
  }
  return false;
}

bool is_rational_value(const Ref& r) {
  if (is_integer(r) || is_rational(r)) return true;
  return is_real(r) && std::isfinite(dval(r));
}

double to_double(MachineCtx& ctx, const Ref& r) {
  switch (tier_of(ctx, r)) {
    case kInt:
      return std::get<mpz_class>(r->v).get_d();
    case kRat:
      return std::get<mpq_class>(r->v).get_d();
    default:
      return dval(r);
  }
}

Ref exact_to_inexact(MachineCtx& ctx, const Ref& r) {
  if (is_real(r)) return r;
  return real(to_double(ctx, r));
}

Ref inexact_to_exact(MachineCtx& ctx, const Ref& r) {
  if (is_exact_number(r)) return r;
  double d = to_double(ctx, r);
  if (!std::isfinite(d))
    ctx.raise(ErrorKind::DomainError, "no exact representation for " + format_double(d));
  return from_mpq(ctx, mpq_class(d));
}

Ref num_add(MachineCtx& ctx, const Ref& a, const Ref& b) {
  Tier ta = tier_of(ctx, a), tb = tier_of(ctx, b);
  if (ta == kDbl || tb == kDbl) return real(to_double(ctx, a) + to_double(ctx, b));
  if (ta == kInt && tb == kInt) {
    mpz_class r = std::get<mpz_class>(a->v) + std::get<mpz_class>(b->v);
    ctx.guard_integer(r);
    return integer(r);
  }
  return from_mpq(ctx, exact_as_mpq(a) + exact_as_mpq(b));
}

Ref num_sub(MachineCtx& ctx, const Ref& a, const Ref& b) {
  Tier ta = tier_of(ctx, a), tb = tier_of(ctx, b);
  if (ta == kDbl || tb == kDbl) return real(to_double(ctx, a) - to_double(ctx, b));
  if (ta == kInt && tb == kInt) {
    mpz_class r = std::get<mpz_class>(a->v) - std::get<mpz_class>(b->v);
    ctx.guard_integer(r);
    return integer(r);
  }
  return from_mpq(ctx, exact_as_mpq(a) - exact_as_mpq(b));
}

Ref num_mul(MachineCtx& ctx, const Ref& a, const Ref& b) {
  Tier ta = tier_of(ctx, a), tb = tier_of(ctx, b);
  if (ta == kDbl || tb == kDbl) return real(to_double(ctx, a) * to_double(ctx, b));
  if (ta == kInt && tb == kInt) {
    const mpz_class& x = std::get<mpz_class>(a->v);
    const mpz_class& y = std::get<mpz_class>(b->v);
    // size precheck: multiplying two big numbers first and guarding after
    // would already have paid the cost
    long bits = static_cast<long>(mpz_sizeinbase(x.get_mpz_t(), 2)) +
                static_cast<long>(mpz_sizeinbase(y.get_mpz_t(), 2));
    if (bits > ctx.limits.max_integer_bits + 1)
      ctx.raise(ErrorKind::DomainError, "integer result too large");
    mpz_class r = x * y;
    ctx.guard_integer(r);
    return integer(r);
  }
  return from_mpq(ctx, exact_as_mpq(a) * exact_as_mpq(b));
}

Ref num_div(MachineCtx& ctx, const Ref& a, const Ref& b) {
  Tier ta = tier_of(ctx, a), tb = tier_of(ctx, b);
  if (ta == kDbl || tb == kDbl) return real(to_double(ctx, a) / to_double(ctx, b));
  mpq_class denom = exact_as_mpq(b);
  if (denom == 0) ctx.raise(ErrorKind::DivisionByZero, "division by exact zero");
  return from_mpq(ctx, exact_as_mpq(a) / denom);
}

Ref num_neg(MachineCtx& ctx, const Ref& a) {
  switch (tier_of(ctx, a)) {
    case kInt:
      return integer(mpz_class(-std::get<mpz_class>(a->v)));
    case kRat:
      return rational(mpq_class(-std::get<mpq_class>(a->v)));
    default:
      return real(-dval(a));
  }
}

CmpResult num_cmp(MachineCtx& ctx, const Ref& a, const Ref& b) {
  Tier ta = tier_of(ctx, a), tb = tier_of(ctx, b);
  if (ta == kDbl && tb == kDbl) {
    double x = dval(a), y = dval(b);
    if (std::isnan(x) || std::isnan(y)) return CmpResult::UNORDERED;
    if (x < y) return CmpResult::LT;
    if (x > y) return CmpResult::GT;
    return CmpResult::EQ;
  }
  if (ta == kDbl) return flip(cmp_exact_vs_double(exact_as_mpq(b), dval(a)));
  if (tb == kDbl) return cmp_exact_vs_double(exact_as_mpq(a), dval(b));
  int c = cmp(exact_as_mpq(a), exact_as_mpq(b));
  return c < 0 ? CmpResult::LT : (c > 0 ? CmpResult::GT : CmpResult::EQ);
}

Ref num_quotient(MachineCtx& ctx, const Ref& a, const Ref& b) {
  bool inexact = is_real(a) || is_real(b);
  mpz_class x = integral_as_mpz(ctx, a), y = integral_as_mpz(ctx, b);
  if (y == 0) ctx.raise(ErrorKind::DivisionByZero, "quotient by zero");
  mpz_class q;
  mpz_tdiv_q(q.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
  return inexact ? real(q.get_d()) : integer(q);
}

Ref num_remainder(MachineCtx& ctx, const Ref& a, const Ref& b) {
  bool inexact = is_real(a) || is_real(b);
  mpz_class x = integral_as_mpz(ctx, a), y = integral_as_mpz(ctx, b);
  if (y == 0) ctx.raise(ErrorKind::DivisionByZero, "remainder by zero");
  mpz_class r;
  mpz_tdiv_r(r.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
  return inexact ? real(r.get_d()) : integer(r);
}

Ref num_modulo(MachineCtx& ctx, const Ref& a, const Ref& b) {
  bool inexact = is_real(a) || is_real(b);
  mpz_class x = integral_as_mpz(ctx, a), y = integral_as_mpz(ctx, b);
  if (y == 0) ctx.raise(ErrorKind::DivisionByZero, "modulo by zero");
  mpz_class r;
  // floor division: the remainder carries the divisor's sign
  mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
  return inexact ? real(r.get_d()) : integer(r);
}

Ref num_gcd2(MachineCtx& ctx, const Ref& a, const Ref& b) {
  bool inexact = is_real(a) || is_real(b);
  mpz_class x = integral_as_mpz(ctx, a), y = integral_as_mpz(ctx, b);
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
  return inexact ? real(g.get_d()) : integer(g);
}

Ref num_lcm2(MachineCtx& ctx, const Ref& a, const Ref& b) {
  bool inexact = is_real(a) || is_real(b);
  mpz_class x = integral_as_mpz(ctx, a), y = integral_as_mpz(ctx, b);
  mpz_class l;
  mpz_lcm(l.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
  ctx.guard_integer(l);
  return inexact ? real(l.get_d()) : integer(l);
}

namespace {

Ref mpq_floor_like(MachineCtx& ctx, const Ref& a,
                   void (*div)(mpz_ptr, mpz_srcptr, mpz_srcptr)) {
  switch (tier_of(ctx, a)) {
    case kInt:
      return a;
    case kRat: {
      const mpq_class& q = std::get<mpq_class>(a->v);
      mpz_class r;
      div(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
      return integer(r);
    }
    default:
      return a;  // handled by caller for doubles
  }
}

}  // namespace

Ref num_floor(MachineCtx& ctx, const Ref& a) {
  if (is_real(a)) return real(std::floor(dval(a)));
  return mpq_floor_like(ctx, a, mpz_fdiv_q);
}

Ref num_ceiling(MachineCtx& ctx, const Ref& a) {
  if (is_real(a)) return real(std::ceil(dval(a)));
  return mpq_floor_like(ctx, a, mpz_cdiv_q);
}

Ref num_truncate(MachineCtx& ctx, const Ref& a) {
  if (is_real(a)) return real(std::trunc(dval(a)));
  return mpq_floor_like(ctx, a, mpz_tdiv_q);
}

Ref num_round(MachineCtx& ctx, const Ref& a) {
  switch (tier_of(ctx, a)) {
    case kInt:
      return a;
    case kRat: {
      const mpq_class& q = std::get<mpq_class>(a->v);
      mpz_class fl;
      mpz_fdiv_q(fl.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
      mpq_class frac = q - mpq_class(fl);
      int c = cmp(frac, mpq_class(1, 2));
      if (c < 0) return integer(fl);
      if (c > 0) return integer(mpz_class(fl + 1));
      return mpz_even_p(fl.get_mpz_t()) ? integer(fl) : integer(mpz_class(fl + 1));
    }
    default:
      // nearbyint under the default rounding mode is round-half-even
      return real(std::nearbyint(dval(a)));
  }
}

Ref num_abs(MachineCtx& ctx, const Ref& a) {
  switch (tier_of(ctx, a)) {
    case kInt:
      return integer(mpz_class(abs(std::get<mpz_class>(a->v))));
    case kRat:
      return rational(mpq_class(abs(std::get<mpq_class>(a->v))));
    default:
      return real(std::fabs(dval(a)));
  }
}

Ref num_numerator(MachineCtx& ctx, const Ref& a) {
  if (is_real(a)) {
    Ref e = inexact_to_exact(ctx, a);
    return exact_to_inexact(ctx, num_numerator(ctx, e));
  }
  if (is_integer(a)) return a;
  if (is_rational(a)) return integer(std::get<mpq_class>(a->v).get_num());
  ctx.raise(ErrorKind::TypeError, "expected a rational, got " + print(a));
}

Ref num_denominator(MachineCtx& ctx, const Ref& a) {
  if (is_real(a)) {
    Ref e = inexact_to_exact(ctx, a);
    return exact_to_inexact(ctx, num_denominator(ctx, e));
  }
  if (is_integer(a)) return integer(1);
  if (is_rational(a)) return integer(std::get<mpq_class>(a->v).get_den());
  ctx.raise(ErrorKind::TypeError, "expected a rational, got " + print(a));
}

namespace {

long bit_length(const mpz_class& z) {
  if (z == 0) return 0;
  return static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2));
}

mpz_class checked_pow(MachineCtx& ctx, const mpz_class& base, unsigned long e) {
  if (base == 0) return mpz_class(e == 0 ? 1 : 0);
  if (base == 1) return mpz_class(1);
  if (base == -1) return mpz_class((e % 2 == 0) ? 1 : -1);
  if (e > static_cast<unsigned long>(ctx.limits.max_integer_bits) ||
      bit_length(base) * static_cast<long>(e) > ctx.limits.max_integer_bits)
    ctx.raise(ErrorKind::DomainError, "integer result too large");
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  ctx.guard_integer(r);
  return r;
}

}  // namespace

Ref num_expt(MachineCtx& ctx, const Ref& a, const Ref& b) {
  Tier ta = tier_of(ctx, a), tb = tier_of(ctx, b);
  if (ta != kDbl && tb == kInt) {
    const mpz_class& e = std::get<mpz_class>(b->v);
    if (!e.fits_slong_p()) {
      // the magnitude guard below would reject any non-trivial base anyway
      mpq_class base = exact_as_mpq(a);
      if (base == 1) return integer(1);
      if (base == 0) {
        if (e > 0) return integer(0);
        ctx.raise(ErrorKind::DivisionByZero, "expt of zero to a negative power");
      }
      ctx.raise(ErrorKind::DomainError, "integer result too large");
    }
    long es = e.get_si();
    unsigned long mag = es < 0 ? static_cast<unsigned long>(-(es + 1)) + 1
                               : static_cast<unsigned long>(es);
    mpq_class base = exact_as_mpq(a);
    if (base == 0 && es < 0)
      ctx.raise(ErrorKind::DivisionByZero, "expt of zero to a negative power");
    mpz_class num = checked_pow(ctx, base.get_num(), mag);
    mpz_class den = checked_pow(ctx, base.get_den(), mag);
    mpq_class r;
    if (es < 0) {
      if (num == 0) ctx.raise(ErrorKind::DivisionByZero, "expt of zero to a negative power");
      r = mpq_class(den) / mpq_class(num);
    } else {
      r = mpq_class(num) / mpq_class(den);
    }
    return from_mpq(ctx, r);
  }
  double x = to_double(ctx, a), y = to_double(ctx, b);
  if (x == 0.0 && y == 0.0) return real(1.0);
  double r = std::pow(x, y);
  if (std::isnan(r) && !std::isnan(x) && !std::isnan(y))
    ctx.raise(ErrorKind::DomainError, "expt result is not real");
  return real(r);
}

Ref num_sqrt(MachineCtx& ctx, const Ref& a) {
  Tier t = tier_of(ctx, a);
  if (t == kInt) {
    const mpz_class& z = std::get<mpz_class>(a->v);
    if (z < 0) ctx.raise(ErrorKind::DomainError, "sqrt of a negative number");
    if (mpz_perfect_square_p(z.get_mpz_t())) {
      mpz_class r;
      mpz_sqrt(r.get_mpz_t(), z.get_mpz_t());
      return integer(r);
    }
    return real(std::sqrt(z.get_d()));
  }
  if (t == kRat) {
    const mpq_class& q = std::get<mpq_class>(a->v);
    if (q < 0) ctx.raise(ErrorKind::DomainError, "sqrt of a negative number");
    if (mpz_perfect_square_p(q.get_num().get_mpz_t()) &&
        mpz_perfect_square_p(q.get_den().get_mpz_t())) {
      mpz_class n, d;
      mpz_sqrt(n.get_mpz_t(), q.get_num().get_mpz_t());
      mpz_sqrt(d.get_mpz_t(), q.get_den().get_mpz_t());
      return rational(mpq_class(n) / mpq_class(d));
    }
    return real(std::sqrt(q.get_d()));
  }
  double d = dval(a);
  if (d < 0) ctx.raise(ErrorKind::DomainError, "sqrt of a negative number");
  return real(std::sqrt(d));
}

namespace {

// Simplest rational in [lo, hi], 0 < lo <= hi. Iterative continued-fraction
// walk; exact rationals can have very long expansions, so no recursion.
mpq_class simplest_in(MachineCtx& ctx, mpq_class lo, mpq_class hi) {
  std::vector<mpz_class> parts;
  mpq_class result;
  long iters = 0;
  while (true) {
    if (++iters > ctx.limits.max_walk_nodes)
      ctx.raise(ErrorKind::DomainError, "rationalize iteration limit exceeded");
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), lo.get_num().get_mpz_t(), lo.get_den().get_mpz_t());
    if (mpq_class(fl) == lo) {
      result = fl;
      break;
    }
    mpz_class fh;
    mpz_fdiv_q(fh.get_mpz_t(), hi.get_num().get_mpz_t(), hi.get_den().get_mpz_t());
    if (fl != fh) {
      result = fl + 1;
      break;
    }
    parts.push_back(fl);
    mpq_class nlo = 1 / (hi - mpq_class(fh));
    mpq_class nhi = 1 / (lo - mpq_class(fl));
    lo = nlo;
    hi = nhi;
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) result = mpq_class(*it) + 1 / result;
  return result;
}

mpq_class simplest_rational(MachineCtx& ctx, mpq_class x, mpq_class y) {
  if (y < x) std::swap(x, y);
  if (x == y) return x;
  if (x > 0) return simplest_in(ctx, x, y);
  if (y < 0) {
    mpq_class r = simplest_in(ctx, mpq_class(-y), mpq_class(-x));
    return mpq_class(-r);
  }
  return mpq_class(0);
}

}  // namespace

Ref num_rationalize(MachineCtx& ctx, const Ref& x, const Ref& y) {
  bool inexact = is_real(x) || is_real(y);
  if (is_real(x) && !std::isfinite(dval(x)))
    ctx.raise(ErrorKind::DomainError, "rationalize of a non-finite number");
  if (is_real(y)) {
    double t = dval(y);
    if (std::isnan(t)) ctx.raise(ErrorKind::DomainError, "rationalize with nan tolerance");
    if (std::isinf(t)) return real(0.0);
  }
  mpq_class cx = exact_as_mpq(inexact_to_exact(ctx, x));
  mpq_class cy = abs(exact_as_mpq(inexact_to_exact(ctx, y)));
  mpq_class r = simplest_rational(ctx, cx - cy, cx + cy);
  Ref e = from_mpq(ctx, r);
  return inexact ? exact_to_inexact(ctx, e) : e;
}

Ref number_to_string(MachineCtx& ctx, const Ref& z, int radix) {
  if (!is_number(z)) ctx.raise(ErrorKind::TypeError, "expected a number, got " + print(z));
  if (radix != 2 && radix != 8 && radix != 10 && radix != 16)
    ctx.raise(ErrorKind::DomainError, "unsupported radix " + std::to_string(radix));
  if (radix == 10) return string_value(print(z));
  if (is_integer(z)) return string_value(std::get<mpz_class>(z->v).get_str(radix));
  if (is_rational(z)) {
    const mpq_class& q = std::get<mpq_class>(z->v);
    return string_value(q.get_num().get_str(radix) + "/" + q.get_den().get_str(radix));
  }
  ctx.raise(ErrorKind::DomainError, "inexact numbers require radix 10");
}

// ---------------------------------------------------------------------------
// Token parsing, shared by the reader and string->number.

namespace {

bool parse_uint_radix(const std::string& s, int radix, mpz_class& out) {
  if (s.empty()) return false;
  for (char c : s) {
    int v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'z')
      v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'Z')
      v = c - 'A' + 10;
    else
      return false;
    if (v >= radix) return false;
  }
  return mpz_set_str(out.get_mpz_t(), s.c_str(), radix) == 0;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// decimal := digits [. digits*] | . digits, with optional exponent
struct Decimal {
  std::string whole;
  std::string frac;
  long exp10 = 0;
  bool ok = false;
};

Decimal split_decimal(const std::string& body) {
  Decimal d;
  std::string s = body;
  std::size_t epos = std::string::npos;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = std::tolower(static_cast<unsigned char>(s[i]));
    if (c == 'e' || c == 's' || c == 'f' || c == 'd' || c == 'l') {
      epos = i;
      break;
    }
  }
  if (epos != std::string::npos) {
    std::string es = s.substr(epos + 1);
    s = s.substr(0, epos);
    bool neg = false;
    if (!es.empty() && (es[0] == '+' || es[0] == '-')) {
      neg = es[0] == '-';
      es = es.substr(1);
    }
    if (!all_digits(es) || es.size() > 9) return d;
    d.exp10 = std::strtol(es.c_str(), nullptr, 10);
    if (neg) d.exp10 = -d.exp10;
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    if (epos == std::string::npos) return d;  // plain integer, not a decimal
    if (!all_digits(s)) return d;
    d.whole = s;
  } else {
    d.whole = s.substr(0, dot);
    d.frac = s.substr(dot + 1);
    if (s.find('.', dot + 1) != std::string::npos) return d;
    if (d.whole.empty() && d.frac.empty()) return d;
    if (!d.whole.empty() && !all_digits(d.whole)) return d;
    if (!d.frac.empty() && !all_digits(d.frac)) return d;
  }
  d.ok = true;
  return d;
}

std::optional<mpq_class> decimal_to_exact(const Decimal& d) {
  std::string digits = d.whole + d.frac;
  if (digits.empty()) digits = "0";
  mpz_class mant;
  if (mpz_set_str(mant.get_mpz_t(), digits.c_str(), 10) != 0) return std::nullopt;
  long e = d.exp10 - static_cast<long>(d.frac.size());
  if (e > 100000 || e < -100000) return std::nullopt;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
  mpq_class q;
  if (e < 0)
    q = mpq_class(mant) / mpq_class(scale);
  else
    q = mpq_class(mant) * mpq_class(scale);
  q.canonicalize();
  return q;
}

double decimal_to_double(const std::string& body) {
  std::string norm;
  norm.reserve(body.size());
  for (char c : body) {
    char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    norm += (lc == 's' || lc == 'f' || lc == 'd' || lc == 'l') ? 'e' : c;
  }
  return std::strtod(norm.c_str(), nullptr);
}

}  // namespace

std::optional<Ref> parse_number_token(const std::string& tok, bool allow_prefixes,
                                      int default_radix) {
  int radix = default_radix;
  int exactness = 0;  // 0 unset, 1 exact, 2 inexact
  std::size_t i = 0;
  if (allow_prefixes) {
    bool radix_set = false;
    while (i + 1 < tok.size() && tok[i] == '#') {
      char c = static_cast<char>(std::tolower(static_cast<unsigned char>(tok[i + 1])));
      if (c == 'b' || c == 'o' || c == 'd' || c == 'x') {
        if (radix_set) return std::nullopt;
        radix = c == 'b' ? 2 : c == 'o' ? 8 : c == 'd' ? 10 : 16;
        radix_set = true;
      } else if (c == 'e' || c == 'i') {
        if (exactness) return std::nullopt;
        exactness = c == 'e' ? 1 : 2;
      } else {
        return std::nullopt;
      }
      i += 2;
    }
  } else if (!tok.empty() && tok[0] == '#') {
    return std::nullopt;
  }
  std::string body = tok.substr(i);
  if (body.empty()) return std::nullopt;

  if (body == "+inf.0" || body == "-inf.0" || body == "+nan.0" || body == "-nan.0") {
    if (exactness == 1) return std::nullopt;
    double d = body[1] == 'n' ? std::nan("")
                              : (body[0] == '+' ? HUGE_VAL : -HUGE_VAL);
    return real(d);
  }

  bool neg = false;
  std::string mag = body;
  if (mag[0] == '+' || mag[0] == '-') {
    neg = mag[0] == '-';
    mag = mag.substr(1);
    if (mag.empty()) return std::nullopt;
  }

  auto finish_exact_int = [&](const mpz_class& z) -> Ref {
    mpz_class v = neg ? mpz_class(-z) : z;
    if (exactness == 2) return real(v.get_d());
    return integer(v);
  };

  mpz_class zi;
  if (parse_uint_radix(mag, radix, zi)) return finish_exact_int(zi);

  auto slash = mag.find('/');
  if (slash != std::string::npos) {
    mpz_class n, d;
    if (!parse_uint_radix(mag.substr(0, slash), radix, n)) return std::nullopt;
    if (!parse_uint_radix(mag.substr(slash + 1), radix, d)) return std::nullopt;
    if (d == 0) return std::nullopt;
    mpq_class q(n, d);
    q.canonicalize();
    if (neg) q = -q;
    if (exactness == 2) return real(q.get_d());
    return rational(q);
  }

  if (radix != 10) return std::nullopt;
  Decimal dec = split_decimal(mag);
  if (!dec.ok) return std::nullopt;
  if (exactness == 1) {
    auto q = decimal_to_exact(dec);
    if (!q) return std::nullopt;
    if (neg) *q = -*q;
    return rational(*q);
  }
  double d = decimal_to_double(mag);
  return real(neg ? -d : d);
}

std::string format_double(double d) {
  if (std::isnan(d)) return "+nan.0";
  if (std::isinf(d)) return d > 0 ? "+inf.0" : "-inf.0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), d);
  std::string s(buf, res.ptr);
  // ensure the token reads back as inexact
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

}  // namespace glsearch
