#pragma once

// Numeric tower over GMP: exact integers (mpz), exact rationals (mpq,
// canonical, never denominator 1), and inexact doubles. Mixed exact and
// inexact operands follow the usual contagion rule (any inexact operand
// makes the result inexact); comparisons convert the double side to an
// exact rational so huge integers compare correctly against doubles.

#include <optional>
#include <string>

#include "glsearch/value.hpp"

namespace glsearch {

class MachineCtx;

enum class CmpResult { LT, EQ, GT, UNORDERED };

// Arithmetic; raises TypeError on non-numbers, DivisionByZero on exact
// zero divisors, DomainError past the integer-size guard.
Ref num_add(MachineCtx& ctx, const Ref& a, const Ref& b);
Ref num_sub(MachineCtx& ctx, const Ref& a, const Ref& b);
Ref num_mul(MachineCtx& ctx, const Ref& a, const Ref& b);
Ref num_div(MachineCtx& ctx, const Ref& a, const Ref& b);
Ref num_neg(MachineCtx& ctx, const Ref& a);

CmpResult num_cmp(MachineCtx& ctx, const Ref& a, const Ref& b);

bool is_exact_number(const Ref& r);
// Mathematical integer: every mpz, plus integral finite doubles.
bool is_integral_number(const Ref& r);
// Rational in the mathematical sense: everything finite.
bool is_rational_value(const Ref& r);

double to_double(MachineCtx& ctx, const Ref& r);
Ref exact_to_inexact(MachineCtx& ctx, const Ref& r);
Ref inexact_to_exact(MachineCtx& ctx, const Ref& r);  // DomainError on inf/nan

// Integer division; both arguments must be integral, and one inexact
// argument makes the result inexact. quotient truncates, remainder takes
// the dividend's sign, modulo the divisor's.
Ref num_quotient(MachineCtx& ctx, const Ref& a, const Ref& b);
Ref num_remainder(MachineCtx& ctx, const Ref& a, const Ref& b);
Ref num_modulo(MachineCtx& ctx, const Ref& a, const Ref& b);
Ref num_gcd2(MachineCtx& ctx, const Ref& a, const Ref& b);
Ref num_lcm2(MachineCtx& ctx, const Ref& a, const Ref& b);

Ref num_floor(MachineCtx& ctx, const Ref& a);
Ref num_ceiling(MachineCtx& ctx, const Ref& a);
Ref num_truncate(MachineCtx& ctx, const Ref& a);
Ref num_round(MachineCtx& ctx, const Ref& a);  // half to even

// expt: exact base with exact integer exponent stays exact (size-guarded);
// 0^0 is 1; 0 to a negative power raises DivisionByZero; anything that
// would leave the reals raises DomainError.
Ref num_expt(MachineCtx& ctx, const Ref& a, const Ref& b);
// sqrt: exact perfect squares (integer or rational) give exact results.
Ref num_sqrt(MachineCtx& ctx, const Ref& a);
Ref num_abs(MachineCtx& ctx, const Ref& a);
Ref num_numerator(MachineCtx& ctx, const Ref& a);
Ref num_denominator(MachineCtx& ctx, const Ref& a);
// Simplest rational within |y| of x; inexact if either argument is.
Ref num_rationalize(MachineCtx& ctx, const Ref& x, const Ref& y);

// radix 2/8/16 cover exact integers and rationals only; radix 10 covers
// everything and matches print().
Ref number_to_string(MachineCtx& ctx, const Ref& z, int radix);

// Parses one complete numeric token; nullopt when it is not a number.
// The reader calls with allow_prefixes=false (base-10 literals only);
// string->number enables #b #o #d #x #e #i prefixes and a default radix.
std::optional<Ref> parse_number_token(const std::string& tok, bool allow_prefixes,
                                      int default_radix = 10);

// Shortest representation that reads back to the same double, with a
// trailing ".0" on integral values and +inf.0/-inf.0/+nan.0 names.
std::string format_double(double d);

}  // namespace glsearch
