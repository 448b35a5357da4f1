#include "glsearch/machine.hpp"

#include <algorithm>
#include <cmath>

#include "glsearch/numeric.hpp"

namespace glsearch {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::UnboundVariable:
      return "unbound-variable";
    case ErrorKind::TypeError:
      return "type-error";
    case ErrorKind::ArityError:
      return "arity-error";
    case ErrorKind::DivisionByZero:
      return "division-by-zero";
    case ErrorKind::DomainError:
      return "domain-error";
    case ErrorKind::UserError:
      return "user-error";
  }
  return "unknown";
}

Ref* Frame::find_local(SymbolId id) {
  if (!index.empty()) {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &slots[it->second].second;
  }
  for (auto& slot : slots)
    if (slot.first == id) return &slot.second;
  return nullptr;
}

void Frame::define(SymbolId id, Ref value) {
  if (Ref* p = find_local(id)) {
    *p = std::move(value);
    return;
  }
  slots.emplace_back(id, std::move(value));
  if (!index.empty()) {
    index.emplace(id, slots.size() - 1);
  } else if (slots.size() > 16) {
    for (std::size_t i = 0; i < slots.size(); ++i) index.emplace(slots[i].first, i);
  }
}

Ref* Frame::lookup(Frame* frame, SymbolId id) {
  for (; frame; frame = frame->parent.get())
    if (Ref* p = frame->find_local(id)) return p;
  return nullptr;
}

void MachineCtx::charge_alloc(long n) {
  if (n < 0 || n > limits.max_alloc_elems)
    raise(ErrorKind::DomainError, "allocation too large");
  alloc_remaining -= n;
  if (alloc_remaining < 0) raise(ErrorKind::DomainError, "allocation budget exhausted");
}

void MachineCtx::guard_integer(const mpz_class& z) const {
  if (static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2)) > limits.max_integer_bits)
    raise(ErrorKind::DomainError, "integer too large");
}

namespace {

struct Keywords {
  SymbolId quote = Symbols::intern("quote");
  SymbolId lambda = Symbols::intern("lambda");
  SymbolId if_ = Symbols::intern("if");
  SymbolId set = Symbols::intern("set!");
  SymbolId define = Symbols::intern("define");
  SymbolId begin = Symbols::intern("begin");
  SymbolId and_ = Symbols::intern("and");
  SymbolId or_ = Symbols::intern("or");
  SymbolId letrec = Symbols::intern("letrec");
  SymbolId delay = Symbols::intern("delay");
  SymbolId let = Symbols::intern("let");
  SymbolId letstar = Symbols::intern("let*");
  SymbolId do_ = Symbols::intern("do");
  SymbolId cond = Symbols::intern("cond");
  SymbolId case_ = Symbols::intern("case");
  SymbolId else_ = Symbols::intern("else");
  SymbolId arrow = Symbols::intern("=>");
  SymbolId memv = Symbols::intern("memv");
  SymbolId do_loop = Symbols::intern(" do-loop");
  SymbolId cond_t = Symbols::intern(" cond-t");
  SymbolId case_k = Symbols::intern(" case-k");
};

const Keywords& kw() {
  static const Keywords k;
  return k;
}

Ref unassigned_marker() {
  static const Ref u = std::make_shared<Obj>(Unassigned{});
  return u;
}

struct FuelExhausted {};

struct Kont {
  enum class Tag {
    Seq,         // remaining body forms; value of the last one is the result
    If,          // a = consequent, b = alternative (may be null)
    Define,      // name gets the value in env
    Set,         // name gets the value somewhere up the chain
    Args,        // forms = whole call, vals = evaluated prefix
    And,         // short-circuits on #f
    Or,          // short-circuits on truth
    Force1,      // a = promise being forced
    CCMark,      // continuation extent marker
    DynWind,     // a = thunk, b = after, c = saved value; stage advances
    MapCollect,  // a = proc, cols = argument columns, vals = results
    CallValues,  // a = consumer
  };
  Tag tag;
  std::shared_ptr<const std::vector<Ref>> forms;
  std::size_t index = 0;
  FramePtr env;
  SymbolId name = 0;
  Ref a, b, c;
  std::vector<Ref> vals;
  std::vector<std::vector<Ref>> cols;
  std::size_t total = 0;
  std::uint64_t id = 0;
  int stage = 0;
  bool flag = false;  // MapCollect: for-each (discard results)

  explicit Kont(Tag t) : tag(t) {}
};

// ---------------------------------------------------------------------------
// Desugaring for derived forms. Each helper builds the equivalent core form
// as data and lets the main loop dispatch on it again (one extra fuel unit).

void expect_form(MachineCtx& ctx, bool cond, const char* what) {
  if (!cond) ctx.raise(ErrorKind::TypeError, std::string("malformed ") + what);
}

std::vector<Ref> expect_list(MachineCtx& ctx, const Ref& r, const char* what) {
  auto v = list_to_vector(r, ctx.limits.max_walk_nodes);
  expect_form(ctx, v.has_value(), what);
  return std::move(*v);
}

// bindings: ((v1 e1) (v2 e2) ...) -> two parallel vectors
void split_bindings(MachineCtx& ctx, const Ref& bindings, std::vector<Ref>& names,
                    std::vector<Ref>& inits) {
  for (const Ref& b : expect_list(ctx, bindings, "binding list")) {
    auto parts = expect_list(ctx, b, "binding");
    expect_form(ctx, parts.size() == 2 && is_symbol(parts[0]), "binding");
    names.push_back(parts[0]);
    inits.push_back(parts[1]);
  }
}

Ref desugar_let(MachineCtx& ctx, const std::vector<Ref>& items) {
  expect_form(ctx, items.size() >= 3, "let");
  if (is_symbol(items[1])) {
    // (let loop ((v e)...) body...) ->
    // ((letrec ((loop (lambda (v...) body...))) loop) e...)
    expect_form(ctx, items.size() >= 4, "named let");
    std::vector<Ref> names, inits;
    split_bindings(ctx, items[2], names, inits);
    std::vector<Ref> lam{symbol(kw().lambda), list_from(names)};
    lam.insert(lam.end(), items.begin() + 3, items.end());
    Ref binding = list({items[1], list_from(lam)});
    Ref rec = list({symbol(kw().letrec), list({binding}), items[1]});
    std::vector<Ref> app{rec};
    app.insert(app.end(), inits.begin(), inits.end());
    return list_from(app);
  }
  // (let ((v e)...) body...) -> ((lambda (v...) body...) e...)
  std::vector<Ref> names, inits;
  split_bindings(ctx, items[1], names, inits);
  std::vector<Ref> lam{symbol(kw().lambda), list_from(names)};
  lam.insert(lam.end(), items.begin() + 2, items.end());
  std::vector<Ref> app{list_from(lam)};
  app.insert(app.end(), inits.begin(), inits.end());
  return list_from(app);
}

Ref desugar_letstar(MachineCtx& ctx, const std::vector<Ref>& items) {
  expect_form(ctx, items.size() >= 3, "let*");
  auto bindings = expect_list(ctx, items[1], "binding list");
  std::vector<Ref> body(items.begin() + 2, items.end());
  if (bindings.size() <= 1) {
    std::vector<Ref> out{symbol(kw().let), items[1]};
    out.insert(out.end(), body.begin(), body.end());
    return list_from(out);
  }
  std::vector<Ref> rest{symbol(kw().letstar),
                        list_from(std::vector<Ref>(bindings.begin() + 1, bindings.end()))};
  rest.insert(rest.end(), body.begin(), body.end());
  return list({symbol(kw().let), list({bindings[0]}), list_from(rest)});
}

Ref desugar_do(MachineCtx& ctx, const std::vector<Ref>& items) {
  expect_form(ctx, items.size() >= 3, "do");
  std::vector<Ref> names, inits, steps;
  for (const Ref& spec : expect_list(ctx, items[1], "do specs")) {
    auto parts = expect_list(ctx, spec, "do spec");
    expect_form(ctx, (parts.size() == 2 || parts.size() == 3) && is_symbol(parts[0]), "do spec");
    names.push_back(parts[0]);
    inits.push_back(parts[1]);
    steps.push_back(parts.size() == 3 ? parts[2] : parts[0]);
  }
  auto tail = expect_list(ctx, items[2], "do result clause");
  expect_form(ctx, !tail.empty(), "do result clause");
  Ref result;
  if (tail.size() == 1)
    result = unspecified();
  else if (tail.size() == 2)
    result = tail[1];
  else {
    std::vector<Ref> b{symbol(kw().begin)};
    b.insert(b.end(), tail.begin() + 1, tail.end());
    result = list_from(b);
  }
  std::vector<Ref> loop_call{symbol(kw().do_loop)};
  loop_call.insert(loop_call.end(), steps.begin(), steps.end());
  std::vector<Ref> again{symbol(kw().begin)};
  again.insert(again.end(), items.begin() + 3, items.end());
  again.push_back(list_from(loop_call));
  Ref lam = list({symbol(kw().lambda), list_from(names),
                  list({symbol(kw().if_), tail[0], result, list_from(again)})});
  Ref rec = list({symbol(kw().letrec), list({list({symbol(kw().do_loop), lam})}),
                  symbol(kw().do_loop)});
  std::vector<Ref> app{rec};
  app.insert(app.end(), inits.begin(), inits.end());
  return list_from(app);
}

Ref desugar_cond_from(MachineCtx& ctx, const std::vector<Ref>& items, std::size_t from) {
  if (from >= items.size()) return unspecified();
  auto clause = expect_list(ctx, items[from], "cond clause");
  expect_form(ctx, !clause.empty(), "cond clause");
  if (is_symbol(clause[0]) && sym_id(clause[0]) == kw().else_) {
    expect_form(ctx, from + 1 == items.size() && clause.size() >= 2, "cond else clause");
    if (clause.size() == 2) return clause[1];
    std::vector<Ref> b{symbol(kw().begin)};
    b.insert(b.end(), clause.begin() + 1, clause.end());
    return list_from(b);
  }
  Ref rest = desugar_cond_from(ctx, items, from + 1);
  if (clause.size() == 1) return list({symbol(kw().or_), clause[0], rest});
  if (clause.size() == 3 && is_symbol(clause[1]) && sym_id(clause[1]) == kw().arrow) {
    Ref t = symbol(kw().cond_t);
    return list({symbol(kw().let), list({list({t, clause[0]})}),
                 list({symbol(kw().if_), t, list({clause[2], t}), rest})});
  }
  std::vector<Ref> b{symbol(kw().begin)};
  b.insert(b.end(), clause.begin() + 1, clause.end());
  return list({symbol(kw().if_), clause[0], list_from(b), rest});
}

Ref desugar_cond(MachineCtx& ctx, const std::vector<Ref>& items) {
  expect_form(ctx, items.size() >= 2, "cond");
  return desugar_cond_from(ctx, items, 1);
}

Ref desugar_case(MachineCtx& ctx, const std::vector<Ref>& items) {
  expect_form(ctx, items.size() >= 3, "case");
  Ref k = symbol(kw().case_k);
  std::vector<Ref> cond_items{symbol(kw().cond)};
  for (std::size_t i = 2; i < items.size(); ++i) {
    auto clause = expect_list(ctx, items[i], "case clause");
    expect_form(ctx, clause.size() >= 2, "case clause");
    if (is_symbol(clause[0]) && sym_id(clause[0]) == kw().else_) {
      expect_form(ctx, i + 1 == items.size(), "case else clause");
      cond_items.push_back(items[i]);
      continue;
    }
    std::vector<Ref> c{list({symbol(kw().memv), k, list({symbol(kw().quote), clause[0]})})};
    c.insert(c.end(), clause.begin() + 1, clause.end());
    cond_items.push_back(list_from(c));
  }
  return list({symbol(kw().let), list({list({k, items[1]})}), list_from(cond_items)});
}

void parse_formals(MachineCtx& ctx, const Ref& formals, std::vector<SymbolId>& params,
                   std::optional<SymbolId>& rest) {
  Ref cur = formals;
  long guard = 0;
  while (is_pair(cur)) {
    const auto& p = as_pair(cur);
    expect_form(ctx, is_symbol(p.car), "formals");
    params.push_back(sym_id(p.car));
    cur = p.cdr;
    if (++guard > ctx.limits.max_walk_nodes)
      ctx.raise(ErrorKind::DomainError, "formals too long");
  }
  if (is_nil(cur)) return;
  expect_form(ctx, is_symbol(cur), "formals");
  rest = sym_id(cur);
}

Ref make_closure(MachineCtx& ctx, const Ref& formals, std::vector<Ref> body, FramePtr env) {
  expect_form(ctx, !body.empty(), "lambda body");
  ClosureVal c;
  parse_formals(ctx, formals, c.params, c.rest);
  c.body = std::make_shared<const std::vector<Ref>>(std::move(body));
  c.env = std::move(env);
  return std::make_shared<Obj>(std::move(c));
}

// ---------------------------------------------------------------------------

EvalOutcome run_eval(const MachineLimits& limits, const FramePtr& base, FramePtr root,
                     const std::vector<Ref>& program, long fuel) {
  EvalOutcome out;
  MachineCtx ctx(limits, base);
  long remaining = fuel;
  if (program.empty()) {
    out.value = unspecified();
    return out;
  }

  std::vector<Kont> stack;
  std::uint64_t next_cc_id = 1;
  Ref expr;
  FramePtr env = root;
  Ref value;
  bool have_value = false;

  auto charge_step = [&]() {
    if (remaining <= 0) throw FuelExhausted{};
    --remaining;
  };

  auto coerce_single = [&](Ref v) -> Ref {
    if (auto* t = std::get_if<ValuesTuple>(&v->v)) {
      if (t->items.size() == 1) return t->items[0];
      ctx.raise(ErrorKind::TypeError, "multiple values in a single-value context");
    }
    return v;
  };

  // Central application. Loops so chains of control primitives (apply of
  // apply, ...) never recurse in C++; ends by setting either an eval state
  // or a return value.
  auto apply_proc = [&](Ref proc, std::vector<Ref> args) {
    for (;;) {
      charge_step();
      if (auto* cl = std::get_if<ClosureVal>(&proc->v)) {
        if (cl->rest ? args.size() < cl->params.size() : args.size() != cl->params.size())
          ctx.raise(ErrorKind::ArityError,
                    "procedure expected " + std::to_string(cl->params.size()) +
                        (cl->rest ? "+" : "") + " arguments, got " + std::to_string(args.size()));
        ctx.charge_alloc(static_cast<long>(args.size()) + 1);
        FramePtr fr = std::make_shared<Frame>();
        fr->parent = cl->env;
        fr->slots.reserve(cl->params.size() + (cl->rest ? 1 : 0));
        for (std::size_t i = 0; i < cl->params.size(); ++i)
          fr->slots.emplace_back(cl->params[i], args[i]);
        if (cl->rest) {
          std::vector<Ref> restv(args.begin() + static_cast<long>(cl->params.size()), args.end());
          ctx.charge_alloc(static_cast<long>(restv.size()));
          fr->slots.emplace_back(*cl->rest, list_from(restv));
        }
        const auto& body = *cl->body;
        if (body.size() > 1) {
          Kont k(Kont::Tag::Seq);
          k.forms = cl->body;
          k.index = 1;
          k.env = fr;
          stack.push_back(std::move(k));
        }
        expr = body[0];
        env = std::move(fr);
        have_value = false;
        return;
      }
      if (auto* pv = std::get_if<PrimitiveVal>(&proc->v)) {
        const PrimitiveDef* d = pv->def;
        int n = static_cast<int>(args.size());
        if (n < d->min_args || (d->max_args >= 0 && n > d->max_args))
          ctx.raise(ErrorKind::ArityError, d->name + ": wrong number of arguments (" +
                                               std::to_string(n) + ")");
        switch (d->control) {
          case ControlKind::None:
            value = d->fn(ctx, args);
            have_value = true;
            return;
          case ControlKind::Apply: {
            auto tail = list_to_vector(args.back(), limits.max_walk_nodes);
            if (!tail)
              ctx.raise(ErrorKind::TypeError, "apply: last argument must be a proper list");
            std::vector<Ref> next(args.begin() + 1, args.end() - 1);
            next.insert(next.end(), tail->begin(), tail->end());
            Ref p = args[0];
            proc = std::move(p);
            args = std::move(next);
            continue;
          }
          case ControlKind::CallCC: {
            Kont k(Kont::Tag::CCMark);
            k.id = next_cc_id++;
            stack.push_back(std::move(k));
            Ref cont = std::make_shared<Obj>(ContinuationVal{stack.back().id});
            Ref p = args[0];
            proc = std::move(p);
            args = {cont};
            continue;
          }
          case ControlKind::CallWithValues: {
            Kont k(Kont::Tag::CallValues);
            k.a = args[1];
            stack.push_back(std::move(k));
            Ref p = args[0];
            proc = std::move(p);
            args.clear();
            continue;
          }
          case ControlKind::DynamicWind: {
            for (const Ref& f : args)
              if (!is_procedure(f))
                ctx.raise(ErrorKind::TypeError, "dynamic-wind: expected procedures");
            Kont k(Kont::Tag::DynWind);
            k.a = args[1];
            k.b = args[2];
            k.stage = 0;
            stack.push_back(std::move(k));
            Ref p = args[0];
            proc = std::move(p);
            args.clear();
            continue;
          }
          case ControlKind::Force: {
            auto* pr = std::get_if<PromiseVal>(&args[0]->v);
            if (!pr) ctx.raise(ErrorKind::TypeError, "force: expected a promise");
            if (pr->forced) {
              value = pr->value;
              have_value = true;
              return;
            }
            Kont k(Kont::Tag::Force1);
            k.a = args[0];
            stack.push_back(std::move(k));
            Ref p = pr->thunk;
            proc = std::move(p);
            args.clear();
            continue;
          }
          case ControlKind::Map:
          case ControlKind::ForEach: {
            bool for_each = d->control == ControlKind::ForEach;
            if (!is_procedure(args[0]))
              ctx.raise(ErrorKind::TypeError, d->name + ": expected a procedure");
            std::vector<std::vector<Ref>> cols;
            for (std::size_t i = 1; i < args.size(); ++i) {
              auto col = list_to_vector(args[i], limits.max_walk_nodes);
              if (!col) ctx.raise(ErrorKind::TypeError, d->name + ": expected proper lists");
              cols.push_back(std::move(*col));
            }
            std::size_t n2 = cols[0].size();
            for (const auto& c : cols)
              if (c.size() != n2)
                ctx.raise(ErrorKind::TypeError, d->name + ": lists differ in length");
            if (n2 == 0) {
              value = for_each ? unspecified() : nil();
              have_value = true;
              return;
            }
            std::vector<Ref> first;
            first.reserve(cols.size());
            for (const auto& c : cols) first.push_back(c[0]);
            Kont k(Kont::Tag::MapCollect);
            k.a = args[0];
            k.cols = std::move(cols);
            k.total = n2;
            k.index = 1;
            k.flag = for_each;
            if (!for_each) k.vals.reserve(n2);
            stack.push_back(std::move(k));
            Ref p = args[0];
            proc = std::move(p);
            args = std::move(first);
            continue;
          }
          case ControlKind::Eval: {
            auto* eh = std::get_if<EnvHandle>(&args[1]->v);
            if (!eh) ctx.raise(ErrorKind::TypeError, "eval: expected an environment");
            if (!is_datum(args[0]))
              ctx.raise(ErrorKind::TypeError, "eval: expression must be a datum");
            FramePtr fr = std::make_shared<Frame>();
            fr->parent = eh->frame;
            expr = args[0];
            env = std::move(fr);
            have_value = false;
            return;
          }
        }
        ctx.raise(ErrorKind::TypeError, "unhandled primitive control");
      }
      if (auto* kv = std::get_if<ContinuationVal>(&proc->v)) {
        if (args.size() != 1)
          ctx.raise(ErrorKind::ArityError, "continuation expected 1 argument, got " +
                                               std::to_string(args.size()));
        std::size_t pos = stack.size();
        bool found = false;
        while (pos > 0) {
          --pos;
          if (stack[pos].tag == Kont::Tag::CCMark && stack[pos].id == kv->id) {
            found = true;
            break;
          }
        }
        if (!found)
          ctx.raise(ErrorKind::DomainError, "continuation invoked outside its dynamic extent");
        stack.erase(stack.begin() + static_cast<std::ptrdiff_t>(pos), stack.end());
        value = args[0];
        have_value = true;
        return;
      }
      ctx.raise(ErrorKind::TypeError, "attempt to call a non-procedure: " + print(proc));
    }
  };

  {
    auto top = std::make_shared<const std::vector<Ref>>(program);
    if (top->size() > 1) {
      Kont k(Kont::Tag::Seq);
      k.forms = top;
      k.index = 1;
      k.env = root;
      stack.push_back(std::move(k));
    }
    expr = (*top)[0];
  }

  try {
    for (;;) {
      if (!have_value) {
        charge_step();
        if (static_cast<long>(stack.size()) > limits.max_cont_depth)
          ctx.raise(ErrorKind::DomainError, "continuation depth limit exceeded");
        const Obj& o = *expr;
        if (std::holds_alternative<SymbolVal>(o.v)) {
          SymbolId id = sym_id(expr);
          Ref* slot = Frame::lookup(env.get(), id);
          if (!slot)
            ctx.raise(ErrorKind::UnboundVariable, "unbound variable: " + Symbols::name(id));
          if (std::holds_alternative<Unassigned>((*slot)->v))
            ctx.raise(ErrorKind::TypeError,
                      "variable used before initialization: " + Symbols::name(id));
          value = *slot;
          have_value = true;
          continue;
        }
        if (std::holds_alternative<PairVal>(o.v)) {
          auto items_opt = list_to_vector(expr, limits.max_walk_nodes);
          if (!items_opt) ctx.raise(ErrorKind::TypeError, "improper list in expression");
          std::vector<Ref>& items = *items_opt;
          SymbolId head = is_symbol(items[0]) ? sym_id(items[0]) : static_cast<SymbolId>(-1);
          const Keywords& K = kw();
          if (is_symbol(items[0]) && head == K.quote) {
            expect_form(ctx, items.size() == 2, "quote");
            deep_freeze(items[1]);
            value = items[1];
            have_value = true;
          } else if (is_symbol(items[0]) && head == K.lambda) {
            expect_form(ctx, items.size() >= 3, "lambda");
            value = make_closure(ctx, items[1],
                                 std::vector<Ref>(items.begin() + 2, items.end()), env);
            have_value = true;
          } else if (is_symbol(items[0]) && head == K.if_) {
            expect_form(ctx, items.size() == 3 || items.size() == 4, "if");
            Kont k(Kont::Tag::If);
            k.a = items[2];
            if (items.size() == 4) k.b = items[3];
            k.env = env;
            stack.push_back(std::move(k));
            expr = items[1];
          } else if (is_symbol(items[0]) && head == K.set) {
            expect_form(ctx, items.size() == 3 && is_symbol(items[1]), "set!");
            Kont k(Kont::Tag::Set);
            k.name = sym_id(items[1]);
            k.env = env;
            stack.push_back(std::move(k));
            expr = items[2];
          } else if (is_symbol(items[0]) && head == K.define) {
            expect_form(ctx, items.size() >= 3, "define");
            if (is_pair(items[1])) {
              const auto& sig = as_pair(items[1]);
              expect_form(ctx, is_symbol(sig.car), "define");
              Ref clo = make_closure(ctx, sig.cdr,
                                     std::vector<Ref>(items.begin() + 2, items.end()), env);
              env->define(sym_id(sig.car), clo);
              value = unspecified();
              have_value = true;
            } else {
              expect_form(ctx, items.size() == 3 && is_symbol(items[1]), "define");
              Kont k(Kont::Tag::Define);
              k.name = sym_id(items[1]);
              k.env = env;
              stack.push_back(std::move(k));
              expr = items[2];
            }
          } else if (is_symbol(items[0]) && head == K.begin) {
            if (items.size() == 1) {
              value = unspecified();
              have_value = true;
            } else if (items.size() == 2) {
              expr = items[1];
            } else {
              auto forms = std::make_shared<const std::vector<Ref>>(items.begin() + 1,
                                                                    items.end());
              Kont k(Kont::Tag::Seq);
              k.forms = forms;
              k.index = 1;
              k.env = env;
              stack.push_back(std::move(k));
              expr = (*forms)[0];
            }
          } else if (is_symbol(items[0]) && (head == K.and_ || head == K.or_)) {
            bool is_and = head == K.and_;
            if (items.size() == 1) {
              value = boolean(is_and);
              have_value = true;
            } else if (items.size() == 2) {
              expr = items[1];
            } else {
              auto forms = std::make_shared<const std::vector<Ref>>(items.begin() + 1,
                                                                    items.end());
              Kont k(is_and ? Kont::Tag::And : Kont::Tag::Or);
              k.forms = forms;
              k.index = 1;
              k.env = env;
              stack.push_back(std::move(k));
              expr = (*forms)[0];
            }
          } else if (is_symbol(items[0]) && head == K.letrec) {
            expect_form(ctx, items.size() >= 3, "letrec");
            std::vector<Ref> names, inits;
            split_bindings(ctx, items[1], names, inits);
            ctx.charge_alloc(static_cast<long>(names.size()) + 1);
            FramePtr fr = std::make_shared<Frame>();
            fr->parent = env;
            std::vector<Ref> seq;
            seq.reserve(names.size() + items.size() - 2);
            for (std::size_t i = 0; i < names.size(); ++i) {
              fr->define(sym_id(names[i]), unassigned_marker());
              seq.push_back(list({symbol(K.set), names[i], inits[i]}));
            }
            seq.insert(seq.end(), items.begin() + 2, items.end());
            auto forms = std::make_shared<const std::vector<Ref>>(std::move(seq));
            if (forms->size() > 1) {
              Kont k(Kont::Tag::Seq);
              k.forms = forms;
              k.index = 1;
              k.env = fr;
              stack.push_back(std::move(k));
            }
            expr = (*forms)[0];
            env = fr;
          } else if (is_symbol(items[0]) && head == K.delay) {
            expect_form(ctx, items.size() == 2, "delay");
            ClosureVal thunk;
            thunk.body = std::make_shared<const std::vector<Ref>>(
                std::vector<Ref>{items[1]});
            thunk.env = env;
            PromiseVal p;
            p.thunk = std::make_shared<Obj>(std::move(thunk));
            value = std::make_shared<Obj>(std::move(p));
            have_value = true;
          } else if (is_symbol(items[0]) && head == K.let) {
            expr = desugar_let(ctx, items);
          } else if (is_symbol(items[0]) && head == K.letstar) {
            expr = desugar_letstar(ctx, items);
          } else if (is_symbol(items[0]) && head == K.do_) {
            expr = desugar_do(ctx, items);
          } else if (is_symbol(items[0]) && head == K.cond) {
            expr = desugar_cond(ctx, items);
          } else if (is_symbol(items[0]) && head == K.case_) {
            expr = desugar_case(ctx, items);
          } else {
            auto forms = std::make_shared<const std::vector<Ref>>(std::move(items));
            Kont k(Kont::Tag::Args);
            k.forms = forms;
            k.index = 1;
            k.env = env;
            k.vals.reserve(forms->size());
            stack.push_back(std::move(k));
            expr = (*forms)[0];
          }
          continue;
        }
        if (std::holds_alternative<EmptyList>(o.v))
          ctx.raise(ErrorKind::TypeError, "empty application");
        if (std::holds_alternative<VectorVal>(o.v))
          ctx.raise(ErrorKind::TypeError, "vector literals must be quoted");
        if (std::holds_alternative<std::string>(o.v)) expr->frozen = true;
        value = expr;
        have_value = true;
        continue;
      }

      // return path
      if (stack.empty()) {
        out.value = coerce_single(value);
        out.steps_used = fuel - remaining;
        return out;
      }
      Kont k = std::move(stack.back());
      stack.pop_back();
      if (k.tag != Kont::Tag::CallValues) value = coerce_single(value);
      switch (k.tag) {
        case Kont::Tag::Seq: {
          const auto& forms = *k.forms;
          std::size_t i = k.index;
          if (i + 1 < forms.size()) {
            k.index = i + 1;
            expr = forms[i];
            env = k.env;
            stack.push_back(std::move(k));
          } else {
            expr = forms[i];
            env = k.env;
          }
          have_value = false;
          break;
        }
        case Kont::Tag::If: {
          expr = is_false(value) ? k.b : k.a;
          if (!expr) {
            value = unspecified();
            break;
          }
          env = k.env;
          have_value = false;
          break;
        }
        case Kont::Tag::Define:
          k.env->define(k.name, value);
          value = unspecified();
          break;
        case Kont::Tag::Set: {
          Frame* f = k.env.get();
          Ref* slot = nullptr;
          Frame* owner = nullptr;
          for (; f; f = f->parent.get()) {
            slot = f->find_local(k.name);
            if (slot) {
              owner = f;
              break;
            }
          }
          if (!slot)
            ctx.raise(ErrorKind::UnboundVariable,
                      "set! of unbound variable: " + Symbols::name(k.name));
          if (owner == base.get())
            root->define(k.name, value);  // keep the shared environment pristine
          else
            *slot = value;
          value = unspecified();
          break;
        }
        case Kont::Tag::Args: {
          k.vals.push_back(value);
          const auto& forms = *k.forms;
          if (k.index < forms.size()) {
            expr = forms[k.index];
            env = k.env;
            k.index++;
            stack.push_back(std::move(k));
            have_value = false;
          } else {
            Ref proc = k.vals[0];
            std::vector<Ref> args(std::make_move_iterator(k.vals.begin() + 1),
                                  std::make_move_iterator(k.vals.end()));
            apply_proc(std::move(proc), std::move(args));
          }
          break;
        }
        case Kont::Tag::And:
        case Kont::Tag::Or: {
          bool is_and = k.tag == Kont::Tag::And;
          if (is_and ? is_false(value) : is_true(value)) break;  // short-circuit
          const auto& forms = *k.forms;
          std::size_t i = k.index;
          if (i + 1 < forms.size()) {
            k.index = i + 1;
            expr = forms[i];
            env = k.env;
            stack.push_back(std::move(k));
          } else {
            expr = forms[i];
            env = k.env;
          }
          have_value = false;
          break;
        }
        case Kont::Tag::Force1: {
          auto* pr = std::get_if<PromiseVal>(&k.a->v);
          if (pr->forced) {
            value = pr->value;  // the thunk forced it re-entrantly; keep the first result
          } else {
            pr->forced = true;
            pr->value = value;
          }
          break;
        }
        case Kont::Tag::CCMark:
          break;  // normal return through the extent marker
        case Kont::Tag::DynWind: {
          if (k.stage == 0) {
            k.stage = 1;
            Ref thunk = k.a;
            stack.push_back(std::move(k));
            apply_proc(thunk, {});
          } else if (k.stage == 1) {
            k.c = value;
            k.stage = 2;
            Ref after = k.b;
            stack.push_back(std::move(k));
            apply_proc(after, {});
          } else {
            value = k.c;
          }
          break;
        }
        case Kont::Tag::MapCollect: {
          if (!k.flag) k.vals.push_back(value);
          if (k.index == k.total) {
            if (k.flag) {
              value = unspecified();
            } else {
              ctx.charge_alloc(static_cast<long>(k.vals.size()));
              value = list_from(k.vals);
            }
          } else {
            std::size_t i = k.index++;
            std::vector<Ref> args;
            args.reserve(k.cols.size());
            for (const auto& c : k.cols) args.push_back(c[i]);
            Ref proc = k.a;
            stack.push_back(std::move(k));
            apply_proc(proc, std::move(args));
          }
          break;
        }
        case Kont::Tag::CallValues: {
          std::vector<Ref> args;
          if (auto* t = std::get_if<ValuesTuple>(&value->v))
            args = t->items;
          else
            args = {value};
          apply_proc(k.a, std::move(args));
          break;
        }
      }
    }
  } catch (const SchemeError& e) {
    out.status = EvalOutcome::Status::RuntimeError;
    out.error_kind = e.kind;
    out.message = e.message;
    out.steps_used = fuel - remaining;
    return out;
  } catch (const FuelExhausted&) {
    out.status = EvalOutcome::Status::FuelExhausted;
    out.steps_used = fuel;
    return out;
  }
}

}  // namespace

Machine::Machine() {
  base_ = std::make_shared<Frame>();
  for (const PrimitiveDef& def : primitive_table())
    base_->define(Symbols::intern(def.name), std::make_shared<Obj>(PrimitiveVal{&def}));
}

EvalOutcome Machine::evaluate(const std::vector<Ref>& program, long fuel) const {
  FramePtr root = std::make_shared<Frame>();
  root->parent = base_;
  return run_eval(limits_, base_, std::move(root), program, fuel);
}

void Machine::install_solution(SymbolId name, const Ref& define_form) {
  FramePtr root = std::make_shared<Frame>();
  root->parent = base_;
  std::vector<Ref> prog{define_form};
  EvalOutcome out = run_eval(limits_, base_, root, prog, 1000000000L);
  if (!out.ok()) throw std::runtime_error("failed to install solution: " + out.message);
  Ref* bound = root->find_local(name);
  if (!bound) throw std::runtime_error("solution did not bind the expected name");
  base_->define(name, *bound);
  installed_.push_back(name);
}

bool Machine::has_solution(SymbolId name) const {
  return std::find(installed_.begin(), installed_.end(), name) != installed_.end();
}

}  // namespace glsearch
