#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "glsearch/derive.hpp"
#include "glsearch/machine.hpp"

using namespace glsearch;

namespace {

Grammar mini(const std::string& text) { return load_grammar(text); }

DeriveContext ctx_for(const Grammar& g) { return DeriveContext{g, shared_zeta(), false, nullptr}; }

// drives the derivation by always taking alternative `pick[i]` at step i
SententialForm drive(const Grammar& g, const std::vector<std::size_t>& picks,
                     const std::vector<std::string>& params = {}) {
  auto ctx = ctx_for(g);
  SententialForm f = start_form("program", params);
  for (std::size_t pick : picks) {
    REQUIRE(!is_sentence(f));
    auto alts = expand_leftmost(f, ctx, 0.0);
    REQUIRE(pick < alts.size());
    f = alts[pick];
  }
  return f;
}

}  // namespace

TEST_CASE("static environment scope discipline") {
  StaticEnv env = StaticEnv::with_parameters({"x", "y"});
  CHECK(env.visible() == std::vector<std::string>{"x", "y"});
  CHECK(env.depth() == 1);

  SUBCASE("pending names are declared but not visible until activated") {
    StaticEnv d = env.declared("z");
    CHECK(d.visible() == std::vector<std::string>{"x", "y"});
    CHECK(d.bound_in_top("z"));
    CHECK(d.has_pending());
    StaticEnv a = d.activated();
    CHECK(a.visible() == std::vector<std::string>{"x", "y", "z"});
    CHECK(!a.has_pending());
  }

  SUBCASE("activation consumes the oldest pending name first") {
    StaticEnv d = env.declared("p").declared("q");
    StaticEnv a1 = d.activated();
    CHECK(a1.visible() == std::vector<std::string>{"x", "y", "p"});
    StaticEnv a2 = a1.activated();
    CHECK(a2.visible() == std::vector<std::string>{"x", "y", "p", "q"});
  }

  SUBCASE("pushed frames see outer names; popping restores them") {
    StaticEnv inner = env.pushed().declared("n").activated();
    CHECK(inner.visible() == std::vector<std::string>{"n", "x", "y"});
    CHECK(inner.depth() == 2);
    CHECK(!inner.bound_in_top("x"));  // x lives in the outer frame
    StaticEnv back = inner.popped();
    CHECK(back.visible() == std::vector<std::string>{"x", "y"});
  }

  SUBCASE("shadowed names appear once, innermost first") {
    StaticEnv inner = env.pushed().declared("x").activated().declared("w").activated();
    CHECK(inner.visible() == std::vector<std::string>{"x", "w", "y"});
  }

  SUBCASE("imbalanced scope operations are grammar bugs") {
    CHECK_THROWS_AS(env.popped(), GrammarError);
    CHECK_THROWS_AS(env.activated(), GrammarError);
  }
}

TEST_CASE("expanding a non-terminal multiplies probabilities through") {
  Grammar g = mini(
      "<program> ::= 0.6 : x\n"
      "<program> ::= 0.4 : <boolean>\n"
      "<boolean> ::= 0.5 : \"#t\"\n"  // # opens a comment, so booleans are quoted
      "<boolean> ::= 0.5 : \"#f\"\n");
  auto ctx = ctx_for(g);
  SententialForm f = start_form("program");
  auto alts = expand_leftmost(f, ctx, 0.0);
  REQUIRE(alts.size() == 2);
  CHECK(alts[0].prob == doctest::Approx(0.6));  // highest probability first
  CHECK(is_sentence(alts[0]));
  CHECK(alts[1].prob == doctest::Approx(0.4));

  // the spec example: a 0.4 form over <boolean> splits into 0.2 / 0.2
  auto with_bool = expand_leftmost(alts[1], ctx, 0.0);
  REQUIRE(with_bool.size() == 2);
  CHECK(with_bool[0].prob == doctest::Approx(0.2));
  CHECK(with_bool[1].prob == doctest::Approx(0.2));
  // equal probabilities tie-break on the rendered body: "#f" before "#t"
  CHECK(sentence_tokens(with_bool[0]) == std::vector<std::string>{"#f"});
  CHECK(sentence_tokens(with_bool[1]) == std::vector<std::string>{"#t"});
}

TEST_CASE("variable reference alternatives") {
  SUBCASE("empty environment yields no alternatives and the branch prunes") {
    CHECK(gen_variable_reference(StaticEnv{}).empty());
    Grammar g = mini("<program> ::= 1 : <!variable>\n");
    auto ctx = ctx_for(g);
    SententialForm f = expand_leftmost(start_form("program"), ctx, 0.0)[0];
    CHECK(expand_leftmost(f, ctx, 0.0).empty());
  }

  SUBCASE("two visible names split uniformly") {
    auto refs = gen_variable_reference(StaticEnv::with_parameters({"x", "y"}));
    REQUIRE(refs.size() == 2);
    CHECK(refs[0].first == "x");
    CHECK(refs[0].second == doctest::Approx(0.5));
    CHECK(refs[1].first == "y");
    CHECK(refs[1].second == doctest::Approx(0.5));

    Grammar g = mini("<program> ::= 1 : <!variable>\n");
    auto ctx = ctx_for(g);
    SententialForm f = expand_leftmost(start_form("program", {"x", "y"}), ctx, 0.0)[0];
    auto alts = expand_leftmost(f, ctx, 0.0);
    REQUIRE(alts.size() == 2);
    CHECK(sentence_tokens(alts[0]) == std::vector<std::string>{"x"});
    CHECK(alts[0].prob == doctest::Approx(0.5));
  }
}

TEST_CASE("integer literal alternatives follow the zeta weights") {
  Grammar g = mini("<program> ::= 1 : <!uinteger-10>\n");
  auto ctx = ctx_for(g);
  SententialForm f = expand_leftmost(start_form("program"), ctx, 0.0)[0];
  auto alts = expand_leftmost(f, ctx, 0.0);
  REQUIRE(alts.size() == 1024);
  CHECK(sentence_tokens(alts[0]) == std::vector<std::string>{"1"});
  CHECK(alts[0].prob == doctest::Approx(0.6082880533073987).epsilon(1e-12));
  CHECK(alts[0].prob / alts[1].prob == doctest::Approx(4.0));
  CHECK(sentence_tokens(alts[1023]) == std::vector<std::string>{"1024"});
  double sum = 0.0;
  for (auto it = alts.rbegin(); it != alts.rend(); ++it) sum += it->prob;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("variable definition alternatives are zeta weighted and skip clashes") {
  const ZetaTable& zeta = shared_zeta();
  SUBCASE("fresh frame offers the full table") {
    auto defs = gen_variable_definition(StaticEnv{}, zeta);
    REQUIRE(defs.size() == 1024);
    CHECK(std::get<0>(defs[0]) == "var1");
    CHECK(std::get<1>(defs[0]) == doctest::Approx(zeta.p[0]));
    CHECK(std::get<2>(defs[0]).bound_in_top("var1"));
    CHECK(std::get<2>(defs[0]).visible().empty());  // pending, not yet active
  }

  SUBCASE("names bound in the current frame are skipped, sub-normalized") {
    StaticEnv env = StaticEnv{}.declared("var1").activated();
    auto defs = gen_variable_definition(env, zeta);
    REQUIRE(defs.size() == 1023);
    CHECK(std::get<0>(defs[0]) == "var2");
    double sum = 0.0;
    for (auto it = defs.rbegin(); it != defs.rend(); ++it) sum += std::get<1>(*it);
    CHECK(sum == doctest::Approx(1.0 - zeta.p[0]).epsilon(1e-12));
  }

  SUBCASE("outer-frame names may be shadowed") {
    StaticEnv env = StaticEnv{}.declared("var1").activated().pushed();
    auto defs = gen_variable_definition(env, zeta);
    CHECK(defs.size() == 1024);
  }
}

TEST_CASE("probability horizon prunes low alternatives and reports truncation") {
  Grammar g = mini("<program> ::= 1 : <!uinteger-10>\n");
  auto ctx = ctx_for(g);
  SententialForm f = expand_leftmost(start_form("program"), ctx, 0.0)[0];
  bool truncated = false;
  auto alts = expand_leftmost(f, ctx, 0.3, &truncated);
  REQUIRE(alts.size() == 1);  // only the 0.608 entry clears 0.3
  CHECK(truncated);

  truncated = false;
  alts = expand_leftmost(f, ctx, 0.1, &truncated);
  CHECK(alts.size() == 2);  // 0.608 and 0.152
  CHECK(truncated);

  truncated = false;
  alts = expand_leftmost(f, ctx, 0.0, &truncated);
  CHECK(alts.size() == 1024);
  CHECK(!truncated);
}

TEST_CASE("scope markers and activation drive a full derivation") {
  // ( define var1 5 ) var1 — the definition activates after its initializer
  Grammar g = mini(
      "<program> ::= 1 : ( define <!variable-definition> <!uinteger-10> <!activate> ) <!variable>\n");
  auto ctx = ctx_for(g);
  SententialForm f = start_form("program");
  auto alts = expand_leftmost(f, ctx, 0.0);  // program production
  REQUIRE(alts.size() == 1);
  f = alts[0];

  alts = expand_leftmost(f, ctx, 0.0);  // variable-definition
  REQUIRE(alts.size() == 1024);
  f = alts[0];  // var1
  CHECK(f.env.visible().empty());  // pending during its own initializer

  alts = expand_leftmost(f, ctx, 0.0);  // uinteger-10
  REQUIRE(alts.size() == 1024);
  f = alts[4];  // 5
  // the closing paren's activate marker has been consumed by now
  CHECK(f.env.visible() == std::vector<std::string>{"var1"});

  alts = expand_leftmost(f, ctx, 0.0);  // variable
  REQUIRE(alts.size() == 1);
  f = alts[0];
  REQUIRE(is_sentence(f));
  auto tokens = sentence_tokens(f);
  CHECK(tokens == std::vector<std::string>{"(", "define", "var1", "5", ")", "var1"});
  CHECK(join_tokens(tokens) == "( define var1 5 ) var1");
  auto program = tokens_to_program(tokens);
  REQUIRE(program.size() == 2);
  CHECK(print(program[0]) == "(define var1 5)");

  // recorded probability equals the product over the trace
  auto steps = trace_steps(f);
  REQUIRE(steps.size() == 4);
  double prod = 1.0;
  for (const auto& s : steps) prod *= s.prob;
  CHECK(f.prob == doctest::Approx(prod).epsilon(1e-12));
  CHECK(f.prob == doctest::Approx(1.0 * shared_zeta().p[0] * shared_zeta().p[4] * 1.0));
}

TEST_CASE("scoped frames close: lambda formals stop being visible afterwards") {
  Grammar g = mini(
      "<program> ::= 1 : ( lambda ( <@begin> <!variable-definition> <!activate> ) <!variable> <@end> ) <!variable>\n");
  auto ctx = ctx_for(g);
  SententialForm f = start_form("program", {"x"});
  f = expand_leftmost(f, ctx, 0.0)[0];   // production
  f = expand_leftmost(f, ctx, 0.0)[0];   // formal: var1 (activated right away)
  auto body_refs = expand_leftmost(f, ctx, 0.0);  // body variable
  REQUIRE(body_refs.size() == 2);        // var1 first (innermost), then x
  // after <@end>, only x remains for the trailing reference
  auto tail_refs = expand_leftmost(body_refs[0], ctx, 0.0);
  REQUIRE(tail_refs.size() == 1);
  REQUIRE(is_sentence(tail_refs[0]));
  auto tokens = sentence_tokens(tail_refs[0]);
  CHECK(tokens ==
        std::vector<std::string>{"(", "lambda", "(", "var1", ")", "var1", ")", "x"});
}

TEST_CASE("token join handles string mode") {
  CHECK(join_tokens({"(", "list", "\"", "a", "b", "\"", ")"}) == "( list \"ab\" )");
  CHECK(join_tokens({"\"", "a", " ", "b", "\""}) == "\"a b\"");
  CHECK(join_tokens({"\"", "\""}) == "\"\"");
  CHECK(join_tokens({"x", "\"", "q", "\"", "y"}) == "x \"q\" y");
  // a full string token (from solution re-emission) is not a toggle
  CHECK(join_tokens({"(", "f", "\"a b\"", ")"}) == "( f \"a b\" )");
  auto prog = tokens_to_program({"(", "list", "\"", "a", " ", "b", "\"", "7", ")"});
  REQUIRE(prog.size() == 1);
  CHECK(print(prog[0]) == "(list \"a b\" 7)");
}

TEST_CASE("datum tokenizer matches the printer") {
  auto toks = tokenize_datum(read_one("(define (f x) (* x 2))"));
  CHECK(toks == std::vector<std::string>{"(", "define", "(", "f", "x", ")", "(", "*", "x", "2",
                                         ")", ")"});
  CHECK(tokenize_datum(read_one("(a . b)")) == std::vector<std::string>{"(", "a", ".", "b", ")"});
  CHECK(tokenize_datum(read_one("#(1 (2) 3)")) ==
        std::vector<std::string>{"#(", "1", "(", "2", ")", "3", ")"});
  // strings stay single tokens and survive the joiner
  auto stoks = tokenize_datum(read_one("(f \"a b\")"));
  CHECK(stoks == std::vector<std::string>{"(", "f", "\"a b\"", ")"});
  for (const char* text : {"(+ 1 2)", "(quote (a b))", "#(1 #\\a \"s s\")", "(1 . (2 . 3))"}) {
    Ref d = read_one(text);
    Ref back = read_one(join_tokens(tokenize_datum(d)));
    CHECK_MESSAGE(structurally_equal(d, back), text);
  }
}

TEST_CASE("derivation tree mirrors the trace") {
  Grammar g = mini(
      "<program> ::= 0.5 : ( <oper> 1 2 )\n"
      "<program> ::= 0.5 : 9\n"
      "<oper> ::= 0.5 : +\n"
      "<oper> ::= 0.5 : *\n");
  auto ctx = ctx_for(g);
  SententialForm f = start_form("program");
  f = expand_leftmost(f, ctx, 0.0)[0];
  f = expand_leftmost(f, ctx, 0.0)[0];
  REQUIRE(is_sentence(f));
  auto steps = trace_steps(f);
  auto tree = build_derivation_tree("program", steps);
  // every node is either expanded by a trace entry or a leaf
  std::size_t leaves = 0;
  for (const auto& n : tree.nodes)
    if (n.children.empty()) ++leaves;
  CHECK(tree.nodes.size() == steps.size() + leaves);
  // ties sort lexically on the rendered body, so <oper> offers * before +
  CHECK(tree.leaf_tokens() == std::vector<std::string>{"(", "*", "1", "2", ")"});
  CHECK(tree.nodes[static_cast<std::size_t>(tree.root)].label == "program");

  // replaying a partial trace leaves the open node as a labelled leaf
  auto partial = build_derivation_tree("program", {steps[0]});
  CHECK(partial.leaf_tokens() == std::vector<std::string>{"(", "<oper>", "1", "2", ")"});

  // a mismatched trace is rejected
  CHECK_THROWS_AS(build_derivation_tree("program", {steps[1]}), GrammarError);
}

TEST_CASE("solution corpus route emits definitions and calls") {
  ReusableSolution sqr;
  sqr.name = "sqr";
  sqr.call_body = {term("("), term("sqr"), nt("expression"), term(")")};
  sqr.definition_tokens = tokenize_datum(read_one("(define (sqr x) (* x x))"));
  std::vector<ReusableSolution> corpus{sqr};

  Grammar g = mini(
      "<expression> ::= 1 : 7\n"
      "<previous-solution> ::=\n"
      "<program> ::= 1 : <!solution-corpus> <previous-solution>\n");
  DeriveContext ctx{g, shared_zeta(), true, &corpus};

  SententialForm f = start_form("program");
  f = expand_leftmost(f, ctx, 0.0)[0];  // the program production
  auto alts = expand_leftmost(f, ctx, 0.0);
  REQUIRE(alts.size() == 1);  // one corpus entry, not yet in scope
  f = alts[0];
  CHECK(f.env.visible_solutions() == std::vector<std::string>{"sqr"});

  alts = expand_leftmost(f, ctx, 0.0);  // previous-solution call
  REQUIRE(alts.size() == 1);
  CHECK(alts[0].prob == doctest::Approx(1.0));
  f = expand_leftmost(alts[0], ctx, 0.0)[0];  // expression -> 7
  REQUIRE(is_sentence(f));
  auto program = tokens_to_program(sentence_tokens(f));
  REQUIRE(program.size() == 2);
  CHECK(print(program[1]) == "(sqr 7)");

  Machine machine;
  auto out = machine.evaluate(program, 100000);
  REQUIRE(out.ok());
  CHECK(print(out.value) == "49");
}

TEST_CASE("solution corpus entries already in scope emit nothing") {
  ReusableSolution sqr;
  sqr.name = "sqr";
  sqr.call_body = {term("("), term("sqr"), nt("expression"), term(")")};
  sqr.definition_tokens = tokenize_datum(read_one("(define (sqr x) (* x x))"));
  std::vector<ReusableSolution> corpus{sqr};

  Grammar g = mini(
      "<expression> ::= 1 : 7\n"
      "<program> ::= 1 : <!solution-corpus> <!solution-corpus> 9\n");
  DeriveContext ctx{g, shared_zeta(), true, &corpus};
  SententialForm f = start_form("program");
  f = expand_leftmost(f, ctx, 0.0)[0];   // the program production
  f = expand_leftmost(f, ctx, 0.0)[0];   // emits the definition
  auto alts = expand_leftmost(f, ctx, 0.0);
  REQUIRE(alts.size() == 1);             // nil production: already in scope
  REQUIRE(is_sentence(alts[0]));
  auto tokens = sentence_tokens(alts[0]);
  CHECK(tokens.back() == "9");
  CHECK(std::count(tokens.begin(), tokens.end(), std::string("define")) == 1);
}

TEST_CASE("without the corpus route the hooks stay inert") {
  Grammar g = mini("<program> ::= 1 : <!solution-corpus>\n");
  auto ctx = ctx_for(g);
  SententialForm f = expand_leftmost(start_form("program"), ctx, 0.0)[0];
  CHECK(expand_leftmost(f, ctx, 0.0).empty());
  CHECK(gen_previous_solution_call(StaticEnv{}, {}).empty());
}

TEST_CASE("random walks over the default grammar are well scoped") {
  Grammar g = default_grammar();
  auto ctx = ctx_for(g);
  Machine machine;
  std::mt19937 rng(20260825);
  SententialForm start = start_form("program", {"x", "y"});

  int produced = 0;
  int parsed = 0;
  int unbound = 0;
  double max_rel_err = 0.0;
  for (int i = 0; i < 2000; ++i) {
    auto walked = random_walk(ctx, start, rng);
    if (!walked) continue;  // dead end or blow-up: retry with fresh randomness
    ++produced;
    REQUIRE(is_sentence(*walked));

    auto steps = trace_steps(*walked);
    double prod = 1.0;
    for (const auto& s : steps) prod *= s.prob;
    if (prod > 0.0) max_rel_err = std::max(max_rel_err, std::abs(walked->prob - prod) / prod);

    auto tokens = sentence_tokens(*walked);
    auto program = tokens_to_program(tokens);  // throws on any parse failure
    REQUIRE(!program.empty());
    ++parsed;

    std::vector<Ref> wrapped;
    wrapped.push_back(read_one("(define x 3)"));
    wrapped.push_back(read_one("(define y 4)"));
    for (auto& form : program) wrapped.push_back(form);
    auto out = machine.evaluate(wrapped, 20000);
    if (out.status == EvalOutcome::Status::RuntimeError &&
        out.error_kind == ErrorKind::UnboundVariable) {
      ++unbound;
      MESSAGE("unbound variable in: " << join_tokens(tokens));
    }
  }
  CHECK(produced > 1500);  // the walk overwhelmingly terminates
  CHECK(parsed == produced);
  CHECK(unbound == 0);
  CHECK(max_rel_err < 1e-12);
}

TEST_CASE("random walks are deterministic under a fixed seed") {
  Grammar g = default_grammar();
  auto ctx = ctx_for(g);
  SententialForm start = start_form("program");
  std::mt19937 a(7), b(7);
  for (int i = 0; i < 50; ++i) {
    auto wa = random_walk(ctx, start, a);
    auto wb = random_walk(ctx, start, b);
    REQUIRE(wa.has_value() == wb.has_value());
    if (wa) CHECK(sentence_tokens(*wa) == sentence_tokens(*wb));
  }
}
