#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "glsearch/learn.hpp"
#include "glsearch/machine.hpp"

using namespace glsearch;

namespace {

SolutionRecord rec(std::string problem, std::vector<TraceStep> trace, bool partial = false) {
  SolutionRecord r;
  r.problem = std::move(problem);
  r.params = {"x"};
  r.definition = "(define (" + r.problem + " x) x)";
  r.trace = std::move(trace);
  r.partial = partial;
  return r;
}

TraceStep step(std::string head, std::vector<GrammarSymbol> body, double prob = 0.5) {
  TraceStep s;
  s.head = std::move(head);
  s.body = std::move(body);
  s.prob = prob;
  return s;
}

const Production* prod_with_body(const Grammar& g, const std::string& head,
                                 const std::string& rendered) {
  const GrammarHead* h = g.find(head);
  if (h == nullptr) return nullptr;
  for (const Production& p : h->prods)
    if (render_body(p.body) == rendered) return &p;
  return nullptr;
}

std::string plain(const std::vector<GrammarSymbol>& body) {
  std::string out;
  for (const auto& s : body) {
    if (s.kind == SymKind::ScopeBegin || s.kind == SymKind::ScopeEnd) continue;
    if (!out.empty()) out += ' ';
    out += render_symbol_plain(s);
  }
  return out;
}

}  // namespace

TEST_CASE("corpus filter names round-trip") {
  for (auto f : {CorpusFilter::Latest, CorpusFilter::Complete, CorpusFilter::All}) {
    auto back = corpus_filter_from_name(corpus_filter_name(f));
    REQUIRE(back.has_value());
    CHECK(*back == f);
  }
  CHECK(!corpus_filter_from_name("newest").has_value());
  CHECK(std::string(corpus_filter_name(CorpusFilter::Latest)) == "latest");
}

TEST_CASE("corpus filters pick records per problem") {
  SolutionCorpus c;
  c.records.push_back(rec("a", {}, true));   // partial, superseded
  c.records.push_back(rec("a", {}, false));  // latest and complete for a
  c.records.push_back(rec("b", {}, true));   // only a partial for b

  auto latest = c.filtered(CorpusFilter::Latest);
  REQUIRE(latest.size() == 2);
  CHECK(latest[0] == &c.records[1]);
  CHECK(latest[1] == &c.records[2]);

  auto complete = c.filtered(CorpusFilter::Complete);
  REQUIRE(complete.size() == 1);
  CHECK(complete[0] == &c.records[1]);

  auto all = c.filtered(CorpusFilter::All);
  REQUIRE(all.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(all[i] == &c.records[i]);

  CHECK(c.find_latest("a") == &c.records[1]);
  CHECK(c.find_latest("b") == &c.records[2]);
  CHECK(c.find_latest("zzz") == nullptr);

  SUBCASE("latest keeps a newer partial over an older complete") {
    c.records.push_back(rec("a", {}, true));
    CHECK(c.filtered(CorpusFilter::Latest)[1] == &c.records[3]);
    CHECK(c.filtered(CorpusFilter::Complete)[0] == &c.records[1]);
  }
}

TEST_CASE("corpus JSONL round-trips byte for byte") {
  SolutionCorpus c;
  SolutionRecord r;
  r.problem = "id";
  r.params = {"x"};
  r.definition = "(define (id x) x)";
  r.partial = false;
  r.pairs_covered = 2;
  r.trials = 7;
  r.fuel_used = 11;
  r.trace.push_back(step("expression",
                         {term("("), nt("expression"), proc_nt("variable"), scope_begin(),
                          scope_end()},
                         0.25));
  c.records.push_back(r);

  std::string text = save_corpus(c);
  CHECK(text ==
        "{\"problem\":\"id\",\"params\":[\"x\"],\"definition\":\"(define (id x) x)\","
        "\"partial\":false,\"pairs\":2,\"trials\":7,\"fuel\":11,"
        "\"trace\":[{\"head\":\"expression\",\"prob\":0.25,"
        "\"body\":[[\"t\",\"(\"],[\"n\",\"expression\"],[\"p\",\"variable\"],"
        "[\"b\",\"\"],[\"e\",\"\"]]}]}\n");

  SolutionCorpus back = load_corpus(text);
  REQUIRE(back.records.size() == 1);
  const SolutionRecord& b = back.records[0];
  CHECK(b.problem == r.problem);
  CHECK(b.params == r.params);
  CHECK(b.definition == r.definition);
  CHECK(b.partial == r.partial);
  CHECK(b.pairs_covered == r.pairs_covered);
  CHECK(b.trials == r.trials);
  CHECK(b.fuel_used == r.fuel_used);
  REQUIRE(b.trace.size() == 1);
  CHECK(b.trace[0] == r.trace[0]);
  CHECK(save_corpus(back) == text);

  SUBCASE("awkward probabilities survive the round trip exactly") {
    c.records[0].trace[0].prob = 0.1 * 0.3 * 7;  // not a short decimal
    std::string t2 = save_corpus(c);
    CHECK(load_corpus(t2).records[0].trace[0].prob == c.records[0].trace[0].prob);
    CHECK(save_corpus(load_corpus(t2)) == t2);
  }

  SUBCASE("blank lines are skipped, junk is rejected") {
    CHECK(load_corpus("\n  \n" + text + "\n").records.size() == 1);
    CHECK_THROWS_AS(load_corpus("not json\n"), GrammarError);
    CHECK_THROWS_AS(load_corpus("{\"problem\":\"x\"}\n"), GrammarError);
  }

  SUBCASE("file save and load") {
    auto path = std::filesystem::temp_directory_path() / "glsearch_corpus_test.jsonl";
    save_corpus_file(c, path.string());
    SolutionCorpus fromfile = load_corpus_file(path.string());
    CHECK(save_corpus(fromfile) == save_corpus(c));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_corpus_file((path / "nope").string()), GrammarError);
  }
}

TEST_CASE("probability update moves a used production to 0.6 at alpha 0.2") {
  Grammar g = load_grammar("<s> ::= 0.5 : a\n<s> ::= 0.5 : b\n<t> ::= 1.0 : c\n");
  g.set_start("s");
  SolutionCorpus c;
  c.records.push_back(rec("p1", {step("s", {term("a")})}));

  Grammar u = update_probabilities(g, c, 0.2, CorpusFilter::Latest);
  const Production* pa = prod_with_body(u, "s", "a");
  const Production* pb = prod_with_body(u, "s", "b");
  REQUIRE(pa != nullptr);
  REQUIRE(pb != nullptr);
  CHECK(pa->prob == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(pb->prob == doctest::Approx(0.4).epsilon(1e-12));
  // canonical order: the boosted production comes first
  CHECK(u.find("s")->prods[0].body == std::vector<GrammarSymbol>{term("a")});
  // untouched head is bit-identical
  CHECK(u.find("t")->prods == g.find("t")->prods);

  SUBCASE("alpha 0 keeps the grammar, alpha 1 jumps to the usage share") {
    Grammar same = update_probabilities(g, c, 0.0, CorpusFilter::Latest);
    CHECK(prod_with_body(same, "s", "a")->prob == 0.5);
    Grammar jump = update_probabilities(g, c, 1.0, CorpusFilter::Latest);
    CHECK(prod_with_body(jump, "s", "a")->prob == doctest::Approx(1.0));
    // floored rather than zeroed, so the production stays derivable
    CHECK(prod_with_body(jump, "s", "b")->prob > 0.0);
    CHECK(prod_with_body(jump, "s", "b")->prob < 1e-11);
    CHECK_THROWS_AS(update_probabilities(g, c, 1.5, CorpusFilter::Latest), GrammarError);
  }
}

TEST_CASE("probability update ignores stale bodies and unknown heads") {
  Grammar g = load_grammar("<s> ::= 0.5 : a\n<s> ::= 0.5 : b\n");
  g.set_start("s");
  Grammar gp = g;
  gp.add_production("previous-solution", {{term("("), term("old"), term(")")}, 1.0});
  gp.canonicalize();

  SolutionCorpus c;
  c.records.push_back(rec("p1", {
                                    step("s", {term("z")}),  // no longer in the grammar
                                    step("previous-solution", {term("("), term("old"), term(")")}),
                                    step("solution-corpus", {}),
                                    step("ghost", {term("a")}),  // head not in the grammar
                                }));
  Grammar u = update_probabilities(gp, c, 0.2, CorpusFilter::Latest);
  CHECK(u == gp);  // sole-production head and unknown heads leave nothing to move

  SUBCASE("a stale body does not steal share from live ones") {
    c.records[0].trace.push_back(step("s", {term("a")}));
    Grammar v = update_probabilities(gp, c, 0.2, CorpusFilter::Latest);
    CHECK(prod_with_body(v, "s", "a")->prob == doctest::Approx(0.6).epsilon(1e-12));
  }

  SUBCASE("an observed call template gains share like any other production") {
    Grammar g2 = gp;
    g2.add_production("previous-solution", {{term("("), term("fresh"), term(")")}, 1.0});
    GrammarHead* h = g2.find("previous-solution");
    for (Production& p : h->prods) p.prob = 0.5;
    g2.canonicalize();
    Grammar v = update_probabilities(g2, c, 0.2, CorpusFilter::Latest);
    CHECK(prod_with_body(v, "previous-solution", "( old )")->prob ==
          doctest::Approx(0.6).epsilon(1e-12));
    CHECK(prod_with_body(v, "previous-solution", "( fresh )")->prob ==
          doctest::Approx(0.4).epsilon(1e-12));
  }
}

TEST_CASE("probability update honors the corpus filter") {
  Grammar g = load_grammar("<s> ::= 0.5 : a\n<s> ::= 0.5 : b\n");
  g.set_start("s");
  SolutionCorpus c;
  c.records.push_back(rec("p1", {step("s", {term("a")})}));
  c.records.push_back(rec("p1", {step("s", {term("b")})}));  // newer run of the same problem

  Grammar latest = update_probabilities(g, c, 0.2, CorpusFilter::Latest);
  CHECK(prod_with_body(latest, "s", "b")->prob == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(prod_with_body(latest, "s", "a")->prob == doctest::Approx(0.4).epsilon(1e-12));

  Grammar all = update_probabilities(g, c, 0.2, CorpusFilter::All);
  CHECK(prod_with_body(all, "s", "a")->prob == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(prod_with_body(all, "s", "b")->prob == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gamma insertion splits mass half and half") {
  Grammar g = load_grammar("<s> ::= 0.5 : a\n<s> ::= 0.5 : b\n");
  g.set_start("s");
  Grammar u = gamma_insert(g, "s", {term("c")}, 0.5);
  REQUIRE(u.find("s")->prods.size() == 3);
  CHECK(prod_with_body(u, "s", "c")->prob == 0.5);
  CHECK(prod_with_body(u, "s", "a")->prob == 0.25);
  CHECK(prod_with_body(u, "s", "b")->prob == 0.25);
  // canonical: highest probability first
  CHECK(u.find("s")->prods[0].body == std::vector<GrammarSymbol>{term("c")});

  SUBCASE("empty head takes the body at probability one") {
    Grammar e = gamma_insert(g, "fresh", {term("z")}, 0.5);
    REQUIRE(e.find("fresh") != nullptr);
    REQUIRE(e.find("fresh")->prods.size() == 1);
    CHECK(e.find("fresh")->prods[0].prob == 1.0);
  }
  SUBCASE("gamma outside (0,1) is rejected") {
    CHECK_THROWS_AS(gamma_insert(g, "s", {term("d")}, 0.0), GrammarError);
    CHECK_THROWS_AS(gamma_insert(g, "s", {term("d")}, 1.0), GrammarError);
  }
  SUBCASE("a body with an undefined non-terminal is rejected") {
    CHECK_THROWS_AS(gamma_insert(g, "s", {nt("nowhere")}, 0.5), GrammarError);
  }
}

TEST_CASE("solution insertion builds the call template under previous-solution") {
  auto body = solution_call_body("sqr", 2);
  CHECK(render_body(body) == "( sqr <expression> <expression> )");

  Grammar g = default_grammar();
  CHECK(!has_solution_production(g, "sqr"));
  Grammar one = add_solution(g, "sqr", 1, 0.5);
  CHECK(has_solution_production(one, "sqr"));
  REQUIRE(one.find("previous-solution") != nullptr);
  REQUIRE(one.find("previous-solution")->prods.size() == 1);
  CHECK(one.find("previous-solution")->prods[0].prob == 1.0);  // first solution
  CHECK(render_body(one.find("previous-solution")->prods[0].body) == "( sqr <expression> )");
  CHECK(validate(one).empty());

  Grammar two = add_solution(one, "add", 2, 0.5);
  CHECK(prod_with_body(two, "previous-solution", "( add <expression> <expression> )")->prob == 0.5);
  CHECK(prod_with_body(two, "previous-solution", "( sqr <expression> )")->prob == 0.5);

  Grammar three = add_solution(two, "is0", 1, 0.5);
  CHECK(prod_with_body(three, "previous-solution", "( is0 <expression> )")->prob == 0.5);
  CHECK(prod_with_body(three, "previous-solution", "( sqr <expression> )")->prob == 0.25);

  CHECK_THROWS_AS(add_solution(three, "sqr", 1, 0.5), GrammarError);
  CHECK_THROWS_WITH(add_solution(three, "sqr", 1, 0.5),
                    doctest::Contains("already in the grammar"));
}

TEST_CASE("idiom insertion leaves thirds at one sixth") {
  Grammar g = load_grammar(
      "<e> ::= 0.33333333333333331 : a\n"
      "<e> ::= 0.33333333333333331 : b\n"
      "<e> ::= 0.33333333333333331 : c\n");
  g.set_start("e");
  std::vector<GrammarSymbol> idiom{term("("), term("+"), nt("e"), term(")")};
  Grammar u = add_idiom(g, "e", idiom, 0.5);
  REQUIRE(u.find("e")->prods.size() == 4);
  CHECK(prod_with_body(u, "e", "( + <e> )")->prob == 0.5);
  CHECK(prod_with_body(u, "e", "a")->prob == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(prod_with_body(u, "e", "b")->prob == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(validate(u).empty());

  SUBCASE("re-inserting the same rendered body is a no-op") {
    Grammar v = add_idiom(u, "e", idiom, 0.5);
    CHECK(v == u);
  }
  SUBCASE("unknown symbols are rejected") {
    CHECK_THROWS_AS(add_idiom(g, "e", {term("x"), nt("ghost")}, 0.5), GrammarError);
    CHECK_THROWS_AS(add_idiom(g, "e", {term("x"), proc_nt("ghost")}, 0.5), GrammarError);
    CHECK_THROWS_AS(add_idiom(g, "e", {}, 0.5), GrammarError);
  }
}

namespace {

// Leftmost derivation of ( if ( = n 0 ) 1 ( + 1 ( f n 1 ) ) ) with the
// operators inline and variables/integers as procedural expansions.
std::vector<TraceStep> recursive_body_trace() {
  auto V = proc_nt("variable");
  auto U = proc_nt("uinteger-10");
  auto E = nt("expression");
  return {
      step("expression", {term("("), term("if"), E, E, E, term(")")}),
      step("expression", {term("("), term("="), V, U, term(")")}),
      step("variable", {term("n")}),
      step("uinteger-10", {term("0")}),
      step("expression", {U}),
      step("uinteger-10", {term("1")}),
      step("expression", {term("("), term("+"), E, E, term(")")}),
      step("expression", {U}),
      step("uinteger-10", {term("1")}),
      step("expression", {term("("), V, V, U, term(")")}),
      step("variable", {term("f")}),
      step("variable", {term("n")}),
      step("uinteger-10", {term("1")}),
  };
}

}  // namespace

TEST_CASE("level-1 pruning collapses variables and integers but keeps structure") {
  DerivationTree tree = build_derivation_tree("expression", recursive_body_trace());
  CHECK(join_tokens(tree.leaf_tokens()) == "( if ( = n 0 ) 1 ( + 1 ( f n 1 ) ) )");

  auto idioms = extract_idioms(tree, 1);
  REQUIRE(idioms.size() == 1);  // the root is itself the topmost expression
  CHECK(idioms[0].first == "expression");
  CHECK(plain(idioms[0].second) ==
        "( if ( = <variable> <uinteger-10> ) <uinteger-10> "
        "( + <uinteger-10> ( <variable> <variable> <uinteger-10> ) ) )");

  SUBCASE("the pruned body drops straight into the shipped grammar") {
    Grammar g = add_idiom(default_grammar(), idioms[0].first, idioms[0].second, 0.5);
    CHECK(validate(g).empty());
    CHECK(prod_with_body(g, "expression",
                         "( if ( = <!variable> <!uinteger-10> ) <!uinteger-10> "
                         "( + <!uinteger-10> ( <!variable> <!variable> <!uinteger-10> ) ) )")
              ->prob == 0.5);
  }

  SUBCASE("level 2 collapses the sub-expressions too") {
    auto wide = extract_idioms(tree, 2);
    REQUIRE(wide.size() == 1);
    CHECK(plain(wide[0].second) ==
          "( if <expression> <expression> ( + <expression> <expression> ) )");
  }

  SUBCASE("a level at tree height leaves nothing to extract") {
    CHECK(extract_idioms(tree, 10).empty());
  }

  SUBCASE("under a program root the topmost expression is extracted as well") {
    std::vector<TraceStep> steps = recursive_body_trace();
    steps.insert(steps.begin(), step("program", {nt("expression")}));
    DerivationTree t2 = build_derivation_tree("program", steps);
    auto both = extract_idioms(t2, 1);
    REQUIRE(both.size() == 2);
    CHECK(both[0].first == "program");
    CHECK(both[1].first == "expression");
    CHECK(plain(both[0].second) == plain(idioms[0].second));
    CHECK(both[1].second == idioms[0].second);
  }
}

TEST_CASE("degenerate frontiers are dropped") {
  // all-terminal: a fully concrete tree has no non-terminal at any level
  std::vector<TraceStep> concrete{
      step("expression", {term("("), term("+"), nt("expression"), term(")")}),
      step("expression", {term("1")}),
  };
  DerivationTree t = build_derivation_tree("expression", concrete);
  // level 0 keeps every expanded node: frontier is all terminals
  CHECK(extract_idioms(t, 0).empty());

  // all-non-terminal: a bare chain collapses to a single symbol
  std::vector<TraceStep> chain{step("expression", {nt("literal")})};
  DerivationTree t2 = build_derivation_tree("expression", chain);
  CHECK(extract_idioms(t2, 0).empty());
}

TEST_CASE("scope markers survive extraction") {
  std::vector<TraceStep> steps{
      step("expression", {term("("), term("lambda"), scope_begin(), term("("), nt("formals"),
                          term(")"), nt("expression"), scope_end(), term(")")}),
      step("formals", {term("x")}),
      step("expression", {nt("literal")}),
  };
  DerivationTree t = build_derivation_tree("expression", steps);
  auto idioms = extract_idioms(t, 1);
  REQUIRE(idioms.size() == 1);
  // rendered body keeps the markers in file notation
  CHECK(render_body(idioms[0].second) ==
        "( lambda <@begin> ( <formals> ) <expression> <@end> )");
}

TEST_CASE("mining counts document frequency over shared sub-expressions") {
  auto mk = [](std::string name, std::string def) {
    SolutionRecord r;
    r.problem = std::move(name);
    r.definition = std::move(def);
    return r;
  };
  std::vector<SolutionRecord> owned;
  auto view = [&owned]() {
    std::vector<const SolutionRecord*> v;
    for (const auto& r : owned) v.push_back(&r);
    return v;
  };

  SUBCASE("a squared term shared by two solutions") {
    owned = {mk("sqr", "(define (sqr x) (* x x))"),
             mk("quad", "(define (quad x) (* (* x x) (* x x)))")};
    auto mined = mine_subprograms(view(), 2);
    REQUIRE(mined.size() == 1);
    CHECK(mined[0].text == "(* x x)");
    CHECK(mined[0].count == 2);
    CHECK(mined[0].atoms == 3);
  }

  SUBCASE("non-maximal subtrees with the same count are dropped") {
    owned = {mk("f", "(define (f x) (+ (* x x) 1))"),
             mk("g", "(define (g x) (* 2 (+ (* x x) 1)))")};
    auto mined = mine_subprograms(view(), 2);
    REQUIRE(mined.size() == 1);
    CHECK(mined[0].text == "(+ (* x x) 1)");
    CHECK(mined[0].count == 2);
    CHECK(mined[0].atoms == 5);
  }

  SUBCASE("a strictly more frequent subtree is kept alongside its container") {
    owned = {mk("f", "(define (f x) (+ (* x x) 1))"),
             mk("g", "(define (g x) (* 2 (+ (* x x) 1)))"),
             mk("h", "(define (h x) (* x x))")};
    auto mined = mine_subprograms(view(), 2);
    REQUIRE(mined.size() == 2);
    CHECK(mined[0].text == "(* x x)");
    CHECK(mined[0].count == 3);
    CHECK(mined[1].text == "(+ (* x x) 1)");
    CHECK(mined[1].count == 2);
  }

  SUBCASE("quote payloads are data, not candidates") {
    owned = {mk("f", "(define (f x) (car (quote (1 2 3))))"),
             mk("g", "(define (g x) (cdr (car (quote (1 2 3)))))")};
    auto mined = mine_subprograms(view(), 2);
    REQUIRE(mined.size() == 1);
    CHECK(mined[0].text == "(car (quote (1 2 3)))");
    for (const auto& m : mined) CHECK(m.text != "(1 2 3)");
  }

  SUBCASE("formal parameter lists are not candidates") {
    owned = {mk("f", "(define (f x y z) (+ x y z))"),
             mk("g", "(define (g a) (lambda (x y z) (+ x y z)))")};
    auto mined = mine_subprograms(view(), 2);
    REQUIRE(mined.size() == 1);
    CHECK(mined[0].text == "(+ x y z)");
  }

  SUBCASE("do binders hide names but expose inits and steps") {
    std::string body = "(do ((i 1 (+ i 1)) (acc 1 (* acc i))) ((= i n) acc))";
    owned = {mk("f", "(define (f n) " + body + ")"), mk("g", "(define (g n) " + body + ")")};
    auto mined = mine_subprograms(view(), 2);
    REQUIRE(mined.size() == 1);  // the whole loop shadows its equally-frequent parts
    CHECK(mined[0].text == body);
    CHECK(mined[0].count == 2);
  }

  SUBCASE("repeats within one solution count once") {
    owned = {mk("f", "(define (f x) (+ (* x x) (* x x)))")};
    auto mined = mine_subprograms(view(), 1);
    // (* x x) appears twice but in one document; its count of 1 matches the
    // containing body, so only the maximal expression survives
    REQUIRE(mined.size() == 1);
    CHECK(mined[0].text == "(+ (* x x) (* x x))");
    CHECK(mined[0].count == 1);
  }

  SUBCASE("support above the corpus size yields nothing") {
    owned = {mk("f", "(define (f x) (* x x))")};
    CHECK(mine_subprograms(view(), 2).empty());
    CHECK(mine_subprograms({}, 1).empty());
  }

  SUBCASE("small fragments below three atoms are ignored") {
    owned = {mk("f", "(define (f x) (abs x))"), mk("g", "(define (g x) (abs x))")};
    CHECK(mine_subprograms(view(), 2).empty());
  }
}

TEST_CASE("closed expressions introduce every variable they use") {
  auto g = global_names();
  auto closed = [&](const std::string& text) {
    return expression_is_closed(read_one(text), g);
  };
  CHECK(!closed("(* x x)"));
  CHECK(closed("(lambda (x) (* x x))"));
  CHECK(closed("(define (sqr x) (* x x))"));
  CHECK(!closed("(define (f x) (* x y))"));
  CHECK(closed("(lambda (x) (set! x (+ x 1)))"));
  CHECK(!closed("(lambda (x) (set! y x))"));
  CHECK(closed("(letrec ((f (lambda (n) (f n)))) (f 1))"));
  CHECK(!closed("(letrec ((f (lambda (n) (g n)))) (f 1))"));
  CHECK(closed("(do ((i 0 (+ i 1))) ((= i 10) i))"));
  CHECK(!closed("(do ((i i)) ((= i 1) 0))"));  // init sees the outer scope only
  CHECK(closed("(quote (a b c))"));
  CHECK(closed("(if (< 1 2) 1 2)"));
  CHECK(closed("(cond ((= 1 2) 1) (else 2))"));
  CHECK(!closed("(cond ((= 1 2) x) (else 2))"));
  CHECK(closed("(lambda args (car args))"));  // rest parameter binds
  CHECK(closed("(lambda (n) (define (f k) (if (= k 0) 1 (f (- k 1)))) (f n))"));
  CHECK(closed("(lambda (n) (f n) (define (f k) k))"));  // body-wide definition scope
  CHECK(!closed("(let ((x 1)) x)"));  // unhandled form stays open
  CHECK(closed("42"));
  CHECK(closed("\"hello\""));

  SUBCASE("solution names extend the globals") {
    CHECK(!closed("(sqr 5)"));
    auto g2 = g;
    g2.insert("sqr");
    CHECK(expression_is_closed(read_one("(sqr 5)"), g2));
  }
}

TEST_CASE("reusable view re-tokenizes stored definitions") {
  SolutionCorpus c;
  SolutionRecord r;
  r.problem = "sqr";
  r.params = {"x"};
  r.definition = "(define (sqr x) (* x x))";
  c.records.push_back(r);

  auto view = reusable_view(c, CorpusFilter::Latest);
  REQUIRE(view.size() == 1);
  CHECK(view[0].name == "sqr");
  CHECK(view[0].call_body == solution_call_body("sqr", 1));
  CHECK(view[0].definition_tokens ==
        std::vector<std::string>{"(", "define", "(", "sqr", "x", ")", "(", "*", "x", "x", ")",
                                 ")"});
}
