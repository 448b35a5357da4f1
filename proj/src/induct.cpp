#include "glsearch/induct.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace glsearch {

using json = nlohmann::ordered_json;

namespace {

std::string sym_text(const Ref& r) { return Symbols::name(sym_id(r)); }

[[noreturn]] void bad_problem(const std::string& msg) {
  throw InductError("problem form: " + msg);
}

}  // namespace

Problem parse_problem(const Ref& form) {
  auto items = list_to_vector(form);
  if (!items || items->empty() || !is_symbol((*items)[0]) || sym_text((*items)[0]) != "problem")
    bad_problem("expected (problem ...)");
  Problem p;
  bool saw_pairs = false;
  for (std::size_t i = 1; i < items->size(); ++i) {
    auto clause = list_to_vector((*items)[i]);
    if (!clause || clause->empty() || !is_symbol((*clause)[0]))
      bad_problem("clauses must be (key ...) lists");
    std::string key = sym_text((*clause)[0]);
    if (key == "name") {
      if (clause->size() != 2 || !is_symbol((*clause)[1])) bad_problem("(name symbol)");
      p.name = sym_text((*clause)[1]);
    } else if (key == "params") {
      if (clause->size() != 2) bad_problem("(params (symbols...))");
      auto names = list_to_vector((*clause)[1]);
      if (!names) bad_problem("(params (symbols...))");
      for (const Ref& n : *names) {
        if (!is_symbol(n)) bad_problem("parameter names must be symbols");
        p.params.push_back(sym_text(n));
      }
    } else if (key == "pairs") {
      saw_pairs = true;
      for (std::size_t j = 1; j < clause->size(); ++j) {
        auto pieces = list_to_vector((*clause)[j]);
        if (!pieces || pieces->size() != 2) bad_problem("pairs are ((inputs...) output)");
        auto ins = list_to_vector((*pieces)[0]);
        if (!ins) bad_problem("pair inputs must be a list");
        IoPair pair;
        for (const Ref& in : *ins) {
          if (!is_datum(in)) bad_problem("pair inputs must be datums");
          pair.inputs.push_back(in);
        }
        if (!is_datum((*pieces)[1])) bad_problem("pair output must be a datum");
        pair.output = (*pieces)[1];
        p.pairs.push_back(std::move(pair));
      }
    } else if (key == "max-trials") {
      if (clause->size() != 2 || !is_integer((*clause)[1])) bad_problem("(max-trials integer)");
      const mpz_class& z = std::get<mpz_class>((*clause)[1]->v);
      if (!z.fits_slong_p() || z.get_si() <= 0) bad_problem("max-trials must be a positive long");
      p.max_trials = z.get_si();
    } else {
      bad_problem("unknown clause '" + key + "'");
    }
  }
  if (p.name.empty()) bad_problem("missing (name ...)");
  if (!saw_pairs || p.pairs.empty()) bad_problem("'" + p.name + "' needs at least one pair");
  for (const IoPair& pair : p.pairs) {
    if (pair.inputs.size() != p.params.size())
      bad_problem("'" + p.name + "': pair arity " + std::to_string(pair.inputs.size()) +
                  " does not match " + std::to_string(p.params.size()) + " parameters");
    for (const Ref& in : pair.inputs) deep_freeze(in);
    deep_freeze(pair.output);
  }
  return p;
}

std::vector<Problem> parse_problems(const std::string& text) {
  std::vector<Problem> out;
  std::set<std::string> names;
  for (const Ref& form : read(text)) {
    Problem p = parse_problem(form);
    if (!names.insert(p.name).second)
      throw InductError("duplicate problem name '" + p.name + "'");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Problem> load_problems_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InductError("cannot read sequence file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_problems(buf.str());
  } catch (const SyntaxError& e) {
    throw InductError(path + ":" + std::to_string(e.line) + ": " + e.what());
  }
}

namespace {

// Symbols, lists and vectors would evaluate; everything the pairs carry
// must arrive at the test program as literal data.
Ref quote_datum(const Ref& r) {
  if (is_symbol(r) || is_pair(r) || is_nil(r) || is_vector(r))
    return list({symbol("quote"), r});
  return r;
}

Ref make_call(const Problem& p, const IoPair& pair) {
  std::vector<Ref> call{symbol(p.name)};
  for (const Ref& in : pair.inputs) call.push_back(quote_datum(in));
  return list_from(call);
}

Ref make_check(const Problem& p, const IoPair& pair) {
  Ref call = make_call(p, pair);
  if (is_real(pair.output)) {
    double out = std::get<double>(pair.output->v);
    double tol = 1e-9 * std::max(std::fabs(out), 1.0);
    return list({symbol("<"), list({symbol("abs"), list({symbol("-"), call, pair.output})}),
                 real(tol)});
  }
  return list({symbol("equal?"), call, quote_datum(pair.output)});
}

Ref make_signature(const Problem& p) {
  std::vector<Ref> sig{symbol(p.name)};
  for (const std::string& prm : p.params) sig.push_back(symbol(prm));
  return list_from(sig);
}

Ref make_definition(const Problem& p, const std::vector<Ref>& body) {
  std::vector<Ref> def{symbol("define"), make_signature(p)};
  def.insert(def.end(), body.begin(), body.end());
  return list_from(def);
}

std::vector<Ref> definition_body(const Ref& define_form) {
  auto items = list_to_vector(define_form);
  if (!items || items->size() < 3) throw InductError("malformed stored definition");
  return std::vector<Ref>(items->begin() + 2, items->end());
}

}  // namespace

TrialOracle make_test_oracle(const Problem& p, int prefix_len) {
  if (prefix_len < 1 || prefix_len > int(p.pairs.size()))
    throw InductError("prefix length " + std::to_string(prefix_len) + " out of range for '" +
                      p.name + "'");
  Ref signature = make_signature(p);
  std::vector<Ref> checks;
  for (int i = 0; i < prefix_len; ++i) checks.push_back(make_check(p, p.pairs[i]));
  Ref test;
  if (checks.size() == 1) {
    test = checks[0];
  } else {
    std::vector<Ref> conj{symbol("and")};
    conj.insert(conj.end(), checks.begin(), checks.end());
    test = list_from(conj);
  }
  deep_freeze(signature);
  deep_freeze(test);

  Ref define_sym = symbol("define");
  TrialOracle oracle;
  oracle.wrap = [define_sym, signature, test](const std::vector<Ref>& candidate) {
    std::vector<Ref> def{define_sym, signature};
    def.insert(def.end(), candidate.begin(), candidate.end());
    return std::vector<Ref>{list_from(def), test};
  };
  return oracle;
}

namespace {

struct Carried {
  std::vector<Ref> body;
  std::vector<TraceStep> trace;
  std::string text;
};

double ms_since(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - from)
      .count();
}

void apply_updates(const Problem& p, InductState& state, const InductConfig& cfg,
                   const SolutionRecord& record, const Ref& define_form,
                   const GrammarHook& on_update) {
  const UpdateConfig& u = cfg.updates;
  state.grammar = update_probabilities(state.grammar, state.corpus, u.alpha, u.filter);
  if (on_update) on_update(state.grammar);

  // Only complete solutions become callable: a candidate body can never call
  // the partial mid-problem anyway (its own define shadows the name), so a
  // partial's call template would just dilute the useful routes.
  if (u.reuse && !record.partial) {
    state.machine.install_solution(Symbols::intern(p.name), define_form);
    if (!has_solution_production(state.grammar, p.name)) {
      state.grammar = add_solution(state.grammar, p.name, int(p.params.size()), u.gamma);
      if (on_update) on_update(state.grammar);
    }
  }

  if (u.idioms && !record.partial && !record.trace.empty()) {
    DerivationTree tree = build_derivation_tree("body", record.trace);
    for (auto& [head, body] : extract_idioms(tree, u.prune_level)) {
      Grammar next = add_idiom(state.grammar, head, std::move(body), u.gamma);
      if (next == state.grammar) continue;
      state.grammar = std::move(next);
      if (on_update) on_update(state.grammar);
    }
  }

  if (u.mining) {
    auto globals = global_names();
    for (SymbolId id : state.machine.installed_solutions()) globals.insert(Symbols::name(id));
    for (const MinedSubprogram& m :
         mine_subprograms(state.corpus.filtered(u.filter), u.support)) {
      if (!expression_is_closed(m.expr, globals)) continue;
      std::vector<GrammarSymbol> body;
      for (const std::string& tok : tokenize_datum(m.expr)) body.push_back(term(tok));
      Grammar next = add_idiom(state.grammar, "expression", std::move(body), u.gamma);
      if (next == state.grammar) continue;
      state.grammar = std::move(next);
      if (on_update) on_update(state.grammar);
    }
  }
}

}  // namespace

ProblemReport run_problem(const Problem& p, InductState& state, const InductConfig& cfg,
                          const GrammarHook& on_update) {
  if (p.pairs.empty()) throw InductError("problem '" + p.name + "' has no pairs");
  auto problem_t0 = std::chrono::steady_clock::now();
  ProblemReport report;
  report.name = p.name;
  report.pairs_total = int(p.pairs.size());
  long long budget = p.max_trials > 0 ? p.max_trials : cfg.prefix_budget;

  std::optional<Carried> carry;
  if (cfg.seed) {
    if (const SolutionRecord* rec = state.corpus.find_latest(p.name)) {
      try {
        Ref def = read_one(rec->definition);
        std::vector<Ref> body = definition_body(def);
        std::string text;
        for (const Ref& f : body) {
          if (!text.empty()) text += ' ';
          text += print(f);
        }
        carry = Carried{std::move(body), rec->trace, std::move(text)};
      } catch (const std::exception&) {
        // unusable stored definition: search from scratch
      }
    }
  }

  for (int k = 1; k <= int(p.pairs.size()); ++k) {
    auto prefix_t0 = std::chrono::steady_clock::now();
    PrefixReport pr;
    pr.pairs = k;
    TrialOracle oracle = make_test_oracle(p, k);
    std::optional<Carried> found;

    if (cfg.seed && carry) {
      EvalOutcome out = state.machine.evaluate(oracle.wrap(carry->body), cfg.search.t0);
      pr.trials += 1;
      pr.fuel_used += out.steps_used;
      if (out.ok() && is_boolean(out.value) && std::get<bool>(out.value->v)) {
        pr.solved = true;
        pr.seeded = true;
        pr.solution = carry->text;
        found = carry;
      }
    }

    long long remaining = budget - pr.trials;
    if (!pr.solved && remaining > 0) {
      std::vector<ReusableSolution> reusables;
      DeriveContext ctx{state.grammar, shared_zeta()};
      if (cfg.updates.corpus_route) {
        reusables = reusable_view(state.corpus, cfg.updates.filter);
        ctx.corpus_route = true;
        ctx.corpus = &reusables;
      }
      SearchConfig scfg = cfg.search;
      scfg.max_trials = remaining;
      SearchResult res =
          lsearch(ctx, start_form("body", p.params), state.machine, oracle, scfg);
      pr.trials += res.stats.executed;
      pr.generated = res.stats.generated;
      pr.skipped = res.stats.skipped;
      pr.fuel_used += res.stats.fuel_used;
      pr.epochs = res.stats.epochs;
      pr.exhausted = res.stats.exhausted;
      pr.error_counts = res.stats.error_counts;
      pr.wrong_value = res.stats.wrong_value;
      pr.fuel_exhausted = res.stats.fuel_exhausted;
      pr.error_rate_at_1000 = res.stats.error_rate_at_1000;
      pr.errors_at_1000 = res.stats.errors_at_1000;
      if (res.solved) {
        pr.solved = true;
        pr.solution = res.program_text;
        found = Carried{tokens_to_program(res.tokens), res.trace, res.program_text};
      }
    }

    pr.wall_ms = ms_since(prefix_t0);
    report.trials += pr.trials;
    report.fuel_used += pr.fuel_used;
    if (report.error_rate_at_1000 < 0.0 && pr.error_rate_at_1000 >= 0.0)
      report.error_rate_at_1000 = pr.error_rate_at_1000;
    report.prefixes.push_back(pr);
    if (!pr.solved) break;

    Ref define_form = make_definition(p, found->body);
    deep_freeze(define_form);
    SolutionRecord record;
    record.problem = p.name;
    record.params = p.params;
    record.definition = print(define_form);
    record.trace = found->trace;
    record.partial = k < int(p.pairs.size());
    record.pairs_covered = k;
    record.trials = pr.trials;
    record.fuel_used = pr.fuel_used;
    state.corpus.records.push_back(std::move(record));
    report.pairs_covered = k;
    report.definition = state.corpus.records.back().definition;
    apply_updates(p, state, cfg, state.corpus.records.back(), define_form, on_update);
    carry = std::move(found);
  }

  report.solved = report.pairs_covered == int(p.pairs.size());
  report.wall_ms = ms_since(problem_t0);
  return report;
}

SequenceReport run_sequence(const std::vector<Problem>& seq, InductState& state,
                            const InductConfig& cfg, const ProblemHook& after_problem,
                            const GrammarHook& on_update) {
  SequenceReport report;
  for (const Problem& p : seq) {
    report.problems.push_back(run_problem(p, state, cfg, on_update));
    if (after_problem) after_problem(state, report.problems.back());
  }
  return report;
}

std::string toy_sequence_text(bool include_factorial) {
  std::string text =
      "(problem (name id) (params (x)) (pairs ((1) 1) ((2) 2) ((3) 3)))\n"
      "(problem (name sqr) (params (x)) (pairs ((1) 1) ((2) 4) ((3) 9)))\n"
      "(problem (name add) (params (x y)) (pairs ((1 2) 3) ((3 4) 7) ((5 9) 14)))\n"
      "(problem (name is0) (params (x)) (pairs ((0) #t) ((1) #f) ((2) #f)))\n"
      "(problem (name pow4) (params (x)) (pairs ((2) 16) ((3) 81)))\n"
      "(problem (name nand) (params (x y))\n"
      "  (pairs ((#t #t) #f) ((#t #f) #t) ((#f #t) #t) ((#f #f) #t)))\n"
      "(problem (name nor) (params (x y))\n"
      "  (pairs ((#t #t) #f) ((#t #f) #f) ((#f #t) #f) ((#f #f) #t)))\n"
      "(problem (name xor) (params (x y))\n"
      "  (pairs ((#t #t) #f) ((#t #f) #t) ((#f #t) #t) ((#f #f) #f)))\n";
  if (include_factorial)
    text +=
        "(problem (name factorial) (params (n))\n"
        "  (pairs ((1) 1) ((2) 2) ((3) 6) ((4) 24) ((5) 120)))\n";
  return text;
}

std::vector<Problem> toy_sequence(bool include_factorial) {
  return parse_problems(toy_sequence_text(include_factorial));
}

namespace {

std::string rate_str(double r) {
  if (r < 0.0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", r);
  return buf;
}

}  // namespace

std::string report_text(const SequenceReport& r) {
  std::ostringstream out;
  long long trials = 0;
  int solved = 0;
  for (const ProblemReport& p : r.problems) {
    trials += p.trials;
    solved += p.solved ? 1 : 0;
    out << "problem " << p.name << ": " << (p.solved ? "solved" : "unsolved") << " pairs="
        << p.pairs_covered << "/" << p.pairs_total << " trials=" << p.trials
        << " fuel=" << p.fuel_used << " rate1000=" << rate_str(p.error_rate_at_1000) << "\n";
    for (const PrefixReport& x : p.prefixes) {
      long long errs = 0;
      for (long long c : x.error_counts) errs += c;
      out << "  prefix " << x.pairs << ": " << (x.solved ? "solved" : "unsolved")
          << (x.seeded ? " (seeded)" : "") << " trials=" << x.trials << " epochs=" << x.epochs
          << " errors=" << errs << " wrong=" << x.wrong_value << " starved=" << x.fuel_exhausted
          << (x.exhausted ? " exhausted" : "") << "\n";
      if (x.solved) out << "    solution: " << x.solution << "\n";
    }
    if (!p.definition.empty()) out << "  definition: " << p.definition << "\n";
  }
  out << "summary: solved=" << solved << "/" << r.problems.size() << " trials=" << trials
      << "\n";
  return out.str();
}

std::string report_json(const SequenceReport& r) {
  json doc;
  json problems = json::array();
  long long trials = 0;
  int solved = 0;
  for (const ProblemReport& p : r.problems) {
    trials += p.trials;
    solved += p.solved ? 1 : 0;
    json jp;
    jp["name"] = p.name;
    jp["solved"] = p.solved;
    jp["pairs_covered"] = p.pairs_covered;
    jp["pairs_total"] = p.pairs_total;
    jp["definition"] = p.definition;
    jp["trials"] = p.trials;
    jp["fuel"] = p.fuel_used;
    jp["wall_ms"] = p.wall_ms;
    jp["error_rate_at_1000"] = p.error_rate_at_1000;
    json prefixes = json::array();
    for (const PrefixReport& x : p.prefixes) {
      json jx;
      jx["pairs"] = x.pairs;
      jx["solved"] = x.solved;
      jx["seeded"] = x.seeded;
      jx["trials"] = x.trials;
      jx["generated"] = x.generated;
      jx["skipped"] = x.skipped;
      jx["fuel"] = x.fuel_used;
      jx["epochs"] = x.epochs;
      jx["exhausted"] = x.exhausted;
      jx["wall_ms"] = x.wall_ms;
      json errs;
      for (int i = 0; i < kErrorKinds; ++i)
        errs[error_kind_name(ErrorKind(i))] = x.error_counts[std::size_t(i)];
      jx["errors"] = errs;
      jx["wrong_value"] = x.wrong_value;
      jx["fuel_exhausted"] = x.fuel_exhausted;
      jx["error_rate_at_1000"] = x.error_rate_at_1000;
      json errs1000;
      for (int i = 0; i < kErrorKinds; ++i)
        errs1000[error_kind_name(ErrorKind(i))] = x.errors_at_1000[std::size_t(i)];
      jx["errors_at_1000"] = errs1000;
      jx["solution"] = x.solution;
      prefixes.push_back(std::move(jx));
    }
    jp["prefixes"] = std::move(prefixes);
    problems.push_back(std::move(jp));
  }
  doc["problems"] = std::move(problems);
  doc["summary"] = json{{"solved", solved},
                        {"problems", r.problems.size()},
                        {"trials", trials}};
  return doc.dump(2) + "\n";
}

}  // namespace glsearch
