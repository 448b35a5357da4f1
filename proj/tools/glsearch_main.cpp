// Command-line front end: train over a problem sequence, run a one-off
// search, and inspect grammars. Exit codes: 0 success, 2 usage error,
// 3 input validation error, 4 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "glsearch/induct.hpp"

using namespace glsearch;
namespace fs = std::filesystem;

namespace {

struct InputFailure : std::runtime_error {
  explicit InputFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct Options {
  std::string grammar = "builtin:default";
  std::string corpus;
  std::string sequence;
  std::string problem;
  std::string out;
  long long t0 = 8000;
  long long tq = 1000;
  std::string strategy = "dfs";
  std::size_t memory_cap = std::size_t(1) << 20;
  int max_epochs = 0;
  long long max_trials = 0;  // search: executed-trial cutoff; train: per-prefix budget
  double alpha = 0.2;
  double gamma = 0.5;
  int support = 2;
  int prune_levels = 1;
  bool no_reuse = false;
  bool idioms = false;
  bool mine = false;
  bool reuse_route = false;
  bool seed = false;
  std::string corpus_filter = "latest";
  bool enable_factorial = false;
  long long progress_every = 0;
  bool dump_derivation = false;
  std::string config;
};

constexpr long long kTrainPrefixBudget = 10'000'000;

Strategy strategy_from_name(const std::string& name) {
  if (name == "dfs") return Strategy::Dfs;
  if (name == "best") return Strategy::Best;
  return Strategy::Hybrid;
}

Grammar resolve_grammar(const std::string& spec) {
  if (spec == "builtin:default") return default_grammar();
  Grammar g = load_grammar_file(spec);
  std::vector<std::string> bad = validate(g);
  if (!bad.empty()) {
    std::string msg = spec + ": invalid grammar";
    for (const std::string& b : bad) msg += "\n  " + b;
    throw InputFailure(msg);
  }
  return g;
}

std::vector<Problem> resolve_sequence(const std::string& spec, bool enable_factorial) {
  if (spec == "builtin:toy") return toy_sequence(enable_factorial);
  return load_problems_file(spec);
}

SearchConfig make_search_config(const Options& o) {
  SearchConfig cfg;
  cfg.t0 = o.t0;
  cfg.tq = o.tq;
  cfg.strategy = strategy_from_name(o.strategy);
  cfg.memory_cap = o.memory_cap;
  cfg.max_epochs = o.max_epochs;
  if (o.progress_every > 0) {
    cfg.progress_every = o.progress_every;
    cfg.on_progress = [](const SearchProgress& p) {
      std::fprintf(stderr, "epoch %d t=%lld generated=%lld executed=%lld skipped=%lld\n",
                   p.epoch, p.t, p.generated, p.executed, p.skipped);
    };
  }
  return cfg;
}

UpdateConfig make_update_config(const Options& o) {
  if (o.gamma <= 0.0 || o.gamma >= 1.0)
    throw InputFailure("--gamma must be strictly between 0 and 1");
  UpdateConfig u;
  u.alpha = o.alpha;
  u.gamma = o.gamma;
  u.support = o.support;
  u.prune_level = o.prune_levels;
  u.reuse = !o.no_reuse;
  u.corpus_route = o.reuse_route;
  u.idioms = o.idioms;
  u.mining = o.mine;
  u.filter = *corpus_filter_from_name(o.corpus_filter);
  return u;
}

InductState make_state(const Options& o) {
  InductState s;
  s.grammar = resolve_grammar(o.grammar);
  if (!o.corpus.empty()) {
    s.corpus = load_corpus_file(o.corpus);
    if (!o.no_reuse) {
      // restore the machine bindings a previous training run installed, so
      // grammar productions that call stored solutions stay executable
      for (const SolutionRecord* r : s.corpus.filtered(CorpusFilter::Latest)) {
        try {
          s.machine.install_solution(Symbols::intern(r->problem), read_one(r->definition));
        } catch (const SyntaxError& e) {
          throw InputFailure("corpus definition for '" + r->problem + "': " + e.what());
        }
      }
    }
  }
  return s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw InputFailure("cannot write " + path);
}

void add_common_options(CLI::App* cmd, Options& o, bool train_mode) {
  cmd->set_config("--config", "", "Config file (key=value, same names as the flags)");
  cmd->add_option("--grammar", o.grammar, "Grammar file or builtin:default")
      ->capture_default_str();
  cmd->add_option("--corpus", o.corpus, "Solution corpus to load (JSONL)");
  cmd->add_option("--t0", o.t0, "Initial per-epoch time budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tq", o.tq, "Per-trial fuel quantum")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--strategy", o.strategy, "Enumeration strategy")
      ->check(CLI::IsMember({"dfs", "best", "hybrid"}))
      ->capture_default_str();
  cmd->add_option("--memory-cap", o.memory_cap, "Frontier entry cap for best/hybrid")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-epochs", o.max_epochs, "Epoch cutoff (0: unlimited)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--max-trials", o.max_trials,
                  train_mode ? "Executed-trial budget per pair prefix (0: 10000000)"
                             : "Executed-trial cutoff (0: unlimited)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--progress-every", o.progress_every,
                  "Print progress to stderr every N generated candidates (0: off)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void add_update_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--alpha", o.alpha, "Probability smoothing weight")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--gamma", o.gamma, "Insertion probability for new alternatives")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--support", o.support, "Sub-program mining document frequency")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--prune-levels", o.prune_levels, "Idiom extraction pruning depth")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_flag("--no-reuse", o.no_reuse, "Disable solution re-use updates");
  cmd->add_flag("--idioms", o.idioms, "Learn pruned-derivation idioms from complete solutions");
  cmd->add_flag("--mine", o.mine, "Mine frequent closed sub-programs into the grammar");
  cmd->add_flag("--reuse-route", o.reuse_route,
                "Also emit stored definitions through the solution-corpus route");
  cmd->add_flag("--seed", o.seed, "Try the carried-over solution first at each prefix");
  cmd->add_option("--corpus-filter", o.corpus_filter, "Records visible to updates")
      ->check(CLI::IsMember({"latest", "complete", "all"}))
      ->capture_default_str();
}

std::string problem_line(const ProblemReport& r) {
  std::ostringstream out;
  out << "problem " << r.name << ": " << (r.solved ? "solved" : "unsolved") << " pairs="
      << r.pairs_covered << "/" << r.pairs_total << " trials=" << r.trials;
  if (!r.definition.empty()) out << " definition=" << r.definition;
  return out.str();
}

int cmd_train(const Options& o) {
  std::vector<Problem> seq = resolve_sequence(o.sequence, o.enable_factorial);
  InductState state = make_state(o);
  InductConfig cfg;
  cfg.search = make_search_config(o);
  cfg.updates = make_update_config(o);
  cfg.prefix_budget = o.max_trials > 0 ? o.max_trials : kTrainPrefixBudget;
  cfg.seed = o.seed;

  std::string grammar_path = (fs::path(o.out) / "grammar").string();
  std::string corpus_path = (fs::path(o.out) / "corpus.jsonl").string();

  SequenceReport report =
      run_sequence(seq, state, cfg, [&](const InductState& st, const ProblemReport& pr) {
        save_grammar_file(st.grammar, grammar_path);
        save_corpus_file(st.corpus, corpus_path);
        std::cout << problem_line(pr) << "\n" << std::flush;
      });

  save_grammar_file(state.grammar, grammar_path);
  save_corpus_file(state.corpus, corpus_path);
  write_file((fs::path(o.out) / "report.txt").string(), report_text(report));
  write_file((fs::path(o.out) / "report.json").string(), report_json(report));

  int solved = 0;
  for (const ProblemReport& pr : report.problems) solved += pr.solved ? 1 : 0;
  std::cout << "summary: solved=" << solved << "/" << report.problems.size() << "\n";
  return 0;
}

int cmd_search(const Options& o) {
  std::vector<Problem> problems = load_problems_file(o.problem);
  if (problems.size() != 1)
    throw InputFailure(o.problem + ": expected exactly one problem form, found " +
                       std::to_string(problems.size()));
  const Problem& p = problems[0];
  InductState state = make_state(o);

  SearchConfig cfg = make_search_config(o);
  cfg.max_trials = o.max_trials;
  TrialOracle oracle = make_test_oracle(p, int(p.pairs.size()));

  std::vector<ReusableSolution> reusables;
  DeriveContext ctx{state.grammar, shared_zeta()};
  if (o.reuse_route) {
    reusables = reusable_view(state.corpus, *corpus_filter_from_name(o.corpus_filter));
    ctx.corpus_route = true;
    ctx.corpus = &reusables;
  }

  SearchResult res = lsearch(ctx, start_form("body", p.params), state.machine, oracle, cfg);
  if (res.solved) {
    std::vector<Ref> body = tokens_to_program(res.tokens);
    std::string text = "(define (" + p.name;
    for (const std::string& prm : p.params) text += " " + prm;
    text += ")";
    for (const Ref& f : body) text += " " + print(f);
    text += ")";
    std::cout << "solved: " << text << "\n";
    std::printf("prob=%.6g fuel=%lld steps=%lld\n", res.prob, res.fuel, res.steps);
  } else {
    std::cout << (res.stats.exhausted ? "exhausted: search space emptied"
                                      : "stopped: budget reached")
              << "\n";
  }
  std::printf("trials=%lld generated=%lld skipped=%lld fuel=%lld epochs=%d\n",
              res.stats.executed, res.stats.generated, res.stats.skipped, res.stats.fuel_used,
              res.stats.epochs);
  if (o.dump_derivation && res.solved) {
    for (const TraceStep& s : res.trace)
      std::printf("  %s -> %s  (p=%.6g)\n", s.head.c_str(), render_body(s.body).c_str(),
                  s.prob);
  }
  return 0;
}

int cmd_grammar_show(const std::string& spec) {
  std::cout << save_grammar(resolve_grammar(spec));
  return 0;
}

int cmd_grammar_validate(const std::string& spec) {
  Grammar g = spec == "builtin:default" ? default_grammar() : load_grammar_file(spec);
  std::vector<std::string> bad = validate(g);
  if (bad.empty()) {
    std::cout << "OK\n";
    return 0;
  }
  for (const std::string& b : bad) std::cout << b << "\n";
  return 3;
}

int cmd_grammar_diff(const std::string& spec_a, const std::string& spec_b) {
  Grammar a = resolve_grammar(spec_a);
  Grammar b = resolve_grammar(spec_b);
  std::map<std::string, std::map<std::string, double>> pa, pb;
  for (const GrammarHead& h : a.heads())
    for (const Production& p : h.prods) pa[h.name][render_body(p.body)] = p.prob;
  for (const GrammarHead& h : b.heads())
    for (const Production& p : h.prods) pb[h.name][render_body(p.body)] = p.prob;

  std::set<std::string> heads;
  for (auto& [name, _] : pa) heads.insert(name);
  for (auto& [name, _] : pb) heads.insert(name);
  for (const std::string& name : heads) {
    std::set<std::string> bodies;
    auto ia = pa.find(name);
    auto ib = pb.find(name);
    if (ia != pa.end())
      for (auto& [body, _] : ia->second) bodies.insert(body);
    if (ib != pb.end())
      for (auto& [body, _] : ib->second) bodies.insert(body);
    for (const std::string& body : bodies) {
      bool in_a = ia != pa.end() && ia->second.count(body);
      bool in_b = ib != pb.end() && ib->second.count(body);
      if (in_a && !in_b) {
        std::printf("- <%s> ::= %.9g : %s\n", name.c_str(), ia->second[body], body.c_str());
      } else if (!in_a && in_b) {
        std::printf("+ <%s> ::= %.9g : %s\n", name.c_str(), ib->second[body], body.c_str());
      } else if (ia->second[body] != ib->second[body]) {
        std::printf("~ <%s> ::= %.9g -> %.9g : %s\n", name.c_str(), ia->second[body],
                    ib->second[body], body.c_str());
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-grammar guided program search over a Scheme subset"};
  app.require_subcommand(1);

  Options o;

  CLI::App* train = app.add_subcommand("train", "Run incremental induction over a sequence");
  train->add_option("--sequence", o.sequence, "Problem sequence file or builtin:toy")
      ->required();
  train->add_option("--out", o.out, "Output directory")->required();
  train->add_flag("--enable-factorial", o.enable_factorial,
                  "Append the factorial problem to builtin:toy");
  add_common_options(train, o, true);
  add_update_options(train, o);

  CLI::App* search = app.add_subcommand("search", "Search one problem, no learning");
  search->add_option("--problem", o.problem, "File with a single problem form")->required();
  search->add_flag("--dump-derivation", o.dump_derivation,
                   "Print the accepted derivation trace");
  search->add_flag("--reuse-route", o.reuse_route,
                   "Emit stored corpus definitions through the solution-corpus route");
  search->add_option("--corpus-filter", o.corpus_filter, "Records visible to the corpus route")
      ->check(CLI::IsMember({"latest", "complete", "all"}))
      ->capture_default_str();
  add_common_options(search, o, false);

  CLI::App* grammar = app.add_subcommand("grammar", "Inspect grammars");
  grammar->require_subcommand(1);
  std::string g_path = "builtin:default", g_path_b;
  CLI::App* g_show = grammar->add_subcommand("show", "Print the canonical form");
  g_show->add_option("grammar", g_path, "Grammar file or builtin:default");
  CLI::App* g_validate = grammar->add_subcommand("validate", "Check well-formedness");
  g_validate->add_option("grammar", g_path, "Grammar file or builtin:default");
  CLI::App* g_diff = grammar->add_subcommand("diff", "Production-level probability deltas");
  g_diff->add_option("a", g_path, "Old grammar")->required();
  g_diff->add_option("b", g_path_b, "New grammar")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(train)) {
      std::error_code ec;
      fs::create_directories(o.out, ec);
      if (ec) throw InputFailure("cannot create output directory " + o.out);
      // resolved manifest first, reloadable through --config
      write_file((fs::path(o.out) / "manifest.cfg").string(), train->config_to_str(true, false));
      return cmd_train(o);
    }
    if (app.got_subcommand(search)) return cmd_search(o);
    if (g_show->parsed()) return cmd_grammar_show(g_path);
    if (g_validate->parsed()) return cmd_grammar_validate(g_path);
    if (g_diff->parsed()) return cmd_grammar_diff(g_path, g_path_b);
    return 2;
  } catch (const InputFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InductError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const GrammarError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
