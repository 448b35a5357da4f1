#pragma once

// Incremental operator induction: a problem is solved pair-prefix by
// pair-prefix, each accepted (partial or complete) solution is committed to
// the corpus and triggers the configured grammar updates, and a training
// sequence folds this over an ordered list of problems.

#include <functional>

#include "glsearch/learn.hpp"
#include "glsearch/machine.hpp"
#include "glsearch/search.hpp"

namespace glsearch {

struct InductError : std::runtime_error {
  explicit InductError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoPair {
  std::vector<Ref> inputs;
  Ref output;
};

struct Problem {
  std::string name;
  std::vector<std::string> params;
  std::vector<IoPair> pairs;
  long long max_trials = 0;  // per-prefix budget override; 0 uses the config
};

// (problem (name sqr) (params (x)) (pairs ((1) 1) ((2) 4)) (max-trials 100))
Problem parse_problem(const Ref& form);
std::vector<Problem> parse_problems(const std::string& text);  // names must be unique
std::vector<Problem> load_problems_file(const std::string& path);

// Wraps a candidate body as (define (name params...) body...) followed by
// the conjunction of output checks over the first prefix_len pairs; the
// program yields #t exactly when every check holds. Exact outputs compare
// with equal?, reals within 1e-9 relative.
TrialOracle make_test_oracle(const Problem& p, int prefix_len);

struct UpdateConfig {
  double alpha = 0.2;        // exponential smoothing weight
  double gamma = 0.5;        // insertion probability for new alternatives
  int support = 2;           // sub-program mining document frequency
  int prune_level = 1;       // idiom extraction pruning depth
  bool reuse = true;         // install solutions and add their call templates
  bool corpus_route = false; // also emit stored definitions via the grammar hooks
  bool idioms = false;       // extract pruned-tree idioms from complete solutions
  bool mining = false;       // mine frequent closed sub-programs
  CorpusFilter filter = CorpusFilter::Latest;
};

struct InductConfig {
  SearchConfig search;
  UpdateConfig updates;
  long long prefix_budget = 10'000'000;  // executed trials per pair prefix
  bool seed = false;  // try the carried-over solution first at each prefix
};

struct PrefixReport {
  int pairs = 0;
  bool solved = false;
  bool seeded = false;  // the carried-over solution passed directly
  long long trials = 0;
  long long generated = 0;
  long long skipped = 0;
  long long fuel_used = 0;
  int epochs = 0;
  bool exhausted = false;
  double wall_ms = 0.0;
  std::array<long long, kErrorKinds> error_counts{};
  long long wrong_value = 0;
  long long fuel_exhausted = 0;
  double error_rate_at_1000 = -1.0;  // semantic-error fraction, first 1000 trials
  std::array<long long, kErrorKinds> errors_at_1000{};
  std::string solution;  // accepted body text for this prefix
};

struct ProblemReport {
  std::string name;
  bool solved = false;  // every pair covered
  int pairs_covered = 0;
  int pairs_total = 0;
  std::string definition;  // printed define form of the best solution
  long long trials = 0;    // summed over prefixes
  long long fuel_used = 0;
  double wall_ms = 0.0;
  // first prefix search that reached 1000 executed trials, -1 otherwise
  double error_rate_at_1000 = -1.0;
  std::vector<PrefixReport> prefixes;
};

struct SequenceReport {
  std::vector<ProblemReport> problems;
};

// Mutable engine state threaded through a training sequence.
struct InductState {
  Grammar grammar;
  SolutionCorpus corpus;
  Machine machine;
};

using GrammarHook = std::function<void(const Grammar&)>;  // after every update
using ProblemHook = std::function<void(const InductState&, const ProblemReport&)>;

ProblemReport run_problem(const Problem& p, InductState& state, const InductConfig& cfg,
                          const GrammarHook& on_update = {});
SequenceReport run_sequence(const std::vector<Problem>& seq, InductState& state,
                            const InductConfig& cfg, const ProblemHook& after_problem = {},
                            const GrammarHook& on_update = {});

// id, sqr, add, is0, pow4, nand, nor, xor — and factorial when enabled.
std::string toy_sequence_text(bool include_factorial = false);
std::vector<Problem> toy_sequence(bool include_factorial = false);

std::string report_text(const SequenceReport& r);  // line oriented, no wall times
std::string report_json(const SequenceReport& r);  // structured, includes wall times

}  // namespace glsearch
