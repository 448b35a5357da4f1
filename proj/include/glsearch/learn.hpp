#pragma once

// Learning across problems: exponential smoothing of production
// probabilities toward corpus usage, gamma-insertion of solution calls and
// idioms, pruned-tree idiom extraction, frequent sub-program mining, and
// the solution corpus with its JSONL persistence.

#include <unordered_set>

#include "glsearch/derive.hpp"
#include "glsearch/grammar.hpp"

namespace glsearch {

struct SolutionRecord {
  std::string problem;              // also the installed procedure name
  std::vector<std::string> params;
  std::string definition;           // printed (define (name ...) ...) form
  std::vector<TraceStep> trace;     // derivation of the body
  bool partial = false;             // solved only a prefix of the pairs
  int pairs_covered = 0;
  long long trials = 0;
  long long fuel_used = 0;
};

// Which corpus records feed the updates.
enum class CorpusFilter {
  Latest,    // the most recent record per problem (default)
  Complete,  // the most recent non-partial record per problem
  All,       // every record
};

const char* corpus_filter_name(CorpusFilter f);
std::optional<CorpusFilter> corpus_filter_from_name(const std::string& name);

struct SolutionCorpus {
  std::vector<SolutionRecord> records;

  std::vector<const SolutionRecord*> filtered(CorpusFilter f) const;
  const SolutionRecord* find_latest(const std::string& problem) const;
};

std::string save_corpus(const SolutionCorpus& corpus);  // JSONL, byte-stable
SolutionCorpus load_corpus(const std::string& text);
void save_corpus_file(const SolutionCorpus& corpus, const std::string& path);
SolutionCorpus load_corpus_file(const std::string& path);

// Re-estimates production probabilities: per observed production p_t is its
// corpus usage share, and the stored value moves to alpha*p_t +
// (1-alpha)*previous, renormalized per head. Heads without observations stay
// untouched; productions forwarding into the gamma-managed re-use heads keep
// their mass fixed and only the remainder is redistributed.
Grammar update_probabilities(Grammar g, const SolutionCorpus& corpus, double alpha,
                             CorpusFilter filter);

// Scales a head's productions by (1-gamma) and inserts the new body at
// gamma (at probability 1 when the head was empty).
Grammar gamma_insert(Grammar g, const std::string& head, std::vector<GrammarSymbol> body,
                     double gamma);

// The call template ( name <expression> x arity ).
std::vector<GrammarSymbol> solution_call_body(const std::string& name, int arity);

// Inserts the solution's call template under <previous-solution>; a second
// insertion for the same name is an error (re-runs replace the corpus
// record instead).
Grammar add_solution(Grammar g, const std::string& name, int arity, double gamma);
bool has_solution_production(const Grammar& g, const std::string& name);

// Inserting an idiom whose rendered body already exists is a no-op.
Grammar add_idiom(Grammar g, const std::string& head, std::vector<GrammarSymbol> body,
                  double gamma);

// Collapses maximal subtrees of height <= level into their labels and reads
// the frontier; returns (root label, frontier) for the tree root and for
// the topmost <expression> node. Frontiers without both a terminal and a
// non-terminal are dropped as degenerate.
std::vector<std::pair<std::string, std::vector<GrammarSymbol>>> extract_idioms(
    const DerivationTree& tree, int level);

struct MinedSubprogram {
  std::string text;  // printed form, the identity key
  Ref expr;
  int count = 0;  // solutions containing it (document frequency)
  int atoms = 0;
};

// Complete sub-expressions of at least 3 atoms occurring in at least
// `support` filtered solutions, counted once per solution; non-maximal
// subtrees with the same count as a containing result are dropped.
std::vector<MinedSubprogram> mine_subprograms(const std::vector<const SolutionRecord*>& records,
                                              int support);

// True when every variable referenced by the expression is introduced
// within it or is a known global (primitive, keyword, or solution name).
// Unknown syntactic forms count as open.
bool expression_is_closed(const Ref& expr, const std::unordered_set<std::string>& globals);

// Primitive and keyword names, the baseline for expression_is_closed.
std::unordered_set<std::string> global_names();

// Solutions as the derivation engine re-uses them (route 2).
std::vector<ReusableSolution> reusable_view(const SolutionCorpus& corpus, CorpusFilter filter);

}  // namespace glsearch
