#pragma once

// Leftmost derivation over sentential forms: scope-stack static environments,
// procedural non-terminal expansion, derivation traces and trees, and
// conversion of finished sentences to programs.

#include <memory>
#include <optional>
#include <random>
#include <tuple>

#include "glsearch/grammar.hpp"
#include "glsearch/value.hpp"

namespace glsearch {

// Persistent (structurally shared) environment: a stack of frames, each with
// active names and pending names (declared but not yet referenceable).
class StaticEnv {
 public:
  StaticEnv();
  static StaticEnv with_parameters(const std::vector<std::string>& params);

  StaticEnv pushed() const;
  StaticEnv popped() const;
  StaticEnv declared(const std::string& name) const;     // pending in top frame
  StaticEnv activated() const;                           // oldest pending -> active
  StaticEnv with_solution(const std::string& name) const; // active + marked reusable

  bool has_pending() const;
  // Active or pending in the innermost frame (the shadowing skip rule).
  bool bound_in_top(const std::string& name) const;
  // All referenceable names, innermost frame first, insertion order within a
  // frame, shadowed duplicates removed. Deterministic.
  std::vector<std::string> visible() const;
  std::vector<std::string> visible_solutions() const;
  std::size_t depth() const;

 private:
  struct Frame {
    std::shared_ptr<const Frame> parent;
    std::vector<std::string> active;
    std::vector<std::string> pending;
    std::vector<std::string> solutions;
    ~Frame();
  };
  std::shared_ptr<const Frame> top_;
};

struct TraceStep {
  std::string head;                 // expanded non-terminal (or procedural) name
  std::vector<GrammarSymbol> body;  // chosen replacement
  double prob = 1.0;

  bool operator==(const TraceStep&) const = default;
};

struct SententialForm {
  struct SymNode {
    GrammarSymbol sym;
    std::shared_ptr<const SymNode> next;
    ~SymNode();
  };
  struct TraceNode {
    TraceStep step;
    std::shared_ptr<const TraceNode> prev;
    ~TraceNode();
  };

  std::shared_ptr<const SymNode> pending;  // leftmost first; null for a sentence
  double prob = 1.0;
  StaticEnv env;
  std::shared_ptr<const TraceNode> trace;  // newest first
};

// A solution available for re-use during derivation.
struct ReusableSolution {
  std::string name;
  std::vector<GrammarSymbol> call_body;        // ( name <expression> ... )
  std::vector<std::string> definition_tokens;  // full define form, tokenized
};

struct DeriveContext {
  const Grammar& grammar;
  const ZetaTable& zeta;
  // Route 2 re-use: solutions enter generated programs as emitted definitions
  // tracked by the static environment instead of grammar productions.
  bool corpus_route = false;
  const std::vector<ReusableSolution>* corpus = nullptr;
};

// Start form <start> with parameters pre-bound in the bottom frame.
SententialForm start_form(const std::string& start, const std::vector<std::string>& params = {});

bool is_sentence(const SententialForm& f);

// Successors of the leftmost non-terminal, in decreasing local probability
// (ties by canonical production order), pruned below p_h. Sets *truncated when
// the horizon dropped at least one alternative.
std::vector<SententialForm> expand_leftmost(const SententialForm& f, const DeriveContext& ctx,
                                            double p_h, bool* truncated = nullptr);

// Procedural alternative generators (also used directly by tests).
std::vector<std::pair<std::string, double>> gen_variable_reference(const StaticEnv& env);
// (name, probability, environment with the name pending)
std::vector<std::tuple<std::string, double, StaticEnv>> gen_variable_definition(
    const StaticEnv& env, const ZetaTable& zeta);
std::vector<std::pair<const ReusableSolution*, double>> gen_previous_solution_call(
    const StaticEnv& env, const std::vector<ReusableSolution>& corpus);

// Trace, sentence, and program extraction.
std::vector<TraceStep> trace_steps(const SententialForm& f);  // oldest first
std::vector<std::string> sentence_tokens(const SententialForm& f);
std::vector<std::string> replay_tokens(const std::string& start, const std::vector<TraceStep>& steps);
// Joins tokens into program text; a bare " token toggles string mode, inside
// which tokens concatenate without separators.
std::string join_tokens(const std::vector<std::string>& tokens);
// join + read; a finished sentence that fails to read is a grammar bug and
// throws GrammarError.
std::vector<Ref> tokens_to_program(const std::vector<std::string>& tokens);

// Tokenizes a datum structurally (printer-compatible, no re-parsing).
std::vector<std::string> tokenize_datum(const Ref& datum);

struct DerivationTree {
  struct Node {
    std::string label;         // non-terminal name; empty for leaves
    std::string token;         // terminal text for leaves
    bool terminal = false;
    bool marker = false;       // scope/activation marker leaf (zero-width)
    bool expanded = false;     // a trace step chose this node's children
    std::vector<int> children; // indices into nodes
  };
  std::vector<Node> nodes;
  int root = -1;

  std::vector<std::string> leaf_tokens() const;  // left-to-right, markers skipped
};

DerivationTree build_derivation_tree(const std::string& start, const std::vector<TraceStep>& steps);

// Random-walk sentence generation (test oracle; p_h = 0). Returns nothing on
// a dead end or when max_expansions is exceeded.
std::optional<SententialForm> random_walk(const DeriveContext& ctx, const SententialForm& start,
                                          std::mt19937& rng, int max_expansions = 20000);

}  // namespace glsearch
