#pragma once

// Stochastic context-free grammar with procedural non-terminals, scope
// markers, a canonical line-oriented file format, and the Zeta integer table.

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace glsearch {

enum class SymKind { Terminal, NonTerminal, Procedural, ScopeBegin, ScopeEnd };

struct GrammarSymbol {
  SymKind kind = SymKind::Terminal;
  std::string text;  // token text or non-terminal name; empty for markers

  bool operator==(const GrammarSymbol&) const = default;
};

GrammarSymbol term(std::string tok);
GrammarSymbol nt(std::string name);
GrammarSymbol proc_nt(std::string name);
GrammarSymbol scope_begin();
GrammarSymbol scope_end();

// File rendering: <name>, <!name>, <@begin>, <@end>, bare or quoted terminal.
std::string render_symbol(const GrammarSymbol& s);
// Human rendering for sentential forms: both non-terminal kinds as <name>,
// terminals bare.
std::string render_symbol_plain(const GrammarSymbol& s);
std::string render_body(const std::vector<GrammarSymbol>& body);

struct Production {
  std::vector<GrammarSymbol> body;
  double prob = 0.0;

  bool operator==(const Production&) const = default;
};

struct GrammarHead {
  std::string name;
  std::vector<Production> prods;  // canonical: prob desc, then lexicographic

  bool operator==(const GrammarHead&) const = default;
};

struct GrammarError : std::runtime_error {
  explicit GrammarError(const std::string& msg) : std::runtime_error(msg) {}
};

class Grammar {
 public:
  const std::vector<GrammarHead>& heads() const { return heads_; }
  const GrammarHead* find(const std::string& name) const;
  GrammarHead* find(const std::string& name);
  // Inserts the head if missing (declared, possibly without productions).
  GrammarHead& declare(const std::string& name);
  bool is_declared(const std::string& name) const { return find(name) != nullptr; }

  void add_production(const std::string& head, Production p);
  // Sorts heads alphabetically and productions by descending probability,
  // breaking ties by the rendered body. Called by every mutating entry point.
  void canonicalize();

  const std::string& start() const { return start_; }
  void set_start(std::string s) { start_ = std::move(s); }

  // Names expanded by the derivation engine rather than by stored productions.
  static const std::set<std::string>& procedural_names();

  bool operator==(const Grammar&) const = default;

 private:
  std::vector<GrammarHead> heads_;  // sorted by name
  std::string start_ = "program";
};

// Empty list means valid. Checks per-head probability sums (1 +/- 1e-9),
// positive probabilities, defined non-terminals, known procedural names, and
// certain-loop cycles (probability-1 cycles that no horizon can prune).
std::vector<std::string> validate(const Grammar& g);

Grammar load_grammar(const std::string& text);
Grammar load_grammar_file(const std::string& path);
std::string save_grammar(const Grammar& g);
void save_grammar_file(const Grammar& g, const std::string& path);

// P(k) = k^-s / sum_{j=1..n} j^-s for k = 1..n.
struct ZetaTable {
  double s;
  int n;
  std::vector<double> p;  // index k-1
  explicit ZetaTable(double s = 2.0, int n = 1024);
};
const ZetaTable& shared_zeta();  // the s=2, n=1024 table

// The shipped grammar over the Scheme subset; validates clean.
Grammar default_grammar();

// Standard procedures offered by the shipped grammar, split into the common
// tier (own alternatives of <standard-procedure>) and the rest (behind
// <other-procedure>).
const std::vector<std::string>& common_procedures();

}  // namespace glsearch
