#include "glsearch/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace glsearch {

GrammarSymbol term(std::string tok) { return {SymKind::Terminal, std::move(tok)}; }
GrammarSymbol nt(std::string name) { return {SymKind::NonTerminal, std::move(name)}; }
GrammarSymbol proc_nt(std::string name) { return {SymKind::Procedural, std::move(name)}; }
GrammarSymbol scope_begin() { return {SymKind::ScopeBegin, ""}; }
GrammarSymbol scope_end() { return {SymKind::ScopeEnd, ""}; }

namespace {

bool needs_quoting(const std::string& tok) {
  if (tok.empty()) return true;
  if (tok[0] == '<' || tok[0] == '"' || tok[0] == '#') return true;
  for (char c : tok)
    if (c == ' ' || c == '\t' || c == '"' || c == '\\' || c == '#') return true;
  return false;
}

std::string quote_token(const std::string& tok) {
  std::string out = "\"";
  for (char c : tok) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_prob(double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

}  // namespace

std::string render_symbol(const GrammarSymbol& s) {
  switch (s.kind) {
    case SymKind::Terminal: return needs_quoting(s.text) ? quote_token(s.text) : s.text;
    case SymKind::NonTerminal: return "<" + s.text + ">";
    case SymKind::Procedural: return "<!" + s.text + ">";
    case SymKind::ScopeBegin: return "<@begin>";
    case SymKind::ScopeEnd: return "<@end>";
  }
  return "";
}

std::string render_symbol_plain(const GrammarSymbol& s) {
  switch (s.kind) {
    case SymKind::Terminal: return s.text;
    case SymKind::NonTerminal:
    case SymKind::Procedural: return "<" + s.text + ">";
    case SymKind::ScopeBegin: return "<@begin>";
    case SymKind::ScopeEnd: return "<@end>";
  }
  return "";
}

std::string render_body(const std::vector<GrammarSymbol>& body) {
  std::string out;
  for (const auto& s : body) {
    if (!out.empty()) out += ' ';
    out += render_symbol(s);
  }
  return out;
}

const GrammarHead* Grammar::find(const std::string& name) const {
  auto it = std::lower_bound(heads_.begin(), heads_.end(), name,
                             [](const GrammarHead& h, const std::string& n) { return h.name < n; });
  if (it != heads_.end() && it->name == name) return &*it;
  return nullptr;
}

GrammarHead* Grammar::find(const std::string& name) {
  return const_cast<GrammarHead*>(static_cast<const Grammar*>(this)->find(name));
}

GrammarHead& Grammar::declare(const std::string& name) {
  auto it = std::lower_bound(heads_.begin(), heads_.end(), name,
                             [](const GrammarHead& h, const std::string& n) { return h.name < n; });
  if (it != heads_.end() && it->name == name) return *it;
  return *heads_.insert(it, GrammarHead{name, {}});
}

void Grammar::add_production(const std::string& head, Production p) {
  declare(head).prods.push_back(std::move(p));
}

void Grammar::canonicalize() {
  std::sort(heads_.begin(), heads_.end(),
            [](const GrammarHead& a, const GrammarHead& b) { return a.name < b.name; });
  for (auto& h : heads_) {
    std::vector<std::pair<std::string, std::size_t>> keys;
    keys.reserve(h.prods.size());
    for (std::size_t i = 0; i < h.prods.size(); ++i)
      keys.emplace_back(render_body(h.prods[i].body), i);
    std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
      double pa = h.prods[a.second].prob, pb = h.prods[b.second].prob;
      if (pa != pb) return pa > pb;
      return a.first < b.first;
    });
    std::vector<Production> sorted;
    sorted.reserve(h.prods.size());
    for (const auto& [_, i] : keys) sorted.push_back(std::move(h.prods[i]));
    h.prods = std::move(sorted);
  }
}

const std::set<std::string>& Grammar::procedural_names() {
  static const std::set<std::string> names = {
      "variable",            // reference to a visible name, uniform
      "variable-definition", // fresh robotic name, Zeta-weighted
      "activate",            // brings the oldest pending definition in scope
      "uinteger-10",         // integer literal, Zeta-weighted
      "solution-corpus",     // emits a stored solution definition (reuse route 2)
  };
  return names;
}

std::vector<std::string> validate(const Grammar& g) {
  std::vector<std::string> out;
  for (const auto& h : g.heads()) {
    if (h.prods.empty()) continue;  // declared hook without alternatives
    double sum = 0.0;
    for (const auto& p : h.prods) {
      if (!(p.prob > 0.0))
        out.push_back("<" + h.name + ">: production \"" + render_body(p.body) +
                      "\" has non-positive probability");
      sum += p.prob;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      out.push_back("<" + h.name + ">: probabilities sum to " + format_prob(sum) +
                    ", expected 1");
  }
  for (const auto& h : g.heads()) {
    for (const auto& p : h.prods) {
      for (const auto& s : p.body) {
        if (s.kind == SymKind::NonTerminal && !g.is_declared(s.text))
          out.push_back("<" + h.name + ">: undefined non-terminal <" + s.text + ">");
        if (s.kind == SymKind::Procedural && !Grammar::procedural_names().count(s.text))
          out.push_back("<" + h.name + ">: unknown procedural non-terminal <!" + s.text + ">");
      }
    }
  }
  // Probability-1 cycles never fall below any horizon; enumeration would not
  // terminate. Follow only edges of productions with probability ~1.
  std::map<std::string, std::vector<std::string>> sure_edges;
  for (const auto& h : g.heads())
    for (const auto& p : h.prods)
      if (p.prob >= 1.0 - 1e-12)
        for (const auto& s : p.body)
          if (s.kind == SymKind::NonTerminal) sure_edges[h.name].push_back(s.text);
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<std::string, std::size_t>> stack;
  for (const auto& [root, _] : sure_edges) {
    if (state[root]) continue;
    stack.emplace_back(root, 0);
    state[root] = 1;
    while (!stack.empty()) {
      auto& [name, idx] = stack.back();
      auto& edges = sure_edges[name];
      if (idx >= edges.size()) {
        state[name] = 2;
        stack.pop_back();
        continue;
      }
      const std::string& next = edges[idx++];
      if (state[next] == 1) {
        out.push_back("certain cycle through <" + next + ">: grammar cannot terminate");
        state[next] = 2;
      } else if (state[next] == 0) {
        state[next] = 1;
        stack.emplace_back(next, 0);
      }
    }
  }
  return out;
}

namespace {

struct LineParser {
  const std::string& text;
  std::size_t pos = 0;
  int line;

  [[noreturn]] void fail(const std::string& msg) const {
    throw GrammarError("line " + std::to_string(line) + ": " + msg);
  }
  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= text.size() || text[pos] == '#';
  }
  std::string raw_token() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ' && text[pos] != '\t') ++pos;
    return text.substr(start, pos - start);
  }
  GrammarSymbol symbol() {
    skip_ws();
    if (text[pos] == '"') {
      ++pos;
      std::string tok;
      while (true) {
        if (pos >= text.size()) fail("unterminated quoted terminal");
        char c = text[pos++];
        if (c == '"') break;
        if (c == '\\') {
          if (pos >= text.size()) fail("dangling escape in quoted terminal");
          c = text[pos++];
          if (c != '"' && c != '\\') fail("unsupported escape in quoted terminal");
        }
        tok += c;
      }
      return term(std::move(tok));
    }
    std::string tok = raw_token();
    if (tok.size() >= 2 && tok.front() == '<' && tok.back() == '>') {
      std::string inner = tok.substr(1, tok.size() - 2);
      if (inner == "@begin") return scope_begin();
      if (inner == "@end") return scope_end();
      if (!inner.empty() && inner[0] == '!') return proc_nt(inner.substr(1));
      if (inner.empty()) fail("empty non-terminal name");
      return nt(std::move(inner));
    }
    return term(std::move(tok));
  }
};

}  // namespace

Grammar load_grammar(const std::string& text) {
  Grammar g;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    LineParser lp{raw, 0, lineno};
    if (lp.at_end()) continue;
    GrammarSymbol head = lp.symbol();
    if (head.kind != SymKind::NonTerminal)
      lp.fail("expected a <head> non-terminal at line start");
    std::string arrow = lp.raw_token();
    if (arrow != "::=") lp.fail("expected ::= after head");
    if (lp.at_end()) {
      g.declare(head.text);  // hook head without alternatives
      continue;
    }
    std::string prob_tok = lp.raw_token();
    char* end = nullptr;
    double prob = std::strtod(prob_tok.c_str(), &end);
    if (end != prob_tok.c_str() + prob_tok.size() || !(prob > 0.0))
      lp.fail("expected a positive probability, got \"" + prob_tok + "\"");
    std::string colon = lp.raw_token();
    if (colon != ":") lp.fail("expected : after probability");
    Production p;
    p.prob = prob;
    while (!lp.at_end()) p.body.push_back(lp.symbol());
    g.add_production(head.text, std::move(p));
  }
  g.canonicalize();
  auto violations = validate(g);
  if (!violations.empty()) {
    std::string msg = "invalid grammar:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw GrammarError(msg);
  }
  return g;
}

Grammar load_grammar_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GrammarError("cannot open grammar file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_grammar(buf.str());
}

std::string save_grammar(const Grammar& g) {
  std::string out;
  for (const auto& h : g.heads()) {
    if (h.prods.empty()) {
      out += "<" + h.name + "> ::=\n";
      continue;
    }
    for (const auto& p : h.prods) {
      out += "<" + h.name + "> ::= " + format_prob(p.prob) + " :";
      std::string body = render_body(p.body);
      if (!body.empty()) out += " " + body;
      out += '\n';
    }
  }
  return out;
}

void save_grammar_file(const Grammar& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GrammarError("cannot open grammar file for writing: " + path);
  out << save_grammar(g);
  if (!out) throw GrammarError("failed writing grammar file: " + path);
}

ZetaTable::ZetaTable(double s_, int n_) : s(s_), n(n_), p(static_cast<std::size_t>(n_)) {
  // Sum small terms first for accuracy.
  double sum = 0.0;
  for (int k = n; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
  for (int k = 1; k <= n; ++k)
    p[static_cast<std::size_t>(k - 1)] = std::pow(static_cast<double>(k), -s) / sum;
}

const ZetaTable& shared_zeta() {
  static const ZetaTable table(2.0, 1024);
  return table;
}

}  // namespace glsearch
