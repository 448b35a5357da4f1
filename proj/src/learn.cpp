#include "glsearch/learn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "glsearch/machine.hpp"
#include "glsearch/value.hpp"

namespace glsearch {

using json = nlohmann::ordered_json;

const char* corpus_filter_name(CorpusFilter f) {
  switch (f) {
    case CorpusFilter::Latest:
      return "latest";
    case CorpusFilter::Complete:
      return "complete";
    case CorpusFilter::All:
      return "all";
  }
  return "latest";
}

std::optional<CorpusFilter> corpus_filter_from_name(const std::string& name) {
  if (name == "latest") return CorpusFilter::Latest;
  if (name == "complete") return CorpusFilter::Complete;
  if (name == "all") return CorpusFilter::All;
  return std::nullopt;
}

std::vector<const SolutionRecord*> SolutionCorpus::filtered(CorpusFilter f) const {
  std::vector<const SolutionRecord*> out;
  if (f == CorpusFilter::All) {
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(&r);
    return out;
  }
  std::map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (f == CorpusFilter::Complete && records[i].partial) continue;
    last[records[i].problem] = i;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = last.find(records[i].problem);
    if (it != last.end() && it->second == i) out.push_back(&records[i]);
  }
  return out;
}

const SolutionRecord* SolutionCorpus::find_latest(const std::string& problem) const {
  for (auto it = records.rbegin(); it != records.rend(); ++it)
    if (it->problem == problem) return &*it;
  return nullptr;
}

namespace {

char symbol_code(SymKind k) {
  switch (k) {
    case SymKind::Terminal:
      return 't';
    case SymKind::NonTerminal:
      return 'n';
    case SymKind::Procedural:
      return 'p';
    case SymKind::ScopeBegin:
      return 'b';
    case SymKind::ScopeEnd:
      return 'e';
  }
  return 't';
}

GrammarSymbol symbol_from_code(const std::string& code, std::string text) {
  if (code.size() != 1) throw GrammarError("corpus: bad symbol kind '" + code + "'");
  switch (code[0]) {
    case 't':
      return term(std::move(text));
    case 'n':
      return nt(std::move(text));
    case 'p':
      return proc_nt(std::move(text));
    case 'b':
      return scope_begin();
    case 'e':
      return scope_end();
    default:
      throw GrammarError("corpus: bad symbol kind '" + code + "'");
  }
}

json record_to_json(const SolutionRecord& r) {
  json j;
  j["problem"] = r.problem;
  j["params"] = r.params;
  j["definition"] = r.definition;
  j["partial"] = r.partial;
  j["pairs"] = r.pairs_covered;
  j["trials"] = r.trials;
  j["fuel"] = r.fuel_used;
  json steps = json::array();
  for (const auto& s : r.trace) {
    json body = json::array();
    for (const auto& sym : s.body)
      body.push_back(json::array({std::string(1, symbol_code(sym.kind)), sym.text}));
    steps.push_back(json{{"head", s.head}, {"prob", s.prob}, {"body", std::move(body)}});
  }
  j["trace"] = std::move(steps);
  return j;
}

SolutionRecord record_from_json(const json& j) {
  SolutionRecord r;
  r.problem = j.at("problem").get<std::string>();
  r.params = j.at("params").get<std::vector<std::string>>();
  r.definition = j.at("definition").get<std::string>();
  r.partial = j.at("partial").get<bool>();
  r.pairs_covered = j.at("pairs").get<int>();
  r.trials = j.at("trials").get<long long>();
  r.fuel_used = j.at("fuel").get<long long>();
  for (const auto& s : j.at("trace")) {
    TraceStep step;
    step.head = s.at("head").get<std::string>();
    step.prob = s.at("prob").get<double>();
    for (const auto& sym : s.at("body"))
      step.body.push_back(
          symbol_from_code(sym.at(0).get<std::string>(), sym.at(1).get<std::string>()));
    r.trace.push_back(std::move(step));
  }
  return r;
}

}  // namespace

std::string save_corpus(const SolutionCorpus& corpus) {
  std::string out;
  for (const auto& r : corpus.records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

SolutionCorpus load_corpus(const std::string& text) {
  SolutionCorpus corpus;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw GrammarError("corpus line " + std::to_string(lineno) + ": not valid JSON");
    try {
      corpus.records.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw GrammarError("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

void save_corpus_file(const SolutionCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GrammarError("cannot write corpus file: " + path);
  out << save_corpus(corpus);
  if (!out) throw GrammarError("failed writing corpus file: " + path);
}

SolutionCorpus load_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GrammarError("cannot read corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_corpus(buf.str());
}

Grammar update_probabilities(Grammar g, const SolutionCorpus& corpus, double alpha,
                             CorpusFilter filter) {
  if (alpha < 0.0 || alpha > 1.0) throw GrammarError("alpha must lie in [0, 1]");
  // Usage tallies per head over rendered bodies.
  std::map<std::string, std::map<std::string, long long>> counts;
  for (const SolutionRecord* rec : corpus.filtered(filter)) {
    for (const TraceStep& s : rec->trace) {
      if (s.head.empty()) continue;
      const GrammarHead* head = g.find(s.head);
      if (head == nullptr) continue;  // procedural or no longer in the grammar
      std::string rendered = render_body(s.body);
      bool known = std::any_of(head->prods.begin(), head->prods.end(),
                               [&](const Production& p) { return render_body(p.body) == rendered; });
      if (!known) continue;  // stale production from an older grammar
      ++counts[s.head][rendered];
    }
  }
  // Re-use routes are structural, not evidence-driven: a production that just
  // forwards into a gamma-managed head keeps its mass fixed, and observation
  // redistributes only the remainder. Otherwise the route decays to nothing
  // before there is any stored solution to reach through it.
  auto reserved = [](const Production& p) {
    std::string body = render_body(p.body);
    return body == "<previous-solution>" || body == "<!solution-corpus>";
  };
  for (const auto& [name, tally] : counts) {
    GrammarHead* head = g.find(name);
    double reserved_mass = 0.0;
    for (const Production& p : head->prods)
      if (reserved(p)) reserved_mass += p.prob;
    if (reserved_mass >= 1.0) continue;
    long long total = 0;
    for (const auto& [body, n] : tally) total += n;
    for (const Production& p : head->prods)
      if (reserved(p)) {
        auto it = tally.find(render_body(p.body));
        if (it != tally.end()) total -= it->second;
      }
    if (total == 0) continue;
    // Tiny floor so an unobserved production stays reachable even at the
    // alpha = 1 extreme; inert at the operating alpha.
    constexpr double kMinProb = 1e-12;
    double sum = 0.0;
    for (Production& p : head->prods) {
      if (reserved(p)) continue;
      auto it = tally.find(render_body(p.body));
      double p_t = it == tally.end() ? 0.0 : double(it->second) / double(total);
      double p_old = p.prob / (1.0 - reserved_mass);
      p.prob = std::max(alpha * p_t + (1.0 - alpha) * p_old, kMinProb);
      sum += p.prob;
    }
    if (sum <= 0.0) throw GrammarError("head <" + name + "> lost all probability mass");
    for (Production& p : head->prods)
      if (!reserved(p)) p.prob *= (1.0 - reserved_mass) / sum;
  }
  g.canonicalize();
  auto errs = validate(g);
  if (!errs.empty()) throw GrammarError("updated grammar invalid: " + errs.front());
  return g;
}

Grammar gamma_insert(Grammar g, const std::string& head, std::vector<GrammarSymbol> body,
                     double gamma) {
  if (gamma <= 0.0 || gamma >= 1.0) throw GrammarError("gamma must lie in (0, 1)");
  GrammarHead& h = g.declare(head);
  if (h.prods.empty()) {
    h.prods.push_back({std::move(body), 1.0});
  } else {
    for (Production& p : h.prods) p.prob *= 1.0 - gamma;
    h.prods.push_back({std::move(body), gamma});
  }
  g.canonicalize();
  auto errs = validate(g);
  if (!errs.empty()) throw GrammarError("insertion into <" + head + "> left the grammar invalid: " +
                                        errs.front());
  return g;
}

std::vector<GrammarSymbol> solution_call_body(const std::string& name, int arity) {
  std::vector<GrammarSymbol> body;
  body.push_back(term("("));
  body.push_back(term(name));
  for (int i = 0; i < arity; ++i) body.push_back(nt("expression"));
  body.push_back(term(")"));
  return body;
}

bool has_solution_production(const Grammar& g, const std::string& name) {
  const GrammarHead* head = g.find("previous-solution");
  if (head == nullptr) return false;
  for (const Production& p : head->prods)
    if (p.body.size() >= 2 && p.body[1] == term(name)) return true;
  return false;
}

Grammar add_solution(Grammar g, const std::string& name, int arity, double gamma) {
  if (has_solution_production(g, name))
    throw GrammarError("solution '" + name + "' is already in the grammar");
  return gamma_insert(std::move(g), "previous-solution", solution_call_body(name, arity), gamma);
}

Grammar add_idiom(Grammar g, const std::string& head, std::vector<GrammarSymbol> body,
                  double gamma) {
  if (body.empty()) throw GrammarError("idiom body is empty");
  for (const GrammarSymbol& s : body) {
    if (s.kind == SymKind::NonTerminal && !g.is_declared(s.text))
      throw GrammarError("idiom references undefined <" + s.text + ">");
    if (s.kind == SymKind::Procedural && Grammar::procedural_names().count(s.text) == 0)
      throw GrammarError("idiom references unknown procedural <!" + s.text + ">");
  }
  if (const GrammarHead* h = g.find(head)) {
    std::string rendered = render_body(body);
    for (const Production& p : h->prods)
      if (render_body(p.body) == rendered) return g;  // already known
  }
  return gamma_insert(std::move(g), head, std::move(body), gamma);
}

namespace {

GrammarSymbol frontier_symbol(const DerivationTree::Node& n) {
  if (n.terminal) return term(n.token);
  if (n.marker) {
    if (n.label == "@begin") return scope_begin();
    if (n.label == "@end") return scope_end();
    return proc_nt(n.label);  // activation marker
  }
  if (Grammar::procedural_names().count(n.label) != 0) return proc_nt(n.label);
  return nt(n.label);
}

// Frontier of the subtree at `root` with every maximal internal node of
// height <= level collapsed into its non-terminal label.
std::vector<GrammarSymbol> pruned_frontier(const DerivationTree& tree,
                                           const std::vector<int>& height, std::size_t root,
                                           int level) {
  std::vector<GrammarSymbol> out;
  std::vector<std::size_t> stack;
  const auto& nodes = tree.nodes;
  for (auto it = nodes[root].children.rbegin(); it != nodes[root].children.rend(); ++it)
    stack.push_back(*it);
  while (!stack.empty()) {
    std::size_t id = stack.back();
    stack.pop_back();
    const auto& n = nodes[id];
    bool collapse = !n.expanded || height[id] <= level;
    if (n.terminal || n.marker || collapse) {
      out.push_back(frontier_symbol(n));
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool degenerate_frontier(const std::vector<GrammarSymbol>& body) {
  bool has_term = false, has_nt = false;
  for (const auto& s : body) {
    if (s.kind == SymKind::Terminal) has_term = true;
    if (s.kind == SymKind::NonTerminal || s.kind == SymKind::Procedural) has_nt = true;
  }
  return !(has_term && has_nt);
}

}  // namespace

std::vector<std::pair<std::string, std::vector<GrammarSymbol>>> extract_idioms(
    const DerivationTree& tree, int level) {
  std::vector<std::pair<std::string, std::vector<GrammarSymbol>>> out;
  if (tree.nodes.empty()) return out;
  // Children always carry larger indices than their parent, so one reverse
  // sweep computes heights.
  std::vector<int> height(tree.nodes.size(), 0);
  for (std::size_t i = tree.nodes.size(); i-- > 0;) {
    int h = 0;
    for (std::size_t c : tree.nodes[i].children) h = std::max(h, height[c] + 1);
    height[i] = h;
  }

  std::vector<std::size_t> roots{std::size_t(tree.root)};
  // The topmost expression node, preorder; skip it when it is the tree root.
  std::vector<std::size_t> stack{std::size_t(tree.root)};
  while (!stack.empty()) {
    std::size_t id = stack.back();
    stack.pop_back();
    const auto& n = tree.nodes[id];
    if (!n.terminal && !n.marker && n.expanded && n.label == "expression") {
      if (id != std::size_t(tree.root)) roots.push_back(id);
      break;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }

  for (std::size_t root : roots) {
    if (!tree.nodes[root].expanded || height[root] <= level) continue;
    auto body = pruned_frontier(tree, height, root, level);
    if (degenerate_frontier(body)) continue;
    out.emplace_back(tree.nodes[root].label, std::move(body));
  }
  return out;
}

namespace {

std::string symbol_text(const Ref& e) {
  return Symbols::name(std::get<SymbolVal>(e->v).id);
}

int count_atoms(const Ref& e) {
  int n = 0;
  std::vector<Ref> stack{e};
  while (!stack.empty()) {
    Ref cur = std::move(stack.back());
    stack.pop_back();
    if (is_pair(cur)) {
      const auto& p = std::get<PairVal>(cur->v);
      stack.push_back(p.car);
      if (!is_nil(p.cdr)) stack.push_back(p.cdr);
    } else if (is_vector(cur)) {
      for (const Ref& item : std::get<VectorVal>(cur->v).items) stack.push_back(item);
    } else {
      ++n;
    }
  }
  return n;
}

// Collects every complete sub-expression in expression position. Quote
// payloads and binder slots (formal lists, definition names, do/letrec
// bound variables) are data, not expressions, and are skipped.
void expression_positions(const Ref& e, std::vector<Ref>& out) {
  if (!is_pair(e)) return;
  auto items = list_to_vector(e);
  if (!items) return;  // improper list: quoted data, not an expression
  const auto& v = *items;
  std::string head = !v.empty() && is_symbol(v[0]) ? symbol_text(v[0]) : "";

  if (head == "quote") {
    out.push_back(e);
    return;
  }
  if (head == "lambda") {
    out.push_back(e);
    for (std::size_t i = 2; i < v.size(); ++i) expression_positions(v[i], out);
    return;
  }
  if (head == "define") {
    // Not itself an expression; its name/signature slot is a binder.
    for (std::size_t i = 2; i < v.size(); ++i) expression_positions(v[i], out);
    return;
  }
  if (head == "set!") {
    out.push_back(e);
    for (std::size_t i = 2; i < v.size(); ++i) expression_positions(v[i], out);
    return;
  }
  if (head == "letrec" || head == "let" || head == "let*" || head == "do") {
    out.push_back(e);
    std::size_t body_at = 2;
    if (v.size() > 1) {
      auto binds = list_to_vector(v[1]);
      if (binds) {
        for (const Ref& b : *binds) {
          auto parts = list_to_vector(b);
          if (!parts) continue;
          // (name init) or (name init step): everything after the name.
          for (std::size_t i = 1; i < parts->size(); ++i)
            expression_positions((*parts)[i], out);
        }
      }
    }
    for (std::size_t i = body_at; i < v.size(); ++i) expression_positions(v[i], out);
    return;
  }
  if (head == "cond" || head == "case") {
    out.push_back(e);
    for (std::size_t i = head == "case" ? 2 : 1; i < v.size(); ++i) {
      auto clause = list_to_vector(v[i]);
      if (!clause) continue;
      for (std::size_t k = 0; k < clause->size(); ++k) {
        const Ref& part = (*clause)[k];
        if (k == 0 && is_symbol(part) && symbol_text(part) == "else") continue;
        if (k == 0 && head == "case") continue;  // datum list
        expression_positions(part, out);
      }
    }
    return;
  }
  // if / and / or / begin / calls: every element is an expression.
  out.push_back(e);
  for (const Ref& item : v) expression_positions(item, out);
}

}  // namespace

std::vector<MinedSubprogram> mine_subprograms(const std::vector<const SolutionRecord*>& records,
                                              int support) {
  if (support < 1) support = 1;
  std::map<std::string, MinedSubprogram> tally;
  for (const SolutionRecord* rec : records) {
    Ref define_form;
    try {
      define_form = read_one(rec->definition);
    } catch (const SyntaxError&) {
      continue;
    }
    std::vector<Ref> positions;
    expression_positions(define_form, positions);
    std::map<std::string, Ref> seen;  // once per solution
    for (const Ref& p : positions) {
      if (count_atoms(p) < 3) continue;
      seen.emplace(print(p), p);
    }
    for (auto& [text, expr] : seen) {
      auto [it, fresh] = tally.try_emplace(text);
      if (fresh) {
        it->second.text = text;
        it->second.expr = expr;
        it->second.atoms = count_atoms(expr);
      }
      ++it->second.count;
    }
  }

  std::vector<MinedSubprogram> survivors;
  for (auto& [text, m] : tally)
    if (m.count >= support) survivors.push_back(std::move(m));
  // Largest first so containment against accepted results drops non-maximal
  // repeats with the same frequency.
  std::sort(survivors.begin(), survivors.end(), [](const auto& a, const auto& b) {
    if (a.atoms != b.atoms) return a.atoms > b.atoms;
    return a.text < b.text;
  });
  std::vector<MinedSubprogram> out;
  std::vector<std::unordered_set<std::string>> inner;  // texts inside out[i]
  for (auto& m : survivors) {
    bool shadowed = false;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].count != m.count) continue;
      if (inner[i].count(m.text) != 0) {
        shadowed = true;
        break;
      }
    }
    if (shadowed) continue;
    std::vector<Ref> positions;
    expression_positions(m.expr, positions);
    std::unordered_set<std::string> texts;
    for (const Ref& p : positions) texts.insert(print(p));
    texts.erase(m.text);
    out.push_back(std::move(m));
    inner.push_back(std::move(texts));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.atoms != b.atoms) return a.atoms > b.atoms;
    return a.text < b.text;
  });
  return out;
}

namespace {

bool closed_rec(const Ref& e, const std::unordered_set<std::string>& globals,
                std::vector<std::string>& bound);

bool closed_body(const std::vector<Ref>& forms, std::size_t from,
                 const std::unordered_set<std::string>& globals,
                 std::vector<std::string>& bound) {
  // Internal definitions scope over the whole body (letrec-style).
  std::size_t pushed = 0;
  for (std::size_t i = from; i < forms.size(); ++i) {
    const Ref& f = forms[i];
    if (!is_pair(f)) continue;
    auto items = list_to_vector(f);
    if (!items || items->size() < 2) continue;
    const auto& v = *items;
    if (!is_symbol(v[0]) || symbol_text(v[0]) != "define") continue;
    Ref target = v[1];
    if (is_pair(target)) target = std::get<PairVal>(target->v).car;
    if (!is_symbol(target)) return false;
    bound.push_back(symbol_text(target));
    ++pushed;
  }
  bool ok = true;
  for (std::size_t i = from; i < forms.size() && ok; ++i)
    ok = closed_rec(forms[i], globals, bound);
  bound.resize(bound.size() - pushed);
  return ok;
}

bool push_formals(const Ref& formals, std::vector<std::string>& bound, std::size_t& pushed) {
  Ref cur = formals;
  while (is_pair(cur)) {
    const auto& p = std::get<PairVal>(cur->v);
    if (!is_symbol(p.car)) return false;
    bound.push_back(symbol_text(p.car));
    ++pushed;
    cur = p.cdr;
  }
  if (is_symbol(cur)) {
    bound.push_back(symbol_text(cur));
    ++pushed;
    return true;
  }
  return is_nil(cur);
}

bool closed_rec(const Ref& e, const std::unordered_set<std::string>& globals,
                std::vector<std::string>& bound) {
  if (is_symbol(e)) {
    std::string name = symbol_text(e);
    if (std::find(bound.rbegin(), bound.rend(), name) != bound.rend()) return true;
    return globals.count(name) != 0;
  }
  if (!is_pair(e)) return true;  // self-evaluating datum
  auto items = list_to_vector(e);
  if (!items || items->empty()) return false;
  const auto& v = *items;
  std::string head = is_symbol(v[0]) ? symbol_text(v[0]) : "";

  if (head == "quote") return v.size() == 2;
  if (head == "lambda") {
    if (v.size() < 3) return false;
    std::size_t pushed = 0;
    bool ok = push_formals(v[1], bound, pushed) && closed_body(v, 2, globals, bound);
    bound.resize(bound.size() - pushed);
    return ok;
  }
  if (head == "define") {
    if (v.size() < 3) return false;
    std::size_t pushed = 0;
    bool ok;
    if (is_pair(v[1])) {
      const auto& sig = std::get<PairVal>(v[1]->v);
      if (!is_symbol(sig.car)) return false;
      bound.push_back(symbol_text(sig.car));
      ++pushed;
      ok = push_formals(sig.cdr, bound, pushed) && closed_body(v, 2, globals, bound);
    } else if (is_symbol(v[1])) {
      bound.push_back(symbol_text(v[1]));
      ++pushed;
      ok = v.size() == 3 && closed_rec(v[2], globals, bound);
    } else {
      return false;
    }
    bound.resize(bound.size() - pushed);
    return ok;
  }
  if (head == "set!") {
    if (v.size() != 3 || !is_symbol(v[1])) return false;
    return closed_rec(v[1], globals, bound) && closed_rec(v[2], globals, bound);
  }
  if (head == "letrec") {
    if (v.size() < 3 || !(is_pair(v[1]) || is_nil(v[1]))) return false;
    auto binds = list_to_vector(v[1]);
    if (!binds) return false;
    std::size_t pushed = 0;
    bool ok = true;
    for (const Ref& b : *binds) {
      auto parts = list_to_vector(b);
      if (!parts || parts->size() != 2 || !is_symbol((*parts)[0])) {
        ok = false;
        break;
      }
      bound.push_back(symbol_text((*parts)[0]));
      ++pushed;
    }
    if (ok)
      for (const Ref& b : *binds) {
        auto parts = list_to_vector(b);
        if (!closed_rec((*parts)[1], globals, bound)) {
          ok = false;
          break;
        }
      }
    ok = ok && closed_body(v, 2, globals, bound);
    bound.resize(bound.size() - pushed);
    return ok;
  }
  if (head == "do") {
    if (v.size() < 3) return false;
    auto binds = list_to_vector(v[1]);
    if (!binds) return false;
    std::vector<std::string> names;
    for (const Ref& b : *binds) {
      auto parts = list_to_vector(b);
      if (!parts || parts->size() < 2 || parts->size() > 3 || !is_symbol((*parts)[0]))
        return false;
      if (!closed_rec((*parts)[1], globals, bound)) return false;  // init: outer scope
      names.push_back(symbol_text((*parts)[0]));
    }
    std::size_t pushed = names.size();
    for (auto& n : names) bound.push_back(std::move(n));
    bool ok = true;
    for (const Ref& b : *binds) {
      auto parts = list_to_vector(b);
      if (parts->size() == 3 && !closed_rec((*parts)[2], globals, bound)) ok = false;
    }
    auto test = list_to_vector(v[2]);
    if (!test || test->empty()) ok = false;
    if (ok)
      for (const Ref& t : *test)
        if (!closed_rec(t, globals, bound)) ok = false;
    for (std::size_t i = 3; i < v.size() && ok; ++i) ok = closed_rec(v[i], globals, bound);
    bound.resize(bound.size() - pushed);
    return ok;
  }
  if (head == "cond") {
    for (std::size_t i = 1; i < v.size(); ++i) {
      auto clause = list_to_vector(v[i]);
      if (!clause || clause->empty()) return false;
      for (std::size_t k = 0; k < clause->size(); ++k) {
        const Ref& part = (*clause)[k];
        if (k == 0 && is_symbol(part) && symbol_text(part) == "else") continue;
        if (!closed_rec(part, globals, bound)) return false;
      }
    }
    return true;
  }
  if (head == "if" || head == "and" || head == "or" || head == "begin") {
    if (head == "begin") return closed_body(v, 1, globals, bound);
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!closed_rec(v[i], globals, bound)) return false;
    return true;
  }
  // Unknown special forms are treated as open rather than mis-scoped.
  static const std::unordered_set<std::string> unhandled = {
      "let", "let*", "case", "delay", "quasiquote", "unquote", "unquote-splicing"};
  if (unhandled.count(head) != 0) return false;
  for (const Ref& item : v)
    if (!closed_rec(item, globals, bound)) return false;
  return true;
}

}  // namespace

bool expression_is_closed(const Ref& expr, const std::unordered_set<std::string>& globals) {
  std::vector<std::string> bound;
  return closed_rec(expr, globals, bound);
}

std::unordered_set<std::string> global_names() {
  std::unordered_set<std::string> names;
  for (const PrimitiveDef& def : Machine::primitive_table()) names.insert(def.name);
  for (const char* kw : {"quote", "lambda", "define", "set!", "if", "and", "or", "begin", "cond",
                         "case", "let", "let*", "letrec", "do", "delay", "else", "=>"})
    names.insert(kw);
  return names;
}

std::vector<ReusableSolution> reusable_view(const SolutionCorpus& corpus, CorpusFilter filter) {
  std::vector<ReusableSolution> out;
  for (const SolutionRecord* rec : corpus.filtered(filter)) {
    ReusableSolution r;
    r.name = rec->problem;
    r.call_body = solution_call_body(rec->problem, int(rec->params.size()));
    r.definition_tokens = tokenize_datum(read_one(rec->definition));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace glsearch
