#include "glsearch/derive.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace glsearch {

// ---------------------------------------------------------------------------
// StaticEnv

StaticEnv::Frame::~Frame() {
  // unlink the parent chain iteratively; frames can nest deeply
  auto p = std::move(parent);
  while (p && p.use_count() == 1) {
    auto keep = std::move(const_cast<Frame&>(*p).parent);
    p = std::move(keep);
  }
}

StaticEnv::StaticEnv() : top_(std::make_shared<Frame>()) {}

StaticEnv StaticEnv::with_parameters(const std::vector<std::string>& params) {
  StaticEnv env;
  auto f = std::make_shared<Frame>();
  f->active = params;
  env.top_ = std::move(f);
  return env;
}

StaticEnv StaticEnv::pushed() const {
  StaticEnv env;
  auto f = std::make_shared<Frame>();
  f->parent = top_;
  env.top_ = std::move(f);
  return env;
}

StaticEnv StaticEnv::popped() const {
  if (!top_->parent) throw GrammarError("scope pop without matching push");
  StaticEnv env;
  env.top_ = top_->parent;
  return env;
}

StaticEnv StaticEnv::declared(const std::string& name) const {
  StaticEnv env;
  auto f = std::make_shared<Frame>(*top_);
  f->pending.push_back(name);
  env.top_ = std::move(f);
  return env;
}

StaticEnv StaticEnv::activated() const {
  if (top_->pending.empty()) throw GrammarError("activation without a pending name");
  StaticEnv env;
  auto f = std::make_shared<Frame>(*top_);
  f->active.push_back(f->pending.front());
  f->pending.erase(f->pending.begin());
  env.top_ = std::move(f);
  return env;
}

StaticEnv StaticEnv::with_solution(const std::string& name) const {
  StaticEnv env;
  auto f = std::make_shared<Frame>(*top_);
  f->active.push_back(name);
  f->solutions.push_back(name);
  env.top_ = std::move(f);
  return env;
}

bool StaticEnv::has_pending() const { return !top_->pending.empty(); }

bool StaticEnv::bound_in_top(const std::string& name) const {
  const Frame& f = *top_;
  return std::find(f.active.begin(), f.active.end(), name) != f.active.end() ||
         std::find(f.pending.begin(), f.pending.end(), name) != f.pending.end();
}

std::vector<std::string> StaticEnv::visible() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const Frame* f = top_.get(); f; f = f->parent.get()) {
    for (const auto& name : f->active) {
      if (seen.insert(name).second) out.push_back(name);
    }
  }
  return out;
}

std::vector<std::string> StaticEnv::visible_solutions() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const Frame* f = top_.get(); f; f = f->parent.get()) {
    for (const auto& name : f->solutions) {
      if (seen.insert(name).second) out.push_back(name);
    }
  }
  return out;
}

std::size_t StaticEnv::depth() const {
  std::size_t n = 0;
  for (const Frame* f = top_.get(); f; f = f->parent.get()) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// SententialForm nodes

SententialForm::SymNode::~SymNode() {
  auto n = std::move(next);
  while (n && n.use_count() == 1) {
    auto keep = std::move(const_cast<SymNode&>(*n).next);
    n = std::move(keep);
  }
}

SententialForm::TraceNode::~TraceNode() {
  auto n = std::move(prev);
  while (n && n.use_count() == 1) {
    auto keep = std::move(const_cast<TraceNode&>(*n).prev);
    n = std::move(keep);
  }
}

namespace {

using SymPtr = std::shared_ptr<const SententialForm::SymNode>;

SymPtr splice(const std::vector<GrammarSymbol>& body, SymPtr rest) {
  SymPtr head = std::move(rest);
  for (auto it = body.rbegin(); it != body.rend(); ++it) {
    auto node = std::make_shared<SententialForm::SymNode>();
    node->sym = *it;
    node->next = std::move(head);
    head = std::move(node);
  }
  return head;
}

// Consumes terminals and scope bookkeeping at the left edge so that the
// leftmost pending symbol is always expandable (or the form is a sentence).
void normalize(SententialForm& f) {
  while (f.pending) {
    const GrammarSymbol& s = f.pending->sym;
    switch (s.kind) {
      case SymKind::Terminal:
        f.pending = f.pending->next;
        break;
      case SymKind::ScopeBegin:
        f.env = f.env.pushed();
        f.pending = f.pending->next;
        break;
      case SymKind::ScopeEnd:
        f.env = f.env.popped();
        f.pending = f.pending->next;
        break;
      case SymKind::Procedural:
        if (s.text == "activate") {
          f.env = f.env.activated();
          f.pending = f.pending->next;
          break;
        }
        return;
      default:
        return;
    }
  }
}

void push_trace(SententialForm& f, const std::string& head, std::vector<GrammarSymbol> body,
                double prob) {
  auto node = std::make_shared<SententialForm::TraceNode>();
  node->step = TraceStep{head, std::move(body), prob};
  node->prev = std::move(f.trace);
  f.trace = std::move(node);
}

struct Alternative {
  std::vector<GrammarSymbol> body;
  double prob;
  std::optional<StaticEnv> env;  // replaces the form's env when set
};

SententialForm make_child(const SententialForm& f, SymPtr rest, const std::string& head,
                          std::vector<GrammarSymbol> body, double prob,
                          std::optional<StaticEnv> env) {
  SententialForm child;
  child.pending = splice(body, std::move(rest));
  child.prob = f.prob * prob;
  child.env = env ? std::move(*env) : f.env;
  child.trace = f.trace;
  push_trace(child, head, std::move(body), prob);
  normalize(child);
  return child;
}

}  // namespace

SententialForm start_form(const std::string& start, const std::vector<std::string>& params) {
  SententialForm f;
  f.env = StaticEnv::with_parameters(params);
  std::vector<GrammarSymbol> body{nt(start)};
  f.pending = splice(body, nullptr);
  push_trace(f, "", std::move(body), 1.0);
  normalize(f);
  return f;
}

bool is_sentence(const SententialForm& f) { return f.pending == nullptr; }

std::vector<std::pair<std::string, double>> gen_variable_reference(const StaticEnv& env) {
  std::vector<std::pair<std::string, double>> out;
  auto names = env.visible();
  if (names.empty()) return out;
  double p = 1.0 / static_cast<double>(names.size());
  out.reserve(names.size());
  for (auto& name : names) out.emplace_back(std::move(name), p);
  return out;
}

std::vector<std::tuple<std::string, double, StaticEnv>> gen_variable_definition(
    const StaticEnv& env, const ZetaTable& zeta) {
  std::vector<std::tuple<std::string, double, StaticEnv>> out;
  for (int k = 1; k <= zeta.n; ++k) {
    std::string name = "var" + std::to_string(k);
    if (env.bound_in_top(name)) continue;  // shadowing within one frame never pays
    StaticEnv declared = env.declared(name);
    out.emplace_back(std::move(name), zeta.p[static_cast<std::size_t>(k - 1)], std::move(declared));
  }
  return out;
}

std::vector<std::pair<const ReusableSolution*, double>> gen_previous_solution_call(
    const StaticEnv& env, const std::vector<ReusableSolution>& corpus) {
  std::vector<std::pair<const ReusableSolution*, double>> out;
  auto vis = env.visible_solutions();
  if (vis.empty()) return out;
  std::unordered_set<std::string> in_scope(vis.begin(), vis.end());
  for (const auto& sol : corpus) {
    if (in_scope.count(sol.name)) out.emplace_back(&sol, 0.0);
  }
  double p = 1.0 / static_cast<double>(out.size());
  for (auto& e : out) e.second = p;
  return out;
}

std::vector<SententialForm> expand_leftmost(const SententialForm& f, const DeriveContext& ctx,
                                            double p_h, bool* truncated) {
  std::vector<SententialForm> out;
  if (!f.pending) return out;
  const GrammarSymbol& sym = f.pending->sym;
  SymPtr rest = f.pending->next;

  std::vector<Alternative> alts;
  if (sym.kind == SymKind::NonTerminal) {
    if (ctx.corpus_route && sym.text == "previous-solution" && ctx.corpus) {
      for (auto& [sol, p] : gen_previous_solution_call(f.env, *ctx.corpus)) {
        alts.push_back({sol->call_body, p, std::nullopt});
      }
    } else {
      const GrammarHead* head = ctx.grammar.find(sym.text);
      if (!head) throw GrammarError("undefined non-terminal <" + sym.text + ">");
      for (const auto& prod : head->prods) {
        alts.push_back({prod.body, prod.prob, std::nullopt});
      }
    }
  } else if (sym.kind == SymKind::Procedural) {
    if (sym.text == "variable") {
      for (auto& [name, p] : gen_variable_reference(f.env)) {
        alts.push_back({{term(name)}, p, std::nullopt});
      }
    } else if (sym.text == "variable-definition") {
      for (auto& [name, p, env] : gen_variable_definition(f.env, ctx.zeta)) {
        alts.push_back({{term(name)}, p, std::move(env)});
      }
    } else if (sym.text == "uinteger-10") {
      for (int k = 1; k <= ctx.zeta.n; ++k) {
        alts.push_back({{term(std::to_string(k))}, ctx.zeta.p[static_cast<std::size_t>(k - 1)],
                        std::nullopt});
      }
    } else if (sym.text == "solution-corpus") {
      if (ctx.corpus_route && ctx.corpus) {
        auto vis = f.env.visible_solutions();
        std::unordered_set<std::string> in_scope(vis.begin(), vis.end());
        double p = 1.0 / static_cast<double>(ctx.corpus->size());
        for (const auto& sol : *ctx.corpus) {
          if (in_scope.count(sol.name)) {
            alts.push_back({{}, p, std::nullopt});  // already in scope: emit nothing
          } else {
            std::vector<GrammarSymbol> body;
            body.reserve(sol.definition_tokens.size());
            for (const auto& tok : sol.definition_tokens) body.push_back(term(tok));
            alts.push_back({std::move(body), p, f.env.with_solution(sol.name)});
          }
        }
      }
      // route 1: the hook stays inert and the branch prunes
    } else if (sym.text == "activate") {
      throw GrammarError("activation marker survived normalization");
    } else {
      throw GrammarError("unknown procedural non-terminal <!" + sym.text + ">");
    }
  } else {
    throw GrammarError("cannot expand a terminal symbol");
  }

  std::stable_sort(alts.begin(), alts.end(),
                   [](const Alternative& a, const Alternative& b) { return a.prob > b.prob; });

  out.reserve(alts.size());
  for (auto& alt : alts) {
    if (p_h > 0.0 && f.prob * alt.prob < p_h) {
      if (truncated) *truncated = true;
      continue;
    }
    out.push_back(make_child(f, rest, sym.text, std::move(alt.body), alt.prob, std::move(alt.env)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Traces, trees, tokens

std::vector<TraceStep> trace_steps(const SententialForm& f) {
  std::vector<TraceStep> out;
  for (const SententialForm::TraceNode* n = f.trace.get(); n; n = n->prev.get()) {
    if (!n->step.head.empty()) out.push_back(n->step);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

std::string form_start(const SententialForm& f) {
  const SententialForm::TraceNode* oldest = nullptr;
  for (const SententialForm::TraceNode* n = f.trace.get(); n; n = n->prev.get()) oldest = n;
  if (!oldest || !oldest->step.head.empty() || oldest->step.body.size() != 1)
    throw GrammarError("form has no start marker");
  return oldest->step.body[0].text;
}

}  // namespace

DerivationTree build_derivation_tree(const std::string& start, const std::vector<TraceStep>& steps) {
  DerivationTree tree;
  tree.nodes.push_back({start, "", false, false, false, {}});
  tree.root = 0;
  std::deque<int> open{0};
  for (const auto& step : steps) {
    if (open.empty()) throw GrammarError("trace continues past a complete tree");
    int id = open.front();
    open.pop_front();
    if (tree.nodes[static_cast<std::size_t>(id)].label != step.head)
      throw GrammarError("trace expands <" + step.head + "> but the leftmost open node is <" +
                         tree.nodes[static_cast<std::size_t>(id)].label + ">");
    tree.nodes[static_cast<std::size_t>(id)].expanded = true;
    std::vector<int> fresh;
    for (const auto& sym : step.body) {
      int cid = static_cast<int>(tree.nodes.size());
      switch (sym.kind) {
        case SymKind::Terminal:
          tree.nodes.push_back({"", sym.text, true, false, false, {}});
          break;
        case SymKind::ScopeBegin:
          tree.nodes.push_back({"@begin", "", false, true, false, {}});
          break;
        case SymKind::ScopeEnd:
          tree.nodes.push_back({"@end", "", false, true, false, {}});
          break;
        case SymKind::Procedural:
          // activation markers are consumed during normalization and never
          // get a trace step of their own
          if (sym.text == "activate") {
            tree.nodes.push_back({"activate", "", false, true, false, {}});
          } else {
            tree.nodes.push_back({sym.text, "", false, false, false, {}});
            fresh.push_back(cid);
          }
          break;
        default:
          tree.nodes.push_back({sym.text, "", false, false, false, {}});
          fresh.push_back(cid);
          break;
      }
      tree.nodes[static_cast<std::size_t>(id)].children.push_back(cid);
    }
    for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) open.push_front(*it);
  }
  return tree;
}

std::vector<std::string> DerivationTree::leaf_tokens() const {
  std::vector<std::string> out;
  if (root < 0) return out;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const Node& node = nodes[static_cast<std::size_t>(id)];
    if (!node.children.empty()) {
      for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(*it);
      continue;
    }
    if (node.marker || node.expanded) continue;  // zero-width or epsilon
    if (node.terminal)
      out.push_back(node.token);
    else
      out.push_back("<" + node.label + ">");  // unexpanded: reads as its label
  }
  return out;
}

std::vector<std::string> replay_tokens(const std::string& start, const std::vector<TraceStep>& steps) {
  return build_derivation_tree(start, steps).leaf_tokens();
}

std::vector<std::string> sentence_tokens(const SententialForm& f) {
  if (!is_sentence(f)) throw GrammarError("form is not a sentence");
  return replay_tokens(form_start(f), trace_steps(f));
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  bool in_string = false;
  for (const auto& tok : tokens) {
    if (tok == "\"") {
      if (in_string) {
        out += '"';
      } else {
        if (!out.empty()) out += ' ';
        out += '"';
      }
      in_string = !in_string;
    } else if (in_string) {
      out += tok;
    } else {
      if (!out.empty()) out += ' ';
      out += tok;
    }
  }
  return out;
}

std::vector<Ref> tokens_to_program(const std::vector<std::string>& tokens) {
  std::string text = join_tokens(tokens);
  try {
    return read(text);
  } catch (const SyntaxError& e) {
    throw GrammarError("generated sentence does not parse: " + std::string(e.what()) + " in: " + text);
  }
}

std::vector<std::string> tokenize_datum(const Ref& datum) {
  std::vector<std::string> out;
  struct Item {
    Ref ref;        // null for a literal token
    std::string tok;
  };
  std::vector<Item> stack{{datum, ""}};
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    if (!item.ref) {
      out.push_back(std::move(item.tok));
      continue;
    }
    const Ref& r = item.ref;
    if (is_pair(r)) {
      std::vector<Item> parts;
      parts.push_back({nullptr, "("});
      Ref cur = r;
      while (is_pair(cur)) {
        parts.push_back({as_pair(cur).car, ""});
        cur = as_pair(cur).cdr;
      }
      if (!is_nil(cur)) {
        parts.push_back({nullptr, "."});
        parts.push_back({cur, ""});
      }
      parts.push_back({nullptr, ")"});
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) stack.push_back(std::move(*it));
    } else if (is_vector(r)) {
      const auto& items = std::get<VectorVal>(r->v).items;
      stack.push_back({nullptr, ")"});
      for (auto it = items.rbegin(); it != items.rend(); ++it) stack.push_back({*it, ""});
      stack.push_back({nullptr, "#("});
    } else {
      out.push_back(print(r));
    }
  }
  return out;
}

std::optional<SententialForm> random_walk(const DeriveContext& ctx, const SententialForm& start,
                                          std::mt19937& rng, int max_expansions) {
  SententialForm form = start;
  for (int used = 0; used < max_expansions; ++used) {
    if (is_sentence(form)) return form;
    const GrammarSymbol& sym = form.pending->sym;
    // the wide procedural heads are sampled without materializing all
    // alternatives; everything else goes through the generic expansion
    if (sym.kind == SymKind::Procedural && sym.text == "uinteger-10") {
      std::discrete_distribution<int> pick(ctx.zeta.p.begin(), ctx.zeta.p.end());
      int k = pick(rng) + 1;
      form = make_child(form, form.pending->next, sym.text, {term(std::to_string(k))},
                        ctx.zeta.p[static_cast<std::size_t>(k - 1)], std::nullopt);
      continue;
    }
    if (sym.kind == SymKind::Procedural && sym.text == "variable-definition") {
      std::vector<double> weights;
      std::vector<int> ks;
      for (int k = 1; k <= ctx.zeta.n; ++k) {
        if (form.env.bound_in_top("var" + std::to_string(k))) continue;
        weights.push_back(ctx.zeta.p[static_cast<std::size_t>(k - 1)]);
        ks.push_back(k);
      }
      if (ks.empty()) {
        form = start;
        continue;
      }
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      std::size_t i = pick(rng);
      std::string name = "var" + std::to_string(ks[i]);
      form = make_child(form, form.pending->next, sym.text, {term(name)}, weights[i],
                        form.env.declared(name));
      continue;
    }
    auto alts = expand_leftmost(form, ctx, 0.0);
    if (alts.empty()) {
      form = start;  // dead end (e.g. an inert hook): restart within budget
      continue;
    }
    std::vector<double> weights;
    weights.reserve(alts.size());
    for (const auto& a : alts) weights.push_back(a.prob);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    form = std::move(alts[pick(rng)]);
  }
  if (is_sentence(form)) return form;
  return std::nullopt;
}

}  // namespace glsearch
