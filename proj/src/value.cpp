#include "glsearch/value.hpp"

#include <array>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <unordered_map>

#include "glsearch/machine.hpp"
#include "glsearch/numeric.hpp"

namespace glsearch {

namespace {

struct SymbolTable {
  std::vector<std::string> names;
  std::unordered_map<std::string, SymbolId> ids;
};

SymbolTable& symtab() {
  static SymbolTable t;
  return t;
}

}  // namespace

SymbolId Symbols::intern(const std::string& name) {
  auto& t = symtab();
  auto it = t.ids.find(name);
  if (it != t.ids.end()) return it->second;
  SymbolId id = static_cast<SymbolId>(t.names.size());
  t.names.push_back(name);
  t.ids.emplace(name, id);
  return id;
}

const std::string& Symbols::name(SymbolId id) { return symtab().names.at(id); }

// ---------------------------------------------------------------------------
// Object lifetime: long pair chains, deep vectors, closure-environment
// chains, and environment parent chains are torn down with an explicit
// worklist so destruction never overflows the C++ stack.

namespace {

struct Teardown {
  std::vector<Ref> refs;
  std::vector<FramePtr> frames;
};

void harvest_obj(Obj& o, Teardown& t) {
  if (auto* p = std::get_if<PairVal>(&o.v)) {
    if (p->car) t.refs.push_back(std::move(p->car));
    if (p->cdr) t.refs.push_back(std::move(p->cdr));
  } else if (auto* vec = std::get_if<VectorVal>(&o.v)) {
    for (auto& item : vec->items)
      if (item) t.refs.push_back(std::move(item));
    vec->items.clear();
  } else if (auto* vt = std::get_if<ValuesTuple>(&o.v)) {
    for (auto& item : vt->items)
      if (item) t.refs.push_back(std::move(item));
    vt->items.clear();
  } else if (auto* pr = std::get_if<PromiseVal>(&o.v)) {
    if (pr->thunk) t.refs.push_back(std::move(pr->thunk));
    if (pr->value) t.refs.push_back(std::move(pr->value));
  } else if (auto* cl = std::get_if<ClosureVal>(&o.v)) {
    if (cl->env) t.frames.push_back(std::move(cl->env));
  } else if (auto* eh = std::get_if<EnvHandle>(&o.v)) {
    if (eh->frame) t.frames.push_back(std::move(eh->frame));
  }
}

void harvest_frame(Frame& f, Teardown& t) {
  if (f.parent) t.frames.push_back(std::move(f.parent));
  for (auto& slot : f.slots)
    if (slot.second) t.refs.push_back(std::move(slot.second));
  f.slots.clear();
}

void drain(Teardown& t) {
  while (!t.refs.empty() || !t.frames.empty()) {
    if (!t.refs.empty()) {
      Ref r = std::move(t.refs.back());
      t.refs.pop_back();
      if (r && r.use_count() == 1) harvest_obj(*r, t);
    } else {
      FramePtr f = std::move(t.frames.back());
      t.frames.pop_back();
      if (f && f.use_count() == 1) harvest_frame(*f, t);
    }
  }
}

bool harvestable(const Obj& o) {
  return std::holds_alternative<PairVal>(o.v) || std::holds_alternative<VectorVal>(o.v) ||
         std::holds_alternative<ValuesTuple>(o.v) || std::holds_alternative<PromiseVal>(o.v) ||
         std::holds_alternative<ClosureVal>(o.v) || std::holds_alternative<EnvHandle>(o.v);
}

}  // namespace

Obj::~Obj() {
  if (!harvestable(*this)) return;
  Teardown t;
  harvest_obj(*this, t);
  drain(t);
}

Frame::~Frame() {
  Teardown t;
  harvest_frame(*this, t);
  drain(t);
}

// ---------------------------------------------------------------------------
// Constructors.

Ref nil() {
  static const Ref n = std::make_shared<Obj>(EmptyList{});
  return n;
}

Ref unspecified() {
  static const Ref u = std::make_shared<Obj>(Unspecified{});
  return u;
}

Ref boolean(bool b) {
  static const Ref t = std::make_shared<Obj>(true);
  static const Ref f = std::make_shared<Obj>(false);
  return b ? t : f;
}

Ref integer(long v) { return std::make_shared<Obj>(mpz_class(v)); }

Ref integer(const mpz_class& v) { return std::make_shared<Obj>(v); }

Ref rational(const mpq_class& v) {
  mpq_class q = v;
  q.canonicalize();
  if (q.get_den() == 1) return integer(q.get_num());
  return std::make_shared<Obj>(q);
}

Ref real(double v) { return std::make_shared<Obj>(v); }

Ref symbol(SymbolId id) { return std::make_shared<Obj>(SymbolVal{id}); }

Ref symbol(const std::string& name) { return symbol(Symbols::intern(name)); }

Ref character(char c) { return std::make_shared<Obj>(CharVal{c}); }

Ref string_value(std::string s) { return std::make_shared<Obj>(std::move(s)); }

Ref cons(Ref car, Ref cdr) { return std::make_shared<Obj>(PairVal{std::move(car), std::move(cdr)}); }

Ref vector_value(std::vector<Ref> items) { return std::make_shared<Obj>(VectorVal{std::move(items)}); }

Ref list(std::initializer_list<Ref> items) {
  Ref acc = nil();
  std::vector<Ref> v(items);
  for (auto it = v.rbegin(); it != v.rend(); ++it) acc = cons(*it, acc);
  return acc;
}

Ref list_from(const std::vector<Ref>& items) {
  Ref acc = nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) acc = cons(*it, acc);
  return acc;
}

bool is_datum(const Ref& r) {
  std::vector<const Obj*> work{r.get()};
  std::size_t seen = 0;
  while (!work.empty()) {
    const Obj* o = work.back();
    work.pop_back();
    if (++seen > (1u << 22)) throw SchemeError{ErrorKind::DomainError, "datum too large"};
    if (std::holds_alternative<ClosureVal>(o->v) || std::holds_alternative<PrimitiveVal>(o->v) ||
        std::holds_alternative<Unspecified>(o->v) || std::holds_alternative<Unassigned>(o->v) ||
        std::holds_alternative<PromiseVal>(o->v) || std::holds_alternative<ValuesTuple>(o->v) ||
        std::holds_alternative<EnvHandle>(o->v) || std::holds_alternative<ContinuationVal>(o->v))
      return false;
    if (auto* p = std::get_if<PairVal>(&o->v)) {
      work.push_back(p->car.get());
      work.push_back(p->cdr.get());
    } else if (auto* vec = std::get_if<VectorVal>(&o->v)) {
      for (const auto& item : vec->items) work.push_back(item.get());
    }
  }
  return true;
}

void deep_freeze(const Ref& r) {
  std::vector<Obj*> work{r.get()};
  while (!work.empty()) {
    Obj* o = work.back();
    work.pop_back();
    if (!o || o->frozen) continue;
    o->frozen = true;
    if (auto* p = std::get_if<PairVal>(&o->v)) {
      work.push_back(p->car.get());
      work.push_back(p->cdr.get());
    } else if (auto* vec = std::get_if<VectorVal>(&o->v)) {
      for (const auto& item : vec->items) work.push_back(item.get());
    }
  }
}

// ---------------------------------------------------------------------------
// Equivalence.

bool eqv(const Ref& a, const Ref& b) {
  if (a.get() == b.get()) return true;
  const auto& va = a->v;
  const auto& vb = b->v;
  if (va.index() != vb.index()) return false;
  if (auto* s = std::get_if<SymbolVal>(&va)) return s->id == std::get<SymbolVal>(vb).id;
  if (auto* z = std::get_if<mpz_class>(&va)) return *z == std::get<mpz_class>(vb);
  if (auto* q = std::get_if<mpq_class>(&va)) return *q == std::get<mpq_class>(vb);
  if (auto* d = std::get_if<double>(&va)) return *d == std::get<double>(vb);
  if (auto* bo = std::get_if<bool>(&va)) return *bo == std::get<bool>(vb);
  if (auto* c = std::get_if<CharVal>(&va)) return c->ch == std::get<CharVal>(vb).ch;
  if (std::holds_alternative<EmptyList>(va)) return true;
  if (std::holds_alternative<Unspecified>(va)) return true;
  if (std::holds_alternative<Unassigned>(va)) return true;
  if (auto* k = std::get_if<ContinuationVal>(&va)) return k->id == std::get<ContinuationVal>(vb).id;
  // strings, pairs, vectors, closures, primitives, promises: identity only
  return false;
}

bool structurally_equal(const Ref& a, const Ref& b, std::size_t max_nodes) {
  std::vector<std::pair<const Ref*, const Ref*>> work{{&a, &b}};
  std::size_t seen = 0;
  while (!work.empty()) {
    auto [pa, pb] = work.back();
    work.pop_back();
    if (++seen > max_nodes)
      throw SchemeError{ErrorKind::DomainError, "equal? traversal limit exceeded"};
    const Ref& x = *pa;
    const Ref& y = *pb;
    if (x.get() == y.get()) continue;
    if (auto* px = std::get_if<PairVal>(&x->v)) {
      auto* py = std::get_if<PairVal>(&y->v);
      if (!py) return false;
      work.push_back({&px->car, &py->car});
      work.push_back({&px->cdr, &py->cdr});
      continue;
    }
    if (auto* vx = std::get_if<VectorVal>(&x->v)) {
      auto* vy = std::get_if<VectorVal>(&y->v);
      if (!vy || vx->items.size() != vy->items.size()) return false;
      for (std::size_t i = 0; i < vx->items.size(); ++i)
        work.push_back({&vx->items[i], &vy->items[i]});
      continue;
    }
    if (auto* sx = std::get_if<std::string>(&x->v)) {
      auto* sy = std::get_if<std::string>(&y->v);
      if (!sy || *sx != *sy) return false;
      continue;
    }
    if (!eqv(x, y)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Printer. Canonical: read(print(e)) is structurally equal to e for datums.

namespace {

void print_atom(const Obj& o, std::string& out) {
  if (auto* s = std::get_if<SymbolVal>(&o.v)) {
    out += Symbols::name(s->id);
  } else if (auto* z = std::get_if<mpz_class>(&o.v)) {
    out += z->get_str();
  } else if (auto* q = std::get_if<mpq_class>(&o.v)) {
    out += q->get_num().get_str();
    out += '/';
    out += q->get_den().get_str();
  } else if (auto* d = std::get_if<double>(&o.v)) {
    out += format_double(*d);
  } else if (auto* b = std::get_if<bool>(&o.v)) {
    out += *b ? "#t" : "#f";
  } else if (auto* c = std::get_if<CharVal>(&o.v)) {
    if (c->ch == ' ')
      out += "#\\space";
    else if (c->ch == '\n')
      out += "#\\newline";
    else {
      out += "#\\";
      out += c->ch;
    }
  } else if (auto* s2 = std::get_if<std::string>(&o.v)) {
    out += '"';
    for (char ch : *s2) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    out += '"';
  } else if (std::holds_alternative<EmptyList>(o.v)) {
    out += "()";
  } else if (std::holds_alternative<Unspecified>(o.v)) {
    out += "#<unspecified>";
  } else if (std::holds_alternative<Unassigned>(o.v)) {
    out += "#<unassigned>";
  } else if (std::holds_alternative<ClosureVal>(o.v)) {
    out += "#<procedure>";
  } else if (auto* pr = std::get_if<PrimitiveVal>(&o.v)) {
    out += "#<primitive ";
    out += pr->def->name;
    out += '>';
  } else if (std::holds_alternative<PromiseVal>(o.v)) {
    out += "#<promise>";
  } else if (std::holds_alternative<ValuesTuple>(o.v)) {
    out += "#<values>";
  } else if (std::holds_alternative<EnvHandle>(o.v)) {
    out += "#<environment>";
  } else if (std::holds_alternative<ContinuationVal>(o.v)) {
    out += "#<continuation>";
  } else {
    out += "#<unknown>";
  }
}

}  // namespace

std::string print(const Ref& e) {
  // Work items: a value to render, or a literal piece of punctuation.
  struct Item {
    const Obj* obj;
    const char* text;
  };
  std::string out;
  std::vector<Item> work{{e.get(), nullptr}};
  std::size_t seen = 0;
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    if (it.text) {
      out += it.text;
      continue;
    }
    if (++seen > (1u << 22)) throw SchemeError{ErrorKind::DomainError, "print limit exceeded"};
    const Obj* o = it.obj;
    if (std::holds_alternative<PairVal>(o->v)) {
      out += '(';
      // Render the chain; the tail punctuation is pushed in reverse order.
      std::vector<Item> rev;
      const Obj* cur = o;
      while (true) {
        const auto& pv = std::get<PairVal>(cur->v);
        rev.push_back({pv.car.get(), nullptr});
        const Obj* tail = pv.cdr.get();
        if (std::holds_alternative<PairVal>(tail->v)) {
          rev.push_back({nullptr, " "});
          cur = tail;
          if (++seen > (1u << 22))
            throw SchemeError{ErrorKind::DomainError, "print limit exceeded"};
        } else if (std::holds_alternative<EmptyList>(tail->v)) {
          rev.push_back({nullptr, ")"});
          break;
        } else {
          rev.push_back({nullptr, " . "});
          rev.push_back({tail, nullptr});
          rev.push_back({nullptr, ")"});
          break;
        }
      }
      for (auto r = rev.rbegin(); r != rev.rend(); ++r) work.push_back(*r);
    } else if (auto* vec = std::get_if<VectorVal>(&o->v)) {
      out += "#(";
      std::vector<Item> rev;
      for (std::size_t i = 0; i < vec->items.size(); ++i) {
        if (i) rev.push_back({nullptr, " "});
        rev.push_back({vec->items[i].get(), nullptr});
      }
      rev.push_back({nullptr, ")"});
      for (auto r = rev.rbegin(); r != rev.rend(); ++r) work.push_back(*r);
    } else {
      print_atom(*o, out);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reader.

namespace {

struct Scanner {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  explicit Scanner(const std::string& t) : text(t) {}

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char peek2() const { return pos + 1 < text.size() ? text[pos + 1] : '\0'; }

  char advance() {
    char c = text[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, line, col); }

  void skip_atmosphere() {
    while (!eof()) {
      char c = peek();
      if (c == ';') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else {
        return;
      }
    }
  }
};

bool is_delimiter(char c) {
  return c == '(' || c == ')' || c == '"' || c == ';' || c == ' ' || c == '\t' || c == '\n' ||
         c == '\r' || c == '\f' || c == '\v';
}

Ref parse_datum(Scanner& s, int depth);

Ref parse_list(Scanner& s, int depth) {
  // '(' already consumed
  std::vector<Ref> items;
  Ref tail = nil();
  while (true) {
    s.skip_atmosphere();
    if (s.eof()) s.fail("unterminated list");
    if (s.peek() == ')') {
      s.advance();
      break;
    }
    if (s.peek() == '.' && (s.pos + 1 >= s.text.size() || is_delimiter(s.peek2()))) {
      if (items.empty()) s.fail("dotted pair needs a head");
      s.advance();
      tail = parse_datum(s, depth);
      s.skip_atmosphere();
      if (s.eof() || s.peek() != ')') s.fail("expected ) after dotted tail");
      s.advance();
      break;
    }
    items.push_back(parse_datum(s, depth));
  }
  Ref acc = tail;
  for (auto it = items.rbegin(); it != items.rend(); ++it) acc = cons(*it, acc);
  return acc;
}

Ref parse_string(Scanner& s) {
  std::string out;
  while (true) {
    if (s.eof()) s.fail("unterminated string literal");
    char c = s.advance();
    if (c == '"') break;
    if (c == '\\') {
      if (s.eof()) s.fail("unterminated escape in string literal");
      char e = s.advance();
      if (e == '"' || e == '\\')
        out += e;
      else
        s.fail("unsupported string escape");
    } else {
      out += c;
    }
  }
  return string_value(std::move(out));
}

Ref parse_hash(Scanner& s, int depth) {
  // '#' already consumed
  if (s.eof()) s.fail("lone #");
  char c = s.advance();
  if (c == 't') return boolean(true);
  if (c == 'f') return boolean(false);
  if (c == '(') {
    std::vector<Ref> items;
    while (true) {
      s.skip_atmosphere();
      if (s.eof()) s.fail("unterminated vector literal");
      if (s.peek() == ')') {
        s.advance();
        break;
      }
      items.push_back(parse_datum(s, depth));
    }
    return vector_value(std::move(items));
  }
  if (c == '\\') {
    if (s.eof()) s.fail("unterminated character literal");
    char first = s.advance();
    if (std::isalpha(static_cast<unsigned char>(first))) {
      std::string name(1, first);
      while (!s.eof() && !is_delimiter(s.peek())) name += s.advance();
      if (name.size() == 1) return character(first);
      if (name == "space") return character(' ');
      if (name == "newline") return character('\n');
      s.fail("unknown character name #\\" + name);
    }
    return character(first);
  }
  if (c == 'e' || c == 'i' || c == 'b' || c == 'o' || c == 'd' || c == 'x')
    s.fail("number prefixes are not supported (base-10 literals only)");
  s.fail(std::string("unsupported # syntax: #") + c);
}

Ref parse_atom(Scanner& s) {
  std::string tok;
  while (!s.eof() && !is_delimiter(s.peek())) tok += s.advance();
  if (tok.empty()) s.fail("empty token");
  if (auto num = parse_number_token(tok, /*allow_prefixes=*/false)) return *num;
  char c0 = tok[0];
  bool number_like = std::isdigit(static_cast<unsigned char>(c0)) ||
                     ((c0 == '+' || c0 == '-' || c0 == '.') && tok.size() > 1 &&
                      (std::isdigit(static_cast<unsigned char>(tok[1])) || tok[1] == '.'));
  if (tok == "...") number_like = false;
  if (number_like) s.fail("malformed number literal: " + tok);
  return symbol(tok);
}

Ref parse_datum(Scanner& s, int depth) {
  if (depth > 20000) s.fail("input nested too deeply");
  s.skip_atmosphere();
  if (s.eof()) s.fail("unexpected end of input");
  char c = s.peek();
  if (c == '(') {
    s.advance();
    return parse_list(s, depth + 1);
  }
  if (c == ')') s.fail("unexpected )");
  if (c == '\'') {
    s.advance();
    Ref d = parse_datum(s, depth + 1);
    return list({symbol("quote"), d});
  }
  if (c == '`') s.fail("quasiquote is not supported");
  if (c == ',') s.fail("unquote is not supported");
  if (c == '"') {
    s.advance();
    return parse_string(s);
  }
  if (c == '#') {
    s.advance();
    return parse_hash(s, depth + 1);
  }
  return parse_atom(s);
}

}  // namespace

std::vector<Ref> read(const std::string& text) {
  Scanner s(text);
  std::vector<Ref> out;
  while (true) {
    s.skip_atmosphere();
    if (s.eof()) break;
    out.push_back(parse_datum(s, 0));
  }
  return out;
}

Ref read_one(const std::string& text) {
  auto forms = read(text);
  if (forms.size() != 1)
    throw SyntaxError("expected exactly one datum, got " + std::to_string(forms.size()), 1, 1);
  return forms[0];
}

std::optional<std::vector<Ref>> list_to_vector(const Ref& lst, std::size_t max_nodes) {
  std::vector<Ref> out;
  const Obj* cur = lst.get();
  std::size_t seen = 0;
  while (true) {
    if (std::holds_alternative<EmptyList>(cur->v)) return out;
    auto* p = std::get_if<PairVal>(&cur->v);
    if (!p) return std::nullopt;
    if (++seen > max_nodes)
      throw SchemeError{ErrorKind::DomainError, "list traversal limit exceeded"};
    out.push_back(p->car);
    cur = p->cdr.get();
  }
}

}  // namespace glsearch
