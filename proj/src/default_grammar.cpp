#include "glsearch/grammar.hpp"
#include "glsearch/machine.hpp"

#include <algorithm>
#include <cassert>

namespace glsearch {

namespace {

// Symbol-list shorthand for production bodies.
using Body = std::vector<GrammarSymbol>;

Body tokens(std::initializer_list<const char*> toks) {
  Body b;
  for (const char* t : toks) b.push_back(term(t));
  return b;
}

void uniform(Grammar& g, const std::string& head, std::vector<Body> bodies) {
  double p = 1.0 / static_cast<double>(bodies.size());
  for (auto& b : bodies) g.add_production(head, Production{std::move(b), p});
}

Body call_body(const std::string& name, int arity) {
  Body b{term(name)};
  for (int i = 0; i < arity; ++i) b.push_back(nt("expression"));
  return b;
}

}  // namespace

const std::vector<std::string>& common_procedures() {
  static const std::vector<std::string> tier = {
      "*",    "+",     "-",    "/",    "=",     "<",     ">",
      "<=",   "not",   "zero?", "eqv?", "equal?", "car",  "cdr",
      "cons", "null?", "pair?", "list", "length", "even?",
  };
  return tier;
}

Grammar default_grammar() {
  Grammar g;
  const auto& prims = Machine::primitive_table();
  auto arity_ok = [&](const std::string& name, int arity) {
    for (const auto& d : prims)
      if (d.name == name)
        return d.in_generation_table && arity >= d.min_args &&
               (d.max_args < 0 || arity <= d.max_args);
    return false;
  };

  uniform(g, "program", {{nt("body")}});
  uniform(g, "body", {
    {nt("expression")},
    {nt("definition"), nt("body")},
  });
  uniform(g, "definition", {
    // The defined name stays pending until its value expression is complete,
    // so the initializer can never reference it.
    {term("("), term("define"), proc_nt("variable-definition"), nt("expression"),
     proc_nt("activate"), term(")")},
    // Function form: the name activates immediately (the closure is created
    // before any call), parameters live in a pushed scope.
    {term("("), term("define"), term("("), proc_nt("variable-definition"),
     proc_nt("activate"), scope_begin(), nt("formals"), term(")"), nt("body"),
     scope_end(), term(")")},
    {proc_nt("solution-corpus")},
  });
  uniform(g, "formals", {
    {proc_nt("variable-definition"), proc_nt("activate")},
    {proc_nt("variable-definition"), proc_nt("activate"), nt("formals")},
  });
  uniform(g, "expression", {
    {nt("literal")},
    {proc_nt("variable")},
    {nt("procedure-call")},
    {nt("conditional")},
    {nt("compound-expression")},
  });
  uniform(g, "literal", {
    {proc_nt("uinteger-10")},
    {nt("boolean")},
    {nt("character")},
    {nt("string")},
    {nt("quotation")},
  });
  uniform(g, "boolean", {tokens({"#t"}), tokens({"#f"})});
  {
    std::vector<Body> chars;
    for (char c = 'a'; c <= 'z'; ++c) chars.push_back({term(std::string("#\\") + c)});
    chars.push_back({term("#\\space")});
    chars.push_back({term("#\\newline")});
    uniform(g, "character", std::move(chars));
  }
  uniform(g, "string", {{term("\""), nt("string-chars"), term("\"")}});
  uniform(g, "string-chars", {
    {},
    {nt("string-char"), nt("string-chars")},
  });
  {
    std::vector<Body> chars;
    for (char c = 'a'; c <= 'z'; ++c) chars.push_back({term(std::string(1, c))});
    chars.push_back({term(" ")});
    uniform(g, "string-char", std::move(chars));
  }
  uniform(g, "quotation", {{term("("), term("quote"), nt("datum"), term(")")}});
  uniform(g, "datum", {
    {proc_nt("uinteger-10")},
    {nt("boolean")},
    {term("("), nt("datum-list"), term(")")},
  });
  uniform(g, "datum-list", {
    {},
    {nt("datum"), nt("datum-list")},
  });
  uniform(g, "conditional", {
    {term("("), term("if"), nt("expression"), nt("expression"), nt("expression"), term(")")},
  });
  uniform(g, "procedure-call", {
    {term("("), nt("standard-procedure"), term(")")},
    {nt("generic-call")},
    {nt("previous-solution")},
  });
  uniform(g, "generic-call", {
    {term("("), nt("operator"), nt("expression"), term(")")},
    {term("("), nt("operator"), nt("expression"), nt("expression"), term(")")},
  });
  uniform(g, "operator", {{proc_nt("variable")}});
  g.declare("previous-solution");  // filled by solution re-use updates
  {
    std::vector<Body> alts;
    for (const auto& name : common_procedures()) {
      std::vector<int> arities;
      if (name == "-") arities = {1, 2};
      else if (name == "list") arities = {1, 2};
      else if (name == "not" || name == "zero?" || name == "car" || name == "cdr" ||
               name == "null?" || name == "pair?" || name == "length" || name == "even?")
        arities = {1};
      else arities = {2};
      for (int a : arities) {
        if (!arity_ok(name, a))
          throw GrammarError("default grammar references " + name + "/" +
                             std::to_string(a) + " missing from the machine");
        alts.push_back(call_body(name, a));
      }
    }
    alts.push_back({nt("other-procedure")});
    uniform(g, "standard-procedure", std::move(alts));
  }
  {
    std::vector<Body> alts;
    const auto& tier = common_procedures();
    for (const auto& d : prims) {
      if (!d.in_generation_table) continue;
      if (std::find(tier.begin(), tier.end(), d.name) != tier.end()) continue;
      for (int a : d.gen_arities) alts.push_back(call_body(d.name, a));
    }
    uniform(g, "other-procedure", std::move(alts));
  }
  uniform(g, "compound-expression", {
    {nt("lambda-expression")},
    {nt("assignment")},
    {nt("boolean-combination")},
    {nt("cond-expression")},
    {nt("binding-expression")},
  });
  uniform(g, "lambda-expression", {
    {term("("), term("lambda"), term("("), scope_begin(), nt("formals"), term(")"),
     nt("body"), scope_end(), term(")")},
  });
  uniform(g, "assignment", {
    {term("("), term("set!"), proc_nt("variable"), nt("expression"), term(")")},
  });
  uniform(g, "boolean-combination", {
    {term("("), term("and"), nt("expression"), nt("expression"), term(")")},
    {term("("), term("or"), nt("expression"), nt("expression"), term(")")},
  });
  uniform(g, "cond-expression", {
    {term("("), term("cond"), term("("), nt("expression"), nt("expression"), term(")"),
     term("("), term("else"), nt("expression"), term(")"), term(")")},
  });
  uniform(g, "binding-expression", {
    // Single-binding letrec restricted to procedure initializers: the bound
    // name is safe to use inside the lambda body and in the letrec body.
    {term("("), term("letrec"), term("("), term("("), scope_begin(),
     proc_nt("variable-definition"), proc_nt("activate"), nt("lambda-expression"),
     term(")"), term(")"), nt("body"), scope_end(), term(")")},
    // Single-variable do loop; the loop variable is pending during its own
    // initializer and visible in the step, test, and result expressions.
    {term("("), term("do"), term("("), term("("), scope_begin(),
     proc_nt("variable-definition"), nt("expression"), proc_nt("activate"),
     nt("expression"), term(")"), term(")"), term("("), nt("expression"),
     nt("expression"), term(")"), scope_end(), term(")")},
  });

  g.set_start("program");
  g.canonicalize();
  return g;
}

}  // namespace glsearch
