#include "mutgen/clique.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace mutgen {

namespace {

SExpr sym(std::string_view s) { return SExpr::symbol(s); }

std::vector<SExpr> rewrite_each(std::span<const SExpr> terms,
                                const std::function<SExpr(const SExpr&)>& rewrite) {
  std::vector<SExpr> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(rewrite_calls(t, rewrite));
  return out;
}

// Keeps the first `keep` elements of a binder form and rewrites the rest.
SExpr rewrite_tail_of(const SExpr& form, std::size_t keep,
                      const std::function<SExpr(const SExpr&)>& rewrite) {
  if (!form.is_cons() || !form.is_proper()) return form;
  auto items = form.items();
  std::vector<SExpr> out(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(
                                                            std::min(keep, items.size())));
  for (std::size_t i = keep; i < items.size(); ++i) {
    out.push_back(rewrite_calls(items[i], rewrite));
  }
  return SExpr::list(std::move(out)).with_pos(form.pos());
}

SExpr rebuild(const SExpr& form, std::vector<SExpr> items) {
  return SExpr::list(std::move(items)).with_pos(form.pos());
}

void check_formal_name(const SExpr& name, SourcePos pos) {
  if (!name.is_symbol() || name.is_keyword() || name.is_symbol("t")) {
    throw FormError("invalid formal name " + to_string(name), pos);
  }
}

std::optional<Symbol> type_from(const SExpr& x) {
  if (x.is_symbol() && !x.is_keyword()) return x.as_symbol();
  // `(name (pred name))` style: the predicate is the call head
  if (x.is_cons() && x[0].is_symbol()) return x[0].as_symbol();
  return std::nullopt;
}

// `x` or `(x [type] [:keyword val ...])`
Formal parse_define_formal(const SExpr& f, SourcePos pos) {
  if (f.is_symbol()) {
    check_formal_name(f, pos);
    return Formal{f.as_symbol(), std::nullopt};
  }
  if (!f.is_cons() || !f.is_proper()) throw FormError("malformed formal " + to_string(f), pos);
  check_formal_name(f[0], f.pos().known() ? f.pos() : pos);
  Formal out{f[0].as_symbol(), std::nullopt};
  if (f.size() >= 2 && !f[1].is_keyword() && !f[1].is_string()) out.type = type_from(f[1]);
  return out;
}

ReturnSpec parse_return(const SExpr& r, SourcePos pos) {
  if (r.is_symbol()) {
    check_formal_name(r, pos);
    return ReturnSpec{r.as_symbol(), std::nullopt};
  }
  if (!r.is_cons() || !r.is_proper()) throw FormError("malformed return spec " + to_string(r), pos);
  check_formal_name(r[0], pos);
  ReturnSpec out{r[0].as_symbol(), std::nullopt};
  if (r.size() >= 2 && !r[1].is_keyword() && !r[1].is_string()) out.type = type_from(r[1]);
  return out;
}

std::vector<ReturnSpec> parse_returns(const SExpr& spec, SourcePos pos) {
  if (spec.has_head("mv")) {
    std::vector<ReturnSpec> out;
    for (const auto& r : spec.items().subspan(1)) out.push_back(parse_return(r, pos));
    if (out.empty()) throw FormError(":returns (mv) names no values", pos);
    return out;
  }
  return {parse_return(spec, pos)};
}

void check_distinct_formals(const FunctionDef& fn) {
  std::map<std::string, bool> seen;
  for (const auto& f : fn.formals) {
    if (!seen.emplace(f.name.key(), true).second) {
      throw FormError("duplicate formal " + f.name.text() + " in " + fn.name.text(), fn.pos);
    }
  }
  std::map<std::string, bool> seen_returns;
  for (const auto& r : fn.returns) {
    if (!seen_returns.emplace(r.name.key(), true).second) {
      throw FormError("duplicate return name " + r.name.text() + " in " + fn.name.text(), fn.pos);
    }
  }
}

bool is_declare(const SExpr& x) { return x.has_head("declare"); }

// (defun name (formals) [doc] [(declare ...)]* body)
FunctionDef parse_defun(const SExpr& form) {
  SourcePos pos = form.pos();
  if (!form.is_proper() || form.size() < 4) throw FormError("malformed defun", pos);
  FunctionDef fn;
  fn.pos = pos;
  if (!form[1].is_symbol()) throw FormError("defun name must be a symbol", pos);
  fn.name = form[1].as_symbol();
  if (!form[2].is_list() || !form[2].is_proper()) {
    throw FormError("malformed formals in defun " + fn.name.text(), pos);
  }
  for (const auto& f : form[2].items()) {
    check_formal_name(f, pos);
    fn.formals.push_back(Formal{f.as_symbol(), std::nullopt});
  }
  fn.body = form[form.size() - 1];
  for (std::size_t i = 3; i + 1 < form.size(); ++i) {
    if (!form[i].is_string() && !is_declare(form[i])) {
      throw FormError("unexpected form in defun " + fn.name.text() + ": " + to_string(form[i]),
                      form[i].pos().known() ? form[i].pos() : pos);
    }
  }
  fn.returns.push_back(ReturnSpec{Symbol(fn.name.text() + "-result"), std::nullopt});
  check_distinct_formals(fn);
  return fn;
}

// (define name (formals) [:kw val | doc | (declare ...)]* body [/// ...])
FunctionDef parse_define(const SExpr& form) {
  SourcePos pos = form.pos();
  if (!form.is_proper() || form.size() < 4) throw FormError("malformed define", pos);
  FunctionDef fn;
  fn.pos = pos;
  if (!form[1].is_symbol()) throw FormError("define name must be a symbol", pos);
  fn.name = form[1].as_symbol();
  if (!form[2].is_list() || !form[2].is_proper()) {
    throw FormError("malformed formals in define " + fn.name.text(), pos);
  }
  for (const auto& f : form[2].items()) fn.formals.push_back(parse_define_formal(f, pos));

  std::optional<SExpr> body;
  for (std::size_t i = 3; i < form.size(); ++i) {
    const SExpr& x = form[i];
    if (x.is_symbol("///")) break;
    if (x.is_keyword()) {
      if (i + 1 >= form.size()) throw FormError("keyword " + x.text() + " has no value", pos);
      if (x.is_symbol(":returns")) fn.returns = parse_returns(form[i + 1], pos);
      ++i;
      continue;
    }
    if (x.is_string() || is_declare(x)) continue;
    if (body) {
      throw FormError("define " + fn.name.text() + " has more than one body form",
                      x.pos().known() ? x.pos() : pos);
    }
    body = x;
  }
  if (!body) throw FormError("define " + fn.name.text() + " has no body", pos);
  fn.body = *body;
  if (fn.returns.empty()) {
    fn.returns.push_back(ReturnSpec{Symbol(fn.name.text() + "-result"), std::nullopt});
  }
  check_distinct_formals(fn);
  return fn;
}

void check_arities(const CliqueDef& clique) {
  std::map<std::string, std::size_t> arity;
  for (const auto& fn : clique.functions) arity[fn.name.key()] = fn.formals.size();
  for (const auto& fn : clique.functions) {
    for_each_member_call(fn.body, clique, [&](const SExpr& call) {
      std::size_t expected = arity[call[0].as_symbol().key()];
      std::size_t got = call.size() - 1;
      if (got != expected) {
        throw FormError("call to " + call[0].text() + " in " + fn.name.text() + " passes " +
                            std::to_string(got) + " argument(s), expected " +
                            std::to_string(expected),
                        call.pos().known() ? call.pos() : fn.pos);
      }
    });
  }
}

void finish_clique(CliqueDef& clique) {
  if (clique.functions.empty()) throw FormError("clique has no functions", clique.pos);
  std::map<std::string, bool> seen;
  for (const auto& fn : clique.functions) {
    if (!seen.emplace(fn.name.key(), true).second) {
      throw FormError("duplicate function " + fn.name.text(), fn.pos);
    }
  }
  if (clique.flag_fn_name.empty()) clique.flag_fn_name = Symbol(clique.name.text() + "-flag");
  check_arities(clique);
}

}  // namespace

bool FunctionDef::has_formal(const Symbol& formal) const {
  for (const auto& f : formals) {
    if (f.name == formal) return true;
  }
  return false;
}

SExpr FunctionDef::call_on_formals() const {
  std::vector<SExpr> items{SExpr::symbol(name)};
  for (const auto& f : formals) items.push_back(SExpr::symbol(f.name));
  return SExpr::list(std::move(items));
}

bool operator==(const FunctionDef& a, const FunctionDef& b) {
  return a.name == b.name && a.formals == b.formals && a.returns == b.returns &&
         sexpr_equal(a.body, b.body);
}

Symbol CliqueDef::flag_macro_name() const { return Symbol("defthm-" + flag_fn_name.text()); }

bool CliqueDef::is_member(const Symbol& fn) const {
  for (const auto& f : functions) {
    if (f.name == fn) return true;
  }
  return false;
}

bool operator==(const CliqueDef& a, const CliqueDef& b) {
  return a.name == b.name && a.flag_fn_name == b.flag_fn_name && a.functions == b.functions;
}

bool is_clique_form(const SExpr& form) {
  return form.has_head("mutual-recursion") || form.has_head("defines") ||
         form.has_head("defun") || form.has_head("define");
}

CliqueDef parse_clique(const SExpr& form) {
  CliqueDef clique;
  clique.pos = form.pos();
  if (!form.is_cons() || !form.is_proper() || !form[0].is_symbol()) {
    throw FormError("expected a mutual-recursion or defines form", form.pos());
  }
  if (form.has_head("mutual-recursion")) {
    for (const auto& d : form.items().subspan(1)) {
      if (!d.has_head("defun")) {
        throw FormError("mutual-recursion may only contain defun forms, got " + to_string(d),
                        d.pos().known() ? d.pos() : form.pos());
      }
      clique.functions.push_back(parse_defun(d));
    }
    if (!clique.functions.empty()) clique.name = clique.functions.front().name;
  } else if (form.has_head("defines")) {
    if (form.size() < 2 || !form[1].is_symbol()) {
      throw FormError("defines needs a clique name", form.pos());
    }
    clique.name = form[1].as_symbol();
    for (std::size_t i = 2; i < form.size(); ++i) {
      const SExpr& x = form[i];
      if (x.is_symbol("///")) {
        auto rest = form.items().subspan(i + 1);
        clique.post_forms.assign(rest.begin(), rest.end());
        break;
      }
      if (x.is_keyword()) {
        if (i + 1 >= form.size()) throw FormError("keyword " + x.text() + " has no value", form.pos());
        if (x.is_symbol(":flag") && form[i + 1].is_symbol()) {
          clique.flag_fn_name = form[i + 1].as_symbol();
        }
        ++i;
        continue;
      }
      if (x.is_string()) continue;
      if (!x.has_head("define")) {
        throw FormError("defines may only contain define forms, got " + to_string(x),
                        x.pos().known() ? x.pos() : form.pos());
      }
      clique.functions.push_back(parse_define(x));
    }
  } else if (form.has_head("defun")) {
    clique.functions.push_back(parse_defun(form));
    clique.name = clique.functions.front().name;
  } else if (form.has_head("define")) {
    clique.functions.push_back(parse_define(form));
    clique.name = clique.functions.front().name;
  } else {
    throw FormError("unrecognized clique head " + form[0].text(), form.pos());
  }
  finish_clique(clique);
  return clique;
}

std::vector<Formal> formals_union(const CliqueDef& clique, TypeConflict on_conflict) {
  std::vector<Formal> out;
  for (const auto& fn : clique.functions) {
    for (const auto& f : fn.formals) {
      auto it = std::find_if(out.begin(), out.end(), [&](const Formal& g) { return g.name == f.name; });
      if (it == out.end()) {
        out.push_back(f);
        continue;
      }
      if (f.type && it->type && !(*f.type == *it->type) && on_conflict == TypeConflict::Error) {
        throw FormError("formal " + f.name.text() + " is declared both " + it->type->text() +
                            " and " + f.type->text(),
                        fn.pos);
      }
      if (!it->type) it->type = f.type;
    }
  }
  return out;
}

const FunctionDef& find_function(const CliqueDef& clique, const Symbol& name) {
  for (const auto& fn : clique.functions) {
    if (fn.name == name) return fn;
  }
  throw FormError("unknown function " + name.text() + " in clique " + clique.name.text());
}

SExpr clique_to_defines(const CliqueDef& clique) {
  std::vector<SExpr> out{sym("defines"), SExpr::symbol(clique.name)};
  if (!(clique.flag_fn_name == clique.name.text() + "-flag")) {
    out.push_back(sym(":flag"));
    out.push_back(SExpr::symbol(clique.flag_fn_name));
  }
  auto with_type = [](const Symbol& name, const std::optional<Symbol>& type) {
    if (type) return SExpr::list({SExpr::symbol(name), SExpr::symbol(*type)});
    return SExpr::list({SExpr::symbol(name)});
  };
  for (const auto& fn : clique.functions) {
    std::vector<SExpr> formals;
    for (const auto& f : fn.formals) {
      formals.push_back(f.type ? with_type(f.name, f.type) : SExpr::symbol(f.name));
    }
    SExpr returns;
    if (fn.returns.size() == 1) {
      returns = with_type(fn.returns[0].name, fn.returns[0].type);
    } else {
      std::vector<SExpr> rs{sym("mv")};
      for (const auto& r : fn.returns) rs.push_back(with_type(r.name, r.type));
      returns = SExpr::list(std::move(rs));
    }
    out.push_back(SExpr::list({sym("define"), SExpr::symbol(fn.name), SExpr::list(std::move(formals)),
                               sym(":returns"), returns, fn.body}));
  }
  return SExpr::list(std::move(out));
}

SExpr rewrite_calls(const SExpr& term, const std::function<SExpr(const SExpr&)>& rewrite) {
  if (!term.is_cons() || !term.is_proper()) return term;
  const SExpr& head = term[0];
  auto args = term.items().subspan(1);

  if (head.is_symbol("quote") || head.is_symbol("declare")) return term;

  if (head.is_symbol("case") && !args.empty()) {
    std::vector<SExpr> out{head, rewrite_calls(args[0], rewrite)};
    for (const auto& clause : args.subspan(1)) out.push_back(rewrite_tail_of(clause, 1, rewrite));
    return rebuild(term, std::move(out));
  }
  if (head.is_symbol("cond")) {
    std::vector<SExpr> out{head};
    for (const auto& clause : args) out.push_back(rewrite_tail_of(clause, 0, rewrite));
    return rebuild(term, std::move(out));
  }
  if ((head.is_symbol("let") || head.is_symbol("let*")) && !args.empty()) {
    std::vector<SExpr> bindings;
    for (const auto& b : args[0].items()) bindings.push_back(rewrite_tail_of(b, 1, rewrite));
    std::vector<SExpr> out{head, SExpr::list(std::move(bindings)).with_pos(args[0].pos())};
    auto body = rewrite_each(args.subspan(1), rewrite);
    out.insert(out.end(), body.begin(), body.end());
    return rebuild(term, std::move(out));
  }
  if (head.is_symbol("b*") && !args.empty()) {
    std::vector<SExpr> bindings;
    for (const auto& b : args[0].items()) bindings.push_back(rewrite_tail_of(b, 1, rewrite));
    std::vector<SExpr> out{head, SExpr::list(std::move(bindings)).with_pos(args[0].pos())};
    auto body = rewrite_each(args.subspan(1), rewrite);
    out.insert(out.end(), body.begin(), body.end());
    return rebuild(term, std::move(out));
  }
  if (head.is_symbol("lambda")) return rewrite_tail_of(term, 2, rewrite);
  if (head.is_symbol("mv-let")) return rewrite_tail_of(term, 2, rewrite);

  std::vector<SExpr> out;
  out.reserve(term.size());
  out.push_back(head.is_cons() ? rewrite_calls(head, rewrite) : head);
  auto rebuilt_args = rewrite_each(args, rewrite);
  out.insert(out.end(), rebuilt_args.begin(), rebuilt_args.end());
  return rewrite(rebuild(term, std::move(out)));
}

void for_each_member_call(const SExpr& term, const CliqueDef& clique,
                          const std::function<void(const SExpr&)>& visit) {
  rewrite_calls(term, [&](const SExpr& call) {
    if (call[0].is_symbol() && clique.is_member(call[0].as_symbol())) visit(call);
    return call;
  });
}

}  // namespace mutgen
