#include "mutgen/flag_transform.hpp"

#include <map>
#include <string>

namespace mutgen {

namespace {

SExpr sym(std::string_view s) { return SExpr::symbol(s); }

SExpr case_dispatch(const Symbol& flag_param, const std::vector<std::pair<Symbol, SExpr>>& branches) {
  std::vector<SExpr> items{sym("case"), SExpr::symbol(flag_param)};
  for (std::size_t i = 0; i < branches.size(); ++i) {
    bool last = i + 1 == branches.size();
    SExpr key = last ? SExpr::t() : SExpr::symbol(branches[i].first);
    items.push_back(SExpr::list({key, branches[i].second}));
  }
  return SExpr::list(std::move(items));
}

// Value following keyword `key` in a keyword/value list, if present.
std::optional<SExpr> keyword_value(std::span<const SExpr> items, std::string_view key) {
  for (std::size_t i = 0; i + 1 < items.size(); ++i) {
    if (items[i].is_symbol(key)) return items[i + 1];
    if (items[i].is_keyword()) ++i;
  }
  return std::nullopt;
}

SourcePos pos_or(const SExpr& x, SourcePos fallback) { return x.pos().known() ? x.pos() : fallback; }

}  // namespace

SExpr FlagClique::flag_call() const {
  std::vector<SExpr> items{SExpr::symbol(flag_fn_name), SExpr::symbol(flag_param)};
  for (const auto& f : union_formals) items.push_back(SExpr::symbol(f.name));
  return SExpr::list(std::move(items));
}

FlagClique make_flag_function(const CliqueDef& clique, const Symbol& flag_fn_name,
                              const Symbol& flag_param) {
  if (clique.functions.empty()) throw FormError("cannot build a flag function for an empty clique");
  FlagClique fc;
  fc.source = clique;
  fc.flag_fn_name = flag_fn_name;
  fc.flag_param = flag_param;
  // The flag function is untyped, so differing declared types (x is a term
  // in one function and a term list in the other) are not a conflict here.
  fc.union_formals = formals_union(clique, TypeConflict::KeepFirst);
  for (const auto& f : fc.union_formals) {
    if (f.name == flag_param) {
      throw FormError("flag parameter " + flag_param.text() + " collides with a formal of clique " +
                          clique.name.text(),
                      clique.pos);
    }
  }

  auto redirect = [&](const SExpr& call) -> SExpr {
    if (!call[0].is_symbol() || !clique.is_member(call[0].as_symbol())) return call;
    const FunctionDef& callee = find_function(clique, call[0].as_symbol());
    std::vector<SExpr> items{SExpr::symbol(flag_fn_name), SExpr::quote(SExpr::symbol(callee.name))};
    for (const auto& u : fc.union_formals) {
      SExpr arg = SExpr::symbol(u.name);
      for (std::size_t j = 0; j < callee.formals.size(); ++j) {
        if (callee.formals[j].name == u.name) arg = call[j + 1];
      }
      items.push_back(arg);
    }
    return SExpr::list(std::move(items)).with_pos(call.pos());
  };

  std::vector<std::pair<Symbol, SExpr>> branches;
  for (const auto& fn : clique.functions) {
    fc.flag_values.push_back(fn.name);
    branches.emplace_back(fn.name, rewrite_calls(fn.body, redirect));
  }
  std::vector<SExpr> params{SExpr::symbol(flag_param)};
  for (const auto& f : fc.union_formals) params.push_back(SExpr::symbol(f.name));
  fc.flag_fn_def = SExpr::list({sym("defun"), SExpr::symbol(flag_fn_name),
                                SExpr::list(std::move(params)), case_dispatch(flag_param, branches)});
  fc.equivalence_thm = make_equivalence_theorem(fc);
  return fc;
}

SExpr make_equivalence_theorem(const FlagClique& fc) {
  std::vector<std::pair<Symbol, SExpr>> branches;
  for (const auto& fn : fc.source.functions) branches.emplace_back(fn.name, fn.call_on_formals());
  Symbol name(fc.flag_fn_name.text() + "-equals-" + fc.source.name.text());
  return SExpr::list({sym("defthm"), SExpr::symbol(name),
                      SExpr::list({sym("equal"), fc.flag_call(), case_dispatch(fc.flag_param, branches)})});
}

std::vector<SExpr> make_flag_defthm(const FlagClique& fc, const std::vector<ThmSpec>& specs,
                                    const Symbol& lemma_name, const FlagDefthmOptions& options) {
  std::map<std::string, const ThmSpec*> by_flag;
  for (const auto& spec : specs) {
    if (!fc.source.is_member(spec.flag_value)) {
      throw FormError("theorem " + spec.thm_name.text() + " names unknown function " +
                      spec.flag_value.text());
    }
    if (!by_flag.emplace(spec.flag_value.key(), &spec).second) {
      throw FormError("more than one theorem for function " + spec.flag_value.text());
    }
  }

  std::vector<std::pair<Symbol, SExpr>> branches;
  for (const auto& fn : fc.source.functions) {
    auto it = by_flag.find(fn.name.key());
    bool real = it != by_flag.end() && !it->second->skip;
    branches.emplace_back(fn.name, real ? it->second->body : SExpr::t());
  }

  std::vector<SExpr> hints;
  if (!options.no_induction_hint) {
    hints.push_back(SExpr::list({SExpr::string("goal"), sym(":induct"), fc.flag_call()}));
  }
  if (options.hints) {
    for (const auto& h : options.hints->items()) hints.push_back(h);
  }
  for (const auto& fn : fc.source.functions) {
    auto it = by_flag.find(fn.name.key());
    if (it == by_flag.end() || it->second->skip || !it->second->hints) continue;
    for (const auto& h : it->second->hints->items()) hints.push_back(h);
  }

  std::vector<SExpr> lemma{sym("defthm"), SExpr::symbol(lemma_name),
                           case_dispatch(fc.flag_param, branches)};
  if (!hints.empty()) {
    lemma.push_back(sym(":hints"));
    lemma.push_back(SExpr::list(std::move(hints)));
  }
  lemma.push_back(sym(":rule-classes"));
  lemma.push_back(SExpr());

  std::vector<SExpr> events{SExpr::list(std::move(lemma))};
  for (const auto& fn : fc.source.functions) {
    auto it = by_flag.find(fn.name.key());
    if (it == by_flag.end() || it->second->skip) continue;
    const ThmSpec& spec = *it->second;
    SExpr instance = SExpr::list({sym(":instance"), SExpr::symbol(lemma_name),
                                  SExpr::list({SExpr::symbol(fc.flag_param),
                                               SExpr::quote(SExpr::symbol(fn.name))})});
    SExpr use_hint = SExpr::list({SExpr::list({SExpr::string("goal"), sym(":use"),
                                               SExpr::list({instance})})});
    std::vector<SExpr> thm{sym("defthm"), SExpr::symbol(spec.thm_name), spec.body,
                           sym(":hints"), use_hint};
    if (spec.rule_classes) {
      thm.push_back(sym(":rule-classes"));
      thm.push_back(*spec.rule_classes);
    }
    events.push_back(SExpr::list(std::move(thm)));
  }
  return events;
}

FlagDefthmForm parse_flag_defthm(const SExpr& form, const FlagClique& fc) {
  SourcePos pos = form.pos();
  Symbol macro("defthm-" + fc.flag_fn_name.text());
  if (!form.is_cons() || !form.is_proper() || !form[0].is_symbol() ||
      !(form[0].as_symbol() == macro)) {
    throw FormError("expected a " + macro.text() + " form", pos);
  }
  FlagDefthmForm out;
  auto items = form.items();
  std::size_t i = 1;
  if (i < items.size() && items[i].is_symbol() && !items[i].is_keyword()) {
    out.name = items[i].as_symbol();
    ++i;
  }
  for (; i < items.size(); ++i) {
    const SExpr& x = items[i];
    if (x.is_keyword()) {
      if (i + 1 >= items.size()) throw FormError("keyword " + x.text() + " has no value", pos);
      const SExpr& val = items[++i];
      if (x.is_symbol(":hints")) {
        out.options.hints = val;
      } else if (x.is_symbol(":no-induction-hint")) {
        out.options.no_induction_hint = !val.is_nil();
      }
      continue;
    }
    if (!x.has_head("defthm") || x.size() < 3) {
      throw FormError("expected a defthm inside " + macro.text() + ", got " + to_string(x),
                      pos_or(x, pos));
    }
    ThmSpec spec;
    spec.thm_name = x[1].as_symbol();
    spec.body = x[2];
    auto kws = x.items().subspan(3);
    if (kws.size() % 2 != 0) {
      throw FormError("odd keyword list in defthm " + spec.thm_name.text(), pos_or(x, pos));
    }
    auto flag = keyword_value(kws, ":flag");
    if (!flag) throw FormError("defthm " + spec.thm_name.text() + " has no :flag", pos_or(x, pos));
    spec.flag_value = flag->as_symbol();
    if (!fc.source.is_member(spec.flag_value)) {
      throw FormError(":flag " + spec.flag_value.text() + " is not a function of clique " +
                          fc.source.name.text(),
                      pos_or(x, pos));
    }
    spec.rule_classes = keyword_value(kws, ":rule-classes");
    spec.hints = keyword_value(kws, ":hints");
    auto skip = keyword_value(kws, ":skip");
    spec.skip = skip && !skip->is_nil();
    out.specs.push_back(std::move(spec));
  }
  return out;
}

Symbol default_lemma_name(const FlagDefthmForm& form, const FlagClique& fc) {
  if (form.name) {
    return Symbol(replace_all_ci(form.name->text(), "<fn>", fc.source.name.text()) + "-lemma");
  }
  if (!form.specs.empty()) return Symbol("flag-lemma-for-" + form.specs.front().thm_name.text());
  return Symbol("flag-lemma-for-" + fc.flag_fn_name.text());
}

SExpr wrap_encapsulate(const std::vector<SExpr>& events) {
  std::vector<SExpr> items{sym("encapsulate"), SExpr()};
  for (std::size_t i = 0; i < events.size(); ++i) {
    items.push_back(i == 0 ? SExpr::list({sym("local"), events[i]}) : events[i]);
  }
  return SExpr::list(std::move(items));
}

}  // namespace mutgen
