#include "mutgen/expansion.hpp"

#include <map>

namespace mutgen {

namespace {

SExpr sym(std::string_view s) { return SExpr::symbol(s); }

SourcePos pos_of(const SExpr& x, SourcePos fallback = {}) {
  return x.pos().known() ? x.pos() : fallback;
}

// Splits `(head name <forms and keyword pairs>...)` into positional forms and
// keyword pairs, keeping order within each.
struct FormParts {
  std::vector<SExpr> positional;
  std::vector<std::pair<Symbol, SExpr>> keywords;

  const SExpr* keyword(std::string_view key) const {
    for (const auto& [k, v] : keywords) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

FormParts split_form(const SExpr& form, std::size_t from) {
  FormParts parts;
  auto items = form.items();
  for (std::size_t i = from; i < items.size(); ++i) {
    if (items[i].is_keyword()) {
      if (i + 1 >= items.size()) {
        throw FormError("keyword " + items[i].text() + " has no value in " + to_string(form[0]),
                        pos_of(form));
      }
      parts.keywords.emplace_back(items[i].as_symbol(), items[i + 1]);
      ++i;
    } else {
      parts.positional.push_back(items[i]);
    }
  }
  return parts;
}

// `subst` -> `?subst`, `acl2::args` -> `acl2::?args`.
SExpr ignorable(const Symbol& name) {
  const std::string& text = name.text();
  auto sep = text.rfind("::");
  std::size_t start = sep == std::string::npos ? 0 : sep + 2;
  if (text.compare(start, 1, "?") == 0) return SExpr::symbol(name);
  std::string out = text;
  out.insert(start, "?");
  return SExpr::symbol(out);
}

std::string binder_name(const std::string& text) {
  std::string out = text;
  auto sep = out.rfind("::");
  if (sep != std::string::npos) out.erase(0, sep + 2);
  while (!out.empty() && (out.front() == '?' || out.front() == '!')) out.erase(0, 1);
  return Symbol(out).key();
}

void collect_free(const SExpr& term, std::set<std::string>& bound, std::set<std::string>& out);

void collect_body(std::span<const SExpr> body, std::set<std::string> bound, std::set<std::string>& out) {
  for (const auto& b : body) collect_free(b, bound, out);
}

void bind_pattern(const SExpr& pattern, std::set<std::string>& bound) {
  if (pattern.is_symbol() && !pattern.is_symbol("-")) {
    bound.insert(binder_name(pattern.text()));
  } else if (pattern.has_head("mv") || pattern.has_head("list")) {
    for (const auto& p : pattern.items().subspan(1)) bind_pattern(p, bound);
  }
}

void collect_free(const SExpr& term, std::set<std::string>& bound, std::set<std::string>& out) {
  if (term.is_symbol()) {
    if (term.is_keyword() || term.is_symbol("t")) return;
    std::string key = term.as_symbol().key();
    if (!bound.contains(key)) out.insert(key);
    return;
  }
  if (!term.is_cons() || !term.is_proper()) return;
  const SExpr& head = term[0];
  auto args = term.items().subspan(1);
  if (head.is_symbol("quote") || head.is_symbol("declare")) return;
  if ((head.is_symbol("let") || head.is_symbol("let*") || head.is_symbol("b*")) && !args.empty()) {
    std::set<std::string> inner = bound;
    bool sequential = !head.is_symbol("let");
    for (const auto& b : args[0].items()) {
      if (!b.is_cons()) {
        bind_pattern(b, inner);
        continue;
      }
      collect_body(b.items().subspan(1), sequential ? inner : bound, out);
      bind_pattern(b[0], inner);
    }
    collect_body(args.subspan(1), inner, out);
    return;
  }
  if (head.is_symbol("mv-let") && args.size() >= 2) {
    collect_free(args[1], bound, out);
    std::set<std::string> inner = bound;
    for (const auto& v : args[0].items()) bind_pattern(v, inner);
    collect_body(args.subspan(2), inner, out);
    return;
  }
  if (head.is_symbol("lambda") && !args.empty()) {
    std::set<std::string> inner;
    for (const auto& v : args[0].items()) bind_pattern(v, inner);
    collect_body(args.subspan(1), inner, out);
    return;
  }
  if (head.is_cons()) collect_free(head, bound, out);
  if (head.is_symbol("cond")) {
    for (const auto& clause : args) collect_body(clause.items(), bound, out);
    return;
  }
  if (head.is_symbol("case") && !args.empty()) {
    collect_free(args[0], bound, out);
    for (const auto& clause : args.subspan(1)) collect_body(clause.items().subspan(1), bound, out);
    return;
  }
  collect_body(args, bound, out);
}

SExpr lemma_hint() {
  static const SExpr hint =
      read_one("((and stable-under-simplificationp `(:expand (,(car (last clause))))))");
  return hint;
}

}  // namespace

DmgenForm parse_dmgen_form(const SExpr& form) {
  if (!form.has_head("defret-mutual-generate")) {
    throw FormError("expected a defret-mutual-generate form", pos_of(form));
  }
  if (form.size() < 2 || !form[1].is_symbol() || form[1].is_keyword()) {
    throw FormError("defret-mutual-generate needs a theorem name", pos_of(form));
  }
  DmgenForm out;
  out.pos = form.pos();
  out.name = form[1].as_symbol();
  FormParts parts = split_form(form, 2);
  if (!parts.positional.empty()) {
    throw FormError("unexpected form " + to_string(parts.positional.front()) + " in defret-mutual-generate",
                    pos_of(parts.positional.front(), pos_of(form)));
  }
  for (const auto& [key, value] : parts.keywords) {
    if (key == ":formal-hyps") {
      out.formal_hyps = value;
    } else if (key == ":return-concls") {
      out.return_concls = value;
    } else if (key == ":function-keys") {
      out.function_keys = value;
    } else if (key == ":rules") {
      out.rules = value;
    } else if (key == ":hints") {
      out.hints = value;
    } else if (key == ":no-induction-hint") {
      out.no_induction_hint = !value.is_nil();
    } else if (key == ":mutual-recursion") {
      out.mutual_recursion = value.as_symbol();
    } else {
      throw FormError("unknown defret-mutual-generate keyword " + key.text(), pos_of(form));
    }
  }
  return out;
}

std::vector<Rule> dmgen_rules(const DmgenForm& form) {
  std::vector<Rule> rules;
  auto add = [&](std::vector<Rule> more) {
    for (auto& r : more) rules.push_back(std::move(r));
  };
  if (form.formal_hyps) add(expand_formal_hyps(*form.formal_hyps));
  if (form.return_concls) add(expand_return_concls(*form.return_concls));
  if (form.rules) add(parse_rules(*form.rules));
  if (form.function_keys) add(expand_function_keys(*form.function_keys));
  return rules;
}

SExpr dmgen_expand(const DmgenForm& form, const CliqueDef& clique, std::vector<std::string>* warnings) {
  if (form.mutual_recursion && !(*form.mutual_recursion == clique.name)) {
    throw FormError("defret-mutual-generate names clique " + form.mutual_recursion->text() +
                        " but was applied to " + clique.name.text(),
                    form.pos);
  }
  std::vector<Rule> rules = dmgen_rules(form);
  std::vector<SExpr> items{sym("defret-mutual"), SExpr::symbol(form.name)};
  std::size_t rendered = 0;
  for (const auto& fn : clique.functions) {
    auto defret = render_defret(apply_rules(rules, fn, form.name), fn);
    if (!defret) continue;
    items.push_back(*defret);
    ++rendered;
  }
  if (rendered == 0) {
    throw FormError("defret-mutual-generate " + form.name.text() +
                        " produced no theorems: no function received a conclusion",
                    form.pos);
  }
  if (warnings && rendered > 1 && replace_all_ci(form.name.text(), "<fn>", "") == form.name.text()) {
    warnings->push_back("theorem name " + form.name.text() +
                        " has no <fn>; all generated theorems share this name");
  }
  if (form.hints) {
    items.push_back(sym(":hints"));
    items.push_back(*form.hints);
  }
  if (form.no_induction_hint) {
    items.push_back(sym(":no-induction-hint"));
    items.push_back(SExpr::t());
  }
  items.push_back(sym(":mutual-recursion"));
  items.push_back(SExpr::symbol(clique.name));
  return SExpr::list(std::move(items)).with_pos(form.pos);
}

SExpr defret_expand(const SExpr& defret, const FunctionDef& fn) {
  if (!defret.has_head("defret") || defret.size() < 3 || !defret[1].is_symbol()) {
    throw FormError("expected (defret <name> <body> ...), got " + to_string(defret), pos_of(defret));
  }
  FormParts parts = split_form(defret, 2);
  if (parts.positional.size() != 1) {
    throw FormError("defret " + defret[1].text() + " must have exactly one body", pos_of(defret));
  }
  const SExpr* fn_name = parts.keyword(":fn");
  if (!fn_name) throw FormError("defret " + defret[1].text() + " has no :fn", pos_of(defret));
  if (!fn_name->is_symbol() || !(fn_name->as_symbol() == fn.name)) {
    throw FormError("defret " + defret[1].text() + " targets " + to_string(*fn_name) + ", not " +
                        fn.name.text(),
                    pos_of(defret));
  }

  SExpr binder;
  if (fn.returns.size() == 1) {
    binder = ignorable(fn.returns.front().name);
  } else {
    std::vector<SExpr> vars{sym("mv")};
    for (const auto& r : fn.returns) vars.push_back(ignorable(r.name));
    binder = SExpr::list(std::move(vars));
  }
  SExpr binding = SExpr::list({binder, fn.call_on_formals()});

  const SExpr& body = parts.positional.front();
  SExpr bound_body;
  if (body.has_head("b*") && body.size() >= 3 && body[1].is_list()) {
    std::vector<SExpr> binders{binding};
    for (const auto& b : body[1].items()) binders.push_back(b);
    std::vector<SExpr> items{sym("b*"), SExpr::list(std::move(binders))};
    for (const auto& x : body.items().subspan(2)) items.push_back(x);
    bound_body = SExpr::list(std::move(items));
  } else {
    bound_body = SExpr::list({sym("b*"), SExpr::list({binding}), body});
  }

  Symbol name = instantiate_template(defret[1].as_symbol(), fn.name);
  std::vector<SExpr> items{sym("defthm"), SExpr::symbol(name), bound_body};
  for (const auto& [key, value] : parts.keywords) {
    if (key == ":fn") continue;
    items.push_back(SExpr::symbol(key));
    items.push_back(value);
  }
  items.push_back(sym(":flag"));
  items.push_back(SExpr::symbol(fn.name));
  return SExpr::list(std::move(items)).with_pos(defret.pos());
}

SExpr defret_expand(const SExpr& defret, const CliqueDef& clique) {
  FormParts parts = split_form(defret, 2);
  const SExpr* fn_name = parts.keyword(":fn");
  if (!fn_name) {
    throw FormError("defret " + (defret.size() > 1 ? to_string(defret[1]) : std::string()) + " has no :fn",
                    pos_of(defret));
  }
  if (!fn_name->is_symbol() || !clique.is_member(fn_name->as_symbol())) {
    throw FormError("defret :fn " + to_string(*fn_name) + " is not a function of clique " +
                        clique.name.text(),
                    pos_of(defret));
  }
  return defret_expand(defret, find_function(clique, fn_name->as_symbol()));
}

SExpr defret_mutual_expand(const SExpr& form, const CliqueDef& clique) {
  if (!form.has_head("defret-mutual") || form.size() < 2 || !form[1].is_symbol() || form[1].is_keyword()) {
    throw FormError("expected (defret-mutual <name> <defret>...)", pos_of(form));
  }
  FormParts parts = split_form(form, 2);
  if (const SExpr* mr = parts.keyword(":mutual-recursion")) {
    if (!mr->is_symbol() || !(mr->as_symbol() == clique.name)) {
      throw FormError("defret-mutual names clique " + to_string(*mr) + " but was applied to " +
                          clique.name.text(),
                      pos_of(form));
    }
  }
  std::vector<SExpr> items{SExpr::symbol(clique.flag_macro_name()), form[1]};
  std::map<std::string, bool> targets;
  for (const auto& defret : parts.positional) {
    SExpr thm = defret_expand(defret, clique);
    Symbol target = thm[thm.size() - 1].as_symbol();
    if (!targets.emplace(target.key(), true).second) {
      throw FormError("more than one defret for function " + target.text(), pos_of(defret, pos_of(form)));
    }
    items.push_back(thm);
  }
  for (const auto& [key, value] : parts.keywords) {
    if (key == ":mutual-recursion") continue;
    items.push_back(SExpr::symbol(key));
    items.push_back(value);
  }
  return SExpr::list(std::move(items)).with_pos(form.pos());
}

std::optional<Stage> parse_stage(std::string_view name) {
  if (name == "dmgen") return Stage::Dmgen;
  if (name == "defret-mutual") return Stage::DefretMutual;
  if (name == "flag-defthm") return Stage::FlagDefthm;
  if (name == "events") return Stage::Events;
  return std::nullopt;
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Dmgen:
      return "dmgen";
    case Stage::DefretMutual:
      return "defret-mutual";
    case Stage::FlagDefthm:
      return "flag-defthm";
    case Stage::Events:
      return "events";
  }
  return "";
}

std::vector<SExpr> Expansion::stage(Stage s) const {
  switch (s) {
    case Stage::Dmgen:
      // The dmgen stage's output is the defret-mutual form.
      return {defret_mutual};
    case Stage::DefretMutual:
      return {defret_mutual};
    case Stage::FlagDefthm:
      return {flag_defthm};
    case Stage::Events:
      return events;
  }
  return {};
}

Expansion full_expand(const SExpr& source, const CliqueDef& clique) {
  Expansion out;
  if (source.has_head("defret-mutual-generate")) {
    out.dmgen = source;
    out.defret_mutual = dmgen_expand(parse_dmgen_form(source), clique, &out.warnings);
  } else if (source.has_head("defret-mutual")) {
    out.defret_mutual = source;
  } else {
    throw FormError("expected a defret-mutual-generate or defret-mutual form", pos_of(source));
  }
  out.flag_defthm = defret_mutual_expand(out.defret_mutual, clique);

  FlagClique fc = make_flag_function(clique);
  FlagDefthmForm parsed = parse_flag_defthm(out.flag_defthm, fc);
  out.events = make_flag_defthm(fc, parsed.specs, default_lemma_name(parsed, fc), parsed.options);
  return out;
}

SkScaffoldSpec parse_sk_scaffold(const SExpr& form) {
  if (!form.has_head("sk-scaffold")) throw FormError("expected an sk-scaffold form", pos_of(form));
  SkScaffoldSpec spec;
  for (const auto& entry : form.items().subspan(1)) {
    SourcePos pos = pos_of(entry, pos_of(form));
    if (!entry.is_cons() || !entry.is_proper() || entry.size() < 2 || !entry[0].is_symbol()) {
      throw FormError("expected (<fn> <body> :vars (...) [:name thm]), got " + to_string(entry), pos);
    }
    SkEntry e;
    e.function = entry[0].as_symbol();
    e.body = entry[1];
    e.final_thm_name = Symbol(e.function.text() + "-correct");
    FormParts parts = split_form(entry, 2);
    if (!parts.positional.empty()) throw FormError("unexpected form in " + to_string(entry), pos);
    for (const auto& [key, value] : parts.keywords) {
      if (key == ":vars") {
        if (value.is_symbol()) {
          e.quantified.push_back(value.as_symbol());
        } else {
          for (const auto& v : value.items()) e.quantified.push_back(v.as_symbol());
        }
      } else if (key == ":name") {
        e.final_thm_name = value.as_symbol();
      } else {
        throw FormError("unknown sk-scaffold keyword " + key.text(), pos);
      }
    }
    if (e.quantified.empty()) {
      throw FormError("sk-scaffold entry for " + e.function.text() + " needs a non-empty :vars", pos);
    }
    spec.entries.push_back(std::move(e));
  }
  return spec;
}

std::vector<SExpr> generate_sk_scaffold(const CliqueDef& clique, const SkScaffoldSpec& spec) {
  std::vector<SExpr> conds;
  std::vector<SExpr> lemmas{SExpr::symbol(clique.flag_macro_name())};
  std::vector<SExpr> finals;
  for (const auto& entry : spec.entries) {
    const FunctionDef& fn = find_function(clique, entry.function);
    if (entry.quantified.empty()) {
      throw FormError("no quantified variables for " + fn.name.text());
    }
    std::set<std::string> free = free_variables(entry.body);
    for (const auto& v : entry.quantified) {
      if (fn.has_formal(v)) {
        throw FormError("quantified variable " + v.text() + " is a formal of " + fn.name.text());
      }
      if (!free.contains(v.key())) {
        throw FormError("quantified variable " + v.text() + " does not occur free in the theorem for " +
                        fn.name.text());
      }
    }

    std::string base = fn.name.text();
    SExpr cond_name = sym(base + "-correct-cond");
    SExpr lemma_name = sym(base + "-correct-lemma");
    std::vector<SExpr> formals;
    for (const auto& f : fn.formals) formals.push_back(SExpr::symbol(f.name));

    SExpr vars;
    if (entry.quantified.size() == 1) {
      vars = SExpr::symbol(entry.quantified.front());
    } else {
      std::vector<SExpr> vs;
      for (const auto& v : entry.quantified) vs.push_back(SExpr::symbol(v));
      vars = SExpr::list(std::move(vs));
    }
    conds.push_back(SExpr::list({sym("defun-sk"), cond_name, SExpr::list(formals),
                                 SExpr::list({sym("forall"), vars, entry.body}), sym(":rewrite"),
                                 sym(":direct")}));

    std::vector<SExpr> cond_call{cond_name};
    cond_call.insert(cond_call.end(), formals.begin(), formals.end());
    lemmas.push_back(SExpr::list({sym("defthm"), lemma_name, SExpr::list(std::move(cond_call)),
                                  sym(":hints"), lemma_hint(), sym(":flag"), SExpr::symbol(fn.name),
                                  sym(":rule-classes"), SExpr()}));

    finals.push_back(SExpr::list(
        {sym("defthm"), SExpr::symbol(entry.final_thm_name), entry.body, sym(":hints"),
         SExpr::list({SExpr::list({SExpr::string("goal"), sym(":use"), lemma_name})})}));
  }
  std::vector<SExpr> out = std::move(conds);
  out.push_back(SExpr::list(std::move(lemmas)));
  out.insert(out.end(), finals.begin(), finals.end());
  return out;
}

std::set<std::string> free_variables(const SExpr& term) {
  std::set<std::string> bound;
  std::set<std::string> out;
  collect_free(term, bound, out);
  return out;
}

}  // namespace mutgen
