#include "mutgen/dmgen.hpp"

#include <string>

namespace mutgen {

namespace {

SExpr sym(std::string_view s) { return SExpr::symbol(s); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

SourcePos pos_of(const SExpr& x, SourcePos fallback = {}) {
  return x.pos().known() ? x.pos() : fallback;
}

bool matches(const std::optional<Symbol>& want, const Symbol& have) { return !want || *want == have; }

bool matches_type(const std::optional<Symbol>& want, const std::optional<Symbol>& have) {
  return !want || (have && *want == *have);
}

bool inner_action_allowed(const Action& a) {
  return std::holds_alternative<AddHyp>(a.node) || std::holds_alternative<PushHyp>(a.node) ||
         std::holds_alternative<PopHyp>(a.node) || std::holds_alternative<AddConcl>(a.node);
}

Action substitute_var(const Action& a, const Symbol& var, const Symbol& name) {
  SExpr replacement = SExpr::symbol(name);
  return std::visit(
      Overloaded{
          [&](const AddHyp& x) { return Action{AddHyp{substitute_symbol(x.term, var, replacement)}}; },
          [&](const AddConcl& x) {
            return Action{AddConcl{substitute_symbol(x.term, var, replacement)}};
          },
          [&](const PushHyp& x) { return Action{PushHyp{substitute_symbol(x.term, var, replacement)}}; },
          [&](const auto&) { return a; },
      },
      a.node);
}

class ShellBuilder {
 public:
  ShellBuilder(const FunctionDef& fn, const Symbol& base_name) : fn_(fn) {
    shell_.name_template = base_name;
  }

  void apply(const Action& action) {
    std::visit(Overloaded{
                   [&](const AddHyp& x) { shell_.top_hyps.push_back(x.term); },
                   [&](const AddConcl& x) {
                     shell_.stack.push_back({StackEntry::Kind::Concl, x.term});
                   },
                   [&](const PushHyp& x) {
                     shell_.stack.push_back({StackEntry::Kind::Push, x.term});
                     ++open_pushes_;
                   },
                   [&](const PopHyp&) {
                     if (open_pushes_ == 0) {
                       throw FormError(":pop-hyp with no open :push-hyp in the theorem for " +
                                       fn_.name.text());
                     }
                     shell_.stack.push_back({StackEntry::Kind::Pop, SExpr()});
                     --open_pushes_;
                   },
                   [&](const AddBindings& x) {
                     for (const auto& b : x.bindings.items()) shell_.bindings.push_back(b);
                   },
                   [&](const EachFormal& x) {
                     check_inner(*x.action, ":each-formal");
                     for (const auto& f : fn_.formals) {
                       if (f.type && *f.type == x.type) apply(substitute_var(*x.action, x.var, f.name));
                     }
                   },
                   [&](const EachReturn& x) {
                     check_inner(*x.action, ":each-return");
                     for (const auto& r : fn_.returns) {
                       if (r.type && *r.type == x.type) apply(substitute_var(*x.action, x.var, r.name));
                     }
                   },
                   [&](const AddKeyword& x) { shell_.set_keyword(x.key, x.value); },
                   [&](const SetThmname& x) { shell_.name_template = x.name_template; },
               },
               action.node);
  }

  TheoremShell take() { return std::move(shell_); }

 private:
  static void check_inner(const Action& a, std::string_view what) {
    if (!inner_action_allowed(a)) {
      throw FormError(std::string(what) +
                      " action must be :add-hyp, :push-hyp, :pop-hyp, or :add-concl");
    }
  }

  const FunctionDef& fn_;
  TheoremShell shell_;
  std::size_t open_pushes_ = 0;
};

SExpr conjoin(const std::vector<SExpr>& xs) {
  if (xs.size() == 1) return xs.front();
  std::vector<SExpr> items{sym("and")};
  items.insert(items.end(), xs.begin(), xs.end());
  return SExpr::list(std::move(items));
}

bool same_terms(const std::vector<SExpr>& a, const std::vector<SExpr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!sexpr_equal(a[i], b[i])) return false;
  }
  return true;
}

SExpr instantiate_templates_in(const SExpr& x, const Symbol& fn_name) {
  if (x.is_symbol()) {
    if (x.text().find('<') == std::string::npos) return x;
    return SExpr::symbol(instantiate_template(x.as_symbol(), fn_name));
  }
  if (!x.is_cons()) return x;
  std::vector<SExpr> items;
  for (const auto& item : x.items()) items.push_back(instantiate_templates_in(item, fn_name));
  return SExpr::list(std::move(items), instantiate_templates_in(x.tail(), fn_name));
}

// Keyword/value tail of a form, as pairs. Throws on odd length or a
// non-keyword key.
std::vector<std::pair<Symbol, SExpr>> keyword_pairs(std::span<const SExpr> items, const SExpr& form) {
  if (items.size() % 2 != 0) throw FormError("odd keyword/value list in " + to_string(form), pos_of(form));
  std::vector<std::pair<Symbol, SExpr>> out;
  for (std::size_t i = 0; i < items.size(); i += 2) {
    if (!items[i].is_keyword()) {
      throw FormError("expected a keyword, got " + to_string(items[i]) + " in " + to_string(form),
                      pos_of(form));
    }
    out.emplace_back(items[i].as_symbol(), items[i + 1]);
  }
  return out;
}

std::vector<SExpr> list_items(const SExpr& spec, std::string_view what) {
  if (!spec.is_list() || !spec.is_proper()) {
    throw FormError(std::string(what) + " must be a list, got " + to_string(spec), pos_of(spec));
  }
  auto items = spec.items();
  return {items.begin(), items.end()};
}

enum class Side { Formal, Return };

std::vector<Rule> expand_signature_entries(const SExpr& spec, Side side) {
  const std::string_view what = side == Side::Formal ? ":formal-hyps" : ":return-concls";
  std::vector<Rule> rules;
  for (const auto& entry : list_items(spec, what)) {
    if (!entry.is_cons() || !entry.is_proper() || entry.size() < 2) {
      throw FormError("malformed " + std::string(what) + " entry " + to_string(entry), pos_of(entry, pos_of(spec)));
    }
    const SExpr& head = entry[0];
    const SExpr& term = entry[1];
    Action add = side == Side::Formal ? Action{AddHyp{term}} : Action{AddConcl{term}};
    if (head.is_symbol() && !head.is_keyword()) {
      std::optional<Symbol> type;
      for (const auto& [key, val] : keyword_pairs(entry.items().subspan(2), entry)) {
        if (!(key == ":type") || !val.is_symbol()) {
          throw FormError("malformed " + std::string(what) + " entry " + to_string(entry),
                          pos_of(entry, pos_of(spec)));
        }
        type = val.as_symbol();
      }
      Condition cond = side == Side::Formal ? Condition{HasFormalCond{head.as_symbol(), type}}
                                            : Condition{HasReturnCond{head.as_symbol(), type}};
      rules.push_back(Rule{std::move(cond), {std::move(add)}});
    } else if (head.is_cons() && head.is_proper() && head.size() == 2 && head[0].is_symbol() &&
               head[1].is_symbol() && entry.size() == 2) {
      auto inner = std::make_shared<const Action>(std::move(add));
      Action each = side == Side::Formal
                        ? Action{EachFormal{head[0].as_symbol(), head[1].as_symbol(), inner}}
                        : Action{EachReturn{head[0].as_symbol(), head[1].as_symbol(), inner}};
      rules.push_back(Rule{Condition::always(), {std::move(each)}});
    } else {
      throw FormError("malformed " + std::string(what) + " entry " + to_string(entry), pos_of(entry, pos_of(spec)));
    }
  }
  return rules;
}

template <class Cond>
Cond parse_signature_cond(const SExpr& form) {
  Cond c;
  for (const auto& [key, val] : keyword_pairs(form.items().subspan(1), form)) {
    if (!val.is_symbol()) throw FormError("expected a symbol in " + to_string(form), pos_of(form));
    if (key == ":name") {
      c.name = val.as_symbol();
    } else if (key == ":type") {
      c.type = val.as_symbol();
    } else {
      throw FormError("unknown keyword " + key.text() + " in " + to_string(form), pos_of(form));
    }
  }
  if (!c.name && !c.type) throw FormError(to_string(form) + " needs :name or :type", pos_of(form));
  return c;
}

SExpr one_arg(const SExpr& form) {
  if (form.size() != 2) throw FormError("expected exactly one argument in " + to_string(form), pos_of(form));
  return form[1];
}

template <class Each>
Action parse_each(const SExpr& form) {
  std::optional<Symbol> type;
  std::optional<Symbol> var;
  std::optional<Action> inner;
  for (const auto& [key, val] : keyword_pairs(form.items().subspan(1), form)) {
    if (key == ":type") {
      type = val.as_symbol();
    } else if (key == ":var") {
      var = val.as_symbol();
    } else if (key == ":action") {
      inner = parse_action(val);
    } else {
      throw FormError("unknown keyword " + key.text() + " in " + to_string(form), pos_of(form));
    }
  }
  if (!type || !var || !inner) {
    throw FormError(to_string(form[0]) + " requires :type, :var, and :action", pos_of(form));
  }
  if (!inner_action_allowed(*inner)) {
    throw FormError(to_string(form[0]) + " action must be :add-hyp, :push-hyp, :pop-hyp, or :add-concl",
                    pos_of(form));
  }
  return Action{Each{*type, *var, std::make_shared<const Action>(std::move(*inner))}};
}

template <class Cond>
SExpr signature_cond_sexpr(std::string_view head, const Cond& c) {
  std::vector<SExpr> items{sym(head)};
  if (c.name) {
    items.push_back(sym(":name"));
    items.push_back(SExpr::symbol(*c.name));
  }
  if (c.type) {
    items.push_back(sym(":type"));
    items.push_back(SExpr::symbol(*c.type));
  }
  return SExpr::list(std::move(items));
}

SExpr operands_sexpr(std::string_view head, const std::vector<Condition>& cs) {
  std::vector<SExpr> items{sym(head)};
  for (const auto& c : cs) items.push_back(to_sexpr(c));
  return SExpr::list(std::move(items));
}

}  // namespace

bool TheoremShell::has_conclusion() const {
  for (const auto& e : stack) {
    if (e.kind == StackEntry::Kind::Concl) return true;
  }
  return false;
}

void TheoremShell::set_keyword(const Symbol& key, SExpr value) {
  for (auto& [k, v] : keywords) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  keywords.emplace_back(key, std::move(value));
}

bool eval_condition(const Condition& c, const FunctionDef& fn) {
  return std::visit(
      Overloaded{
          [](const ConstCond& x) { return x.value; },
          [&](const FnNameCond& x) { return fn.name == x.name; },
          [&](const HasFormalCond& x) {
            for (const auto& f : fn.formals) {
              if (matches(x.name, f.name) && matches_type(x.type, f.type)) return true;
            }
            return false;
          },
          [&](const HasReturnCond& x) {
            for (const auto& r : fn.returns) {
              if (matches(x.name, r.name) && matches_type(x.type, r.type)) return true;
            }
            return false;
          },
          [&](const AndCond& x) {
            for (const auto& c2 : x.operands) {
              if (!eval_condition(c2, fn)) return false;
            }
            return true;
          },
          [&](const OrCond& x) {
            for (const auto& c2 : x.operands) {
              if (eval_condition(c2, fn)) return true;
            }
            return false;
          },
          [&](const NotCond& x) { return !eval_condition(*x.operand, fn); },
      },
      c.node);
}

TheoremShell apply_rules(const std::vector<Rule>& rules, const FunctionDef& fn, const Symbol& base_name) {
  ShellBuilder builder(fn, base_name);
  for (const auto& rule : rules) {
    if (!eval_condition(rule.condition, fn)) continue;
    for (const auto& action : rule.actions) builder.apply(action);
  }
  return builder.take();
}

std::optional<SExpr> render_body(const TheoremShell& shell) {
  struct Group {
    std::vector<SExpr> hyps;
    std::vector<SExpr> concls;
  };
  std::vector<Group> groups;
  std::vector<SExpr> active;
  for (const auto& e : shell.stack) {
    switch (e.kind) {
      case StackEntry::Kind::Push:
        active.push_back(e.term);
        break;
      case StackEntry::Kind::Pop:
        if (!active.empty()) active.pop_back();
        break;
      case StackEntry::Kind::Concl:
        if (groups.empty() || !same_terms(groups.back().hyps, active)) groups.push_back({active, {}});
        groups.back().concls.push_back(e.term);
        break;
    }
  }
  if (groups.empty()) return std::nullopt;

  std::vector<SExpr> conjuncts;
  for (const auto& g : groups) {
    if (g.hyps.empty()) {
      conjuncts.insert(conjuncts.end(), g.concls.begin(), g.concls.end());
    } else {
      conjuncts.push_back(SExpr::list({sym("implies"), conjoin(g.hyps), conjoin(g.concls)}));
    }
  }
  SExpr body = conjoin(conjuncts);
  if (!shell.top_hyps.empty()) body = SExpr::list({sym("implies"), conjoin(shell.top_hyps), body});
  return body;
}

Symbol instantiate_template(const Symbol& name_template, const Symbol& fn_name) {
  return Symbol(replace_all_ci(name_template.text(), "<fn>", fn_name.text()));
}

std::optional<SExpr> render_defret(const TheoremShell& shell, const FunctionDef& fn) {
  auto body = render_body(shell);
  if (!body) return std::nullopt;
  if (!shell.bindings.empty()) {
    body = SExpr::list({sym("b*"), SExpr::list(shell.bindings), *body});
  }
  std::vector<SExpr> items{sym("defret"), SExpr::symbol(instantiate_template(shell.name_template, fn.name)),
                           *body};
  for (const auto& [key, value] : shell.keywords) {
    if (key == ":fn") continue;
    items.push_back(SExpr::symbol(key));
    items.push_back(instantiate_templates_in(value, fn.name));
  }
  items.push_back(sym(":fn"));
  items.push_back(SExpr::symbol(fn.name));
  return SExpr::list(std::move(items));
}

std::vector<Rule> expand_formal_hyps(const SExpr& spec) {
  return expand_signature_entries(spec, Side::Formal);
}

std::vector<Rule> expand_return_concls(const SExpr& spec) {
  return expand_signature_entries(spec, Side::Return);
}

std::vector<Rule> expand_function_keys(const SExpr& spec) {
  std::vector<Rule> rules;
  for (const auto& entry : list_items(spec, ":function-keys")) {
    if (!entry.is_cons() || !entry.is_proper() || !entry[0].is_symbol() || entry[0].is_keyword()) {
      throw FormError("malformed :function-keys entry " + to_string(entry), pos_of(entry, pos_of(spec)));
    }
    Rule rule{Condition{FnNameCond{entry[0].as_symbol()}}, {}};
    for (auto& [key, val] : keyword_pairs(entry.items().subspan(1), entry)) {
      rule.actions.push_back(Action{AddKeyword{key, val}});
    }
    if (rule.actions.empty()) {
      throw FormError(":function-keys entry for " + entry[0].text() + " sets no keywords",
                      pos_of(entry, pos_of(spec)));
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

Condition parse_condition(const SExpr& form) {
  if (form.is_nil()) return Condition::never();
  if (form.is_symbol("t")) return Condition::always();
  if (!form.is_cons() || !form.is_proper() || !form[0].is_symbol()) {
    throw FormError("unknown condition " + to_string(form), pos_of(form));
  }
  const SExpr& head = form[0];
  if (head.is_symbol(":fnname")) {
    SExpr name = one_arg(form);
    if (!name.is_symbol()) throw FormError(":fnname needs a symbol in " + to_string(form), pos_of(form));
    return {FnNameCond{name.as_symbol()}};
  }
  if (head.is_symbol(":has-formal")) return {parse_signature_cond<HasFormalCond>(form)};
  if (head.is_symbol(":has-return")) return {parse_signature_cond<HasReturnCond>(form)};
  if (head.is_symbol("and") || head.is_symbol("or")) {
    std::vector<Condition> operands;
    for (const auto& x : form.items().subspan(1)) operands.push_back(parse_condition(x));
    if (head.is_symbol("and")) return {AndCond{std::move(operands)}};
    return {OrCond{std::move(operands)}};
  }
  if (head.is_symbol("not")) return Condition::negate(parse_condition(one_arg(form)));
  throw FormError("unknown condition " + to_string(form), pos_of(form));
}

Action parse_action(const SExpr& form) {
  if (!form.is_cons() || !form.is_proper() || !form[0].is_keyword()) {
    throw FormError("unknown action " + to_string(form), pos_of(form));
  }
  const SExpr& head = form[0];
  if (head.is_symbol(":add-hyp")) return {AddHyp{one_arg(form)}};
  if (head.is_symbol(":add-concl")) return {AddConcl{one_arg(form)}};
  if (head.is_symbol(":push-hyp")) return {PushHyp{one_arg(form)}};
  if (head.is_symbol(":pop-hyp")) {
    if (form.size() != 1) throw FormError(":pop-hyp takes no arguments", pos_of(form));
    return {PopHyp{}};
  }
  if (head.is_symbol(":add-bindings")) {
    SExpr bindings = one_arg(form);
    if (!bindings.is_list() || !bindings.is_proper()) {
      throw FormError(":add-bindings needs a list of binders", pos_of(form));
    }
    return {AddBindings{bindings}};
  }
  if (head.is_symbol(":each-formal")) return parse_each<EachFormal>(form);
  if (head.is_symbol(":each-return")) return parse_each<EachReturn>(form);
  if (head.is_symbol(":add-keyword")) {
    if (form.size() != 3 || !form[1].is_keyword()) {
      throw FormError(":add-keyword needs a keyword and a value", pos_of(form));
    }
    return {AddKeyword{form[1].as_symbol(), form[2]}};
  }
  if (head.is_symbol(":set-thmname")) {
    SExpr name = one_arg(form);
    if (!name.is_symbol()) throw FormError(":set-thmname needs a symbol", pos_of(form));
    return {SetThmname{name.as_symbol()}};
  }
  throw FormError("unknown action " + to_string(form), pos_of(form));
}

std::vector<Rule> parse_rules(const SExpr& spec) {
  std::vector<Rule> rules;
  for (const auto& entry : list_items(spec, ":rules")) {
    if (!entry.is_cons() || !entry.is_proper() || entry.size() < 2) {
      throw FormError("a rule needs a condition and at least one action: " + to_string(entry),
                      pos_of(entry, pos_of(spec)));
    }
    Rule rule{parse_condition(entry[0]), {}};
    for (const auto& a : entry.items().subspan(1)) rule.actions.push_back(parse_action(a));
    rules.push_back(std::move(rule));
  }
  return rules;
}

SExpr to_sexpr(const Condition& c) {
  return std::visit(
      Overloaded{
          [](const ConstCond& x) { return x.value ? SExpr::t() : SExpr(); },
          [](const FnNameCond& x) { return SExpr::list({sym(":fnname"), SExpr::symbol(x.name)}); },
          [](const HasFormalCond& x) { return signature_cond_sexpr(":has-formal", x); },
          [](const HasReturnCond& x) { return signature_cond_sexpr(":has-return", x); },
          [](const AndCond& x) { return operands_sexpr("and", x.operands); },
          [](const OrCond& x) { return operands_sexpr("or", x.operands); },
          [](const NotCond& x) { return SExpr::list({sym("not"), to_sexpr(*x.operand)}); },
      },
      c.node);
}

SExpr to_sexpr(const Action& a) {
  auto each = [](std::string_view head, const Symbol& type, const Symbol& var, const Action& inner) {
    return SExpr::list({sym(head), sym(":type"), SExpr::symbol(type), sym(":var"), SExpr::symbol(var),
                        sym(":action"), to_sexpr(inner)});
  };
  return std::visit(
      Overloaded{
          [](const AddHyp& x) { return SExpr::list({sym(":add-hyp"), x.term}); },
          [](const AddConcl& x) { return SExpr::list({sym(":add-concl"), x.term}); },
          [](const PushHyp& x) { return SExpr::list({sym(":push-hyp"), x.term}); },
          [](const PopHyp&) { return SExpr::list({sym(":pop-hyp")}); },
          [](const AddBindings& x) { return SExpr::list({sym(":add-bindings"), x.bindings}); },
          [&](const EachFormal& x) { return each(":each-formal", x.type, x.var, *x.action); },
          [&](const EachReturn& x) { return each(":each-return", x.type, x.var, *x.action); },
          [](const AddKeyword& x) {
            return SExpr::list({sym(":add-keyword"), SExpr::symbol(x.key), x.value});
          },
          [](const SetThmname& x) {
            return SExpr::list({sym(":set-thmname"), SExpr::symbol(x.name_template)});
          },
      },
      a.node);
}

SExpr to_sexpr(const Rule& r) {
  std::vector<SExpr> items{to_sexpr(r.condition)};
  for (const auto& a : r.actions) items.push_back(to_sexpr(a));
  return SExpr::list(std::move(items));
}

SExpr to_sexpr(const std::vector<Rule>& rules) {
  std::vector<SExpr> items;
  for (const auto& r : rules) items.push_back(to_sexpr(r));
  return SExpr::list(std::move(items));
}

}  // namespace mutgen
