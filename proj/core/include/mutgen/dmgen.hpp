#ifndef MUTGEN_DMGEN_HPP
#define MUTGEN_DMGEN_HPP

// Rule engine behind defret-mutual-generate: conditions over a function's
// signature select actions that build up a theorem shell, and each shell is
// rendered as one `defret` form.

#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "mutgen/clique.hpp"
#include "mutgen/sexpr.hpp"

namespace mutgen {

// ---------------------------------------------------------------------------
// Conditions

struct Condition;

/// `(:fnname name)`
struct FnNameCond {
  Symbol name;
};

/// `(:has-formal [:name n] [:type ty])`; at least one of the two is set.
struct HasFormalCond {
  std::optional<Symbol> name;
  std::optional<Symbol> type;
};

/// `(:has-return [:name n] [:type ty])`
struct HasReturnCond {
  std::optional<Symbol> name;
  std::optional<Symbol> type;
};

struct AndCond {
  std::vector<Condition> operands;
};

struct OrCond {
  std::vector<Condition> operands;
};

struct NotCond {
  std::shared_ptr<const Condition> operand;
};

/// `t` or `nil`
struct ConstCond {
  bool value = true;
};

struct Condition {
  std::variant<ConstCond, FnNameCond, HasFormalCond, HasReturnCond, AndCond, OrCond, NotCond> node;

  static Condition always() { return {ConstCond{true}}; }
  static Condition never() { return {ConstCond{false}}; }
  static Condition negate(Condition c) {
    return {NotCond{std::make_shared<const Condition>(std::move(c))}};
  }
};

// ---------------------------------------------------------------------------
// Actions

struct Action;

struct AddHyp {
  SExpr term;
};
struct AddConcl {
  SExpr term;
};
struct AddBindings {
  /// A list of b* binders, appended to the shell's bindings.
  SExpr bindings;
};
struct PushHyp {
  SExpr term;
};
struct PopHyp {};

/// Runs `action` once per formal (or return) whose declared type is `type`,
/// with `var` replaced by that formal's name.
struct EachFormal {
  Symbol type;
  Symbol var;
  std::shared_ptr<const Action> action;
};
struct EachReturn {
  Symbol type;
  Symbol var;
  std::shared_ptr<const Action> action;
};

struct AddKeyword {
  Symbol key;
  SExpr value;
};

/// Template in which `<fn>` stands for the function name.
struct SetThmname {
  Symbol name_template;
};

struct Action {
  std::variant<AddHyp, AddConcl, AddBindings, PushHyp, PopHyp, EachFormal, EachReturn, AddKeyword,
               SetThmname>
      node;
};

struct Rule {
  Condition condition;
  std::vector<Action> actions;
};

// ---------------------------------------------------------------------------
// Theorem shells

struct StackEntry {
  enum class Kind { Push, Pop, Concl };
  Kind kind;
  /// Hypothesis for Push, conclusion for Concl, nil for Pop.
  SExpr term;
};

struct TheoremShell {
  Symbol name_template;
  std::vector<SExpr> top_hyps;
  std::vector<StackEntry> stack;
  std::vector<SExpr> bindings;
  /// At most one entry per keyword, in first-set order.
  std::vector<std::pair<Symbol, SExpr>> keywords;

  bool has_conclusion() const;
  /// Sets or replaces a keyword.
  void set_keyword(const Symbol& key, SExpr value);
};

bool eval_condition(const Condition& c, const FunctionDef& fn);

/// Applies rules in order to an initially empty shell named `base_name`.
/// Throws FormError on a pop with no open push-hyp.
TheoremShell apply_rules(const std::vector<Rule>& rules, const FunctionDef& fn,
                         const Symbol& base_name);

/// The theorem body, or nullopt when the shell has no conclusions. Each
/// conclusion is guarded by the push-hyps open at its position; runs of
/// conclusions under the same hyps share one `implies`.
std::optional<SExpr> render_body(const TheoremShell& shell);

/// `(defret <name> [(b* <bindings> ]<body>[)] <keywords...> :fn <fn>)`, or
/// nullopt when the theorem is skipped.
std::optional<SExpr> render_defret(const TheoremShell& shell, const FunctionDef& fn);

/// Replaces `<fn>` (any case) in a symbol's text by `fn_name`.
Symbol instantiate_template(const Symbol& name_template, const Symbol& fn_name);

// ---------------------------------------------------------------------------
// Argument syntax

/// `:formal-hyps` entries: `(name term [:type ty])` becomes a has-formal /
/// add-hyp rule, `((ty var) term)` an each-formal / add-hyp rule under `t`.
std::vector<Rule> expand_formal_hyps(const SExpr& spec);

/// `:return-concls` entries, same shapes with has-return / add-concl.
std::vector<Rule> expand_return_concls(const SExpr& spec);

/// `:function-keys` entries `(fnname :key val ...)`.
std::vector<Rule> expand_function_keys(const SExpr& spec);

/// `:rules` argument: a list of `(condition action...)`.
std::vector<Rule> parse_rules(const SExpr& spec);

Condition parse_condition(const SExpr& form);
Action parse_action(const SExpr& form);

/// Inverse of the parsers, in `:rules` syntax.
SExpr to_sexpr(const Condition& c);
SExpr to_sexpr(const Action& a);
SExpr to_sexpr(const Rule& r);
SExpr to_sexpr(const std::vector<Rule>& rules);

}  // namespace mutgen

#endif  // MUTGEN_DMGEN_HPP
