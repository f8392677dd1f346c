#ifndef MUTGEN_CLIQUE_HPP
#define MUTGEN_CLIQUE_HPP

#include <functional>
#include <optional>
#include <vector>

#include "mutgen/sexpr.hpp"

namespace mutgen {

/// A formal parameter, optionally declared with a unary type predicate.
struct Formal {
  Symbol name;
  std::optional<Symbol> type;

  friend bool operator==(const Formal&, const Formal&) = default;
};

/// A named return value, optionally typed.
struct ReturnSpec {
  Symbol name;
  std::optional<Symbol> type;

  friend bool operator==(const ReturnSpec&, const ReturnSpec&) = default;
};

struct FunctionDef {
  Symbol name;
  std::vector<Formal> formals;
  /// Never empty; a plain `defun` gets a single `<name>-result` return.
  std::vector<ReturnSpec> returns;
  SExpr body;
  SourcePos pos;

  bool has_formal(const Symbol& formal) const;
  /// `(name formal...)`
  SExpr call_on_formals() const;
};

bool operator==(const FunctionDef& a, const FunctionDef& b);

/// A mutually recursive clique in normalized form.
struct CliqueDef {
  Symbol name;
  std::vector<FunctionDef> functions;
  /// Name of the flag function; `<name>-flag` unless a `make-flag` form
  /// says otherwise.
  Symbol flag_fn_name;
  /// Forms following `///` in a `defines`, kept for the tool layer.
  std::vector<SExpr> post_forms;
  SourcePos pos;

  /// `defthm-<flag-fn-name>`, e.g. `defthm-subst-term-flag`.
  Symbol flag_macro_name() const;
  bool is_member(const Symbol& fn) const;
};

bool operator==(const CliqueDef& a, const CliqueDef& b);

/// Parses a `(mutual-recursion (defun ...) ...)` or `(defines name (define ...)
/// ...)` form. A lone `defun` or `define` is accepted as a one-function
/// clique.
CliqueDef parse_clique(const SExpr& form);

/// True when `form` is something parse_clique accepts.
bool is_clique_form(const SExpr& form);

enum class TypeConflict { Error, KeepFirst };

/// Formals of all clique functions, ordered by first appearance. A formal
/// keeps the first explicit type seen for it. Two different explicit types
/// for one name throw unless `on_conflict` is KeepFirst.
std::vector<Formal> formals_union(const CliqueDef& clique,
                                  TypeConflict on_conflict = TypeConflict::Error);

const FunctionDef& find_function(const CliqueDef& clique, const Symbol& name);

/// Re-serializes a clique as a `defines` form that parse_clique maps back to
/// an equal CliqueDef.
SExpr clique_to_defines(const CliqueDef& clique);

/// Rebuilds `term` bottom-up, passing every function call (after its
/// arguments are rebuilt) to `rewrite`. Quoted data, `case` keys, and binder
/// patterns of `let`/`b*`/`mv-let`/`lambda` are not treated as calls.
SExpr rewrite_calls(const SExpr& term, const std::function<SExpr(const SExpr& call)>& rewrite);

/// Calls a term makes to members of `clique`; arguments are visited before
/// the call that contains them.
void for_each_member_call(const SExpr& term, const CliqueDef& clique,
                          const std::function<void(const SExpr&)>& visit);

}  // namespace mutgen

#endif  // MUTGEN_CLIQUE_HPP
