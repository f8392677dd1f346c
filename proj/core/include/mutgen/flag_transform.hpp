#ifndef MUTGEN_FLAG_TRANSFORM_HPP
#define MUTGEN_FLAG_TRANSFORM_HPP

#include <optional>
#include <vector>

#include "mutgen/clique.hpp"
#include "mutgen/sexpr.hpp"

namespace mutgen {

/// A clique folded into a single function that takes an extra flag argument
/// naming the member to emulate.
struct FlagClique {
  CliqueDef source;
  Symbol flag_fn_name;
  Symbol flag_param;
  std::vector<Formal> union_formals;
  /// The clique's function names, in definition order.
  std::vector<Symbol> flag_values;
  SExpr flag_fn_def;
  SExpr equivalence_thm;

  /// `(<flag-fn> <flag-param> <union formals...>)`
  SExpr flag_call() const;
};

/// One theorem of a flag-defthm invocation.
struct ThmSpec {
  Symbol thm_name;
  Symbol flag_value;
  SExpr body;
  std::optional<SExpr> rule_classes;
  std::optional<SExpr> hints;
  bool skip = false;
};

/// Builds the flag function `(defun <flag-fn> (flag <union formals>) (case flag
/// ...))`. Each member call `(fi a1 .. ak)` in a body becomes `(<flag-fn> 'fi
/// u1 .. um)`, passing the actual argument for fi's own formals and the
/// current value of every other union formal.
FlagClique make_flag_function(const CliqueDef& clique, const Symbol& flag_fn_name,
                              const Symbol& flag_param = Symbol("flag"));

/// Uses the clique's own flag function name.
inline FlagClique make_flag_function(const CliqueDef& clique) {
  return make_flag_function(clique, clique.flag_fn_name);
}

/// `(defthm <flag-fn>-equals-<clique> (equal <flag call> (case flag ...)))`
SExpr make_equivalence_theorem(const FlagClique& fc);

/// Options for the generated flag lemma.
struct FlagDefthmOptions {
  /// Hints placed after the `:induct` hint on the lemma.
  std::optional<SExpr> hints;
  /// Omit the `("goal" :induct ...)` hint.
  bool no_induction_hint = false;
};

/// Expands a set of per-function theorems into the flag lemma (one `case`
/// branch per clique function, `t` for functions without a theorem) followed
/// by one corollary per non-skipped theorem.
std::vector<SExpr> make_flag_defthm(const FlagClique& fc, const std::vector<ThmSpec>& specs,
                                    const Symbol& lemma_name,
                                    const FlagDefthmOptions& options = {});

/// A parsed `(defthm-<flag-fn> [name] (defthm ... :flag fn) ... [:hints h])`.
struct FlagDefthmForm {
  std::optional<Symbol> name;
  std::vector<ThmSpec> specs;
  FlagDefthmOptions options;
};

FlagDefthmForm parse_flag_defthm(const SExpr& form, const FlagClique& fc);

/// Name used for the lemma when a flag-defthm invocation does not supply one
/// explicitly: `<name>-lemma` with `<fn>` replaced by the clique name, or
/// `flag-lemma-for-<first theorem>` for unnamed invocations.
Symbol default_lemma_name(const FlagDefthmForm& form, const FlagClique& fc);

/// Wraps events as `(encapsulate () (local <lemma>) <corollaries...>)`. The
/// first event is taken to be the lemma.
SExpr wrap_encapsulate(const std::vector<SExpr>& events);

}  // namespace mutgen

#endif  // MUTGEN_FLAG_TRANSFORM_HPP
