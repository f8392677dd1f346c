#ifndef MUTGEN_EXPANSION_HPP
#define MUTGEN_EXPANSION_HPP

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mutgen/clique.hpp"
#include "mutgen/dmgen.hpp"
#include "mutgen/flag_transform.hpp"
#include "mutgen/sexpr.hpp"

namespace mutgen {

/// A parsed `(defret-mutual-generate <name> :keyword value ...)` form.
struct DmgenForm {
  /// Theorem name template, normally containing `<fn>`.
  Symbol name;
  std::optional<SExpr> formal_hyps;
  std::optional<SExpr> return_concls;
  std::optional<SExpr> function_keys;
  std::optional<SExpr> rules;
  std::optional<SExpr> hints;
  bool no_induction_hint = false;
  std::optional<Symbol> mutual_recursion;
  SourcePos pos;
};

DmgenForm parse_dmgen_form(const SExpr& form);

/// All rules of a dmgen form: `:formal-hyps`, then `:return-concls`, then
/// `:rules`, then `:function-keys`.
std::vector<Rule> dmgen_rules(const DmgenForm& form);

/// `(defret-mutual <name> <defret>... [:hints h] :mutual-recursion <clique>)`
/// with one defret per function that received a conclusion. Throws when no
/// function does. Non-fatal diagnostics are appended to `warnings`.
SExpr dmgen_expand(const DmgenForm& form, const CliqueDef& clique,
                   std::vector<std::string>* warnings = nullptr);

/// `(defret name body kw... :fn f)` to `(defthm name (b* ((<binder> (f
/// formals...))) body) kw... :flag f)`. Every bound return gets a `?` prefix.
SExpr defret_expand(const SExpr& defret, const FunctionDef& fn);

/// Resolves `:fn` against the clique.
SExpr defret_expand(const SExpr& defret, const CliqueDef& clique);

/// `(defret-mutual ...)` to `(defthm-<flag-fn> <name> <defthm>... [:hints h])`.
SExpr defret_mutual_expand(const SExpr& form, const CliqueDef& clique);

enum class Stage { Dmgen, DefretMutual, FlagDefthm, Events };

std::optional<Stage> parse_stage(std::string_view name);
std::string_view stage_name(Stage stage);

/// Intermediate and final results of the full pipeline.
struct Expansion {
  /// Present when the source was a defret-mutual-generate form.
  std::optional<SExpr> dmgen;
  SExpr defret_mutual;
  SExpr flag_defthm;
  /// Flag lemma followed by one corollary per theorem.
  std::vector<SExpr> events;
  std::vector<std::string> warnings;

  /// The forms of one stage, for printing.
  std::vector<SExpr> stage(Stage s) const;
};

/// Runs dmgen (when `source` is a defret-mutual-generate form), then the
/// defret-mutual expansion, then the flag-defthm expansion. `source` may
/// also be a defret-mutual form.
Expansion full_expand(const SExpr& source, const CliqueDef& clique);

/// One theorem to be proved by induction over a quantified condition.
struct SkEntry {
  Symbol function;
  SExpr body;
  std::vector<Symbol> quantified;
  Symbol final_thm_name;
};

struct SkScaffoldSpec {
  std::vector<SkEntry> entries;
};

/// `(sk-scaffold (<fn> <body> :vars (v...) [:name thm]) ...)`; the theorem
/// name defaults to `<fn>-correct`.
SkScaffoldSpec parse_sk_scaffold(const SExpr& form);

/// Emits the defun-sk conditions, one flag-defthm invocation proving them
/// with the stable-under-simplification `:expand` hint, and the final
/// theorems derived from the lemmas.
std::vector<SExpr> generate_sk_scaffold(const CliqueDef& clique, const SkScaffoldSpec& spec);

/// Free variables of a term. Understands quote, let, let*, b*, mv-let, and
/// lambda; `?x` binders bind `x`.
std::set<std::string> free_variables(const SExpr& term);

}  // namespace mutgen

#endif  // MUTGEN_EXPANSION_HPP
