#ifndef MUTGEN_EVALUATOR_HPP
#define MUTGEN_EVALUATOR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mutgen/clique.hpp"
#include "mutgen/flag_transform.hpp"
#include "mutgen/sexpr.hpp"

namespace mutgen {

/// Variable bindings; later bindings shadow earlier ones.
class Env {
 public:
  Env() = default;
  Env(std::initializer_list<std::pair<Symbol, SExpr>> bindings) : bindings_(bindings) {}

  void bind(Symbol name, SExpr value) { bindings_.emplace_back(std::move(name), std::move(value)); }
  const SExpr* lookup(const Symbol& name) const;
  std::span<const std::pair<Symbol, SExpr>> bindings() const { return bindings_; }

 private:
  std::vector<std::pair<Symbol, SExpr>> bindings_;
};

/// Limits that keep the oracle terminating without measure analysis.
struct EvalBudget {
  std::size_t max_calls = 100'000;
  std::size_t max_depth = 2'000;
  /// User-function applications so far.
  std::size_t calls = 0;
};

/// Strict evaluation of `term` with the clique's functions and `extra_defs`
/// callable. `car`/`cdr` of an atom is nil; multiple values are lists.
SExpr eval_term(const CliqueDef& clique, std::span<const FunctionDef> extra_defs,
                const SExpr& term, const Env& env, EvalBudget& budget);

inline SExpr eval_term(const CliqueDef& clique, const SExpr& term, const Env& env) {
  EvalBudget budget;
  return eval_term(clique, {}, term, env, budget);
}

/// The flag function of `fc` as a callable definition.
FunctionDef flag_function_def(const FlagClique& fc);

/// Deterministic pseudo-random pseudo-term over variables x, y, z, quoted
/// constants, applications of `f`/`g`/`return-last`, and lambda calls.
/// Depth 0 yields an atom or quoted constant.
SExpr gen_random_term(std::uint64_t seed, unsigned depth);

/// Same generator driven by an existing engine.
SExpr gen_random_term(std::mt19937_64& rng, unsigned depth);

/// Produces an argument value for one formal.
using ArgGenerator = std::function<SExpr(const Formal&, std::mt19937_64&)>;

/// Default argument heuristic: a formal named `alist`, or typed with a
/// predicate ending in `substp`, gets an alist from variables to quoted
/// constants; everything else gets a random term.
SExpr default_arg_generator(const Formal& formal, std::mt19937_64& rng);

struct EquivFailure {
  std::size_t trial = 0;
  Symbol function;
  std::vector<std::pair<Symbol, SExpr>> inputs;
  /// Printed result (or error message) of each side.
  std::string direct;
  std::string via_flag;
};

struct EquivReport {
  std::size_t trials = 0;
  std::size_t passed = 0;
  /// Sorted by trial index.
  std::vector<EquivFailure> failures;

  bool ok() const { return failures.empty(); }
  /// "<passed>/<trials> passed" followed by one block per failure.
  std::string describe() const;
};

/// Evaluates each clique function directly and through the flag function on
/// random inputs and compares the results.
EquivReport check_flag_equivalence(const CliqueDef& clique, const FlagClique& fc,
                                   std::size_t trials, std::uint64_t seed,
                                   const ArgGenerator& generator = default_arg_generator);

}  // namespace mutgen

#endif  // MUTGEN_EVALUATOR_HPP
