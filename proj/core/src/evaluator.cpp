#include "mutgen/evaluator.hpp"

#include <map>
#include <optional>
#include <sstream>

namespace mutgen {

const SExpr* Env::lookup(const Symbol& name) const {
  for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it) {
    if (it->first == name) return &it->second;
  }
  return nullptr;
}

namespace {

SExpr sym(std::string_view s) { return SExpr::symbol(s); }
SExpr boolean(bool b) { return b ? SExpr::t() : SExpr(); }

bool truthy(const SExpr& x) { return !x.is_nil(); }

// car/cdr chains such as cadr, cdar, caddar (1 to 4 letters).
bool is_cxr(std::string_view name) {
  if (name.size() < 3 || name.size() > 6) return false;
  if (name.front() != 'c' && name.front() != 'C') return false;
  if (name.back() != 'r' && name.back() != 'R') return false;
  for (char c : name.substr(1, name.size() - 2)) {
    if (c != 'a' && c != 'd' && c != 'A' && c != 'D') return false;
  }
  return true;
}

SExpr apply_cxr(std::string_view name, SExpr x) {
  for (std::size_t i = name.size() - 1; i-- > 1;) {
    x = (name[i] == 'a' || name[i] == 'A') ? x.car() : x.cdr();
  }
  return x;
}

SExpr assoc_equal(const SExpr& key, const SExpr& alist) {
  for (const auto& entry : alist.items()) {
    if (entry.is_cons() && sexpr_equal(entry.car(), key)) return entry;
  }
  return SExpr();
}

SExpr append_values(std::span<const SExpr> args) {
  if (args.empty()) return SExpr();
  std::vector<SExpr> items;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    for (const auto& x : args[i].items()) items.push_back(x);
  }
  return SExpr::list(std::move(items), args.back());
}

std::size_t proper_length(const SExpr& x) { return x.items().size(); }

class Evaluator {
 public:
  Evaluator(const CliqueDef& clique, std::span<const FunctionDef> extra, EvalBudget& budget)
      : budget_(budget) {
    for (const auto& fn : clique.functions) functions_[fn.name.key()] = &fn;
    for (const auto& fn : extra) functions_[fn.name.key()] = &fn;
  }

  SExpr eval(const SExpr& term, const Env& env) {
    switch (term.kind()) {
      case SExpr::Kind::Integer:
      case SExpr::Kind::String:
        return term;
      case SExpr::Kind::Symbol: {
        if (term.is_keyword() || term.is_symbol("t")) return term;
        if (const SExpr* v = env.lookup(term.as_symbol())) return *v;
        throw EvalError("unbound variable " + term.text(), term.pos());
      }
      case SExpr::Kind::List:
        break;
    }
    if (term.is_nil()) return term;
    if (!term.is_proper()) throw EvalError("cannot evaluate dotted form " + to_string(term), term.pos());
    const SExpr& head = term[0];
    auto args = term.items().subspan(1);
    if (head.is_cons()) return eval_lambda_call(term, head, args, env);
    if (!head.is_symbol()) throw EvalError("bad function position in " + to_string(term), term.pos());

    const std::string name = head.as_symbol().key();
    if (name == "quote") {
      expect_args(term, args, 1);
      return args[0];
    }
    if (name == "if") {
      if (args.size() < 2 || args.size() > 3) throw arity_error(term);
      if (truthy(eval(args[0], env))) return eval(args[1], env);
      return args.size() == 3 ? eval(args[2], env) : SExpr();
    }
    if (name == "cond") return eval_cond(args, env);
    if (name == "case") return eval_case(term, args, env);
    if (name == "and") {
      SExpr v = SExpr::t();
      for (const auto& a : args) {
        v = eval(a, env);
        if (!truthy(v)) return v;
      }
      return v;
    }
    if (name == "or") {
      for (const auto& a : args) {
        SExpr v = eval(a, env);
        if (truthy(v)) return v;
      }
      return SExpr();
    }
    if (name == "let" || name == "let*") return eval_let(term, args, env, name == "let*");
    if (name == "mv-let") return eval_mv_let(term, args, env);
    if (name == "b*") return eval_bstar(term, args, env);
    if (name == "mv" || name == "list") return SExpr::list(eval_args(args, env));
    if (name == "lambda") throw EvalError("lambda outside call position", term.pos());

    std::vector<SExpr> vals = eval_args(args, env);
    if (auto it = functions_.find(name); it != functions_.end()) {
      return apply_user(*it->second, vals, term);
    }
    return apply_builtin(name, vals, term);
  }

 private:
  static EvalError arity_error(const SExpr& term) {
    return EvalError("wrong number of arguments in " + to_string(term), term.pos());
  }

  static void expect_args(const SExpr& term, std::span<const SExpr> args, std::size_t n) {
    if (args.size() != n) throw arity_error(term);
  }

  std::vector<SExpr> eval_args(std::span<const SExpr> args, const Env& env) {
    std::vector<SExpr> vals;
    vals.reserve(args.size());
    for (const auto& a : args) vals.push_back(eval(a, env));
    return vals;
  }

  SExpr eval_body(std::span<const SExpr> body, const Env& env) {
    SExpr v;
    for (const auto& form : body) {
      if (form.has_head("declare")) continue;
      v = eval(form, env);
    }
    return v;
  }

  SExpr eval_cond(std::span<const SExpr> clauses, const Env& env) {
    for (const auto& clause : clauses) {
      if (!clause.is_cons()) throw EvalError("malformed cond clause " + to_string(clause), clause.pos());
      SExpr test = eval(clause[0], env);
      if (!truthy(test)) continue;
      if (clause.size() == 1) return test;
      return eval_body(clause.items().subspan(1), env);
    }
    return SExpr();
  }

  SExpr eval_case(const SExpr& term, std::span<const SExpr> args, const Env& env) {
    if (args.empty()) throw arity_error(term);
    SExpr key = eval(args[0], env);
    for (const auto& clause : args.subspan(1)) {
      if (!clause.is_cons()) throw EvalError("malformed case clause " + to_string(clause), clause.pos());
      const SExpr& keys = clause[0];
      bool hit = false;
      if (keys.is_symbol("t") || keys.is_symbol("otherwise")) {
        hit = true;
      } else if (keys.is_cons()) {
        for (const auto& k : keys.items()) hit = hit || sexpr_equal(k, key);
      } else {
        hit = sexpr_equal(keys, key);
      }
      if (hit) return eval_body(clause.items().subspan(1), env);
    }
    return SExpr();
  }

  SExpr eval_let(const SExpr& term, std::span<const SExpr> args, const Env& env, bool sequential) {
    if (args.empty() || !args[0].is_list()) throw EvalError("malformed let " + to_string(term), term.pos());
    Env inner = env;
    for (const auto& b : args[0].items()) {
      Symbol var;
      SExpr value;
      if (b.is_symbol()) {
        var = b.as_symbol();
      } else if (b.is_cons() && b.size() <= 2 && b[0].is_symbol()) {
        var = b[0].as_symbol();
        if (b.size() == 2) value = eval(b[1], sequential ? inner : env);
      } else {
        throw EvalError("malformed let binding " + to_string(b), term.pos());
      }
      inner.bind(var, value);
    }
    return eval_body(args.subspan(1), inner);
  }

  static void bind_values(Env& env, const SExpr& vars, const SExpr& values, const SExpr& term) {
    auto names = vars.items();
    auto vals = values.items();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!names[i].is_symbol()) throw EvalError("bad variable in " + to_string(term), term.pos());
      env.bind(names[i].as_symbol(), i < vals.size() ? vals[i] : SExpr());
    }
  }

  SExpr eval_mv_let(const SExpr& term, std::span<const SExpr> args, const Env& env) {
    if (args.size() < 3) throw arity_error(term);
    SExpr values = eval(args[1], env);
    Env inner = env;
    bind_values(inner, args[0], values, term);
    return eval_body(args.subspan(2), inner);
  }

  static Symbol binder_var(const SExpr& x) {
    std::string text = x.text();
    if (!text.empty() && text.front() == '?') text.erase(0, 1);
    if (!text.empty() && text.front() == '?') text.erase(0, 1);
    return Symbol(text);
  }

  SExpr eval_bstar(const SExpr& term, std::span<const SExpr> args, const Env& env) {
    if (args.empty() || !args[0].is_list()) throw EvalError("malformed b* " + to_string(term), term.pos());
    Env inner = env;
    for (const auto& b : args[0].items()) {
      if (!b.is_cons() || b.size() < 2) throw EvalError("malformed b* binder " + to_string(b), term.pos());
      const SExpr& pattern = b[0];
      SExpr value = eval_body(b.items().subspan(1), inner);
      if (pattern.is_symbol("-")) continue;
      if (pattern.is_symbol()) {
        inner.bind(binder_var(pattern), value);
      } else if (pattern.has_head("mv")) {
        auto vars = pattern.items().subspan(1);
        auto vals = value.items();
        for (std::size_t i = 0; i < vars.size(); ++i) {
          inner.bind(binder_var(vars[i]), i < vals.size() ? vals[i] : SExpr());
        }
      } else {
        throw EvalError("unsupported b* binder " + to_string(pattern), term.pos());
      }
    }
    return eval_body(args.subspan(1), inner);
  }

  SExpr eval_lambda_call(const SExpr& term, const SExpr& lambda, std::span<const SExpr> args,
                         const Env& env) {
    if (!lambda.has_head("lambda") || lambda.size() < 3 || !lambda[1].is_list()) {
      throw EvalError("bad function position in " + to_string(term), term.pos());
    }
    auto formals = lambda[1].items();
    if (formals.size() != args.size()) throw arity_error(term);
    std::vector<SExpr> vals = eval_args(args, env);
    Env inner;
    for (std::size_t i = 0; i < formals.size(); ++i) inner.bind(formals[i].as_symbol(), vals[i]);
    return eval_body(lambda.items().subspan(2), inner);
  }

  SExpr apply_user(const FunctionDef& fn, const std::vector<SExpr>& vals, const SExpr& term) {
    if (vals.size() != fn.formals.size()) throw arity_error(term);
    if (++budget_.calls > budget_.max_calls) {
      throw EvalError("evaluation budget exhausted after " + std::to_string(budget_.max_calls) + " calls",
                      term.pos());
    }
    if (depth_ >= budget_.max_depth) {
      throw EvalError("evaluation budget exhausted: call depth " + std::to_string(depth_), term.pos());
    }
    Env inner;
    for (std::size_t i = 0; i < vals.size(); ++i) inner.bind(fn.formals[i].name, vals[i]);
    ++depth_;
    SExpr v = eval(fn.body, inner);
    --depth_;
    return v;
  }

  SExpr apply_builtin(const std::string& name, const std::vector<SExpr>& v, const SExpr& term) {
    auto need = [&](std::size_t n) {
      if (v.size() != n) throw arity_error(term);
    };
    if (is_cxr(name)) {
      need(1);
      return apply_cxr(name, v[0]);
    }
    if (name == "cons") {
      need(2);
      return SExpr::cons(v[0], v[1]);
    }
    if (name == "atom") {
      need(1);
      return boolean(v[0].is_atom());
    }
    if (name == "consp") {
      need(1);
      return boolean(v[0].is_cons());
    }
    if (name == "null" || name == "not" || name == "endp") {
      need(1);
      return boolean(v[0].is_nil() || (name == "endp" && v[0].is_atom()));
    }
    if (name == "eq" || name == "eql" || name == "equal") {
      need(2);
      return boolean(sexpr_equal(v[0], v[1]));
    }
    if (name == "symbolp") {
      need(1);
      return boolean(v[0].is_nil() || v[0].is_symbol());
    }
    if (name == "integerp") {
      need(1);
      return boolean(v[0].is_integer());
    }
    if (name == "stringp") {
      need(1);
      return boolean(v[0].is_string());
    }
    if (name == "assoc-equal") {
      need(2);
      return assoc_equal(v[0], v[1]);
    }
    if (name == "append" || name == "binary-append") return append_values(v);
    if (name == "len") {
      need(1);
      return SExpr::integer(BigInt(proper_length(v[0])));
    }
    if (name == "last") {
      need(1);
      return v[0].is_cons() ? v[0].drop(v[0].size() - 1) : v[0];
    }
    throw EvalError("unknown function " + term[0].text(), term.pos());
  }

  std::map<std::string, const FunctionDef*> functions_;
  EvalBudget& budget_;
  std::size_t depth_ = 0;
};

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

const char* const kVars[] = {"x", "y", "z"};

SExpr random_constant(std::mt19937_64& rng) {
  switch (pick(rng, 4)) {
    case 0:
      return SExpr::quote(SExpr::integer(BigInt(pick(rng, 10))));
    case 1: {
      static const char* const names[] = {"a", "b", "c", "return-last"};
      return SExpr::quote(sym(names[pick(rng, 4)]));
    }
    case 2:
      return SExpr::quote(SExpr());
    default:
      return SExpr::quote(SExpr::list({sym("k"), SExpr::integer(BigInt(pick(rng, 3)))}));
  }
}

SExpr random_atom(std::mt19937_64& rng) {
  if (pick(rng, 2) == 0) return sym(kVars[pick(rng, 3)]);
  return random_constant(rng);
}

}  // namespace

SExpr eval_term(const CliqueDef& clique, std::span<const FunctionDef> extra_defs,
                const SExpr& term, const Env& env, EvalBudget& budget) {
  return Evaluator(clique, extra_defs, budget).eval(term, env);
}

FunctionDef flag_function_def(const FlagClique& fc) {
  return parse_clique(fc.flag_fn_def).functions.front();
}

SExpr gen_random_term(std::mt19937_64& rng, unsigned depth) {
  if (depth == 0) return random_atom(rng);
  std::uint64_t r = pick(rng, 20);
  if (r < 3) return random_atom(rng);
  if (r < 15) {
    std::vector<SExpr> items;
    if (r < 13) {
      items.push_back(sym(r % 2 == 0 ? "f" : "g"));
      std::uint64_t argc = pick(rng, 4);
      for (std::uint64_t i = 0; i < argc; ++i) items.push_back(gen_random_term(rng, depth - 1));
    } else {
      items.push_back(sym("return-last"));
      for (int i = 0; i < 3; ++i) items.push_back(gen_random_term(rng, depth - 1));
    }
    return SExpr::list(std::move(items));
  }
  std::uint64_t nvars = 1 + pick(rng, 2);
  std::vector<SExpr> vars;
  std::uint64_t first = pick(rng, 3);
  for (std::uint64_t i = 0; i < nvars; ++i) vars.push_back(sym(kVars[(first + i) % 3]));
  SExpr lambda = SExpr::list({sym("lambda"), SExpr::list(vars), gen_random_term(rng, depth - 1)});
  std::vector<SExpr> items{lambda};
  for (std::uint64_t i = 0; i < nvars; ++i) items.push_back(gen_random_term(rng, depth - 1));
  return SExpr::list(std::move(items));
}

SExpr gen_random_term(std::uint64_t seed, unsigned depth) {
  std::mt19937_64 rng(seed);
  return gen_random_term(rng, depth);
}

SExpr default_arg_generator(const Formal& formal, std::mt19937_64& rng) {
  bool substitution = formal.name == "alist" ||
                      (formal.type && formal.type->key().ends_with("substp"));
  if (substitution) {
    std::vector<SExpr> entries;
    std::uint64_t n = pick(rng, 4);
    for (std::uint64_t i = 0; i < n; ++i) {
      entries.push_back(SExpr::cons(sym(kVars[pick(rng, 3)]), random_constant(rng)));
    }
    return SExpr::list(std::move(entries));
  }
  return gen_random_term(rng, static_cast<unsigned>(pick(rng, 5)));
}

std::string EquivReport::describe() const {
  std::ostringstream out;
  out << passed << "/" << trials << " passed\n";
  for (const auto& f : failures) {
    out << "trial " << f.trial << ": " << f.function.text() << " mismatch\n";
    for (const auto& [name, value] : f.inputs) out << "  " << name.text() << " = " << to_string(value) << "\n";
    out << "  direct:    " << f.direct << "\n";
    out << "  flag call: " << f.via_flag << "\n";
  }
  return out.str();
}

EquivReport check_flag_equivalence(const CliqueDef& clique, const FlagClique& fc, std::size_t trials,
                                   std::uint64_t seed, const ArgGenerator& generator) {
  EquivReport report;
  report.trials = trials;
  if (trials == 0) return report;
  std::vector<FunctionDef> extra{flag_function_def(fc)};

  // Result value, or nullopt with `text` holding the error.
  auto run = [&](const SExpr& call, const Env& env, std::string& text) -> std::optional<SExpr> {
    try {
      EvalBudget budget;
      SExpr v = eval_term(clique, extra, call, env, budget);
      text = to_string(v);
      return v;
    } catch (const EvalError& e) {
      text = std::string("error: ") + e.what();
      return std::nullopt;
    }
  };

  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + trial);
    const FunctionDef& fn = clique.functions[pick(rng, clique.functions.size())];
    Env env;
    std::vector<std::pair<Symbol, SExpr>> inputs;
    for (const auto& f : fc.union_formals) {
      SExpr value = generator(f, rng);
      env.bind(f.name, value);
      inputs.emplace_back(f.name, value);
    }
    std::vector<SExpr> flag_call{SExpr::symbol(fc.flag_fn_name), SExpr::quote(SExpr::symbol(fn.name))};
    for (const auto& f : fc.union_formals) flag_call.push_back(SExpr::symbol(f.name));

    std::string direct;
    std::string via_flag;
    auto lhs = run(fn.call_on_formals(), env, direct);
    auto rhs = run(SExpr::list(std::move(flag_call)), env, via_flag);
    if (lhs && rhs && sexpr_equal(*lhs, *rhs)) {
      ++report.passed;
    } else {
      report.failures.push_back(EquivFailure{trial, fn.name, std::move(inputs), direct, via_flag});
    }
  }
  return report;
}

}  // namespace mutgen
