#include "mutgen/evaluator.hpp"

#include <gtest/gtest.h>

#include "mutgen/flag_transform.hpp"
#include "test_support.hpp"

namespace mutgen {
namespace {

using testing::load_clique;

SExpr eval(const CliqueDef& c, std::string_view term, Env env = {}) {
  return eval_term(c, read_one(term), env);
}

SExpr eval0(std::string_view term) { return eval(CliqueDef{}, term); }

// Swaps the bodies of the first two case branches of a flag function.
FlagClique swap_first_branches(FlagClique fc) {
  SExpr def = fc.flag_fn_def;
  SExpr body = def[3];
  std::vector<SExpr> branches(body.items().begin(), body.items().end());
  SExpr b1 = branches[2], b2 = branches[3];
  branches[2] = SExpr::list({b1[0], b2[1]});
  branches[3] = SExpr::list({b2[0], b1[1]});
  std::vector<SExpr> items(def.items().begin(), def.items().end());
  items[3] = SExpr::list(branches);
  fc.flag_fn_def = SExpr::list(items);
  return fc;
}

TEST(Eval, Builtins) {
  EXPECT_TRUE(eval0("(car nil)").is_nil());
  EXPECT_TRUE(eval0("(cdr nil)").is_nil());
  EXPECT_TRUE(eval0("(car 'a)").is_nil());
  EXPECT_TRUE(sexpr_equal(eval0("(cons 1 '(2))"), read_one("(1 2)")));
  EXPECT_TRUE(sexpr_equal(eval0("(cadddr '(a b c d e))"), read_one("d")));
  EXPECT_TRUE(sexpr_equal(eval0("(caddar '((a b c)))"), read_one("c")));
  EXPECT_TRUE(sexpr_equal(eval0("(cadar '((a b)))"), read_one("b")));
  EXPECT_TRUE(sexpr_equal(eval0("(cddddr '(a b c d e))"), read_one("(e)")));
  EXPECT_TRUE(eval0("(atom 'x)").is_symbol("t"));
  EXPECT_TRUE(eval0("(consp 'x)").is_nil());
  EXPECT_TRUE(eval0("(null nil)").is_symbol("t"));
  EXPECT_TRUE(eval0("(not t)").is_nil());
  EXPECT_TRUE(eval0("(equal '(a 1) '(A 1))").is_symbol("t"));
  EXPECT_TRUE(eval0("(eq 'a 'b)").is_nil());
  EXPECT_TRUE(eval0("(symbolp 'a)").is_symbol("t"));
  EXPECT_TRUE(eval0("(symbolp nil)").is_symbol("t"));
  EXPECT_TRUE(sexpr_equal(eval0("(assoc-equal 'b '((a . 1) (b . 2)))"), read_one("(b . 2)")));
  EXPECT_TRUE(sexpr_equal(eval0("(list 1 2 3)"), read_one("(1 2 3)")));
  EXPECT_TRUE(sexpr_equal(eval0("(append '(1) '(2) '(3))"), read_one("(1 2 3)")));
  EXPECT_TRUE(sexpr_equal(eval0("\"s\""), read_one("\"s\"")));
  EXPECT_TRUE(sexpr_equal(eval0("42"), read_one("42")));
}

TEST(Eval, SpecialForms) {
  EXPECT_TRUE(sexpr_equal(eval0("(if nil 1 2)"), read_one("2")));
  EXPECT_TRUE(sexpr_equal(eval0("(cond ((eq 'a 'b) 1) ((eq 'a 'a) 2) (t 3))"), read_one("2")));
  EXPECT_TRUE(eval0("(cond (nil 1))").is_nil());
  EXPECT_TRUE(sexpr_equal(eval0("(case 'b (a 1) (b 2) (t 3))"), read_one("2")));
  EXPECT_TRUE(sexpr_equal(eval0("(case 'z (a 1) ((y z) 2) (otherwise 3))"), read_one("2")));
  EXPECT_TRUE(sexpr_equal(eval0("(case 'q (a 1) (otherwise 3))"), read_one("3")));
  EXPECT_TRUE(sexpr_equal(eval0("(and 1 2)"), read_one("2")));
  EXPECT_TRUE(eval0("(and 1 nil 2)").is_nil());
  EXPECT_TRUE(eval0("(and)").is_symbol("t"));
  EXPECT_TRUE(sexpr_equal(eval0("(or nil 5)"), read_one("5")));
  EXPECT_TRUE(sexpr_equal(eval0("(let ((a 1) (b 2)) (list a b))"), read_one("(1 2)")));
  EXPECT_TRUE(sexpr_equal(eval0("(let ((a 1)) (let ((a 2) (b a)) b))"), read_one("1")));
  EXPECT_TRUE(sexpr_equal(eval0("(let* ((a 1) (b a)) b)"), read_one("1")));
  EXPECT_TRUE(sexpr_equal(eval0("(mv-let (a b) (mv 1 2) (list b a))"), read_one("(2 1)")));
  EXPECT_TRUE(sexpr_equal(eval0("(b* ((a 1) ((mv b c) (mv 2 3)) (?d 4) (- 5)) (list a b c d))"),
                          read_one("(1 2 3 4)")));
  EXPECT_TRUE(sexpr_equal(eval0("((lambda (a b) (cons b a)) 1 2)"), read_one("(2 . 1)")));
}

TEST(Eval, Errors) {
  EXPECT_THROW(eval0("y"), EvalError);
  EXPECT_THROW(eval0("(frob 1)"), EvalError);
  EXPECT_THROW(eval0("(cons 1)"), EvalError);
  CliqueDef loop = parse_clique(read_one("(defun f (x) (f x))"));
  EvalBudget budget;
  budget.max_calls = 1000;
  EXPECT_THROW(eval_term(loop, {}, read_one("(f 1)"), Env{}, budget), EvalError);
  CliqueDef c = load_clique("subst_term.lisp");
  EXPECT_THROW(eval(c, "(subst-term x)", Env{{Symbol("x"), SExpr()}}), EvalError);
}

TEST(Eval, EnvMostRecentBindingWins) {
  Env env;
  env.bind(Symbol("x"), read_one("1"));
  env.bind(Symbol("X"), read_one("2"));
  ASSERT_NE(env.lookup(Symbol("x")), nullptr);
  EXPECT_TRUE(sexpr_equal(*env.lookup(Symbol("x")), read_one("2")));
  EXPECT_EQ(env.lookup(Symbol("y")), nullptr);
}

TEST(Eval, SubstTermHandTraces) {
  CliqueDef c = load_clique("subst_term.lisp");
  Env env{{Symbol("x"), read_one("x")}, {Symbol("alist"), read_one("((x . (quote 3)))")}};
  EXPECT_TRUE(sexpr_equal(eval(c, "(subst-term x alist)", env), read_one("(quote 3)")));
  Env nil_env{{Symbol("x"), SExpr()}, {Symbol("alist"), read_one("((x . (quote 3)))")}};
  EXPECT_TRUE(eval(c, "(subst-term x alist)", nil_env).is_nil());
  Env call_env{{Symbol("x"), read_one("(f x (g y) '5)")},
               {Symbol("alist"), read_one("((x . (quote 3)) (y . z))")}};
  EXPECT_TRUE(sexpr_equal(eval(c, "(subst-term x alist)", call_env), read_one("(f '3 (g z) '5)")));
}

TEST(Eval, FlagFunctionAgreesOnHandTrace) {
  CliqueDef c = load_clique("subst_term.lisp");
  FlagClique fc = make_flag_function(c);
  std::vector<FunctionDef> extra = {flag_function_def(fc)};
  Env env{{Symbol("x"), read_one("(f x y)")}, {Symbol("alist"), read_one("((x . (quote 3)))")}};
  EvalBudget b1, b2;
  SExpr direct = eval_term(c, extra, read_one("(subst-term x alist)"), env, b1);
  SExpr flagged = eval_term(c, extra, read_one("(subst-term-flag 'subst-term x alist)"), env, b2);
  EXPECT_TRUE(sexpr_equal(direct, flagged));
  EXPECT_TRUE(sexpr_equal(direct, read_one("(f '3 nil)")));
}

TEST(Eval, RemoveReturnLastHandTrace) {
  CliqueDef c = load_clique("remove_return_last.lisp");
  Env env{{Symbol("x"), read_one("(f (return-last 'a 'b (g y)) ((lambda (v) (return-last 'c 'd v)) z))")}};
  EXPECT_TRUE(sexpr_equal(eval(c, "(remove-return-last-term x)", env),
                          read_one("(f (g y) ((lambda (v) v) z))")));
}

TEST(RandomTerm, DepthZeroIsAtom) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SExpr t = gen_random_term(seed, 0);
    EXPECT_TRUE(t.is_symbol() || t.has_head("quote")) << to_string(t);
  }
}

TEST(RandomTerm, Deterministic) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_EQ(to_string(gen_random_term(seed, 4)), to_string(gen_random_term(seed, 4)));
  }
}

TEST(RandomTerm, SeedOneDepthThreeFixture) {
  SExpr golden = testing::read_data_forms("random_term_seed1_depth3.golden").at(0);
  EXPECT_TRUE(sexpr_equal(gen_random_term(1, 3), golden)) << to_string(gen_random_term(1, 3));
}

TEST(CheckEquiv, SubstTerm) {
  CliqueDef c = load_clique("subst_term.lisp");
  EquivReport r = check_flag_equivalence(c, make_flag_function(c), 1000, 0);
  EXPECT_EQ(r.trials, 1000u);
  EXPECT_EQ(r.passed, 1000u);
  EXPECT_TRUE(r.ok()) << r.describe();
  EXPECT_EQ(r.describe().substr(0, 14), "1000/1000 pass");
}

TEST(CheckEquiv, RemoveReturnLast) {
  CliqueDef c = load_clique("remove_return_last.lisp");
  EquivReport r = check_flag_equivalence(c, make_flag_function(c), 1000, 0);
  EXPECT_TRUE(r.ok()) << r.describe();
}

TEST(CheckEquiv, MutationIsCaught) {
  for (const char* name : {"subst_term.lisp", "remove_return_last.lisp"}) {
    CliqueDef c = load_clique(name);
    FlagClique bad = swap_first_branches(make_flag_function(c));
    EquivReport r = check_flag_equivalence(c, bad, 1000, 0);
    EXPECT_FALSE(r.ok()) << name;
    EXPECT_GE(r.failures.size(), 1u);
    EXPECT_EQ(r.passed + r.failures.size(), 1000u);
  }
}

TEST(CheckEquiv, ZeroTrials) {
  CliqueDef c = load_clique("subst_term.lisp");
  EquivReport r = check_flag_equivalence(c, make_flag_function(c), 0, 0);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.trials, 0u);
}

TEST(CheckEquiv, PassThroughClique) {
  CliqueDef c = parse_clique(read_one(
      "(mutual-recursion (defun f (a b) (if (consp b) (g b) a)) (defun g (b) (if (consp b) (f (car b) (cdr b)) b)))"));
  EXPECT_TRUE(check_flag_equivalence(c, make_flag_function(c), 1000, 7).ok());
}

TEST(CheckEquiv, ArgumentGeneratorHook) {
  CliqueDef c = load_clique("subst_term.lisp");
  int calls = 0;
  ArgGenerator gen = [&](const Formal& f, std::mt19937_64& rng) {
    ++calls;
    return default_arg_generator(f, rng);
  };
  EXPECT_TRUE(check_flag_equivalence(c, make_flag_function(c), 10, 0, gen).ok());
  EXPECT_EQ(calls, 20);
}

TEST(CheckEquiv, DefaultGeneratorHeuristic) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    SExpr a = default_arg_generator(Formal{Symbol("alist"), std::nullopt}, rng);
    for (const auto& pair : a.items()) {
      ASSERT_TRUE(pair.is_cons());
      EXPECT_TRUE(pair[0].is_symbol());
    }
    SExpr b = default_arg_generator(Formal{Symbol("s"), Symbol("pseudo-term-substp")}, rng);
    EXPECT_TRUE(b.is_list());
  }
}

TEST(CheckEquiv, EvaluationErrorsAreFailures) {
  CliqueDef c = parse_clique(read_one("(defun f (x) (frob x))"));
  EquivReport r = check_flag_equivalence(c, make_flag_function(c), 5, 0);
  EXPECT_EQ(r.failures.size(), 5u);
}

}  // namespace
}  // namespace mutgen
