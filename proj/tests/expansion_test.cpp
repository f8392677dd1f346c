#include "mutgen/expansion.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"

namespace mutgen {
namespace {

using testing::find_form;
using testing::load_clique;
using testing::read_data_forms;

SExpr dmgen_source(std::string_view file) {
  return find_form(read_data_forms(file), "defret-mutual-generate");
}

std::vector<std::string> keyword_targets(const std::vector<SExpr>& forms, std::string_view key) {
  std::vector<std::string> out;
  for (const auto& f : forms) {
    auto items = f.items();
    for (std::size_t i = 0; i + 1 < items.size(); ++i) {
      if (items[i].is_symbol(key)) out.push_back(Symbol(items[i + 1].text()).key());
    }
  }
  return out;
}

std::vector<SExpr> sub_forms(const SExpr& form, std::string_view head) {
  std::vector<SExpr> out;
  for (const auto& item : form.items()) {
    if (item.has_head(head)) out.push_back(item);
  }
  return out;
}

TEST(ParseDmgenForm, Fields) {
  DmgenForm d = parse_dmgen_form(dmgen_source("bfrs_ok.lisp"));
  EXPECT_EQ(d.name, "interp-st-bfrs-ok-of-<fn>");
  EXPECT_TRUE(d.formal_hyps && d.return_concls && d.rules && d.hints);
  EXPECT_FALSE(d.function_keys.has_value());
  EXPECT_FALSE(d.no_induction_hint);
  EXPECT_EQ(*d.mutual_recursion, "fgl-interp");
  EXPECT_THROW(parse_dmgen_form(read_one("(defret-mutual-generate n :bogus 1)")), FormError);
  EXPECT_THROW(parse_dmgen_form(read_one("(defret-mutual-generate n :rules)")), FormError);
  EXPECT_THROW(parse_dmgen_form(read_one("(defret-mutual-generate)")), FormError);
}

TEST(DmgenRules, FixedOrder) {
  DmgenForm d = parse_dmgen_form(read_one(
      "(defret-mutual-generate n :function-keys ((f :hints h)) :rules ((t (:add-concl r)))"
      " :return-concls ((x (rc x))) :formal-hyps ((y (fh y))))"));
  auto rules = dmgen_rules(d);
  ASSERT_EQ(rules.size(), 4u);
  EXPECT_TRUE(std::holds_alternative<AddHyp>(rules[0].actions[0].node));
  EXPECT_TRUE(std::holds_alternative<AddConcl>(rules[1].actions[0].node));
  EXPECT_TRUE(std::holds_alternative<ConstCond>(rules[2].condition.node));
  EXPECT_TRUE(std::holds_alternative<AddKeyword>(rules[3].actions[0].node));
}

TEST(DmgenExpand, MiniatureCliqueSkipsOne) {
  CliqueDef c = load_clique("mini_interp.lisp");
  std::vector<std::string> warnings;
  SExpr out = dmgen_expand(parse_dmgen_form(dmgen_source("mini_interp.lisp")), c, &warnings);
  EXPECT_TRUE(warnings.empty());
  EXPECT_TRUE(sexpr_equal(out, read_data_forms("mini_interp_dmgen.golden").at(0))) << print_canonical(out);
  auto defrets = sub_forms(out, "defret");
  ASSERT_EQ(defrets.size(), 2u);
  EXPECT_TRUE(sexpr_equal(defrets[0][2], defrets[1][2]));
  EXPECT_FALSE(sexpr_equal(defrets[0][1], defrets[1][1]));
}

TEST(DmgenExpand, FunctionKeysOnlyForOne) {
  CliqueDef c = load_clique("mini_interp.lisp");
  SExpr out = dmgen_expand(
      parse_dmgen_form(read_one("(defret-mutual-generate foo-<fn> :rules ((t (:add-concl (p x))))"
                                " :function-keys ((fgl-interp-simple-p :rule-classes nil)))")),
      c);
  auto defrets = sub_forms(out, "defret");
  ASSERT_EQ(defrets.size(), 3u);
  EXPECT_EQ(defrets[0].size(), 5u);
  EXPECT_TRUE(sexpr_equal(defrets[2], read_one("(defret foo-fgl-interp-simple-p (p x) :rule-classes nil"
                                               " :fn fgl-interp-simple-p)")));
}

TEST(DmgenExpand, Errors) {
  CliqueDef c = load_clique("mini_interp.lisp");
  EXPECT_THROW(dmgen_expand(parse_dmgen_form(read_one("(defret-mutual-generate foo-<fn> :return-concls ((nothing t)))")), c),
               FormError);
  EXPECT_THROW(dmgen_expand(parse_dmgen_form(read_one("(defret-mutual-generate foo-<fn>"
                                                      " :rules ((t (:add-concl c))) :mutual-recursion other)")),
                            c),
               FormError);
}

TEST(DmgenExpand, NameWithoutTemplateWarns) {
  CliqueDef c = load_clique("mini_interp.lisp");
  std::vector<std::string> warnings;
  SExpr out = dmgen_expand(parse_dmgen_form(read_one("(defret-mutual-generate same :rules ((t (:add-concl c))))")),
                           c, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  for (const auto& d : sub_forms(out, "defret")) EXPECT_TRUE(d[1].is_symbol("same"));
}

TEST(DmgenExpand, NoInductionHintPassesThrough) {
  CliqueDef c = load_clique("mini_interp.lisp");
  SExpr out = dmgen_expand(
      parse_dmgen_form(read_one("(defret-mutual-generate a-<fn> :rules ((t (:add-concl c))) :no-induction-hint t)")), c);
  EXPECT_EQ(keyword_targets({out}, ":no-induction-hint"), (std::vector<std::string>{"t"}));
}

TEST(BfrsOk, ShellsMatchGolden) {
  CliqueDef c = load_clique("bfrs_ok.lisp");
  auto rules = dmgen_rules(parse_dmgen_form(dmgen_source("bfrs_ok.lisp")));
  auto golden = read_data_forms("bfrs_ok_shells.golden");
  ASSERT_EQ(golden.size(), c.functions.size());
  auto sorted = [](const std::vector<SExpr>& xs) {
    std::vector<std::string> out;
    for (const auto& x : xs) out.push_back(to_string(x));
    std::sort(out.begin(), out.end());
    return out;
  };
  for (std::size_t i = 0; i < c.functions.size(); ++i) {
    const FunctionDef& fn = c.functions[i];
    TheoremShell s = apply_rules(rules, fn, Symbol("interp-st-bfrs-ok-of-<fn>"));
    const SExpr& g = golden[i];
    ASSERT_EQ(g[0].as_symbol(), fn.name);
    std::vector<SExpr> concls;
    for (const auto& e : s.stack) {
      ASSERT_EQ(e.kind, StackEntry::Kind::Concl);
      concls.push_back(e.term);
    }
    auto as_vec = [](const SExpr& l) { return std::vector<SExpr>(l.items().begin(), l.items().end()); };
    EXPECT_EQ(sorted(s.top_hyps), sorted(as_vec(g[2]))) << fn.name.text();
    EXPECT_EQ(sorted(concls), sorted(as_vec(g[4]))) << fn.name.text();
    EXPECT_EQ(sorted(s.bindings), sorted(as_vec(g[6]))) << fn.name.text();
    EXPECT_EQ(render_defret(s, fn).has_value(), !g[4].is_nil());
  }
}

TEST(DefretExpand, FnTemplateSecondExpansion) {
  CliqueDef c = load_clique("mini_interp.lisp");
  SExpr dm = read_data_forms("fn_template_defret_mutual.lisp").at(0);
  auto defrets = sub_forms(dm, "defret");
  auto golden = sub_forms(read_data_forms("fn_template_flag_defthm.golden").at(0), "defthm");
  ASSERT_EQ(defrets.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    SExpr out = defret_expand(defrets[i], c);
    EXPECT_TRUE(sexpr_equal(out, golden[i])) << print_canonical(out);
  }
}

TEST(DefretExpand, SingleReturnAndZeroKeywords) {
  CliqueDef c = load_clique("subst_term_defines.lisp");
  SExpr out = defret_expand(read_one("(defret foo (equal (ev-term subst env) (ev-term x (ev-alist alist env))) :fn subst-term)"), c);
  EXPECT_TRUE(sexpr_equal(out, read_one("(defthm foo (b* ((?subst (subst-term x alist)))"
                                        " (equal (ev-term subst env) (ev-term x (ev-alist alist env))))"
                                        " :flag subst-term)")));
}

TEST(DefretExpand, PrependsToExistingBstar) {
  CliqueDef c = load_clique("subst_term_defines.lisp");
  SExpr out = defret_expand(read_one("(defret foo (b* ((y (g subst))) (p y)) :hints h :fn subst-termlist)"), c);
  EXPECT_TRUE(sexpr_equal(out, read_one("(defthm foo (b* ((?subst (subst-termlist x alist)) (y (g subst))) (p y))"
                                        " :hints h :flag subst-termlist)")));
}

TEST(DefretExpand, PackagePrefixedReturn) {
  FunctionDef fn = parse_clique(read_one("(define f (a) :returns (mv acl2::args b) a)")).functions[0];
  SExpr out = defret_expand(read_one("(defret n (p b) :fn f)"), fn);
  EXPECT_TRUE(sexpr_equal(out, read_one("(defthm n (b* (((mv acl2::?args ?b) (f a))) (p b)) :flag f)")));
}

TEST(DefretExpand, Errors) {
  CliqueDef c = load_clique("subst_term_defines.lisp");
  EXPECT_THROW(defret_expand(read_one("(defret foo t)"), c), FormError);
  EXPECT_THROW(defret_expand(read_one("(defret foo t :fn nope)"), c), FormError);
}

TEST(DefretMutualExpand, SubstTermDefines) {
  CliqueDef c = load_clique("subst_term_defines.lisp");
  SExpr out = defret_mutual_expand(c.post_forms.at(0), c);
  EXPECT_TRUE(sexpr_equal(out, read_one(R"((defthm-subst-term-flag ev-term-of-subst-term
      (defthm ev-term-of-subst-term
        (b* ((?subst (subst-term x alist)))
          (equal (ev-term subst env) (ev-term x (ev-alist alist env))))
        :flag subst-term)
      (defthm ev-termlist-of-subst-termlist
        (b* ((?subst (subst-termlist x alist)))
          (equal (ev-termlist subst env) (ev-termlist x (ev-alist alist env))))
        :flag subst-termlist)))")))
      << print_canonical(out);
}

TEST(DefretMutualExpand, DefinesBodiesAgreeWithMakeFlag) {
  CliqueDef c = load_clique("subst_term_defines.lisp");
  auto defrets = sub_forms(c.post_forms.at(0), "defret");
  auto events = read_data_forms("subst_term_events.golden");
  for (std::size_t i = 0; i < 2; ++i) {
    SExpr substituted = substitute_symbol(defrets[i][2], Symbol("subst"), c.functions[i].call_on_formals());
    EXPECT_TRUE(sexpr_equal(substituted, events[i + 1][2]));
  }
}

TEST(DefretMutualExpand, OneDefretAndDuplicates) {
  CliqueDef c = load_clique("subst_term_defines.lisp");
  SExpr one = defret_mutual_expand(read_one("(defret-mutual m (defret a (p subst) :fn subst-term))"), c);
  EXPECT_EQ(sub_forms(one, "defthm").size(), 1u);
  Expansion e = full_expand(read_one("(defret-mutual m (defret a (p subst) :fn subst-term))"), c);
  EXPECT_TRUE(sexpr_equal(e.events[0][2],
                          read_one("(case flag (subst-term (b* ((?subst (subst-term x alist))) (p subst))) (t t))")));
  EXPECT_THROW(defret_mutual_expand(read_one("(defret-mutual m (defret a t :fn subst-term) (defret b t :fn subst-term))"), c),
               FormError);
}

TEST(FullExpand, MiniatureClique) {
  CliqueDef c = load_clique("mini_interp.lisp");
  Expansion e = full_expand(dmgen_source("mini_interp.lisp"), c);
  ASSERT_TRUE(e.dmgen.has_value());
  EXPECT_TRUE(sexpr_equal(e.defret_mutual, read_data_forms("mini_interp_dmgen.golden").at(0)));
  EXPECT_TRUE(sexpr_equal(e.flag_defthm, read_data_forms("mini_interp_flag_defthm.golden").at(0)))
      << print_canonical(e.flag_defthm);
  ASSERT_EQ(e.events.size(), 3u);
  EXPECT_TRUE(e.events[0][0].is_symbol("defthm"));
  auto golden_events = read_data_forms("mini_interp_events.golden");
  ASSERT_EQ(golden_events.size(), e.events.size());
  for (std::size_t i = 0; i < e.events.size(); ++i) {
    EXPECT_TRUE(sexpr_equal(e.events[i], golden_events[i])) << print_canonical(e.events[i]);
  }
  EXPECT_EQ(e.stage(Stage::Events).size(), 3u);
  EXPECT_EQ(e.stage(Stage::Dmgen).size(), 1u);
}

TEST(FullExpand, StageTargetsAgree) {
  for (const char* file : {"mini_interp.lisp", "bfrs_ok.lisp"}) {
    CliqueDef c = load_clique(file);
    Expansion e = full_expand(dmgen_source(file), c);
    auto dm = keyword_targets(sub_forms(e.defret_mutual, "defret"), ":fn");
    auto fd = keyword_targets(sub_forms(e.flag_defthm, "defthm"), ":flag");
    std::vector<std::string> corollaries;
    for (std::size_t i = 1; i < e.events.size(); ++i) {
      const SExpr& inst = e.events[i][4][0][2][0];
      corollaries.push_back(Symbol(inst[2][1][1].text()).key());
    }
    EXPECT_EQ(dm, fd) << file;
    EXPECT_EQ(dm, corollaries) << file;
  }
}

TEST(FullExpand, SubstTermDefinesGivesFlagDefthmShape) {
  CliqueDef c = load_clique("subst_term_defines.lisp");
  Expansion e = full_expand(c.post_forms.at(0), c);
  EXPECT_FALSE(e.dmgen.has_value());
  ASSERT_EQ(e.events.size(), 3u);
  auto golden = read_data_forms("subst_term_defines_events.golden");
  ASSERT_EQ(golden.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(sexpr_equal(e.events[i], golden[i])) << print_canonical(e.events[i]);
  }
}

TEST(FullExpand, AllSkippedFails) {
  CliqueDef c = load_clique("mini_interp.lisp");
  EXPECT_THROW(full_expand(read_one("(defret-mutual-generate a-<fn> :return-concls ((zzz t)))"), c), FormError);
}

TEST(FullExpand, Idempotent) {
  CliqueDef c = load_clique("bfrs_ok.lisp");
  Expansion a = full_expand(dmgen_source("bfrs_ok.lisp"), c);
  Expansion b = full_expand(dmgen_source("bfrs_ok.lisp"), c);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) EXPECT_EQ(print_canonical(a.events[i]), print_canonical(b.events[i]));
}

TEST(FullExpand, FreeVariablesAreKnown) {
  for (const char* file : {"mini_interp.lisp", "bfrs_ok.lisp"}) {
    CliqueDef c = load_clique(file);
    Expansion e = full_expand(dmgen_source(file), c);
    for (const auto& thm : sub_forms(e.flag_defthm, "defthm")) {
      const FunctionDef& fn = find_function(c, thm[thm.size() - 1].as_symbol());
      for (const auto& v : free_variables(thm[2])) {
        EXPECT_TRUE(fn.has_formal(Symbol(v))) << file << " " << fn.name.text() << " " << v;
      }
    }
  }
}

TEST(FreeVariables, Binders) {
  auto fv = [](std::string_view t) { return free_variables(read_one(t)); };
  EXPECT_EQ(fv("(f x 'y)"), (std::set<std::string>{"x"}));
  EXPECT_EQ(fv("(let ((a x)) (g a b))"), (std::set<std::string>{"x", "b"}));
  EXPECT_EQ(fv("(b* (((mv ?a b) (f x)) (c a)) (g c d))"), (std::set<std::string>{"x", "d"}));
  EXPECT_EQ(fv("((lambda (a) (h a z)) q)"), (std::set<std::string>{"z", "q"}));
  EXPECT_EQ(fv("(mv-let (a b) (f x) (g a b y))"), (std::set<std::string>{"x", "y"}));
  EXPECT_EQ(fv("(p t nil :kw 3)"), (std::set<std::string>{}));
}

TEST(SkScaffold, RemoveReturnLast) {
  CliqueDef c = load_clique("remove_return_last.lisp");
  SkScaffoldSpec spec = parse_sk_scaffold(find_form(read_data_forms("remove_return_last.lisp"), "sk-scaffold"));
  ASSERT_EQ(spec.entries.size(), 2u);
  EXPECT_EQ(spec.entries[0].final_thm_name, "remove-return-last-term-correct");
  auto out = generate_sk_scaffold(c, spec);
  auto golden = read_data_forms("remove_return_last_sk.golden");
  ASSERT_EQ(out.size(), golden.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_TRUE(sexpr_equal(out[i], golden[i])) << print_canonical(out[i]);
  }
}

TEST(SkScaffold, SingleFunction) {
  CliqueDef c = parse_clique(read_one("(defun f (x y) (cons x y))"));
  auto out = generate_sk_scaffold(c, parse_sk_scaffold(read_one("(sk-scaffold (f (p (f x y) z) :vars (z) :name f-ok))")));
  ASSERT_EQ(out.size(), 3u);
  EXPECT_TRUE(sexpr_equal(out[0], read_one("(defun-sk f-correct-cond (x y) (forall z (p (f x y) z)) :rewrite :direct)")));
  EXPECT_EQ(sub_forms(out[1], "defthm").size(), 1u);
  EXPECT_TRUE(out[1][0].is_symbol("defthm-f-flag"));
  EXPECT_TRUE(sexpr_equal(out[2], read_one("(defthm f-ok (p (f x y) z) :hints ((\"goal\" :use f-correct-lemma)))")));
}

TEST(SkScaffold, Errors) {
  CliqueDef c = parse_clique(read_one("(defun f (x y) (cons x y))"));
  EXPECT_THROW(generate_sk_scaffold(c, parse_sk_scaffold(read_one("(sk-scaffold (f (p x) :vars (z)))"))), FormError);
  EXPECT_THROW(generate_sk_scaffold(c, parse_sk_scaffold(read_one("(sk-scaffold (f (p x y) :vars (y)))"))), FormError);
  EXPECT_THROW(generate_sk_scaffold(c, parse_sk_scaffold(read_one("(sk-scaffold (g (p z) :vars (z)))"))), FormError);
  EXPECT_THROW(parse_sk_scaffold(read_one("(sk-scaffold (f (p z)))")), FormError);
  EXPECT_THROW(parse_sk_scaffold(read_one("(sk-scaffold (f (p z) :vars ()))")), FormError);
}

TEST(Stages, Names) {
  for (Stage s : {Stage::Dmgen, Stage::DefretMutual, Stage::FlagDefthm, Stage::Events}) {
    EXPECT_EQ(parse_stage(stage_name(s)), s);
  }
  EXPECT_FALSE(parse_stage("bogus").has_value());
}

}  // namespace
}  // namespace mutgen
