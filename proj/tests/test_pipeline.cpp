#include "doctest.h"

#include <fstream>
#include <random>
#include <sstream>

#include "nsa/corpus.hpp"
#include "nsa/pipeline.hpp"

using namespace nsa;

namespace {
FormulaP P(const std::string& s) { return parse_formula(s); }
std::string R(const FormulaP& f) { return render_formula(f); }

const std::string Rt = "(-> O O)";
const std::string Ft = "(-> (-> O O) (-> O O))";
const std::string kUC = "(forall x : " + Rt + " (forall y : " + Rt +
                        " (implies (=0 (near x y N) 0) (=0 (near (f x) (f y) k) 0))))";

std::string nst_antecedent() {
    return "(forall x : " + Rt + " (forall y : " + Rt +
           " (implies (approx N (near x y)) (approx k (near (f x) (f y))))))";
}

// Replaces every st binder by its hint as a free variable, keeping the internal skeleton.
FormulaP erase_st(const FormulaP& f) {
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St:
        case FKind::Approx: return f;
        case FKind::Not: return f_not(erase_st(f->left));
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: return f_binary(f->kind, erase_st(f->left), erase_st(f->right));
        case FKind::Forall:
        case FKind::Exists: {
            std::string x;
            FormulaP body = open_binder(f, x);
            return f_quant(f->kind, x, f->type, erase_st(body));
        }
        default: return erase_st(open_formula(f->left, mk_var(f->name)));
    }
}

FormulaP random_formula(std::mt19937_64& rng, int depth, std::vector<std::string>& scope) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    auto var = [&]() -> TermP {
        if (!scope.empty() && pick(3)) return mk_var(scope[static_cast<std::size_t>(pick(static_cast<int>(scope.size())))]);
        return mk_var(pick(2) ? "a" : "z");
    };
    int c = depth <= 0 ? pick(2) : pick(9);
    switch (c) {
        case 0: return f_atom(Rel::Leq0, var(), var());
        case 1: return f_atom(Rel::Eq0, var(), mk_num(0));
        case 2: return f_not(random_formula(rng, depth - 1, scope));
        case 3: return f_and(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
        case 4: return f_implies(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
        default: {
            static const FKind ks[] = {FKind::Forall, FKind::Exists, FKind::ForallSt, FKind::ExistsSt,
                                       FKind::ForallMono, FKind::ExistsMono};
            FKind k = ks[pick(6)];
            std::string v = fresh_name(pick(2) ? "n" : "m");
            scope.push_back(v);
            FormulaP body = random_formula(rng, depth - 1, scope);
            scope.pop_back();
            return f_quant(k, v, base_type(), body);
        }
    }
}
}  // namespace

TEST_CASE("resolve expands approx macros in place") {
    FormulaP first = resolve_infinitesimal(P(nst_antecedent()));
    CHECK(R(first) == "(forall x : (-> O O) (forall y : (-> O O) (implies (forall-st N : O (=0 (near x y N) 0)) "
                      "(forall-st k : O (=0 (near (f x) (f y) k) 0)))))");
    FormulaP plain = P("(forall x : O (=0 x 0))");
    CHECK(resolve_infinitesimal(plain) == plain);
    // under a negation the macro is expanded the same way
    CHECK(R(resolve_infinitesimal(P("(not (approx N (near a b)))"))) == "(not (forall-st N : O (=0 (near a b N) 0)))");
}

TEST_CASE("pull moves st quantifiers over internal parts only") {
    FormulaP first = resolve_infinitesimal(P(nst_antecedent()));
    // both sides of the implication are external: nothing to pull
    CHECK(alpha_eq(pull_standard_quantifiers(first), first));
    FormulaP combined = P("(forall x : " + Rt + " (forall y : " + Rt + " (forall-st k : O (exists-st N : O (implies "
                          "(=0 (near x y N) 0) (=0 (near (f x) (f y) k) 0))))))");
    FormulaP first2 = pull_standard_quantifiers(combined);
    CHECK(alpha_eq(first2, P("(forall-st k : O (forall x : " + Rt + " (forall y : " + Rt +
                             " (exists-st N : O (implies (=0 (near x y N) 0) (=0 (near (f x) (f y) k) 0))))))")));
    FormulaP realizable = P("(forall x : O (exists-st y : O (<=0 x y)))");
    CHECK(alpha_eq(pull_standard_quantifiers(realizable), realizable));
    // an internal antecedent lets the consequent's prefix out; an st antecedent dualizes
    CHECK(R(pull_standard_quantifiers(P("(implies (=0 a 0) (forall-st n : O (<=0 a n)))"))) ==
          "(forall-st n : O (implies (=0 a 0) (<=0 a n)))");
    CHECK(R(pull_standard_quantifiers(P("(implies (forall-st n : O (<=0 a n)) (=0 a 0))"))) ==
          "(exists-st n : O (implies (<=0 a n) (=0 a 0)))");
}

TEST_CASE("realization and the Base collapse") {
    FormulaP first2 = P("(forall-st k : O (forall x : " + Rt + " (forall y : " + Rt +
                        " (exists-st N : O (implies (=0 (near x y N) 0) (=0 (near (f x) (f y) k) 0))))))");
    FormulaP first3 = apply_realization(first2);
    CHECK(R(first3) == "(forall-st k : O (exists-st N' : O (forall x : (-> O O) (forall y : (-> O O) (exists N : O "
                       "(and (<=* N N') (implies (=0 (near x y N) 0) (=0 (near (f x) (f y) k) 0))))))))");
    CHECK(R(type0_star_collapse(first3)) == "(forall-st k : O (exists-st N : O " + kUC + "))");
    CHECK_THROWS_AS(apply_realization(P("(forall x : O (exists-st y : O (st x)))")), PipelineError);
    FormulaP none = P("(forall-st x : O (exists-st y : O (<=0 x y)))");
    CHECK(apply_realization(none) == none);
}

TEST_CASE("collapse keeps or drops bounds it cannot instantiate") {
    // positive occurrence of a reciprocal slot: the bound stays, as <=0
    FormulaP keep = P("(exists-st z : O (forall x : " + Rt + " (exists n : O (and (<=* n z) (=0 (near x a n) 0)))))");
    CHECK(R(type0_star_collapse(keep)) ==
          "(exists-st z : O (forall x : (-> O O) (exists n : O (and (<=0 n z) (=0 (near x a n) 0)))))");
    // occurrence only in an antecedent: the bound is dropped
    FormulaP drop = P("(exists-st z : O (forall x : O (exists n : O (and (<=* n z) (implies (=0 (p n) 0) (=0 x 0))))))");
    CHECK(R(type0_star_collapse(drop)) ==
          "(exists-st z : O (forall x : O (exists n : O (implies (=0 (p n) 0) (=0 x 0)))))");
    // the same bound in negative position is not weakened
    FormulaP neg = P("(not " + R(drop) + ")");
    CHECK(R(type0_star_collapse(neg)) ==
          "(not (exists-st z : O (forall x : O (exists n : O (and (<=0 n z) (implies (=0 (p n) 0) (=0 x 0)))))))");
}

TEST_CASE("monotone choice at the root and in negative position") {
    FormulaP first4 = P("(forall-st k : O (exists-st N : O " + kUC + "))");
    FormulaP first667 = apply_monotone_choice(first4);
    CHECK(R(first667) == "(forall-st k : O (exists N : O (and (<=* N (g k)) " + kUC + ")))");
    CHECK(R(instantiate_base_bound(first667)) ==
          "(forall-st k : O (forall x : (-> O O) (forall y : (-> O O) (implies (=0 (near x y (g k)) 0) "
          "(=0 (near (f x) (f y) k) 0)))))");
    FormulaP neg = P("(implies (forall-st k : O (exists-st N : O " + kUC + ")) (=0 c 0))");
    CHECK(R(apply_monotone_choice(neg)) ==
          "(implies (exists-mono g : (-> O O) (forall-st k : O (exists N : O (and (<=* N (g k)) " + kUC +
              ")))) (=0 c 0))");
    FormulaP other = P("(forall-st k : O (forall x : O (=0 x k)))");
    CHECK(apply_monotone_choice(other) == other);
}

TEST_CASE("combining normal forms across an implication") {
    FormulaP impl = P("(implies (exists-st g : " + Rt + " (forall-st k : O (=0 (g k) k))) (forall-st k : O "
                      "(exists-st N : O (<=0 k N))))");
    FormulaP c = combine_normal_forms(impl);
    CHECK(R(c) == "(forall-st g : (-> O O) (forall-st k : O (exists-st N : O (exists-st k' : O (implies "
                  "(=0 (g k') k') (<=0 k N))))))");
    CHECK(try_recognize_normal_form(c).has_value());
    FormulaP empty = P("(implies (=0 a 0) (forall-st k : O (exists-st N : O (<=0 k N))))");
    CHECK(R(combine_normal_forms(empty)) == "(forall-st k : O (exists-st N : O (implies (=0 a 0) (<=0 k N))))");
    CHECK_THROWS_AS(combine_normal_forms(P("(implies (st a) (=0 a 0))")), PipelineError);
    CHECK_THROWS_AS(combine_normal_forms(P("(and (=0 a 0) (=0 a 0))")), PipelineError);
}

TEST_CASE("drop-st under the REF whitelist") {
    const std::string body = "(implies (=0 (punct (r a) N) 0) (=0 (near (xs (r a)) x k) 0))";
    FormulaP trotec = P("(forall-st k : O (exists-st N : O (forall-st a : " + Rt +
                        " (implies (<=* a (lam n : O 1)) " + body + "))))");
    RefEvidence ev;
    FormulaP trotec2 = drop_st_on_sequence_quantifier(trotec, &ev);
    CHECK(R(trotec2) == "(forall-st k : O (exists-st N : O (forall a : (-> O O) (implies (<=* a (lam n : O 1)) " +
                            body + "))))");
    CHECK(ev.ok);
    CHECK(ev.guard == "binary");
    CHECK(ev.heads == std::vector<std::string>{"near", "punct", "r", "xs"});
    FormulaP sipro = P("(forall-st y : " + Rt + " (implies (=0 (unit y) 0) (=0 (y 3) 0)))");
    CHECK_THROWS_AS(drop_st_on_sequence_quantifier(sipro), PipelineError);
    FormulaP st_free = P("(forall x : O (=0 x 0))");
    CHECK(drop_st_on_sequence_quantifier(st_free) == st_free);
    // F-typed variables count as extensional heads
    FormulaP unit = P("(forall h : " + Ft + " (forall-st y : " + Rt +
                      " (implies (=0 (unit y) 0) (=0 (below (h y) (h (qr 0)) 3) 0))))");
    CHECK(R(drop_st_on_sequence_quantifier(unit)).find("(forall y :") != std::string::npos);
    // the variable as an argument of an unknown function is not REF
    CHECK_FALSE(check_ref(P("(=0 (u y) 0)"), "y").ok);
    CHECK(check_ref(P("(=0 (near y y 3) 0)"), "y").ok);
}

TEST_CASE("run_template") {
    SUBCASE("internal formulas come back with an empty trace") {
        FormulaP f = P("(forall x : O (exists y : O (<=0 x y)))");
        TemplateResult r = run_template(f);
        CHECK(r.trace.steps.empty());
        CHECK(alpha_eq(r.final, f));
    }
    SUBCASE("formulas outside the fragment are stuck") {
        CHECK_THROWS_AS(run_template(P("(exists-st n : O (forall-st m : O (<=0 m n)))")), PipelineError);
        try {
            run_template(P("(exists-st n : O (forall-st m : O (<=0 m n)))"));
        } catch (const PipelineError& e) {
            CHECK(e.kind == PipelineError::Kind::Stuck);
            CHECK(e.at != nullptr);
        }
    }
    SUBCASE("step budget") {
        FormulaP f = P("(forall f : " + Ft + " (implies " + nst_antecedent() + " (=0 c 0)))");
        CHECK_THROWS_AS(run_template(f, default_strategy(), 2), PipelineError);
    }
    SUBCASE("unknown rules are reported") {
        CHECK_THROWS_AS(run_template(P("(=0 a 0)"), {"no-such-rule"}), PipelineError);
    }
}

TEST_CASE("corpus fixtures under every registered strategy") {
    for (const auto& file : corpus_files(default_corpus_dir())) {
        if (file.parent_path().filename() != "pipeline") continue;
        FixtureOutcome o = run_fixture(file);
        CAPTURE(o.name);
        CAPTURE(o.detail);
        CHECK(o.pass);
    }
}

TEST_CASE("property: traces replay, keep types and the internal skeleton") {
    for (const auto& file : corpus_files(default_corpus_dir())) {
        if (file.parent_path().filename() != "pipeline") continue;
        std::string text;
        {
            std::ifstream in(file);
            std::stringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        auto forms = read_sexprs(text);
        FormulaP input;
        for (const auto& f : forms)
            if (!f.atom && f.items[0].text == "input") {
                std::vector<std::string> bound;
                input = parse_formula(f.items[1], bound);
            }
        REQUIRE(input);
        CAPTURE(file.string());
        std::vector<FormulaP> finals;
        std::size_t stuck = 0;
        for (const auto& strategy : registered_strategies()) {
            TemplateResult r;
            try {
                r = run_template(input, strategy);
            } catch (const PipelineError&) {
                ++stuck;
                continue;
            }
            FormulaP cur = input;
            for (const auto& st : r.trace.steps) {
                CAPTURE(st.rule);
                CHECK(alpha_eq(st.before, cur));
                auto again = apply_rule(st.rule, st.before);
                REQUIRE(again.has_value());
                CHECK(alpha_eq(*again, st.after));
                CHECK(well_typed(st.after));
                if (st.rule == "pull" || st.rule == "combine" || st.rule == "drop-mono")
                    CHECK(alpha_eq(erase_st(st.before), erase_st(st.after)));
                cur = st.after;
            }
            CHECK(alpha_eq(cur, r.final));
            finals.push_back(r.final);
        }
        // every ordering gets stuck, or none does
        CHECK((stuck == 0 || finals.empty()));
        for (std::size_t i = 1; i < finals.size(); ++i) CHECK(alpha_eq(finals[0], finals[i]));
    }
}

TEST_CASE("property: rules keep random formulas well typed") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 300; ++i) {
        std::vector<std::string> scope;
        FormulaP f = random_formula(rng, 4, scope);
        CAPTURE(R(f));
        for (const auto& rule : rule_names()) {
            if (auto g = apply_rule(rule, f)) {
                CAPTURE(rule);
                CHECK(well_typed(*g));
                if (rule == "pull" || rule == "drop-mono") CHECK(alpha_eq(erase_st(f), erase_st(*g)));
            }
        }
    }
}

TEST_CASE("slot metadata") {
    CHECK(reciprocal_slot("near") == std::optional<std::size_t>(3));
    CHECK(reciprocal_slot("punct") == std::optional<std::size_t>(2));
    CHECK(maximizable_slot("below") == std::optional<std::size_t>(2));
    CHECK_FALSE(reciprocal_slot("below").has_value());
}
