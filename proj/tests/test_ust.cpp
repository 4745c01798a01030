#include "doctest.h"

#include <random>

#include "nsa/ust.hpp"

using namespace nsa;

namespace {
FormulaP P(const std::string& s) { return parse_formula(s); }
std::string R(const FormulaP& f) { return render_formula(f); }
std::string raw(const std::string& s) { return R(render_ust(interpret(P(s)))); }
std::string simplified(const std::string& s) { return R(render_ust(simplify_monotone(interpret(P(s))).result)); }

FormulaP random_formula(std::mt19937_64& rng, int depth, std::vector<std::string>& scope) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    auto var = [&]() -> TermP {
        if (!scope.empty() && pick(2)) return mk_var(scope[static_cast<std::size_t>(pick(static_cast<int>(scope.size())))]);
        return mk_var(pick(2) ? "a" : "z");
    };
    int c = depth <= 0 ? pick(3) : pick(10);
    switch (c) {
        case 0: return f_atom(Rel::Leq0, var(), var());
        case 1: return f_st(var());
        case 2: return f_st(mk_app(mk_succ(), var()));
        case 3: return f_not(random_formula(rng, depth - 1, scope));
        case 4: return f_and(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
        case 5: return f_or(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
        case 6: return f_implies(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
        default: {
            static const FKind ks[] = {FKind::Forall, FKind::Exists, FKind::ForallSt, FKind::ExistsSt};
            FKind k = ks[pick(4)];
            std::string v = fresh_name("v");
            scope.push_back(v);
            FormulaP body = random_formula(rng, depth - 1, scope);
            scope.pop_back();
            return f_quant(k, v, base_type(), body);
        }
    }
}
}  // namespace

TEST_CASE("internal formulas interpret to themselves") {
    auto r = interpret(P("(forall x : O (=0 x y))"));
    CHECK(r.b.empty());
    CHECK(r.c.empty());
    CHECK(R(r.lower) == "(forall x : O (=0 x y))");
    auto s = simplify_monotone(r);
    CHECK(s.status == SimplifyStatus::Unchanged);
}

TEST_CASE("st(x) gets one existential bound") {
    auto r = interpret(P("(st x)"));
    CHECK(r.b.empty());
    REQUIRE(r.c.size() == 1);
    CHECK(r.c[0].name == "c");
    CHECK(R(r.lower) == "(<=* x c)");
    CHECK(simplify_monotone(r).status == SimplifyStatus::Unchanged);
    // the bound has the type of the term
    auto r2 = interpret(P("(st (lam n : O n))"));
    CHECK(render_type(r2.c[0].type) == "(-> O O)");
}

TEST_CASE("disjunction and conjunction merge tuples") {
    CHECK(raw("(or (st x) (st y))") == "(exists-mono c : O (exists-mono c1 : O (or (<=* x c) (<=* y c1))))");
    CHECK(raw("(and (st x) (st y))") == "(exists-mono c : O (exists-mono c1 : O (and (<=* x c) (<=* y c1))))");
}

TEST_CASE("negation introduces a choice functional over a padded b") {
    CHECK(raw("(not (st x))") ==
          "(forall-mono f : (-> O O) (exists-mono b : O (exists b' : O (and (<=* b' b') (and (<=* b' b) "
          "(not (<=* x (f b'))))))))");
    // double negation: the outer f takes the inner f as argument
    auto r = interpret(P("(not (not (st x)))"));
    REQUIRE(r.b.size() == 1);
    CHECK(render_type(r.b[0].type) == "(-> (-> O O) O)");
    CHECK(is_internal(r.lower));
}

TEST_CASE("implication and existential clauses") {
    CHECK(raw("(implies (st x) (st y))") ==
          "(forall-mono f : (-> O O) (exists-mono b : O (exists-mono c1 : O (implies (forall b' : O (implies "
          "(<=* b' b') (implies (<=* b' b) (<=* x (f b'))))) (<=* y c1)))))");
    CHECK(raw("(exists x : O (st (succ x)))") ==
          "(forall-mono F : (-> (-> O O) O) (exists-mono f : (-> O O) (exists f' : (-> O O) (and (<=* f' f') "
          "(and (<=* f' f) (exists x : O (forall b' : O (implies (<=* b' b') (implies (<=* b' (F f')) "
          "(<=* (succ x) (f' b')))))))))))");
    // internal antecedents need no choice functional
    CHECK(raw("(implies (=0 x 0) (st y))") == "(exists-mono c : O (implies (=0 x 0) (<=* y c)))");
}

TEST_CASE("bounded existential collapses to e0") {
    const char* dongel = "(exists y : O (and (st y) (=0 (p x y) 0)))";
    CHECK(simplified(dongel) == "(exists-mono e0 : O (exists y : O (and (<=* y e0) (=0 (p x y) 0))))");
    auto s = simplify_monotone(interpret(P(dongel)));
    CHECK(s.status == SimplifyStatus::Simplified);
    CHECK(s.result.b.empty());
}

TEST_CASE("normal forms simplify to the bounded shape") {
    struct Case {
        const char* in;
        const char* out;
    } cases[] = {
        {"(forall-st x : O (exists-st y : O (<=0 x y)))",
         "(forall-mono x0 : O (exists-mono e0 : O (forall x : O (implies (<=* x x0) (exists y : O (and (<=* y e0) "
         "(<=0 x y)))))))"},
        {"(forall-st x : (-> (-> O O) O) (exists-st y : (-> O O) (<=0 (x y) (y 0))))",
         "(forall-mono x0 : (-> (-> O O) O) (exists-mono e0 : (-> O O) (forall x : (-> (-> O O) O) (implies "
         "(<=* x x0) (exists y : (-> O O) (and (<=* y e0) (<=0 (x y) (y 0))))))))"},
    };
    for (const auto& c : cases) {
        CAPTURE(c.in);
        CHECK(simplified(c.in) == c.out);
    }
}

TEST_CASE("unsimplifiable shapes are flagged and returned unchanged") {
    auto r = interpret(P("(not (st x))"));
    auto s = simplify_monotone(r);
    CHECK(s.status == SimplifyStatus::ShapeMismatch);
    CHECK(alpha_eq(render_ust(s.result), render_ust(r)));
}

TEST_CASE("extraction contract") {
    NormalForm nf = recognize_normal_form(P("(forall-st k : O (exists-st N : O (=0 (near x y N) (k 0))))"));
    std::vector<QVar> ts;
    FormulaP c = extraction_contract(nf, &ts);
    CHECK(R(c) == "(forall b : O (forall k : O (implies (<=0 k b) (exists N : O (and (<=0 N (t b)) "
                  "(=0 (near x y N) (k 0)))))))");
    REQUIRE(ts.size() == 1);
    CHECK(render_type(ts[0].type) == "(-> O O)");
    NormalForm empty = recognize_normal_form(P("(=0 x 0)"));
    CHECK(R(extraction_contract(empty)) == "(=0 x 0)");
    NormalForm hi = recognize_normal_form(P("(forall-st g : (-> O O) (exists-st n : O (=0 (g n) 0)))"));
    CHECK(R(extraction_contract(hi)) ==
          "(forall b : (-> O O) (implies (<=* b b) (forall g : (-> O O) (implies (<=* g b) (exists n : O "
          "(and (<=0 n (t b)) (=0 (g n) 0)))))))");
}

TEST_CASE("ill-typed input is reported") {
    CHECK_THROWS_AS(interpret(P("(st (x x))")), FormulaError);
}

TEST_CASE("property: lower formulas are internal and linearly sized") {
    std::mt19937_64 rng(21);
    double worst = 0;
    for (int i = 0; i < 400; ++i) {
        std::vector<std::string> scope;
        FormulaP f = random_formula(rng, 3, scope);
        UstResult r = interpret(f);
        CAPTURE(R(f));
        CHECK(is_internal(r.lower));
        CHECK(well_typed(render_ust(r)));
        worst = std::max(worst, double(formula_size(r.lower)) / double(formula_size(f)));
    }
    // per-clause growth is bounded for formulas of this depth
    CHECK(worst <= 40.0);
}

TEST_CASE("property: interpretation is deterministic") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 50; ++i) {
        std::vector<std::string> scope;
        FormulaP f = random_formula(rng, 3, scope);
        CHECK(R(render_ust(interpret(f))) == R(render_ust(interpret(f))));
    }
}
