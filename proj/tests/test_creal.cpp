#include "doctest.h"

#include <random>

#include "nsa/creal.hpp"

using namespace nsa;

namespace {

Rational Q(long n, long d = 1) {
    Rational q(n, d);
    q.canonicalize();
    return q;
}

// sqrt(2) from integer square roots, independent of the arithmetic under test
CReal sqrt2() {
    return CReal::from_fast([](std::uint64_t n) {
        mpz_class scale = mpz_class(1) << static_cast<unsigned>(n + 1);
        mpz_class r = sqrt(mpz_class(2) * scale * scale);
        return Rational(r, scale);
    });
}

Rational random_unit(std::mt19937_64& rng, unsigned long den = 1000) {
    Rational q(mpz_class(static_cast<unsigned long>(rng() % (den + 1))), mpz_class(den));
    q.canonicalize();
    return q;
}

void check_fast(const CReal& x, std::uint64_t max_n = 12) {
    for (std::uint64_t n = 0; n <= max_n; ++n)
        for (std::uint64_t i = 1; i <= 6; ++i) CHECK(abs(x.approx(n) - x.approx(n + i)) < pow2(-static_cast<std::int64_t>(n)));
}

}  // namespace

TEST_CASE("rational embedding and arithmetic") {
    CHECK(approx_at(CReal::from_rational(Q(1, 2)), 10) == Q(1, 2));
    CReal s = add(CReal::from_rational(Q(1, 3)), CReal::from_rational(Q(1, 6)));
    for (std::uint64_t k = 0; k <= 20; ++k) CHECK(eq_real(s, CReal::from_rational(Q(1, 2)), k).kind == Comparison::EqualAtK);
    CReal r = sqrt2();
    CHECK(eq_real(abs(sub(r, r)), CReal(), 20).kind == Comparison::EqualAtK);
    CReal two = mul(r, r);
    for (std::uint64_t k = 0; k <= 30; k += 5) CHECK(abs(approx_at(two, k) - 2) <= pow2(-static_cast<std::int64_t>(k)));
    CHECK(abs(approx_at(scale(r, Q(-3)), 20) + 3 * approx_at(r, 40)) <= pow2(-19));
    CHECK(approx_at(max(r, CReal::from_rational(Q(3, 2))), 8) == Q(3, 2));
}

TEST_CASE("property: operations keep fast convergence") {
    CReal r = sqrt2();
    CReal t = CReal::from_rational(Q(-7, 3));
    for (const CReal& x : {add(r, t), sub(t, r), mul(r, t), mul(mul(r, r), r), abs(t), min(r, t), max(r, neg(r)),
                           scale(r, Q(5, 7))})
        check_fast(x);
}

TEST_CASE("eq_real is three-valued") {
    CReal a = CReal::from_rational(Q(1, 2));
    CReal b = CReal::from_fast([](std::uint64_t n) { return Rational(Q(1, 2) + pow2(-static_cast<std::int64_t>(n) - 2)); });
    for (std::uint64_t k = 0; k <= 30; ++k) CHECK(eq_real(a, b, k).kind == Comparison::EqualAtK);
    EqVerdict v = eq_real(CReal(), CReal::from_rational(1), 10);
    CHECK(v.kind == Comparison::ApartWithWitness);
    CHECK(v.n == 2);
    CHECK(v.gap == 1);
    CHECK(eq_real(sqrt2(), sqrt2(), 40).kind == Comparison::EqualAtK);
    // two representatives of 0 that drift 2^(1-n) apart: equality cannot be confirmed or refuted
    CReal lo = CReal::from_fast([](std::uint64_t n) { return Rational(-pow2(-static_cast<std::int64_t>(n) - 1) * Q(99, 100)); });
    CReal hi = CReal::from_fast([](std::uint64_t n) { return Rational(pow2(-static_cast<std::int64_t>(n) - 1) * Q(99, 100)); });
    check_fast(lo);
    CHECK(eq_real(lo, hi, 10).kind == Comparison::EqualAtK);
    CReal lo2 = CReal::from_fast([](std::uint64_t n) { return Rational(-pow2(-static_cast<std::int64_t>(n)) * Q(9, 10)); });
    CReal hi2 = neg(lo2);
    CHECK(eq_real(lo2, hi2, 10).kind == Comparison::Undecided);
}

TEST_CASE("clamping turns any sequence into a real") {
    CReal osc = CReal::clamped([](std::uint64_t n) { return Rational(n % 2 == 0 ? 0 : 1); });
    check_fast(osc);
    CHECK(approx_at(osc, 5) == 0);
    CReal conv = CReal::clamped([](std::uint64_t n) { return Rational(Q(1, 3) + pow2(-static_cast<std::int64_t>(n) - 3)); });
    check_fast(conv);
    CHECK(approx_at(conv, 9) == Q(1, 3) + pow2(-12));
}

TEST_CASE("binary expansions") {
    CHECK(binary_real(Seq{{1}, 0}) == Q(1, 2));
    CHECK(binary_real(Seq{{}, 1}) == 1);
    CHECK(binary_real(Seq{{0, 1}, 0}) == Q(1, 4));
    Fn1 ones = [](std::uint64_t) -> std::uint64_t { return 1; };
    CHECK(eq_real(binary_real(ones), CReal::from_rational(1), 30).kind == Comparison::EqualAtK);
    Fn1 first = [](std::uint64_t n) -> std::uint64_t { return n == 1 ? 1 : 0; };
    CHECK(approx_at(binary_real(first), 10) == Q(1, 2));
    check_fast(binary_real([](std::uint64_t n) -> std::uint64_t { return (n * n) % 3 == 1; }));

    // b(f)(k) is 0 exactly where f vanishes
    Fn1 b = binarize([](std::uint64_t k) { return k % 2; });
    std::vector<std::uint64_t> got;
    for (std::uint64_t k = 0; k < 6; ++k) got.push_back(b(k));
    CHECK(got == std::vector<std::uint64_t>{0, 1, 0, 1, 0, 1});
    Fn1 b2 = binarize([](std::uint64_t k) { return k * 7; });
    CHECK(b2(0) == 0);
    CHECK(b2(3) == 1);
}

TEST_CASE("property: binary_real is monotone") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        Seq a, b;
        std::size_t len = rng() % 12;
        for (std::size_t i = 0; i < len; ++i) {
            std::uint64_t d = rng() % 2;
            a.prefix.push_back(d);
            b.prefix.push_back(d | (rng() % 2));
        }
        a.tail = rng() % 2;
        b.tail = a.tail | (rng() % 2);
        CHECK(binary_real(a) <= binary_real(b));
    }
}

TEST_CASE("riemann sums") {
    RealFn one = parse_real_fn("1");
    RealFn id = parse_real_fn("x");
    RealFn sq = parse_real_fn("x*x");
    CHECK(riemann_sum(id, uniform_partition(4, Q(1, 2)), 10) == Q(1, 2));  // (1+3+5+7)/8 * 1/4
    CHECK(riemann_sum(sq, uniform_partition(2, 0), 10) == Q(1, 8));        // (0 + 1/4) * 1/2
    CHECK(riemann_sum(one, uniform_partition(7, Q(1, 3)), 10) == 1);
    Partition bad = uniform_partition(3, 0);
    bad.tags[1] = Q(9, 10);
    CHECK_THROWS_AS(riemann_sum(id, bad, 5), CRealError);
    bad = uniform_partition(3, 0);
    std::swap(bad.points[1], bad.points[2]);
    CHECK_THROWS_AS(bad.validate(), CRealError);
}

TEST_CASE("property: constants integrate exactly over random partitions") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        Rational c = random_unit(rng) * 7 - 3;
        RealFn f = parse_real_fn(c.get_str());
        Partition p;
        p.points.push_back(0);
        while (p.points.back() < 1) p.points.push_back(std::min(Rational(1), Rational(p.points.back() + random_unit(rng, 97) / 3 + Q(1, 1000))));
        for (std::size_t i = 0; i + 1 < p.points.size(); ++i) p.tags.push_back(p.points[i] + random_unit(rng) * (p.points[i + 1] - p.points[i]));
        CHECK(riemann_sum(f, p, 3) == c);
    }
}

TEST_CASE("the dyadic integral") {
    RealFn one = parse_real_fn("1");
    // i(1/2) = ceil(4) = 4 at k = 3, so five terms of 1/8
    Rational want = 0;
    for (int i = 0; i <= 4; ++i) want += Q(1, 8);
    CHECK(integral(one, Q(1, 2), 3) == want);
    CHECK(integral(parse_real_fn("0"), Q(2, 3), 9) == 0);
    RealFn id = parse_real_fn("x");
    for (std::uint64_t k : {4, 8, 12}) {
        Rational v = integral(id, Rational(1), k);
        CHECK(abs(v - Q(1, 2)) <= pow2(-static_cast<std::int64_t>(k)));
        CHECK(v == Q(1, 2) + pow2(-static_cast<std::int64_t>(k) - 1));  // sum i/4^k for i <= 2^k
    }
    CHECK(integral(id, CReal::from_rational(Q(1, 2)), 6) == integral(id, Q(1, 2), 6));
}

TEST_CASE("property: integral_level meets its error bound") {
    struct Case {
        const char* expr;
        Rational (*antiderivative)(const Rational&);
    };
    Case cases[] = {
        {"x*x", [](const Rational& x) { return Rational(x * x * x / 3); }},
        {"3 - 2x", [](const Rational& x) { return Rational(3 * x - x * x); }},
        {"|x - 1/3|",
         [](const Rational& x) {
             Rational a = Q(1, 3);
             return x <= a ? Rational(a * x - x * x / 2) : Rational(a * a / 2 + (x - a) * (x - a) / 2);
         }},
    };
    std::mt19937_64 rng(5);
    for (const auto& c : cases) {
        RealFn f = parse_real_fn(c.expr);
        for (std::uint64_t d : {4, 16, 64}) {
            std::uint64_t j = integral_level(*f.modulus, f.bound(), d);
            for (int t = 0; t < 10; ++t) {
                Rational x = random_unit(rng) * (1 - pow2(2 - static_cast<std::int64_t>(j)));
                CAPTURE(c.expr);
                CAPTURE(d);
                CHECK(abs(integral(f, x, j) - c.antiderivative(x)) <= Q(1, static_cast<long>(d)));
            }
        }
    }
    CReal i = integral_real(parse_real_fn("x"), CReal::from_rational(Q(1, 2)));
    for (std::uint64_t n = 0; n <= 6; ++n) CHECK(abs(approx_at(i, n) - Q(1, 8)) <= pow2(-static_cast<std::int64_t>(n)));
}

TEST_CASE("difference quotients") {
    RealFn id = parse_real_fn("x");
    RealFn sq = parse_real_fn("x^2");
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        Rational x = random_unit(rng) / 2;
        Rational e = random_unit(rng) / 2 + Q(1, 1000);
        CHECK(diff_quotient(id, x, e, 10) == 1);
    }
    CHECK(diff_quotient(sq, Rational(0), Q(1, 4), 10) == Q(1, 4));
    CHECK(abs(approx_at(diff_quotient(sq, CReal(), Q(1, 4)), 12) - Q(1, 4)) <= pow2(-12));
    CHECK_THROWS_AS(diff_quotient(id, Rational(0), Rational(0), 5), CRealError);
    CHECK_THROWS_AS(diff_quotient(id, CReal(), Rational(0)), CRealError);
    CHECK_THROWS_AS(diff_quotient(id, Q(9, 10), Q(1, 2), 5), CRealError);
}

TEST_CASE("expression language") {
    CHECK(parse_real_fn("x(1-x)").exact(Q(1, 2)) == Q(1, 4));
    CHECK(parse_real_fn("|x - 1/3|").exact(0) == Q(1, 3));
    CHECK(parse_real_fn("abs(x - 0.25)").exact(0) == Q(1, 4));
    CHECK(parse_real_fn("min(x, 1/2) + max(x, 1/2)").exact(Q(1, 5)) == Q(7, 10));
    CHECK(parse_real_fn("-x^3 + 2").exact(Q(1, 2)) == Q(15, 8));
    CHECK(parse_modulus("2k")(10) == 20);
    CHECK(parse_modulus("1")(1000) == 1);
    CHECK(parse_modulus("k/3")(4) == 2);
    CHECK(parse_modulus("k - 5")(2) == 1);
    // derived Lipschitz moduli
    CHECK((*parse_real_fn("x*x").modulus)(10) == 20);
    CHECK((*parse_real_fn("x(1-x)").modulus)(100) == 200);
    CHECK((*parse_real_fn("7").modulus)(50) == 1);
    CHECK(*parse_real_fn("2x - 1").sup_bound == 1);
    for (const char* bad : {"y + 1", "1/x", "(x", "x +", "2 $ 3", "x^-1", "min(x)"})
        CHECK_THROWS_AS(parse_real_fn(bad), CRealError);
    CHECK_THROWS_AS(parse_modulus("x"), CRealError);
    RealFn fam = real_fn(parse_expr("x + x/n"), {{"n", Rational(4)}});
    CHECK(fam.exact(1) == Q(5, 4));
    CHECK(expr_variables(parse_expr("x + x/n")) == std::vector<std::string>{"n", "x"});
    // CReal and rational evaluation agree
    RealFn f = parse_real_fn("|x - 1/3| * (2 - x) + min(x, 0.4)");
    for (int i = 0; i <= 10; ++i)
        CHECK(abs(approx_at(f.eval(CReal::from_rational(Q(i, 10))), 20) - f.exact(Q(i, 10))) <= pow2(-20));
}

TEST_CASE("property: derived moduli hold on sampled pairs") {
    std::mt19937_64 rng(17);
    for (const char* e : {"x*x", "x(1-x)", "|x - 1/3|", "3x^3 - x", "max(x, 1 - x) * 2", "x/7 + 1/2"}) {
        RealFn f = parse_real_fn(e);
        Fn1 g = monotone_closure(*f.modulus);
        for (std::uint64_t k = 1; k < 200; k += 13) {
            CHECK(g(k) <= g(k + 1));
            Rational w = Rational(1, static_cast<unsigned long>(g(k))) * Q(999, 1000);
            for (int t = 0; t < 20; ++t) {
                Rational x = random_unit(rng) * (1 - w);
                Rational y = x + w;
                CAPTURE(e);
                CHECK(abs(f.exact(x) - f.exact(y)) <= Q(1, static_cast<long>(k)));
                CHECK(abs(f.exact(x)) <= *f.sup_bound);
            }
        }
    }
}

TEST_CASE("property: equal inputs give equal outputs") {
    std::mt19937_64 rng(23);
    for (const char* e : {"x*x", "|x - 1/3|", "min(x, 1/2) - x^2"}) {
        RealFn f = parse_real_fn(e);
        for (int t = 0; t < 20; ++t) {
            Rational q = random_unit(rng);
            CReal a = CReal::from_rational(q);
            CReal b = CReal::from_fast([q](std::uint64_t n) {
                Rational d = pow2(-static_cast<std::int64_t>(n) - 1);
                return n % 2 == 0 ? Rational(q + d) : Rational(q - d);
            });
            CHECK(eq_real(a, b, 20).kind == Comparison::EqualAtK);
            CHECK(eq_real(f.eval(a), f.eval(b), 20).kind != Comparison::ApartWithWitness);
        }
    }
}
