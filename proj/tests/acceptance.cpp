// Acceptance run: one PASS/FAIL line per criterion, each inside its time limit.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

#include "nsa/corpus.hpp"
#include "nsa/pipeline.hpp"
#include "nsa/syntax.hpp"
#include "nsa/verifier.hpp"

using namespace nsa;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string why;
    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    }
};

int failures = 0;

void criterion(int id, const char* what, double limit_s, const std::function<void(Check&)>& body) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(dt < limit_s, "over the time limit");
    if (!c.ok) ++failures;
    std::printf("criterion %2d: %s  %-58s %7.3f s / %.0f s%s%s\n", id, c.ok ? "PASS" : "FAIL", what, dt, limit_s,
                c.ok ? "" : "  -- ", c.why.c_str());
    std::fflush(stdout);
}

Rational Q(long n, long d = 1) {
    Rational q(n, d);
    q.canonicalize();
    return q;
}

Fn1 lin(std::uint64_t c) {
    return [c](std::uint64_t k) { return c * k; };
}

std::vector<SExpr> fixture_forms(const fs::path& p) {
    std::ifstream is(p);
    std::string text((std::istreambuf_iterator<char>(is)), {});
    return read_sexprs(text);
}

std::optional<FormulaP> form(const std::vector<SExpr>& forms, const std::string& head) {
    for (const auto& e : forms)
        if (!e.atom && e.items.size() == 2 && e.items[0].atom && e.items[0].text == head) {
            std::vector<std::string> bound;
            return parse_formula(e.items[1], bound);
        }
    return std::nullopt;
}

std::optional<Strategy> strategy_of(const std::vector<SExpr>& forms) {
    for (const auto& e : forms)
        if (!e.atom && !e.items.empty() && e.items[0].atom && e.items[0].text == "strategy") {
            Strategy s;
            for (std::size_t i = 1; i < e.items.size(); ++i) s.push_back(e.items[i].text);
            return s;
        }
    return std::nullopt;
}

std::uint64_t digits_for(std::uint64_t k) { return ceil_log2(mpz_class(static_cast<unsigned long>(std::max<std::uint64_t>(k, 1)))); }

}  // namespace

int main() {
    const fs::path corpus = default_corpus_dir();

    criterion(1, "U_st golden suite (clauses, collapse, invariance)", 1, [&](Check& c) {
        std::vector<std::string> needed = {"clause_internal", "clause_st", "clause_and", "clause_or", "clause_not",
                                           "clause_implies", "clause_exists", "dongel", "fust_1", "fust_2",
                                           "fust_3", "fust_4", "fust_5"};
        auto rs = run_corpus(corpus, "ust");
        for (const auto& n : needed) {
            bool found = false;
            for (const auto& r : rs) found |= r.name == "ust/" + n;
            c.require(found, "missing fixture ust/" + n);
        }
        for (const auto& r : rs) c.require(r.pass, r.name + ": " + r.detail);
    });

    criterion(2, "pipeline golden suite, endpoints are normal forms", 1, [&](Check& c) {
        for (const char* name : {"first", "second", "trotec", "yst"}) {
            fs::path p = corpus / "pipeline" / (std::string(name) + ".nsa");
            FixtureOutcome a = run_fixture(p), b = run_fixture(p);
            c.require(a.pass, a.name + ": " + a.detail);
            c.require(a.rendered == b.rendered, a.name + ": output not byte-stable");
            auto forms = fixture_forms(p);
            auto in = form(forms, "input");
            auto fin = form(forms, "final");
            c.require(in && fin, std::string(name) + ": fixture lacks input or final");
            if (!in || !fin) continue;
            TemplateResult r = run_template(*in, strategy_of(forms).value_or(default_strategy()));
            c.require(alpha_eq(r.final, *fin), std::string(name) + ": final differs");
            c.require(try_recognize_normal_form(r.final).has_value(), std::string(name) + ": endpoint not a normal form");
            c.require(try_recognize_normal_form(*fin).has_value(), std::string(name) + ": displayed endpoint not a normal form");
        }
    });

    criterion(3, "CRI: x^2, g=2k, n in {5,10,50}, 100 pairs", 10, [&](Check& c) {
        RealFn f = parse_real_fn("x*x");
        for (std::uint64_t n : {5, 10, 50}) {
            VerificationReport r = check_cri(f, lin(2), n, 100);
            c.require(r.pass && r.worst_residual <= Q(1, static_cast<long>(n)), "n = " + std::to_string(n) + ": " + r.witness);
            c.require(r.trials >= 100, "too few trials");
            c.require(cri_mesh_bound(lin(2), n) == 2 * 2 * n, "mesh bound is not 2 g~(n)");
        }
    });

    criterion(4, "FTC: f=x on [1/4,3/4], k in {4,8,16}, 50 points", 30, [&](Check& c) {
        RealFn f = parse_real_fn("x");
        Fn1 g = lin(1);
        std::mt19937_64 rng(kDefaultSeed);
        for (std::uint64_t k : {4, 8, 16}) {
            VerificationReport r = check_ftc(f, g, k, 4, 50);
            c.require(r.pass, "check_ftc at k = " + std::to_string(k) + ": " + r.witness);
            std::uint64_t n = ftc_bound(g, k, 4);
            std::uint64_t level = ftc_level(g, f.bound(), k, n);
            for (int i = 0; i < 50; ++i) {
                Rational x = Q(1, 4) + Q(static_cast<long>(rng() % 100001), 200000);
                Rational y = x + Q(1, static_cast<long>(n));
                Rational ix = integral(f, x, level), iy = integral(f, y, level);
                // the closed form x^2/2 pins both integrals and the quotient
                c.require(abs(ix - x * x / 2) <= Q(1, static_cast<long>(4 * k * n)), "integral far from x^2/2");
                c.require(abs(iy - y * y / 2) <= Q(1, static_cast<long>(4 * k * n)), "integral far from x^2/2");
                Rational q = ftc_quotient(f, x, n, level);
                c.require(q == Rational(n) * (iy - ix), "quotient is not N(I(x+1/N) - I(x))");
                c.require(abs(q - x) <= Q(1, static_cast<long>(k)), "quotient misses f(x) by more than 1/k");
            }
        }
    });

    criterion(5, "ULC: f_n = x + x/n, g_n = 2k, h = k, k in {10,100}", 10, [&](Check& c) {
        ExprP fe = parse_expr("x + x/n");
        FnFamily fs = [fe](std::uint64_t n) { return real_fn(fe, {{"n", Rational(std::max<std::uint64_t>(n, 1))}}); };
        ModulusFamily gs = [](std::uint64_t) { return lin(2); };
        Fn1 h = [](std::uint64_t k) { return k; };
        for (std::uint64_t k : {10, 100}) {
            VerificationReport r = check_ulc(fs, gs, h, k, 100);
            c.require(r.pass && r.trials == 100, "k = " + std::to_string(k) + ": " + r.witness);
        }
    });

    criterion(6, "WEI: x(1-x), k=100; unique-max sequence to 1/2", 10, [&](Check& c) {
        RealFn f = parse_real_fn("x(1-x)");
        Rational q = wei_approx(f, lin(2), 100);
        c.require(f.exact(q) >= Q(1, 4) - Q(1, 100), "f(q) < 1/4 - 1/100");
        c.require(check_wei(f, lin(2), 100, 100).pass, "check_wei failed");
        Rational prev = 1;
        for (std::uint64_t j = 0; j <= 10; ++j) {
            Rational d = abs(wei_approx(f, lin(2), std::uint64_t{1} << j) - Q(1, 2));
            c.require(d <= prev, "residual grew at j = " + std::to_string(j));
            prev = d;
        }
        c.require(prev <= Q(1, 1024), "sequence did not reach 1/2");
    });

    criterion(7, "IVT x^2-1/2 and Brouwer 1-x at k=1000", 5, [&](Check& c) {
        RealFn f = parse_real_fn("x*x - 1/2");
        Rational q = ivt_approx(f, lin(2), 1000);
        c.require(abs(f.exact(q)) <= Q(1, 1000), "|f(q)| > 1/1000");
        c.require(check_ivt(f, lin(2), 1000).pass, "check_ivt failed");
        RealFn g = parse_real_fn("1 - x");
        Rational p = ivt_approx(g, lin(1), 1000, IvtMode::FixedPoint);
        c.require(abs(g.exact(p) - p) <= Q(1, 1000), "|f(q) - q| > 1/1000");
        c.require(check_ivt(g, lin(1), 1000, IvtMode::FixedPoint).pass, "fixed-point check failed");
    });

    criterion(8, "closures are monotone; mu has no majorant (n <= 1000)", 5, [&](Check& c) {
        std::mt19937_64 rng(kDefaultSeed);
        SamplingPlan plan;
        plan.bound = 60;
        for (int t = 0; t < 100; ++t) {
            std::vector<std::uint64_t> vals(1 + rng() % 60);
            for (auto& v : vals) v = rng() % 1000;
            Fn1 g = [vals](std::uint64_t n) { return vals[n % vals.size()]; };
            c.require(is_monotone(MajObject::fn1(monotone_closure(g)), type1(), plan).holds(), "closure not monotone");
        }
        Seq ones{{}, 1};
        for (std::uint64_t n = 0; n <= 1000; ++n) {
            MuCounterexample ce = refute_mu_majorant(n);
            auto m = mu(ce.f);
            c.require(m.has_value() && *m > n && *m == ce.mu_value, "mu not past " + std::to_string(n));
            c.require(seq_majorized(ce.f, ones), "f is not majorized by 1");
        }
    });

    criterion(9, "negative controls: bad CRI modulus, non-REF atom", 5, [&](Check& c) {
        VerificationReport r = check_cri(parse_real_fn("x*x"), [](std::uint64_t) { return 1; }, 10, 100);
        c.require(!r.pass, "g = 1 was accepted");
        c.require(r.worst_residual > Q(1, 10) && !r.witness.empty(), "no concrete witness");
        auto forms = fixture_forms(corpus / "pipeline" / "sipro.nsa");
        auto in = form(forms, "input");
        c.require(in.has_value(), "sipro fixture lacks input");
        bool refused = false;
        try {
            drop_st_on_sequence_quantifier(*in);
        } catch (const PipelineError& e) {
            refused = e.kind == PipelineError::Kind::ProvisoViolated;
        }
        c.require(refused, "drop-st accepted a non-REF atom");
    });

    criterion(10, "pointwise moduli: 20 uniformized, one refuted", 10, [&](Check& c) {
        using Addend = std::function<std::uint64_t(const Seq&)>;
        std::vector<Addend> addends = {
            [](const Seq&) { return 0; },
            [](const Seq& s) { return s.at(0); },
            [](const Seq& s) { return s.at(0) + s.at(1); },
            [](const Seq& s) { return 2 * s.at(2) + s.at(4); },
        };
        int uniformized = 0;
        for (std::uint64_t scale = 1; scale <= 5; ++scale) {
            std::function<Rational(const Seq&)> F = [scale](const Seq& s) { return Rational(Rational(scale) * binary_real(s)); };
            for (const auto& add : addends) {
                PointwiseModulus g2 = [scale, add](const Seq& s, std::uint64_t k) { return digits_for(scale * k) + add(s); };
                Fn1 u = uniformize_pointwise_modulus(g2);
                bool ok = true;
                for (std::uint64_t k : {1, 3, 8, 50}) ok &= check_uniform_modulus(F, u, k, 60).pass;
                c.require(ok, "uniform check failed for scale " + std::to_string(scale));
                uniformized += ok;
            }
        }
        c.require(uniformized == 20, "not all 20 moduli uniformized");
        PointwiseModulus bad = [](const Seq& s, std::uint64_t k) { return digits_for(k) + (s.at(1) == 0 ? 3 : 0); };
        bool refuted = false;
        try {
            uniformize_pointwise_modulus(bad);
        } catch (const VerifyError& e) {
            refuted = e.kind == VerifyError::Kind::ProvisoViolated && e.u && e.v && seq_majorized(*e.v, *e.u) &&
                      bad(*e.v, 0) > bad(*e.u, 0);
        }
        c.require(refuted, "non-monotone g2 was not refuted with a (u,v) witness");
    });

    std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
