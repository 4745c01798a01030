#include "nsa/verifier.hpp"

#include <chrono>
#include <random>
#include <sstream>

#include <json.hpp>

namespace nsa {

namespace {

using Clock = std::chrono::steady_clock;

Rational nat(std::uint64_t n) { return Rational(mpz_class(static_cast<unsigned long>(n))); }

Rational inv(std::uint64_t n) { return Rational(mpz_class(1), mpz_class(static_cast<unsigned long>(n))); }

// precision p with 2^-p <= 1/(8k): evaluation slack stays under the 1/(4k) budget
std::uint64_t slack_precision(std::uint64_t k) { return ceil_log2(mpz_class(static_cast<unsigned long>(8 * k))); }

Rational random_rational(std::mt19937_64& rng, const Rational& lo, const Rational& hi, unsigned long den = 1 << 20) {
    std::uniform_int_distribution<unsigned long> d(0, den);
    Rational u(mpz_class(d(rng)), mpz_class(den));
    u.canonicalize();
    return lo + (hi - lo) * u;
}

// |f(x) - f(y)| plus the evaluation slack when f is not exact
Rational gap(const RealFn& f, const Rational& x, const Rational& y, std::uint64_t p) {
    Rational d = abs(f.at(x, p) - f.at(y, p));
    if (!f.is_exact()) d += pow2(1 - static_cast<std::int64_t>(p));
    return d;
}

struct Timer {
    Clock::time_point start = Clock::now();
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

void finish(VerificationReport& r, const Timer& t) {
    r.pass = r.worst_residual <= r.threshold;
    r.wall_time = t.seconds();
}

void record(VerificationReport& r, const Rational& residual, const std::string& witness) {
    ++r.trials;
    if (r.trials == 1 || residual > r.worst_residual) {
        r.worst_residual = residual;
        r.witness = witness;
    }
}

TermP lam(const std::string& v, const TypeP& t, const TermP& body) { return mk_lam(v, t, body); }

Partition random_partition(std::mt19937_64& rng, std::uint64_t t) {
    // pieces of width in [1/(2m), 3/(2m)] with m in [2t, 3t], so the mesh stays below 1/t
    std::uniform_int_distribution<std::uint64_t> dm(2 * t, 3 * t);
    std::uint64_t m = dm(rng);
    Rational jitter = inv(4 * m);
    Partition p;
    p.points.push_back(0);
    for (std::uint64_t i = 1; i < m; ++i)
        p.points.push_back(nat(i) / nat(m) + random_rational(rng, -jitter, jitter, 1000));
    p.points.push_back(1);
    for (std::size_t i = 0; i + 1 < p.points.size(); ++i)
        p.tags.push_back(random_rational(rng, p.points[i], p.points[i + 1], 1000));
    return p;
}

std::string describe(const Partition& p) {
    return std::to_string(p.tags.size()) + " pieces, mesh " + show(p.mesh());
}

}  // namespace

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string VerificationReport::text() const {
    std::ostringstream out;
    out << theorem_id << ": " << (pass ? "PASS" : "FAIL") << "\n";
    out << "  term      " << term << "\n";
    for (const auto& [k, v] : params) out << "  " << k << " = " << v << "\n";
    out << "  trials    " << trials << " (seed " << seed << ")\n";
    out << "  residual  " << show(worst_residual) << " <= " << show(threshold) << " : " << (pass ? "yes" : "no") << "\n";
    if (!witness.empty()) out << "  worst     " << witness << "\n";
    out << "  time      " << wall_time << " s\n";
    return out.str();
}

std::string VerificationReport::json_line() const {
    nlohmann::ordered_json j;
    j["theorem_id"] = theorem_id;
    j["term"] = term;
    j["trials"] = trials;
    j["worst_residual_num"] = worst_residual.get_num().get_str();
    j["worst_residual_den"] = worst_residual.get_den().get_str();
    j["threshold_num"] = threshold.get_num().get_str();
    j["threshold_den"] = threshold.get_den().get_str();
    j["pass"] = pass;
    j["seed"] = seed;
    nlohmann::ordered_json ps = nlohmann::ordered_json::object();
    for (const auto& [k, v] : params) ps[k] = v;
    j["params"] = ps;
    j["witness"] = witness;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Bound terms
// ---------------------------------------------------------------------------

TermP cri_term() {
    TermP g = mk_var("g"), n = mk_var("n");
    return lam("g", type1(), lam("n", base_type(), mk_app(prelude::scale(2), mk_apps(prelude::closure(), {g, n}))));
}

TermP ftc_term() {
    TermP g = mk_var("g"), k = mk_var("k"), l = mk_var("l");
    TermP body = mk_apps(mk_max(), {mk_apps(prelude::closure(), {g, mk_app(prelude::scale(2), k)}),
                                    mk_app(prelude::scale(2), l)});
    return lam("g", type1(), lam("k", base_type(), lam("l", base_type(), body)));
}

TermP ulc_term() {
    TermP G = mk_var("G"), h = mk_var("h"), k = mk_var("k");
    TermP k3 = mk_app(prelude::scale(3), k);
    TermP m = mk_apps(prelude::closure(), {h, k3});
    TermP body = mk_apps(prelude::closure(), {mk_app(G, m), k3});
    return lam("G", arrow(base_type(), type1()), lam("h", type1(), lam("k", base_type(), body)));
}

TermP grid_term() {
    TermP g = mk_var("g"), k = mk_var("k");
    TermP body = mk_apps(mk_max(), {mk_num(1), mk_apps(prelude::closure(), {g, mk_app(prelude::scale(2), k)})});
    return lam("g", type1(), lam("k", base_type(), body));
}

TermP uniformize_term() {
    TermP G = mk_var("G"), k = mk_var("k");
    TermP top = prelude::constant(1, base_type());
    return lam("G", arrow(type1(), type1()), lam("k", base_type(), mk_apps(G, {top, k})));
}

// ---------------------------------------------------------------------------
// Riemann integrability
// ---------------------------------------------------------------------------

std::uint64_t cri_mesh_bound(const Fn1& g, std::uint64_t n) { return 2 * monotone_closure(g)(n); }

VerificationReport check_cri(const RealFn& f, const Fn1& g, std::uint64_t n, std::uint64_t trials, std::uint64_t seed) {
    Timer timer;
    VerificationReport r;
    r.theorem_id = "cri";
    r.term = render_term(cri_term());
    r.seed = seed;
    r.threshold = inv(n);
    std::uint64_t t = std::max<std::uint64_t>(1, cri_mesh_bound(g, n));
    r.params = {{"f", f.name}, {"n", std::to_string(n)}, {"mesh_bound", "1/" + std::to_string(t)},
                {"random_pairs", std::to_string(trials)}, {"extreme_pairs", "1"}};
    std::uint64_t p = slack_precision(n);
    Rational slack = f.is_exact() ? Rational(0) : Rational(2 * pow2(-static_cast<std::int64_t>(p)));
    auto compare = [&](const Partition& a, const Partition& b, const std::string& what) {
        Rational res = abs(riemann_sum(f, a, p) - riemann_sum(f, b, p)) + slack;
        record(r, res, what + ": |S - S'| = " + show(res));
    };
    Partition left = uniform_partition(t + 1, 0), right = uniform_partition(t + 1, 1);
    compare(left, right, "uniform " + std::to_string(t + 1) + " pieces, left tags vs right tags");
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < trials; ++i) {
        Partition a = random_partition(rng, t), b = random_partition(rng, t);
        compare(a, b, "pair " + std::to_string(i) + ": " + describe(a) + " / " + describe(b));
    }
    finish(r, timer);
    return r;
}

// ---------------------------------------------------------------------------
// Fundamental theorem of calculus
// ---------------------------------------------------------------------------

std::uint64_t ftc_bound(const Fn1& g, std::uint64_t k, std::uint64_t l) {
    return std::max(monotone_closure(g)(2 * k), 2 * l);
}

std::uint64_t ftc_level(const Fn1& g, const Rational& sup, std::uint64_t k, std::uint64_t n) {
    return integral_level(g, sup, 4 * k * n);
}

Rational ftc_quotient(const RealFn& f, const Rational& x, std::uint64_t n, std::uint64_t level) {
    // N (I(x + 1/N) - I(x)): the two dyadic sums share every term up to ceil(x 2^j)
    Rational step = pow2(-static_cast<std::int64_t>(level));
    Rational scale2 = pow2(static_cast<std::int64_t>(level));
    mpz_class c1 = ceil_q(x * scale2), c2 = ceil_q((x + inv(n)) * scale2);
    Rational s = 0;
    for (mpz_class i = c1 + 1; i <= c2; ++i) s += f.at(Rational(i) * step, level);
    return nat(n) * s * step;
}

VerificationReport check_ftc(const RealFn& f, const Fn1& g, std::uint64_t k, std::uint64_t l, std::uint64_t trials,
                             std::uint64_t seed) {
    Timer timer;
    if (l < 2) throw VerifyError(VerifyError::Kind::PreconditionViolated, "ftc needs l >= 2");
    VerificationReport r;
    r.theorem_id = "ftc";
    r.term = render_term(ftc_term());
    r.seed = seed;
    r.threshold = inv(k);
    std::uint64_t n = ftc_bound(g, k, l);
    RealFn fb = f;
    if (!fb.modulus) fb.modulus = g;
    Rational sup = fb.bound();
    std::uint64_t level = ftc_level(g, sup, k, n);
    r.params = {{"f", f.name}, {"k", std::to_string(k)}, {"l", std::to_string(l)}, {"N", std::to_string(n)},
                {"level", std::to_string(level)}};
    std::uint64_t p = slack_precision(k);
    Rational lo = inv(l), hi = 1 - inv(l);
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < trials; ++i) {
        Rational x = i == 0 ? lo : i == 1 ? hi : random_rational(rng, lo, hi);
        Rational res = abs(ftc_quotient(f, x, n, level) - f.at(x, p));
        if (!f.is_exact()) res += pow2(-static_cast<std::int64_t>(p));
        record(r, res, "x = " + show(x) + ": residual " + show(res));
    }
    finish(r, timer);
    return r;
}

std::uint64_t ftc2_bound(const Fn1& g, std::uint64_t k) { return std::max<std::uint64_t>(1, monotone_closure(g)(2 * k)); }

VerificationReport check_ftc_second(const RealFn& f, const Fn1& g, std::uint64_t k) {
    Timer timer;
    VerificationReport r;
    r.theorem_id = "ftc2";
    r.term = render_term(grid_term());
    r.threshold = inv(k);
    std::uint64_t e = ftc2_bound(g, k);
    Rational eps = inv(e);
    RealFn fb = f;
    if (!fb.modulus) fb.modulus = g;
    Rational sup = fb.bound();
    // D_eps f has modulus m |-> g~(2 m E) and sup bound 2 B E
    Fn1 gt = monotone_closure(g);
    Fn1 gd = [gt, e](std::uint64_t m) { return gt(2 * m * e); };
    std::uint64_t level = integral_level(gd, 2 * sup * nat(e), 4 * k);
    r.params = {{"f", f.name}, {"k", std::to_string(k)}, {"eps", show(eps)}, {"level", std::to_string(level)}};
    std::uint64_t p = level + 2;
    auto fclamp = [&](const Rational& x) { return f.at(x > 1 ? Rational(1) : x, p); };
    Rational step = pow2(-static_cast<std::int64_t>(level));
    mpz_class last = mpz_class(1) << static_cast<unsigned>(level);
    Rational s = 0;
    for (mpz_class i = 0; i <= last; ++i) {
        Rational x = Rational(i) * step;
        s += (fclamp(x + eps) - fclamp(x)) / eps;
    }
    s *= step;
    Rational res = abs(s - (f.at(1, p) - f.at(0, p)));
    if (!f.is_exact()) res += (2 * nat(e) + 2) * pow2(-static_cast<std::int64_t>(p)) * 2;
    record(r, res, "I(D_eps f, 1) = " + show(s));
    finish(r, timer);
    return r;
}

// ---------------------------------------------------------------------------
// Uniform limits
// ---------------------------------------------------------------------------

Fn1 ulc_modulus(const ModulusFamily& gs, const Fn1& h) {
    Fn1 ht = monotone_closure(h);
    return [gs, ht](std::uint64_t k) { return monotone_closure(gs(ht(3 * k)))(3 * k); };
}

RealFn uniform_limit(const FnFamily& fs, const Fn1& h) {
    Fn1 ht = monotone_closure(h);
    RealFn f;
    f.name = "lim " + fs(1).name;
    f.eval = [fs, ht](const CReal& x) {
        return CReal::from_fast([fs, ht, x](std::uint64_t n) {
            // |f - f_M| <= 2^-(n+2) and the approximation adds 2^-(n+2)
            std::uint64_t m = ht(std::uint64_t{1} << (n + 2));
            return fs(m).eval(x).approx(n + 2);
        });
    };
    return f;
}

VerificationReport check_ulc(const FnFamily& fs, const ModulusFamily& gs, const Fn1& h, std::uint64_t k,
                             std::uint64_t trials, std::uint64_t seed) {
    Timer timer;
    VerificationReport r;
    r.theorem_id = "ulc";
    r.term = render_term(ulc_term());
    r.seed = seed;
    r.threshold = inv(k);
    std::uint64_t m = ulc_modulus(gs, h)(k);
    RealFn f = uniform_limit(fs, h);
    r.params = {{"f_n", fs(1).name}, {"k", std::to_string(k)}, {"modulus", std::to_string(m)}};
    std::uint64_t p = slack_precision(k);
    Rational w = inv(m);
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < trials; ++i) {
        // half the pairs sit just inside the modulus window
        Rational d = i % 2 == 0 ? Rational(w * Rational(999, 1000)) : random_rational(rng, 0, w);
        if (d >= w) d = w * Rational(1, 2);
        Rational x = random_rational(rng, 0, 1 - d);
        Rational res = gap(f, x, x + d, p);
        record(r, res, "x = " + show(x) + ", y = " + show(Rational(x + d)) + ": |f(x) - f(y)| <= " + show(res));
    }
    finish(r, timer);
    return r;
}

// ---------------------------------------------------------------------------
// Maxima and roots
// ---------------------------------------------------------------------------

std::uint64_t grid_size(const Fn1& g, std::uint64_t k) { return std::max<std::uint64_t>(1, monotone_closure(g)(2 * k)); }

Rational wei_approx(const RealFn& f, const Fn1& g, std::uint64_t k) {
    std::uint64_t G = grid_size(g, k);
    std::uint64_t p = slack_precision(k);
    Rational best_q = 0, best_v = f.at(0, p);
    for (std::uint64_t i = 1; i <= G; ++i) {
        Rational q = nat(i) / nat(G);
        Rational v = f.at(q, p);
        if (v > best_v) {
            best_v = v;
            best_q = q;
        }
    }
    return best_q;
}

VerificationReport check_wei(const RealFn& f, const Fn1& g, std::uint64_t k, std::uint64_t trials, std::uint64_t seed) {
    Timer timer;
    VerificationReport r;
    r.theorem_id = "wei";
    r.term = render_term(grid_term());
    r.seed = seed;
    r.threshold = inv(k);
    Rational q = wei_approx(f, g, k);
    std::uint64_t G = grid_size(g, k);
    r.params = {{"f", f.name}, {"k", std::to_string(k)}, {"grid", std::to_string(G)}, {"q", show(q)}};
    std::uint64_t p = slack_precision(k);
    Rational fq = f.at(q, p);
    auto probe = [&](const Rational& y) {
        Rational res = f.at(y, p) - fq;
        if (!f.is_exact()) res += pow2(1 - static_cast<std::int64_t>(p));
        if (res < 0) res = 0;
        record(r, res, "y = " + show(y) + ": f(y) - f(q) <= " + show(res));
    };
    std::uint64_t dense = std::min<std::uint64_t>(4 * G, 20000);
    for (std::uint64_t i = 0; i <= dense; ++i) probe(nat(i) / nat(dense));
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < trials; ++i) probe(random_rational(rng, 0, 1));
    finish(r, timer);
    return r;
}

CReal wei_unique_limit(const RealFn& f, const Fn1& g, const std::vector<std::uint64_t>& ks) {
    if (ks.empty()) throw VerifyError(VerifyError::Kind::PreconditionViolated, "empty precision sequence");
    return CReal::clamped([f, g, ks](std::uint64_t n) { return wei_approx(f, g, ks[std::min<std::size_t>(n, ks.size() - 1)]); });
}

Rational ivt_approx(const RealFn& f0, const Fn1& g0, std::uint64_t k, IvtMode mode) {
    RealFn f = f0;
    Fn1 g = g0;
    if (mode == IvtMode::FixedPoint) {
        // x |-> f(x) - x moves by at most 1/(2k) + 1/(2k) over |x - y| < 1/max(2k, g(2k))
        f.exact = f0.exact ? std::function<Rational(const Rational&)>([f0](const Rational& x) { return Rational(f0.exact(x) - x); })
                           : nullptr;
        f.eval = [f0](const CReal& x) { return sub(f0.eval(x), x); };
        g = [g0](std::uint64_t m) { return std::max(2 * m, g0(2 * m)); };
    }
    std::uint64_t G = grid_size(g, k);
    std::uint64_t p = slack_precision(k);
    Rational tol = inv(k) - pow2(-static_cast<std::int64_t>(p));
    auto val = [&](std::uint64_t i) { return f.at(nat(i) / nat(G), p); };
    Rational a = val(0), b = val(G);
    if (abs(a) <= tol) return 0;
    if (abs(b) <= tol) return 1;
    if ((a < 0) == (b < 0))
        throw VerifyError(VerifyError::Kind::PreconditionViolated,
                          "no sign change: f(0) ~ " + show(a) + ", f(1) ~ " + show(b));
    bool rising = a < 0;
    std::uint64_t lo = 0, hi = G;
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        Rational v = val(mid);
        if (v == 0) return nat(mid) / nat(G);
        if ((v < 0) == rising) lo = mid;
        else hi = mid;
    }
    return abs(val(lo)) <= abs(val(hi)) ? Rational(nat(lo) / nat(G)) : Rational(nat(hi) / nat(G));
}

VerificationReport check_ivt(const RealFn& f, const Fn1& g, std::uint64_t k, IvtMode mode) {
    Timer timer;
    VerificationReport r;
    r.theorem_id = mode == IvtMode::Root ? "ivt" : "brouwer";
    r.term = render_term(grid_term());
    r.threshold = inv(k);
    Rational q = ivt_approx(f, g, k, mode);
    std::uint64_t p = slack_precision(k);
    Rational v = f.at(q, p);
    if (mode == IvtMode::FixedPoint) v -= q;
    Rational res = abs(v);
    if (!f.is_exact()) res += pow2(-static_cast<std::int64_t>(p));
    r.params = {{"f", f.name}, {"k", std::to_string(k)}, {"q", show(q)}};
    record(r, res, std::string(mode == IvtMode::Root ? "|f(q)|" : "|f(q) - q|") + " = " + show(res));
    finish(r, timer);
    return r;
}

// ---------------------------------------------------------------------------
// Pointwise to uniform moduli on Cantor space
// ---------------------------------------------------------------------------

Fn1 uniformize_pointwise_modulus(const PointwiseModulus& g2, const UniformizeBudget& budget) {
    SamplingPlan plan;
    for (std::uint64_t tail : {0, 1})
        for (auto& s : binary_family(budget.prefix_len, tail)) plan.family.push_back(std::move(s));
    for (std::uint64_t k = 0; k <= budget.k_max; ++k) {
        MajObject gk = MajObject::fn2([g2, k](const Seq& s) { return g2(s, k); });
        MajVerdict v = is_monotone(gk, type2(), plan);
        if (v.outcome == MajOutcome::FailsWithWitness) {
            VerifyError e(VerifyError::Kind::ProvisoViolated,
                          "pointwise modulus not monotone at k = " + std::to_string(k) + ": " + v.detail);
            e.u = v.u_seq;
            e.v = v.v_seq;
            throw e;
        }
    }
    Seq top{{}, 1};
    return [g2, top](std::uint64_t k) { return g2(top, k); };
}

VerificationReport check_uniform_modulus(const std::function<Rational(const Seq&)>& F, const Fn1& g, std::uint64_t k,
                                         std::uint64_t trials, std::uint64_t seed) {
    Timer timer;
    VerificationReport r;
    r.theorem_id = "uniform-modulus";
    r.term = render_term(uniformize_term());
    r.seed = seed;
    r.threshold = inv(k);
    std::uint64_t n = g(k);
    r.params = {{"k", std::to_string(k)}, {"digits", std::to_string(n)}};
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < trials; ++i) {
        Seq x, y;
        std::size_t len = n + 1 + rng() % 8;
        for (std::size_t j = 0; j < len; ++j) {
            x.prefix.push_back(rng() % 2);
            y.prefix.push_back(j < n ? x.prefix[j] : rng() % 2);
        }
        x.tail = rng() % 2;
        y.tail = rng() % 2;
        Rational res = abs(F(x) - F(y));
        record(r, res, "x = " + x.show() + ", y = " + y.show() + ": " + show(res));
    }
    finish(r, timer);
    return r;
}

}  // namespace nsa
