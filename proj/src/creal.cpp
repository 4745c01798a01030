#include "nsa/creal.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>

namespace nsa {

mpz_class ceil_q(const Rational& q) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

mpz_class floor_q(const Rational& q) {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

Rational pow2(std::int64_t e) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

std::string show(const Rational& q) { return q.get_str(); }

std::uint64_t ceil_log2(const mpz_class& v) {
    std::uint64_t j = 0;
    mpz_class p = 1;
    while (p < v) {
        p *= 2;
        ++j;
    }
    return j;
}

// ---------------------------------------------------------------------------
// CReal
// ---------------------------------------------------------------------------

CReal::CReal() : CReal(from_rational(0)) {}

CReal CReal::from_rational(const Rational& q) {
    return CReal(std::make_shared<const Approx>([q](std::uint64_t) { return q; }));
}

CReal CReal::from_fast(Approx seq) { return CReal(std::make_shared<const Approx>(std::move(seq))); }

CReal CReal::clamped(Approx raw) {
    struct Memo {
        Approx raw;
        std::mutex m;
        std::vector<Rational> values;
        std::size_t good = 0;  // values[0..good) are consistent
        bool frozen = false;
        Rational get(std::uint64_t n) {
            std::lock_guard<std::mutex> lock(m);
            while (!frozen && good <= n) {
                Rational v = raw(good);
                bool ok = true;
                for (std::size_t i = 0; i < good && ok; ++i) ok = abs(values[i] - v) < pow2(-static_cast<std::int64_t>(i));
                if (!ok) {
                    frozen = true;
                    break;
                }
                values.push_back(v);
                ++good;
            }
            return values[std::min<std::size_t>(n, good - 1)];
        }
    };
    auto memo = std::make_shared<Memo>();
    memo->raw = std::move(raw);
    return from_fast([memo](std::uint64_t n) { return memo->get(n); });
}

CReal add(const CReal& x, const CReal& y) {
    return CReal::from_fast([x, y](std::uint64_t n) { return Rational(x.approx(n + 1) + y.approx(n + 1)); });
}

CReal neg(const CReal& x) {
    return CReal::from_fast([x](std::uint64_t n) { return Rational(-x.approx(n)); });
}

CReal sub(const CReal& x, const CReal& y) { return add(x, neg(y)); }

CReal mul(const CReal& x, const CReal& y) {
    // |x_m| <= |x_0| + 2 for every m
    mpz_class bx = ceil_q(abs(x.approx(0))) + 2;
    mpz_class by = ceil_q(abs(y.approx(0))) + 2;
    std::uint64_t s = ceil_log2(bx + by);
    return CReal::from_fast([x, y, s](std::uint64_t n) { return Rational(x.approx(n + s) * y.approx(n + s)); });
}

CReal abs(const CReal& x) {
    return CReal::from_fast([x](std::uint64_t n) { return Rational(abs(x.approx(n))); });
}

CReal min(const CReal& x, const CReal& y) {
    return CReal::from_fast([x, y](std::uint64_t n) { return std::min(x.approx(n), y.approx(n)); });
}

CReal max(const CReal& x, const CReal& y) {
    return CReal::from_fast([x, y](std::uint64_t n) { return std::max(x.approx(n), y.approx(n)); });
}

CReal scale(const CReal& x, const Rational& c) { return mul(x, CReal::from_rational(c)); }

Rational approx_at(const CReal& x, std::uint64_t k) { return x.approx(k); }

EqVerdict eq_real(const CReal& x, const CReal& y, std::uint64_t k) {
    EqVerdict v;
    bool undecided = false;
    for (std::uint64_t n = 0; n <= k; ++n) {
        Rational gap = abs(x.approx(n) - y.approx(n));
        if (gap > pow2(1 - static_cast<std::int64_t>(n))) return {Comparison::ApartWithWitness, n, gap};
        if (!undecided && gap > pow2(-static_cast<std::int64_t>(n))) {
            undecided = true;
            v = {Comparison::Undecided, n, gap};
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Binary expansions
// ---------------------------------------------------------------------------

CReal binary_real(const Fn1& alpha) {
    return CReal::from_fast([alpha](std::uint64_t n) {
        Rational s = 0;
        for (std::uint64_t i = 1; i <= n + 1; ++i)
            if (alpha(i) != 0) s += pow2(-static_cast<std::int64_t>(i));
        return s;
    });
}

Rational binary_real(const Seq& s) {
    Rational r = 0;
    for (std::size_t i = 0; i < s.prefix.size(); ++i)
        if (s.prefix[i] != 0) r += pow2(-static_cast<std::int64_t>(i + 1));
    if (s.tail != 0) r += pow2(-static_cast<std::int64_t>(s.prefix.size()));
    return r;
}

Fn1 binarize(const Fn1& f) {
    return [f](std::uint64_t k) -> std::uint64_t { return f(k) == 0 ? 0 : 1; };
}

// ---------------------------------------------------------------------------
// RealFn, partitions, sums
// ---------------------------------------------------------------------------

Rational RealFn::at(const Rational& q, std::uint64_t p) const {
    if (exact) return exact(q);
    return eval(CReal::from_rational(q)).approx(p);
}

Rational RealFn::bound() const {
    if (sup_bound) return *sup_bound;
    if (!modulus) throw CRealError(CRealError::Kind::DomainViolation, name + ": no sup bound and no modulus");
    // g(1)+1 steps of length < 1/g(1) reach any point from 0, each moving f by at most 1
    Fn1 g = monotone_closure(*modulus);
    return abs(at(0, 0)) + 1 + Rational(mpz_class(static_cast<unsigned long>(g(1)))) + 1;
}

Rational Partition::mesh() const {
    Rational m = 0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) m = std::max(m, Rational(points[i + 1] - points[i]));
    return m;
}

void Partition::validate() const {
    auto bad = [](const std::string& why) { throw CRealError(CRealError::Kind::InvalidPartition, why); };
    if (points.size() < 2) bad("fewer than two points");
    if (points.front() != 0 || points.back() != 1) bad("points must run from 0 to 1");
    if (tags.size() + 1 != points.size()) bad("one tag per subinterval");
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i] < points[i + 1])) bad("points not strictly increasing at " + std::to_string(i));
        if (tags[i] < points[i] || tags[i] > points[i + 1]) bad("tag " + std::to_string(i) + " outside its piece");
    }
}

Partition uniform_partition(std::uint64_t m, const Rational& pos) {
    Partition p;
    for (std::uint64_t i = 0; i <= m; ++i) p.points.emplace_back(mpz_class(static_cast<unsigned long>(i)), mpz_class(static_cast<unsigned long>(m)));
    for (auto& q : p.points) q.canonicalize();
    for (std::uint64_t i = 0; i < m; ++i) p.tags.push_back(p.points[i] + pos * (p.points[i + 1] - p.points[i]));
    return p;
}

Rational riemann_sum(const RealFn& f, const Partition& p, std::uint64_t k) {
    p.validate();
    // the widths sum to 1, so precision k per term keeps the total within 2^-k
    Rational s = 0;
    for (std::size_t i = 0; i < p.tags.size(); ++i) s += f.at(p.tags[i], k) * (p.points[i + 1] - p.points[i]);
    return s;
}

namespace {

Rational dyadic_sum(const RealFn& f, const mpz_class& last, std::uint64_t k) {
    Rational step = pow2(-static_cast<std::int64_t>(k));
    Rational s = 0;
    for (mpz_class i = 0; i <= last; ++i) s += f.at(Rational(i) * step, k);
    return s * step;
}

}  // namespace

Rational integral(const RealFn& f, const Rational& x, std::uint64_t k) {
    return dyadic_sum(f, ceil_q(x * pow2(static_cast<std::int64_t>(k))), k);
}

Rational integral(const RealFn& f, const CReal& x, std::uint64_t k) {
    return dyadic_sum(f, ceil_q(x.approx(k + 2) * pow2(static_cast<std::int64_t>(k))), k);
}

std::uint64_t integral_level(const Fn1& g, const Rational& b, std::uint64_t d) {
    Fn1 gt = monotone_closure(g);
    mpz_class need_mod = mpz_class(static_cast<unsigned long>(gt(4 * d))) + 1;
    mpz_class need_over = ceil_q(6 * Rational(mpz_class(static_cast<unsigned long>(d))) * (b + 1));
    return std::max<std::uint64_t>(1, ceil_log2(std::max(need_mod, need_over)));
}

CReal integral_real(const RealFn& f, const CReal& x) {
    if (!f.modulus) throw CRealError(CRealError::Kind::DomainViolation, f.name + ": integral needs a modulus");
    Fn1 g = *f.modulus;
    Rational b = f.bound();
    return CReal::from_fast([f, x, g, b](std::uint64_t n) {
        return integral(f, x, integral_level(g, b, std::uint64_t{1} << (n + 1)));
    });
}

CReal diff_quotient(const RealFn& f, const CReal& x, const Rational& eps) {
    if (eps == 0) throw CRealError(CRealError::Kind::DomainViolation, "difference quotient with eps = 0");
    Rational probe = x.approx(30);
    Rational slack = pow2(-29);
    for (const Rational& p : {probe, Rational(probe + eps)})
        if (p < -slack || p > 1 + slack)
            throw CRealError(CRealError::Kind::DomainViolation, "point " + show(p) + " outside [0,1]");
    CReal fx = f.eval(x);
    CReal fy = f.eval(add(x, CReal::from_rational(eps)));
    return scale(sub(fy, fx), 1 / eps);
}

Rational diff_quotient(const RealFn& f, const Rational& x, const Rational& eps, std::uint64_t p) {
    if (eps == 0) throw CRealError(CRealError::Kind::DomainViolation, "difference quotient with eps = 0");
    Rational y = x + eps;
    for (const Rational& q : {x, y})
        if (q < 0 || q > 1) throw CRealError(CRealError::Kind::DomainViolation, "point " + show(q) + " outside [0,1]");
    if (f.exact) return (f.exact(y) - f.exact(x)) / eps;
    return approx_at(diff_quotient(f, CReal::from_rational(x), eps), p);
}

// ---------------------------------------------------------------------------
// Expression language
// ---------------------------------------------------------------------------

struct Expr {
    enum class Op { Num, Var, Add, Sub, Mul, Div, Neg, Abs, Min, Max, Pow } op;
    Rational num;
    std::string var;
    std::uint64_t exponent = 0;
    ExprP a, b;
};

namespace {

ExprP node(Expr::Op op, ExprP a = nullptr, ExprP b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    ExprP parse() {
        ExprP e = sum();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return e;
    }

private:
    const std::string& s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw CRealError(CRealError::Kind::Parse, "expression '" + s_ + "' at " + std::to_string(i_) + ": " + why);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool peek(char c) {
        skip();
        return i_ < s_.size() && s_[i_] == c;
    }
    bool eat(char c) {
        if (!peek(c)) return false;
        ++i_;
        return true;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool starts_primary() {
        skip();
        if (i_ >= s_.size()) return false;
        char c = s_[i_];
        return std::isdigit(static_cast<unsigned char>(c)) || std::isalpha(static_cast<unsigned char>(c)) || c == '(' ||
               c == '.';
    }

    ExprP sum() {
        ExprP e = product();
        for (;;) {
            if (eat('+')) e = node(Expr::Op::Add, e, product());
            else if (eat('-')) e = node(Expr::Op::Sub, e, product());
            else return e;
        }
    }
    ExprP product() {
        ExprP e = unary();
        for (;;) {
            if (eat('*')) e = node(Expr::Op::Mul, e, unary());
            else if (eat('/')) e = node(Expr::Op::Div, e, unary());
            else if (starts_primary()) e = node(Expr::Op::Mul, e, power());
            else return e;
        }
    }
    ExprP unary() {
        if (eat('-')) return node(Expr::Op::Neg, unary());
        return power();
    }
    ExprP power() {
        ExprP e = primary();
        if (eat('^')) {
            skip();
            std::size_t start = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            if (start == i_) fail("exponent must be a natural number");
            auto p = node(Expr::Op::Pow, e);
            std::const_pointer_cast<Expr>(p)->exponent = std::stoull(s_.substr(start, i_ - start));
            return p;
        }
        return e;
    }
    ExprP primary() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end");
        char c = s_[i_];
        if (eat('(')) {
            ExprP e = sum();
            expect(')');
            return e;
        }
        if (eat('|')) {
            ExprP e = sum();
            expect('|');
            return node(Expr::Op::Abs, e);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
            std::string id = s_.substr(start, i_ - start);
            if (id == "abs" || id == "min" || id == "max") {
                expect('(');
                ExprP a = sum();
                if (id == "abs") {
                    expect(')');
                    return node(Expr::Op::Abs, a);
                }
                expect(',');
                ExprP b = sum();
                expect(')');
                return node(id == "min" ? Expr::Op::Min : Expr::Op::Max, a, b);
            }
            auto v = std::make_shared<Expr>();
            v->op = Expr::Op::Var;
            v->var = id;
            return v;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
    ExprP number() {
        std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        std::string whole = s_.substr(start, i_ - start);
        std::string frac;
        if (i_ < s_.size() && s_[i_] == '.') {
            ++i_;
            std::size_t f = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            frac = s_.substr(f, i_ - f);
        }
        if (whole.empty() && frac.empty()) fail("malformed number");
        mpz_class num(whole.empty() ? "0" : whole);
        mpz_class den = 1;
        for (char d : frac) {
            num = num * 10 + (d - '0');
            den *= 10;
        }
        auto e = std::make_shared<Expr>();
        e->op = Expr::Op::Num;
        e->num = Rational(num, den);
        e->num.canonicalize();
        return e;
    }
};

void collect_vars(const ExprP& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->op == Expr::Op::Var) out.insert(e->var);
    collect_vars(e->a, out);
    collect_vars(e->b, out);
}

// Replaces bound parameters by constants and folds constant subterms.
ExprP bind(const ExprP& e, const std::map<std::string, Rational>& params) {
    if (!e) return e;
    if (e->op == Expr::Op::Var) {
        auto it = params.find(e->var);
        if (it == params.end()) return e;
        auto n = std::make_shared<Expr>();
        n->op = Expr::Op::Num;
        n->num = it->second;
        return n;
    }
    auto c = std::make_shared<Expr>(*e);
    c->a = bind(e->a, params);
    c->b = bind(e->b, params);
    return c;
}

template <class V, class Ops>
V eval_expr(const ExprP& e, const Ops& ops) {
    switch (e->op) {
        case Expr::Op::Num: return ops.num(e->num);
        case Expr::Op::Var: return ops.var(e->var);
        case Expr::Op::Add: return ops.add(eval_expr<V>(e->a, ops), eval_expr<V>(e->b, ops));
        case Expr::Op::Sub: return ops.sub(eval_expr<V>(e->a, ops), eval_expr<V>(e->b, ops));
        case Expr::Op::Mul: return ops.mul(eval_expr<V>(e->a, ops), eval_expr<V>(e->b, ops));
        case Expr::Op::Div: return ops.div(eval_expr<V>(e->a, ops), e->b);
        case Expr::Op::Neg: return ops.neg(eval_expr<V>(e->a, ops));
        case Expr::Op::Abs: return ops.abs(eval_expr<V>(e->a, ops));
        case Expr::Op::Min: return ops.min(eval_expr<V>(e->a, ops), eval_expr<V>(e->b, ops));
        case Expr::Op::Max: return ops.max(eval_expr<V>(e->a, ops), eval_expr<V>(e->b, ops));
        case Expr::Op::Pow: {
            V base = eval_expr<V>(e->a, ops);
            V r = ops.num(1);
            for (std::uint64_t i = 0; i < e->exponent; ++i) r = ops.mul(r, base);
            return r;
        }
    }
    throw std::logic_error("bad expression node");
}

Rational constant_value(const ExprP& e);

struct RationalOps {
    std::string name;
    Rational x;
    Rational num(const Rational& q) const { return q; }
    Rational var(const std::string& v) const {
        if (v != name) throw CRealError(CRealError::Kind::Parse, "unbound variable " + v);
        return x;
    }
    Rational add(const Rational& a, const Rational& b) const { return a + b; }
    Rational sub(const Rational& a, const Rational& b) const { return a - b; }
    Rational mul(const Rational& a, const Rational& b) const { return a * b; }
    Rational div(const Rational& a, const ExprP& b) const {
        Rational d = eval_expr<Rational>(b, *this);
        if (d == 0) throw CRealError(CRealError::Kind::DomainViolation, "division by zero");
        return a / d;
    }
    Rational neg(const Rational& a) const { return -a; }
    Rational abs(const Rational& a) const { return ::abs(a); }
    Rational min(const Rational& a, const Rational& b) const { return std::min(a, b); }
    Rational max(const Rational& a, const Rational& b) const { return std::max(a, b); }
};

Rational constant_value(const ExprP& e) { return eval_expr<Rational>(e, RationalOps{"", 0}); }

struct CRealOps {
    CReal x;
    CReal num(const Rational& q) const { return CReal::from_rational(q); }
    CReal var(const std::string&) const { return x; }
    CReal add(const CReal& a, const CReal& b) const { return nsa::add(a, b); }
    CReal sub(const CReal& a, const CReal& b) const { return nsa::sub(a, b); }
    CReal mul(const CReal& a, const CReal& b) const { return nsa::mul(a, b); }
    CReal div(const CReal& a, const ExprP& b) const { return scale(a, 1 / constant_value(b)); }
    CReal neg(const CReal& a) const { return nsa::neg(a); }
    CReal abs(const CReal& a) const { return nsa::abs(a); }
    CReal min(const CReal& a, const CReal& b) const { return nsa::min(a, b); }
    CReal max(const CReal& a, const CReal& b) const { return nsa::max(a, b); }
};

// Range over x in [0,1] and a Lipschitz constant.
struct Bound {
    Rational lo, hi, lip;
    Rational mag() const { return std::max(::abs(lo), ::abs(hi)); }
};

struct BoundOps {
    Bound num(const Rational& q) const { return {q, q, 0}; }
    Bound var(const std::string&) const { return {0, 1, 1}; }
    Bound add(const Bound& a, const Bound& b) const { return {a.lo + b.lo, a.hi + b.hi, a.lip + b.lip}; }
    Bound sub(const Bound& a, const Bound& b) const { return {a.lo - b.hi, a.hi - b.lo, a.lip + b.lip}; }
    Bound mul(const Bound& a, const Bound& b) const {
        Rational c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
        return {*std::min_element(c, c + 4), *std::max_element(c, c + 4), a.lip * b.mag() + b.lip * a.mag()};
    }
    Bound div(const Bound& a, const ExprP& b) const {
        Rational d = constant_value(b);
        if (d == 0) throw CRealError(CRealError::Kind::DomainViolation, "division by zero");
        Rational l = a.lo / d, h = a.hi / d;
        return {std::min(l, h), std::max(l, h), a.lip / ::abs(d)};
    }
    Bound neg(const Bound& a) const { return {-a.hi, -a.lo, a.lip}; }
    Bound abs(const Bound& a) const {
        if (a.lo >= 0) return a;
        if (a.hi <= 0) return neg(a);
        return {0, std::max(Rational(-a.lo), a.hi), a.lip};
    }
    Bound min(const Bound& a, const Bound& b) const {
        return {std::min(a.lo, b.lo), std::min(a.hi, b.hi), std::max(a.lip, b.lip)};
    }
    Bound max(const Bound& a, const Bound& b) const {
        return {std::max(a.lo, b.lo), std::max(a.hi, b.hi), std::max(a.lip, b.lip)};
    }
};

void check_only(const ExprP& e, const std::string& var) {
    std::set<std::string> vs;
    collect_vars(e, vs);
    for (const auto& v : vs)
        if (v != var) throw CRealError(CRealError::Kind::Parse, "unbound variable " + v);
    std::function<void(const ExprP&)> divisors = [&](const ExprP& n) {
        if (!n) return;
        if (n->op == Expr::Op::Div) {
            std::set<std::string> dv;
            collect_vars(n->b, dv);
            if (!dv.empty()) throw CRealError(CRealError::Kind::Parse, "division by a term in " + var);
            if (constant_value(n->b) == 0) throw CRealError(CRealError::Kind::DomainViolation, "division by zero");
        }
        divisors(n->a);
        divisors(n->b);
    };
    divisors(e);
}

std::uint64_t to_u64(const mpz_class& z) {
    if (z < 1) return 1;
    if (!z.fits_ulong_p()) throw CRealError(CRealError::Kind::DomainViolation, "modulus value overflows");
    return z.get_ui();
}

}  // namespace

ExprP parse_expr(const std::string& text) { return ExprParser(text).parse(); }

std::string render_expr(const ExprP& e) {
    switch (e->op) {
        case Expr::Op::Num: return e->num.get_str();
        case Expr::Op::Var: return e->var;
        case Expr::Op::Add: return "(" + render_expr(e->a) + " + " + render_expr(e->b) + ")";
        case Expr::Op::Sub: return "(" + render_expr(e->a) + " - " + render_expr(e->b) + ")";
        case Expr::Op::Mul: return "(" + render_expr(e->a) + " * " + render_expr(e->b) + ")";
        case Expr::Op::Div: return "(" + render_expr(e->a) + " / " + render_expr(e->b) + ")";
        case Expr::Op::Neg: return "-" + render_expr(e->a);
        case Expr::Op::Abs: return "|" + render_expr(e->a) + "|";
        case Expr::Op::Min: return "min(" + render_expr(e->a) + ", " + render_expr(e->b) + ")";
        case Expr::Op::Max: return "max(" + render_expr(e->a) + ", " + render_expr(e->b) + ")";
        case Expr::Op::Pow: return render_expr(e->a) + "^" + std::to_string(e->exponent);
    }
    return {};
}

std::vector<std::string> expr_variables(const ExprP& e) {
    std::set<std::string> vs;
    collect_vars(e, vs);
    return {vs.begin(), vs.end()};
}

RealFn real_fn(const ExprP& expr, const std::map<std::string, Rational>& params) {
    ExprP e = bind(expr, params);
    check_only(e, "x");
    Bound b = eval_expr<Bound>(e, BoundOps{});
    RealFn f;
    f.name = render_expr(e);
    f.eval = [e](const CReal& x) { return eval_expr<CReal>(e, CRealOps{x}); };
    f.exact = [e](const Rational& x) { return eval_expr<Rational>(e, RationalOps{"x", x}); };
    Rational lip = b.lip;
    f.modulus = Fn1([lip](std::uint64_t k) {
        return to_u64(ceil_q(lip * Rational(mpz_class(static_cast<unsigned long>(k)))));
    });
    f.sup_bound = b.mag();
    return f;
}

RealFn parse_real_fn(const std::string& text) { return real_fn(parse_expr(text)); }

Fn1 modulus_fn(const ExprP& expr, const std::map<std::string, Rational>& params) {
    ExprP e = bind(expr, params);
    check_only(e, "k");
    return [e](std::uint64_t k) {
        return to_u64(ceil_q(eval_expr<Rational>(e, RationalOps{"k", Rational(mpz_class(static_cast<unsigned long>(k)))})));
    };
}

Fn1 parse_modulus(const std::string& text) { return modulus_fn(parse_expr(text)); }

}  // namespace nsa
