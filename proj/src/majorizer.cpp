#include "nsa/majorizer.hpp"

#include <algorithm>

namespace nsa {

std::string Seq::show() const {
    std::string s = "[";
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(prefix[i]);
    }
    return s + (prefix.empty() ? "" : ",") + std::to_string(tail) + "...]";
}

namespace {
TermP recO() { return mk_rec(base_type()); }

TermP pred_of(TermP n) {
    TermP step = mk_lam("m", base_type(), mk_lam("r", base_type(), mk_var("m")));
    return mk_apps(recO(), {mk_num(0), step, n});
}

TermP is_zero(TermP n) {
    TermP step = mk_lam("m", base_type(), mk_lam("r", base_type(), mk_num(0)));
    return mk_apps(recO(), {mk_num(1), step, n});
}

// b >= 1 selects x, b = 0 selects y
TermP cond(TermP b, TermP x, TermP y) {
    TermP step = mk_lam("m#c", base_type(), mk_lam("r#c", base_type(), x));
    return mk_apps(recO(), {y, step, b});
}
}  // namespace

TermP seq_term(const Seq& s) {
    TermP n = mk_var("n#s");
    TermP body = mk_num(s.tail);
    for (std::size_t i = s.prefix.size(); i-- > 0;) {
        TermP shifted = n;
        for (std::size_t k = 0; k < i; ++k) shifted = pred_of(shifted);
        body = cond(is_zero(shifted), mk_num(s.prefix[i]), body);
    }
    return mk_lam("n#s", base_type(), body);
}

// ---------------------------------------------------------------------------

MajObject MajObject::number(std::uint64_t n) {
    MajObject o;
    o.rep_ = Rep::Number;
    o.n_ = n;
    return o;
}

MajObject MajObject::fn1(Fn1 f) {
    MajObject o;
    o.rep_ = Rep::Native1;
    o.f1_ = std::move(f);
    return o;
}

MajObject MajObject::fn2(Fn2 f) {
    MajObject o;
    o.rep_ = Rep::Native2;
    o.f2_ = std::move(f);
    return o;
}

MajObject MajObject::term(TermP t) {
    MajObject o;
    o.rep_ = Rep::Term;
    o.t_ = std::move(t);
    return o;
}

std::uint64_t MajObject::value() const {
    if (rep_ == Rep::Number) return n_;
    if (rep_ == Rep::Term) return eval_nat(t_);
    throw MajError("object is not of type 0");
}

std::uint64_t MajObject::at(std::uint64_t n) const {
    if (rep_ == Rep::Native1) return f1_(n);
    if (rep_ == Rep::Term) return eval_nat(mk_app(t_, mk_num(n)));
    throw MajError("object is not of type 1");
}

std::uint64_t MajObject::at(const Seq& s) const {
    if (rep_ == Rep::Native2) return f2_(s);
    if (rep_ == Rep::Term) return eval_nat(mk_app(t_, seq_term(s)));
    throw MajError("object is not of type 2");
}

// ---------------------------------------------------------------------------

bool maj_base(std::uint64_t x, std::uint64_t y) { return x <= y; }

bool seq_majorized(const Seq& v, const Seq& u) {
    // Beyond the longer prefix both sequences are constant, so one extra index suffices.
    std::size_t horizon = std::max(v.prefix.size(), u.prefix.size()) + 1;
    for (std::size_t m = 0; m < horizon; ++m)
        for (std::size_t n = 0; n <= m; ++n)
            if (v.at(n) > u.at(m) || u.at(n) > u.at(m)) return false;
    return true;
}

namespace {
enum class Level { Zero, One, Two };

Level classify(const TypeP& t) {
    if (type_eq(t, base_type())) return Level::Zero;
    if (type_eq(t, type1())) return Level::One;
    if (type_eq(t, type2())) return Level::Two;
    throw MajError("maj_check supports the types O, (-> O O) and (-> (-> O O) O); got " + render_type(t));
}

MajVerdict fail1(std::uint64_t u, std::uint64_t v, std::uint64_t used, std::string why) {
    MajVerdict r;
    r.outcome = MajOutcome::FailsWithWitness;
    r.u = mk_num(u);
    r.v = mk_num(v);
    r.samples_used = used;
    r.detail = std::move(why);
    return r;
}
}  // namespace

MajVerdict maj_check(const MajObject& x, const MajObject& y, const TypeP& type, const SamplingPlan& plan) {
    Level lv = classify(type);
    MajVerdict out;
    try {
        if (lv == Level::Zero) {
            out.samples_used = 1;
            if (!maj_base(x.value(), y.value())) {
                out.outcome = MajOutcome::FailsWithWitness;
                out.detail = "x > y at type 0";
            }
            return out;
        }
        if (lv == Level::One) {
            if (!plan.bound) throw MajError("budget invalid: type 1 needs a bound");
            std::uint64_t used = 0;
            for (std::uint64_t u = 0; u <= *plan.bound; ++u) {
                std::uint64_t yu = y.at(u);
                for (std::uint64_t v = u + 1; v-- > 0;) {
                    ++used;
                    std::uint64_t xv = x.at(v);
                    if (xv > yu)
                        return fail1(u, v, used, "x(" + std::to_string(v) + ")=" + std::to_string(xv) + " > y(" +
                                                     std::to_string(u) + ")=" + std::to_string(yu));
                    std::uint64_t yv = y.at(v);
                    if (yv > yu)
                        return fail1(u, v, used, "y(" + std::to_string(v) + ")=" + std::to_string(yv) + " > y(" +
                                                     std::to_string(u) + ")=" + std::to_string(yu));
                }
            }
            out.samples_used = used;
            return out;
        }
        if (plan.family.empty()) throw MajError("budget invalid: type 2 needs a non-empty family");
        std::uint64_t used = 0;
        for (const Seq& u : plan.family) {
            if (!seq_majorized(u, u)) continue;
            std::uint64_t yu = y.at(u);
            for (const Seq& v : plan.family) {
                if (!seq_majorized(v, u)) continue;
                ++used;
                std::uint64_t xv = x.at(v);
                std::uint64_t yv = y.at(v);
                if (xv > yu || yv > yu) {
                    out.outcome = MajOutcome::FailsWithWitness;
                    out.u = seq_term(u);
                    out.v = seq_term(v);
                    out.u_seq = u;
                    out.v_seq = v;
                    out.samples_used = used;
                    out.detail = (xv > yu ? "x(v)=" + std::to_string(xv) : "y(v)=" + std::to_string(yv)) +
                                 " > y(u)=" + std::to_string(yu) + " with v=" + v.show() + ", u=" + u.show();
                    return out;
                }
            }
        }
        out.samples_used = used;
        return out;
    } catch (const KernelError& e) {
        out.outcome = MajOutcome::Inconclusive;
        out.detail = e.what();
        return out;
    }
}

MajVerdict is_monotone(const MajObject& x, const TypeP& type, const SamplingPlan& plan) {
    return maj_check(x, x, type, plan);
}

bool reproduces_failure(const MajVerdict& verdict, const MajObject& x, const MajObject& y, const TypeP& type) {
    if (verdict.outcome != MajOutcome::FailsWithWitness) return false;
    switch (classify(type)) {
        case Level::Zero: return !maj_base(x.value(), y.value());
        case Level::One: {
            std::uint64_t u = eval_nat(verdict.u), v = eval_nat(verdict.v);
            return v <= u && (x.at(v) > y.at(u) || y.at(v) > y.at(u));
        }
        case Level::Two: {
            const Seq& u = *verdict.u_seq;
            const Seq& v = *verdict.v_seq;
            return seq_majorized(v, u) && (x.at(v) > y.at(u) || y.at(v) > y.at(u));
        }
    }
    return false;
}

Fn1 monotone_closure(Fn1 g) {
    return [g = std::move(g)](std::uint64_t k) {
        std::uint64_t m = 0;
        for (std::uint64_t n = 0; n <= k; ++n) m = std::max(m, g(n));
        return m;
    };
}

TermP monotone_closure_term(TermP g) { return mk_app(prelude::closure(), std::move(g)); }

std::optional<std::uint64_t> mu(const Seq& f) {
    for (std::size_t n = 0; n < f.prefix.size(); ++n)
        if (f.prefix[n] == 0) return n;
    if (f.tail == 0) return f.prefix.size();
    return std::nullopt;
}

MuCounterexample refute_mu_majorant(std::uint64_t candidate_bound) {
    Seq f;
    f.prefix.assign(candidate_bound + 1, 1);
    f.prefix.push_back(0);
    f.tail = 1;
    return {f, *mu(f)};
}

std::vector<Seq> binary_family(std::size_t len, std::uint64_t tail) {
    std::vector<Seq> out;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << len); ++bits) {
        Seq s;
        s.tail = tail;
        for (std::size_t i = 0; i < len; ++i) s.prefix.push_back((bits >> (len - 1 - i)) & 1);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace nsa
