#include "nsa/ust.hpp"

#include <algorithm>

namespace nsa {

namespace {

struct NameSupply {
    std::set<std::string> used;
    std::string take(const std::string& base) {
        std::string n = base;
        for (int k = 1; used.count(n); ++k) n = base + std::to_string(k);
        used.insert(n);
        return n;
    }
};

FormulaP leq_star(const TermP& a, const TermP& b) { return f_atom(Rel::LeqStar, a, b); }

// (forall v (implies (<=* v v) (implies (<=* v bound) body))), or the existential form with `and`.
FormulaP mono_bounded(bool universal, const std::string& v, const TypeP& type, const TermP& bound, FormulaP body) {
    FormulaP inner = universal ? f_implies(leq_star(mk_var(v), bound), std::move(body))
                               : f_and(leq_star(mk_var(v), bound), std::move(body));
    return f_mono(universal, v, type, inner);
}

TermP apply_all(const std::string& fn, const std::vector<std::string>& args) {
    std::vector<TermP> xs;
    for (const auto& a : args) xs.push_back(mk_var(a));
    return mk_apps(mk_var(fn), xs);
}

std::vector<TypeP> types_of(const std::vector<QVar>& vs) {
    std::vector<TypeP> out;
    for (const auto& v : vs) out.push_back(v.type);
    return out;
}

struct Interpreter {
    NameSupply names;
    Context ctx;

    TypeP type_of(const TermP& t) { return type_check(t, ctx); }

    // The functionals f_j : B... -> C_j of clauses (iv) and (vi); pads an empty b-tuple.
    std::vector<QVar> choice_functions(std::vector<QVar>& b, const std::vector<QVar>& c) {
        std::vector<QVar> fs;
        if (c.empty()) return fs;
        if (b.empty()) b.push_back({names.take("b"), base_type(), true});
        for (const auto& cj : c) fs.push_back({names.take("f"), arrows(types_of(b), cj.type), true});
        return fs;
    }

    // lower[b_i := b'_i, c_j := f_j b'...]; the fresh b' names go to `primes`.
    FormulaP instantiate(FormulaP lower, const std::vector<QVar>& b, const std::vector<QVar>& c,
                         const std::vector<QVar>& fs, std::vector<std::string>& primes) {
        primes.clear();
        for (const auto& bi : b) primes.push_back(fresh_name(bi.name + "'"));
        for (std::size_t i = 0; i < b.size(); ++i) lower = substitute_formula(lower, b[i].name, mk_var(primes[i]));
        for (std::size_t j = 0; j < c.size(); ++j)
            lower = substitute_formula(lower, c[j].name, apply_all(fs[j].name, primes));
        return lower;
    }

    UstResult go(const FormulaP& f) {
        if (is_internal(f)) return {{}, {}, f};  // (i)
        switch (f->kind) {
            case FKind::St: {  // (ii)
                std::string c = names.take("c");
                return {{}, {{c, type_of(f->lhs), true}}, leq_star(f->lhs, mk_var(c))};
            }
            case FKind::Or:
            case FKind::And: {  // (iii), (viii)
                UstResult l = go(f->left);
                UstResult r = go(f->right);
                UstResult out;
                out.b = l.b;
                out.b.insert(out.b.end(), r.b.begin(), r.b.end());
                out.c = l.c;
                out.c.insert(out.c.end(), r.c.begin(), r.c.end());
                out.lower = f_binary(f->kind, l.lower, r.lower);
                return out;
            }
            case FKind::Not: {  // (iv)
                UstResult p = go(f->left);
                std::vector<QVar> fs = choice_functions(p.b, p.c);
                std::vector<std::string> primes;
                FormulaP body = f_not(instantiate(p.lower, p.b, p.c, fs, primes));
                for (std::size_t i = p.b.size(); i-- > 0;)
                    body = mono_bounded(false, primes[i], p.b[i].type, mk_var(p.b[i].name), body);
                return {fs, p.b, body};
            }
            case FKind::Implies: {  // (vi)
                UstResult p = go(f->left);
                UstResult q = go(f->right);
                std::vector<QVar> fs = choice_functions(p.b, p.c);
                std::vector<std::string> primes;
                FormulaP ante = instantiate(p.lower, p.b, p.c, fs, primes);
                for (std::size_t i = p.b.size(); i-- > 0;)
                    ante = mono_bounded(true, primes[i], p.b[i].type, mk_var(p.b[i].name), ante);
                UstResult out;
                out.b = fs;
                out.b.insert(out.b.end(), q.b.begin(), q.b.end());
                out.c = p.b;
                out.c.insert(out.c.end(), q.c.begin(), q.c.end());
                out.lower = f_implies(ante, q.lower);
                return out;
            }
            case FKind::Forall: {  // (v)
                std::string x;
                FormulaP body = open_binder(f, x);
                ctx[x] = f->type;
                UstResult p = go(body);
                p.lower = f_quant(FKind::Forall, x, f->type, p.lower);
                return p;
            }
            case FKind::Exists: {  // (vii)
                std::string x;
                FormulaP body = open_binder(f, x);
                ctx[x] = f->type;
                UstResult p = go(body);
                std::vector<QVar> fs = choice_functions(p.b, p.c);
                std::vector<QVar> Fs;
                for (const auto& bi : p.b) Fs.push_back({names.take("F"), arrows(types_of(fs), bi.type), true});
                std::vector<std::string> fprimes;
                for (const auto& fj : fs) fprimes.push_back(fresh_name(fj.name + "'"));
                std::vector<std::string> primes;
                FormulaP inner = instantiate(p.lower, p.b, p.c, fs, primes);
                for (std::size_t j = 0; j < fs.size(); ++j)
                    inner = substitute_formula(inner, fs[j].name, mk_var(fprimes[j]));
                for (std::size_t i = p.b.size(); i-- > 0;)
                    inner = mono_bounded(true, primes[i], p.b[i].type, apply_all(Fs[i].name, fprimes), inner);
                inner = f_quant(FKind::Exists, x, f->type, inner);
                for (std::size_t j = fs.size(); j-- > 0;)
                    inner = mono_bounded(false, fprimes[j], fs[j].type, mk_var(fs[j].name), inner);
                return {Fs, fs, inner};
            }
            default:
                throw FormulaError(FormulaError::Kind::IllTyped, "unexpected sugar after expansion", render_formula(f));
        }
    }
};

}  // namespace

UstResult interpret(const FormulaP& phi, const Context& ctx) {
    Interpreter in;
    in.ctx = infer_types(phi, ctx);
    for (const auto& [k, v] : ctx) in.ctx[k] = v;
    for (const auto& [k, v] : vocabulary()) in.ctx.emplace(k, v);
    for (const auto& [k, v] : in.ctx) in.names.used.insert(k);
    return in.go(expand_sugar(phi));
}

FormulaP render_ust(const UstResult& r) {
    NormalForm nf;
    nf.univ = r.b;
    nf.exist = r.c;
    for (auto& q : nf.univ) q.mono = true;
    for (auto& q : nf.exist) q.mono = true;
    nf.matrix = r.lower;
    return render_nf(nf);
}

// ---------------------------------------------------------------------------
// Monotone simplification
// ---------------------------------------------------------------------------

namespace {

bool is_var(const TermP& t, const std::string& n) { return t->kind == TermKind::FVar && t->name == n; }

bool is_leq_star(const FormulaP& f, const TermP& lhs) {
    return f->kind == FKind::Atom && f->rel == Rel::LeqStar && alpha_eq(f->lhs, lhs);
}

// Matches (Q v (conn (<=* v v) (conn (<=* v bound) body))) and opens it.
bool match_mono_bounded(const FormulaP& f, bool universal, std::string& v, TermP& bound, FormulaP& body) {
    FKind q = universal ? FKind::Forall : FKind::Exists;
    FKind conn = universal ? FKind::Implies : FKind::And;
    if (f->kind != q) return false;
    FormulaP b = open_binder(f, v);
    TermP var = mk_var(v);
    if (b->kind != conn || !is_leq_star(b->left, var) || !alpha_eq(b->left->rhs, var)) return false;
    b = b->right;
    if (b->kind != conn || !is_leq_star(b->left, var)) return false;
    bound = b->left->rhs;
    if (occurs_free(bound, v)) return false;
    body = b->right;
    return true;
}

const QVar* find_in(const std::vector<QVar>& vs, const std::string& name) {
    for (const auto& v : vs)
        if (v.name == name) return &v;
    return nullptr;
}

std::set<std::string> tuple_names(const UstResult& r) {
    std::set<std::string> s = free_vars(r.lower);
    for (const auto& v : r.b) s.insert(v.name);
    for (const auto& v : r.c) s.insert(v.name);
    return s;
}

std::string pick_name(const std::string& base, const std::set<std::string>& used) {
    std::string n = base;
    for (int k = 1; used.count(n); ++k) n = base + "_" + std::to_string(k);
    return n;
}

}  // namespace

bool collapse_bound_pair(UstResult& r) {
    std::string f_name, F_name;
    TypeP y_type;
    std::string e0 = pick_name("e0", tuple_names(r));
    LocalRule rule = [&](const FormulaP& s, int) -> std::optional<FormulaP> {
        std::string fp, bp, y;
        TermP fbound, Fbound;
        FormulaP body, inner;
        if (!match_mono_bounded(s, false, fp, fbound, body)) return std::nullopt;
        if (fbound->kind != TermKind::FVar || !find_in(r.c, fbound->name)) return std::nullopt;
        if (body->kind != FKind::Exists) return std::nullopt;
        FormulaP ybody = open_binder(body, y);
        if (!match_mono_bounded(ybody, true, bp, Fbound, inner)) return std::nullopt;
        std::vector<TermP> args;
        TermP head = spine(Fbound, args);
        if (head->kind != TermKind::FVar || !find_in(r.b, head->name) || args.size() != 1 || !is_var(args[0], fp))
            return std::nullopt;
        if (inner->kind != FKind::And) return std::nullopt;
        TermP witness = mk_app(mk_var(fp), mk_var(bp));
        if (!is_leq_star(inner->left, mk_var(y)) || !alpha_eq(inner->left->rhs, witness)) return std::nullopt;
        FormulaP psi = inner->right;
        if (occurs_free(psi, fp) || occurs_free(psi, bp)) return std::nullopt;
        f_name = fbound->name;
        F_name = head->name;
        y_type = body->type;
        return f_quant(FKind::Exists, y, body->type, f_and(leq_star(mk_var(y), mk_var(e0)), psi));
    };
    auto out = rewrite_first(r.lower, rule);
    if (!out || occurs_free(*out, f_name) || occurs_free(*out, F_name)) return false;
    r.lower = *out;
    r.b.erase(std::remove_if(r.b.begin(), r.b.end(), [&](const QVar& v) { return v.name == F_name; }), r.b.end());
    for (auto& v : r.c)
        if (v.name == f_name) v = {e0, y_type, true};
    return true;
}

bool instantiate_constant(UstResult& r) {
    std::string fa_name, b_name, x0;
    TypeP x_type;
    std::set<std::string> used = tuple_names(r);
    LocalRule rule = [&](const FormulaP& s, int) -> std::optional<FormulaP> {
        std::string bp;
        TermP bound;
        FormulaP body;
        if (!match_mono_bounded(s, true, bp, bound, body)) return std::nullopt;
        if (bound->kind != TermKind::FVar) return std::nullopt;
        const QVar* b = find_in(r.c, bound->name);
        if (!b || !type_eq(b->type, base_type())) return std::nullopt;
        if (body->kind != FKind::Atom || body->rel != Rel::LeqStar) return std::nullopt;
        const TermP& rhs = body->rhs;
        if (rhs->kind != TermKind::App || !is_var(rhs->arg, bp) || rhs->fn->kind != TermKind::FVar) return std::nullopt;
        const QVar* fa = find_in(r.b, rhs->fn->name);
        if (!fa || fa->type->kind != FinType::Kind::Arrow) return std::nullopt;
        if (occurs_free(body->lhs, bp)) return std::nullopt;
        fa_name = fa->name;
        b_name = b->name;
        x_type = fa->type->cod;
        std::string base = body->lhs->kind == TermKind::FVar ? strip_hint(body->lhs->name) : "x";
        x0 = pick_name(base + "0", used);
        return leq_star(body->lhs, mk_var(x0));
    };
    auto out = rewrite_first(r.lower, rule);
    if (!out || occurs_free(*out, fa_name) || occurs_free(*out, b_name)) return false;
    r.lower = *out;
    for (auto& v : r.b)
        if (v.name == fa_name) v = {x0, x_type, true};
    r.c.erase(std::remove_if(r.c.begin(), r.c.end(), [&](const QVar& v) { return v.name == b_name; }), r.c.end());
    return true;
}

SimplifyOutcome simplify_monotone(const UstResult& r) {
    SimplifyOutcome out{r, SimplifyStatus::Unchanged};
    bool any = false;
    while (collapse_bound_pair(out.result) || instantiate_constant(out.result)) any = true;
    if (any)
        out.status = SimplifyStatus::Simplified;
    else if (!r.b.empty())
        out.status = SimplifyStatus::ShapeMismatch;
    return out;
}

// ---------------------------------------------------------------------------

FormulaP extraction_contract(const NormalForm& nf, std::vector<QVar>* terms) {
    std::set<std::string> used = free_vars(nf.matrix);
    for (const auto& v : nf.univ) used.insert(v.name);
    for (const auto& v : nf.exist) used.insert(v.name);
    std::vector<QVar> bs, ts;
    for (const auto& x : nf.univ) {
        std::string b = pick_name("b", used);
        used.insert(b);
        bs.push_back({b, x.type, true});
    }
    for (std::size_t j = 0; j < nf.exist.size(); ++j) {
        std::string t = pick_name(nf.exist.size() == 1 ? "t" : "t" + std::to_string(j + 1), used);
        used.insert(t);
        ts.push_back({t, arrows(types_of(bs), nf.exist[j].type), true});
    }
    std::vector<std::string> bnames;
    for (const auto& b : bs) bnames.push_back(b.name);
    FormulaP acc = nf.matrix;
    for (std::size_t j = nf.exist.size(); j-- > 0;)
        acc = f_bounded(false, nf.exist[j].name, nf.exist[j].type, apply_all(ts[j].name, bnames), acc);
    for (std::size_t i = nf.univ.size(); i-- > 0;)
        acc = f_bounded(true, nf.univ[i].name, nf.univ[i].type, mk_var(bs[i].name), acc);
    for (std::size_t i = bs.size(); i-- > 0;) {
        if (type_eq(bs[i].type, base_type()))
            acc = f_quant(FKind::Forall, bs[i].name, bs[i].type, acc);
        else
            acc = f_mono(true, bs[i].name, bs[i].type, acc);
    }
    if (terms) *terms = ts;
    return acc;
}

}  // namespace nsa
