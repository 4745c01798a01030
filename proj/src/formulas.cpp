#include "nsa/formulas.hpp"

#include <algorithm>
#include <atomic>
#include <map>

namespace nsa {

FormulaError::FormulaError(Kind k, const std::string& msg, std::string at)
    : std::runtime_error(msg + (at.empty() ? "" : ": " + at)), kind(k), node(std::move(at)) {}

bool is_quantifier(FKind k) {
    switch (k) {
        case FKind::Forall:
        case FKind::Exists:
        case FKind::ForallSt:
        case FKind::ExistsSt:
        case FKind::ForallMono:
        case FKind::ExistsMono: return true;
        default: return false;
    }
}

bool is_binary(FKind k) { return k == FKind::And || k == FKind::Or || k == FKind::Implies; }

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace {
std::shared_ptr<Formula> node(FKind k) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}
}  // namespace

FormulaP f_atom(Rel rel, TermP lhs, TermP rhs) {
    auto f = node(FKind::Atom);
    f->rel = rel;
    f->lhs = std::move(lhs);
    f->rhs = std::move(rhs);
    return f;
}

FormulaP f_st(TermP t) {
    auto f = node(FKind::St);
    f->lhs = std::move(t);
    return f;
}

FormulaP f_not(FormulaP a) {
    auto f = node(FKind::Not);
    f->left = std::move(a);
    return f;
}

FormulaP f_binary(FKind k, FormulaP a, FormulaP b) {
    auto f = node(k);
    f->left = std::move(a);
    f->right = std::move(b);
    return f;
}

FormulaP f_and(FormulaP a, FormulaP b) { return f_binary(FKind::And, std::move(a), std::move(b)); }
FormulaP f_or(FormulaP a, FormulaP b) { return f_binary(FKind::Or, std::move(a), std::move(b)); }
FormulaP f_implies(FormulaP a, FormulaP b) { return f_binary(FKind::Implies, std::move(a), std::move(b)); }

std::string strip_hint(const std::string& name) {
    auto pos = name.find('#');
    return pos == std::string::npos ? name : name.substr(0, pos);
}

FormulaP f_quant(FKind k, const std::string& var, TypeP type, FormulaP body) {
    auto f = node(k);
    f->name = strip_hint(var);
    f->type = std::move(type);
    f->left = close_formula(body, var, 0);
    return f;
}

FormulaP f_approx(const std::string& hint, TermP pred) {
    auto f = node(FKind::Approx);
    f->name = strip_hint(hint);
    f->lhs = std::move(pred);
    return f;
}

std::string fresh_name(const std::string& base) {
    static std::atomic<std::uint64_t> counter{0};
    return strip_hint(base) + "#" + std::to_string(counter++);
}

FormulaP f_bound_atom(const TermP& x, TypeP type, const TermP& bound) {
    return f_atom(type_eq(type, base_type()) ? Rel::Leq0 : Rel::LeqStar, x, bound);
}

FormulaP f_mono(bool universal, const std::string& var, TypeP type, FormulaP body) {
    TermP v = mk_var(var);
    FormulaP guard = f_atom(Rel::LeqStar, v, v);
    if (universal) return f_quant(FKind::Forall, var, type, f_implies(guard, std::move(body)));
    return f_quant(FKind::Exists, var, type, f_and(guard, std::move(body)));
}

FormulaP f_bounded(bool universal, const std::string& var, TypeP type, TermP bound, FormulaP body) {
    FormulaP guard = f_bound_atom(mk_var(var), type, bound);
    if (universal) return f_quant(FKind::Forall, var, type, f_implies(guard, std::move(body)));
    return f_quant(FKind::Exists, var, type, f_and(guard, std::move(body)));
}

// ---------------------------------------------------------------------------
// Locally nameless plumbing
// ---------------------------------------------------------------------------

namespace {
template <class TermFn>
FormulaP map_terms(const FormulaP& f, std::uint32_t depth, const TermFn& fn) {
    switch (f->kind) {
        case FKind::Atom: return f_atom(f->rel, fn(f->lhs, depth), fn(f->rhs, depth));
        case FKind::St: return f_st(fn(f->lhs, depth));
        case FKind::Approx: return f_approx(f->name, fn(f->lhs, depth));
        case FKind::Not: return f_not(map_terms(f->left, depth, fn));
        case FKind::And:
        case FKind::Or:
        case FKind::Implies:
            return f_binary(f->kind, map_terms(f->left, depth, fn), map_terms(f->right, depth, fn));
        default: {
            auto q = node(f->kind);
            q->name = f->name;
            q->type = f->type;
            q->left = map_terms(f->left, depth + 1, fn);
            return q;
        }
    }
}
}  // namespace

FormulaP open_formula(const FormulaP& body, const TermP& u, std::uint32_t depth) {
    return map_terms(body, depth, [&](const TermP& t, std::uint32_t d) { return open_term(t, u, d); });
}

FormulaP close_formula(const FormulaP& f, const std::string& var, std::uint32_t depth) {
    return map_terms(f, depth, [&](const TermP& t, std::uint32_t d) { return close_term(t, var, d); });
}

FormulaP open_binder(const FormulaP& q, std::string& var) {
    var = fresh_name(q->name.empty() ? "x" : q->name);
    return open_formula(q->left, mk_var(var), 0);
}

void collect_free_vars(const FormulaP& f, std::set<std::string>& out) {
    switch (f->kind) {
        case FKind::Atom:
            collect_free_vars(f->lhs, out);
            collect_free_vars(f->rhs, out);
            return;
        case FKind::St:
        case FKind::Approx: collect_free_vars(f->lhs, out); return;
        case FKind::Not: collect_free_vars(f->left, out); return;
        case FKind::And:
        case FKind::Or:
        case FKind::Implies:
            collect_free_vars(f->left, out);
            collect_free_vars(f->right, out);
            return;
        default: collect_free_vars(f->left, out); return;
    }
}

std::set<std::string> free_vars(const FormulaP& f) {
    std::set<std::string> out;
    collect_free_vars(f, out);
    return out;
}

bool occurs_free(const FormulaP& f, const std::string& var) { return free_vars(f).count(var) > 0; }

bool alpha_eq(const FormulaP& a, const FormulaP& b) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case FKind::Atom:
            return a->rel == b->rel && alpha_eq(a->lhs, b->lhs) && alpha_eq(a->rhs, b->rhs);
        case FKind::St:
        case FKind::Approx: return alpha_eq(a->lhs, b->lhs);
        case FKind::Not: return alpha_eq(a->left, b->left);
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: return alpha_eq(a->left, b->left) && alpha_eq(a->right, b->right);
        default: return type_eq(a->type, b->type) && alpha_eq(a->left, b->left);
    }
}

namespace {
std::size_t term_size(const TermP& t) {
    switch (t->kind) {
        case TermKind::Abs: return 1 + term_size(t->fn);
        case TermKind::App: return term_size(t->fn) + term_size(t->arg);
        default: return 1;
    }
}
}  // namespace

std::size_t formula_size(const FormulaP& f) {
    switch (f->kind) {
        case FKind::Atom: return 1 + term_size(f->lhs) + term_size(f->rhs);
        case FKind::St:
        case FKind::Approx: return 1 + term_size(f->lhs);
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: return 1 + formula_size(f->left) + formula_size(f->right);
        default: return 1 + formula_size(f->left);
    }
}

std::optional<FormulaP> rewrite_first(const FormulaP& f, const LocalRule& rule, int polarity) {
    if (auto r = rule(f, polarity)) return r;
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St:
        case FKind::Approx: return std::nullopt;
        case FKind::Not:
            if (auto a = rewrite_first(f->left, rule, -polarity)) return f_not(*a);
            return std::nullopt;
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: {
            int lp = f->kind == FKind::Implies ? -polarity : polarity;
            if (auto a = rewrite_first(f->left, rule, lp)) return f_binary(f->kind, *a, f->right);
            if (auto b = rewrite_first(f->right, rule, polarity)) return f_binary(f->kind, f->left, *b);
            return std::nullopt;
        }
        default: {
            std::string x;
            FormulaP body = open_binder(f, x);
            if (auto b = rewrite_first(body, rule, polarity)) return f_quant(f->kind, x, f->type, *b);
            return std::nullopt;
        }
    }
}

FormulaP substitute_formula(const FormulaP& f, const std::string& var, const TermP& t) {
    if (!locally_closed(t)) throw KernelError(KernelError::Kind::NotClosed, render_term(t));
    return open_formula(close_formula(f, var, 0), t, 0);
}

FormulaP substitute_formula(const FormulaP& f, const std::string& var, const TermP& t, const Context& ctx) {
    Context types = infer_types(f, ctx);
    auto it = types.find(var);
    if (it != types.end()) {
        Context tctx = types;
        for (const auto& [k, v] : ctx) tctx[k] = v;
        TypeP tt = type_check(t, tctx);
        if (!type_eq(tt, it->second))
            throw KernelError(KernelError::Kind::TypeMismatch, render_term(t), render_type(it->second),
                              render_type(tt));
    }
    return substitute_formula(f, var, t);
}

// ---------------------------------------------------------------------------
// Text form
// ---------------------------------------------------------------------------

std::string render_rel(Rel r) {
    switch (r) {
        case Rel::Eq0: return "=0";
        case Rel::Leq0: return "<=0";
        case Rel::LeqStar: return "<=*";
    }
    return "?";
}

std::string render_quant(FKind k) {
    switch (k) {
        case FKind::Forall: return "forall";
        case FKind::Exists: return "exists";
        case FKind::ForallSt: return "forall-st";
        case FKind::ExistsSt: return "exists-st";
        case FKind::ForallMono: return "forall-mono";
        case FKind::ExistsMono: return "exists-mono";
        default: return "?";
    }
}

namespace {
const std::map<std::string, FKind>& quant_words() {
    static const std::map<std::string, FKind> m = {
        {"forall", FKind::Forall},         {"exists", FKind::Exists},
        {"forall-st", FKind::ForallSt},    {"exists-st", FKind::ExistsSt},
        {"forall-mono", FKind::ForallMono}, {"exists-mono", FKind::ExistsMono}};
    return m;
}

void want(const SExpr& e, std::size_t n, const char* shape) {
    if (e.items.size() != n) parse_fail(e, std::string("expected ") + shape);
}
}  // namespace

FormulaP parse_formula(const SExpr& e, std::vector<std::string>& bound) {
    if (e.atom || e.items.empty() || !e.items[0].atom) parse_fail(e, "expected a formula");
    const std::string& h = e.items[0].text;
    if (h == "=0" || h == "<=0" || h == "<=*") {
        want(e, 3, "(rel term term)");
        Rel r = h == "=0" ? Rel::Eq0 : h == "<=0" ? Rel::Leq0 : Rel::LeqStar;
        return f_atom(r, parse_term(e.items[1], bound), parse_term(e.items[2], bound));
    }
    if (h == "st") {
        want(e, 2, "(st term)");
        return f_st(parse_term(e.items[1], bound));
    }
    if (h == "not") {
        want(e, 2, "(not formula)");
        return f_not(parse_formula(e.items[1], bound));
    }
    if (h == "and" || h == "or" || h == "implies") {
        want(e, 3, "(connective formula formula)");
        FKind k = h == "and" ? FKind::And : h == "or" ? FKind::Or : FKind::Implies;
        return f_binary(k, parse_formula(e.items[1], bound), parse_formula(e.items[2], bound));
    }
    if (h == "approx") {
        want(e, 3, "(approx ident term)");
        if (!e.items[1].atom || !is_identifier(e.items[1].text)) parse_fail(e.items[1], "expected an identifier");
        return f_approx(e.items[1].text, parse_term(e.items[2], bound));
    }
    auto q = quant_words().find(h);
    if (q != quant_words().end()) {
        want(e, 5, "(quant ident : type formula)");
        if (!e.items[1].atom || !is_identifier(e.items[1].text)) parse_fail(e.items[1], "expected an identifier");
        if (!e.items[2].atom || e.items[2].text != ":") parse_fail(e.items[2], "expected ':'");
        auto f = node(q->second);
        f->name = e.items[1].text;
        f->type = parse_type(e.items[3]);
        bound.push_back(f->name);
        f->left = parse_formula(e.items[4], bound);
        bound.pop_back();
        return f;
    }
    parse_fail(e, "unknown formula head '" + h + "'");
}

FormulaP parse_formula(const std::string& text) {
    auto es = read_sexprs(text);
    if (es.size() != 1) throw KernelError(KernelError::Kind::Parse, "expected exactly one formula");
    std::vector<std::string> bound;
    return parse_formula(es[0], bound);
}

std::string render_formula(const FormulaP& f, std::vector<std::string>& scope, const std::set<std::string>& avoid) {
    switch (f->kind) {
        case FKind::Atom:
            return "(" + render_rel(f->rel) + " " + render_term(f->lhs, scope, avoid) + " " +
                   render_term(f->rhs, scope, avoid) + ")";
        case FKind::St: return "(st " + render_term(f->lhs, scope, avoid) + ")";
        case FKind::Approx:
            return "(approx " + choose_name(f->name, scope, avoid) + " " + render_term(f->lhs, scope, avoid) + ")";
        case FKind::Not: return "(not " + render_formula(f->left, scope, avoid) + ")";
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: {
            std::string k = f->kind == FKind::And ? "and" : f->kind == FKind::Or ? "or" : "implies";
            return "(" + k + " " + render_formula(f->left, scope, avoid) + " " +
                   render_formula(f->right, scope, avoid) + ")";
        }
        default: {
            std::string n = choose_name(f->name, scope, avoid);
            scope.push_back(n);
            std::string body = render_formula(f->left, scope, avoid);
            scope.pop_back();
            return "(" + render_quant(f->kind) + " " + n + " : " + render_type(f->type) + " " + body + ")";
        }
    }
}

std::string render_formula(const FormulaP& f) {
    std::vector<std::string> scope;
    return render_formula(f, scope, free_vars(f));
}

// ---------------------------------------------------------------------------
// Type inference
// ---------------------------------------------------------------------------

const Context& vocabulary() {
    static const Context v = [] {
        TypeP O = base_type();
        TypeP R = type1();
        TypeP F = arrow(R, R);
        Context c;
        c["near"] = arrows({R, R, O}, O);       // |a - b| <= 1/k
        c["fine"] = arrows({R, R, O}, O);       // partitions with mesh below 1/k
        c["below"] = arrows({R, R, O}, O);      // a <= b + 1/k
        c["punct"] = arrows({R, O}, O);         // 0 < |e| <= 1/k
        c["inner"] = arrows({R, O}, O);         // a in [1/l, 1 - 1/l]
        c["gap"] = arrows({R, R, O, O}, O);     // 2^-l < [b + 1/k - a](l)
        c["rs"] = arrows({R, F}, R);            // Riemann sum of f over a partition
        c["dq"] = arrows({F, R, R}, R);         // difference quotient of the integral of f
        c["r"] = arrow(R, R);                   // real with the given binary expansion
        c["xs"] = arrow(R, R);                  // real of a sequence, reflected into [0,1]
        c["unit"] = arrow(R, O);                // membership in [0,1]
        c["qr"] = arrow(O, R);                  // rational with the given code
        c["ibar"] = arrows({R, O}, O);          // code of the initial segment of length n
        c["mc"] = arrow(R, R);                  // running maximum of a sequence
        return c;
    }();
    return v;
}

namespace {
struct Unifier {
    struct Node {
        enum class K { Meta, Base, Arrow } k;
        int a = -1, b = -1;
    };
    std::vector<Node> nodes;
    std::vector<int> parent;

    int make(Node n) {
        nodes.push_back(n);
        parent.push_back(static_cast<int>(parent.size()));
        return static_cast<int>(nodes.size()) - 1;
    }
    int meta() { return make({Node::K::Meta}); }
    int base() { return make({Node::K::Base}); }
    int arr(int a, int b) { return make({Node::K::Arrow, a, b}); }
    int from(const TypeP& t) {
        if (t->kind == FinType::Kind::Base) return base();
        return arr(from(t->dom), from(t->cod));
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool occurs(int m, int t) {
        t = find(t);
        if (t == m) return true;
        if (nodes[t].k == Node::K::Arrow) return occurs(m, nodes[t].a) || occurs(m, nodes[t].b);
        return false;
    }
    bool unify(int x, int y) {
        x = find(x);
        y = find(y);
        if (x == y) return true;
        if (nodes[x].k == Node::K::Meta) {
            if (occurs(x, y)) return false;
            parent[x] = y;
            return true;
        }
        if (nodes[y].k == Node::K::Meta) return unify(y, x);
        if (nodes[x].k != nodes[y].k) return false;
        if (nodes[x].k == Node::K::Base) return true;
        return unify(nodes[x].a, nodes[y].a) && unify(nodes[x].b, nodes[y].b);
    }
    TypeP resolve(int x) {
        x = find(x);
        if (nodes[x].k == Node::K::Arrow) return arrow(resolve(nodes[x].a), resolve(nodes[x].b));
        return base_type();
    }
    std::string show(int x) {
        x = find(x);
        if (nodes[x].k == Node::K::Meta) return "?";
        if (nodes[x].k == Node::K::Base) return "O";
        return "(-> " + show(nodes[x].a) + " " + show(nodes[x].b) + ")";
    }
};

struct Inference {
    Unifier u;
    std::map<std::string, int> env;
    const Context& given;
    explicit Inference(const Context& g) : given(g) {}

    int var(const std::string& name) {
        auto it = env.find(name);
        if (it != env.end()) return it->second;
        int id;
        if (auto g = given.find(name); g != given.end())
            id = u.from(g->second);
        else if (auto v = vocabulary().find(name); v != vocabulary().end())
            id = u.from(v->second);
        else
            id = u.meta();
        env[name] = id;
        return id;
    }

    [[noreturn]] void mismatch(const TermP& t, int want, int got) {
        throw FormulaError(FormulaError::Kind::IllTyped,
                           "expected " + u.show(want) + ", found " + u.show(got), render_term(t));
    }
    void expect(const TermP& t, int want, int got) {
        if (!u.unify(want, got)) mismatch(t, want, got);
    }

    int term(const TermP& t, std::vector<int>& stack) {
        switch (t->kind) {
            case TermKind::BVar:
                if (t->index >= stack.size())
                    throw FormulaError(FormulaError::Kind::IllTyped, "dangling bound variable");
                return stack[stack.size() - 1 - t->index];
            case TermKind::FVar: return var(t->name);
            case TermKind::Zero:
            case TermKind::Num: return u.base();
            case TermKind::Succ: return u.arr(u.base(), u.base());
            case TermKind::Max: return u.arr(u.base(), u.arr(u.base(), u.base()));
            case TermKind::Rec: {
                int s = u.from(t->type);
                int step = u.arr(u.base(), u.arr(s, s));
                return u.arr(s, u.arr(step, u.arr(u.base(), s)));
            }
            case TermKind::Abs: {
                int d = u.from(t->type);
                stack.push_back(d);
                int body = term(t->fn, stack);
                stack.pop_back();
                return u.arr(d, body);
            }
            case TermKind::App: {
                int fn = term(t->fn, stack);
                int arg = term(t->arg, stack);
                int res = u.meta();
                expect(t, u.arr(arg, res), fn);
                return res;
            }
        }
        return u.meta();
    }

    void formula(const FormulaP& f, std::vector<int>& stack) {
        switch (f->kind) {
            case FKind::Atom: {
                int l = term(f->lhs, stack);
                int r = term(f->rhs, stack);
                if (f->rel == Rel::LeqStar) {
                    expect(f->rhs, l, r);
                } else {
                    expect(f->lhs, u.base(), l);
                    expect(f->rhs, u.base(), r);
                }
                return;
            }
            case FKind::St: term(f->lhs, stack); return;
            case FKind::Approx: expect(f->lhs, u.arr(u.base(), u.base()), term(f->lhs, stack)); return;
            case FKind::Not: formula(f->left, stack); return;
            case FKind::And:
            case FKind::Or:
            case FKind::Implies:
                formula(f->left, stack);
                formula(f->right, stack);
                return;
            default:
                stack.push_back(u.from(f->type));
                formula(f->left, stack);
                stack.pop_back();
                return;
        }
    }
};
}  // namespace

Context infer_types(const FormulaP& f, const Context& given) {
    Inference inf(given);
    std::vector<int> stack;
    inf.formula(f, stack);
    Context out;
    for (const auto& [name, id] : inf.env) out[name] = inf.u.resolve(id);
    return out;
}

bool well_typed(const FormulaP& f, const Context& given) {
    try {
        infer_types(f, given);
        return true;
    } catch (const FormulaError&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// Internal formulas and relativization
// ---------------------------------------------------------------------------

namespace {
// First subformula (pre-order) that mentions st, if any.
FormulaP first_external(const FormulaP& f) {
    switch (f->kind) {
        case FKind::Atom: return nullptr;
        case FKind::Forall:
        case FKind::Exists: return first_external(f->left);
        case FKind::Not: return first_external(f->left);
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: {
            if (auto l = first_external(f->left)) return l;
            return first_external(f->right);
        }
        default: return f;
    }
}

bool is_bvar0(const TermP& t) { return t->kind == TermKind::BVar && t->index == 0; }

bool mentions_index(const TermP& t, std::uint32_t k) {
    switch (t->kind) {
        case TermKind::BVar: return t->index == k;
        case TermKind::Abs: return mentions_index(t->fn, k + 1);
        case TermKind::App: return mentions_index(t->fn, k) || mentions_index(t->arg, k);
        default: return false;
    }
}

bool has_unbounded_quantifier(const FormulaP& f);

// (forall n : O (implies (<=0 n t) A)) or (exists n : O (and (<=0 n t) A)), with t not mentioning n.
bool is_bounded_number_quantifier(const FormulaP& f) {
    if (f->kind != FKind::Forall && f->kind != FKind::Exists) return false;
    if (!type_eq(f->type, base_type())) return false;
    const FormulaP& b = f->left;
    FKind conn = f->kind == FKind::Forall ? FKind::Implies : FKind::And;
    if (b->kind != conn || b->left->kind != FKind::Atom || b->left->rel != Rel::Leq0) return false;
    return is_bvar0(b->left->lhs) && !mentions_index(b->left->rhs, 0);
}

bool has_unbounded_quantifier(const FormulaP& f) {
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St:
        case FKind::Approx: return false;
        case FKind::Not: return has_unbounded_quantifier(f->left);
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: return has_unbounded_quantifier(f->left) || has_unbounded_quantifier(f->right);
        default:
            if (is_bounded_number_quantifier(f)) return has_unbounded_quantifier(f->left->right);
            return true;
    }
}

FormulaP relativize_rec(const FormulaP& f) {
    switch (f->kind) {
        case FKind::Atom: return f;
        case FKind::Not: return f_not(relativize_rec(f->left));
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: return f_binary(f->kind, relativize_rec(f->left), relativize_rec(f->right));
        default: {
            auto q = node(f->kind);
            q->name = f->name;
            q->type = f->type;
            if (is_bounded_number_quantifier(f)) {
                q->left = f_binary(f->left->kind, f->left->left, relativize_rec(f->left->right));
            } else {
                q->kind = f->kind == FKind::Forall ? FKind::ForallSt : FKind::ExistsSt;
                q->left = relativize_rec(f->left);
            }
            return q;
        }
    }
}
}  // namespace

bool is_internal(const FormulaP& f) { return first_external(f) == nullptr; }

FormulaP relativize(const FormulaP& f) {
    if (auto bad = first_external(f))
        throw FormulaError(FormulaError::Kind::NotInternal, "relativize needs an internal formula",
                           render_formula(bad));
    return relativize_rec(f);
}

// ---------------------------------------------------------------------------
// Sugar
// ---------------------------------------------------------------------------

FormulaP expand_sugar(const FormulaP& f) {
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St: return f;
        case FKind::Approx: {
            std::string n = fresh_name(f->name.empty() ? "N" : f->name);
            TermP v = mk_var(n);
            FormulaP atom = f_atom(Rel::Eq0, mk_app(f->lhs, v), mk_num(0));
            return f_quant(FKind::Forall, n, base_type(), f_implies(f_st(v), atom));
        }
        case FKind::Not: return f_not(expand_sugar(f->left));
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: return f_binary(f->kind, expand_sugar(f->left), expand_sugar(f->right));
        default: {
            std::string x;
            FormulaP body = expand_sugar(open_binder(f, x));
            TermP v = mk_var(x);
            FormulaP guard = f_atom(Rel::LeqStar, v, v);
            switch (f->kind) {
                case FKind::ForallSt: return f_quant(FKind::Forall, x, f->type, f_implies(f_st(v), body));
                case FKind::ExistsSt: return f_quant(FKind::Exists, x, f->type, f_and(f_st(v), body));
                case FKind::ForallMono:
                    return f_quant(FKind::Forall, x, f->type, f_implies(f_st(v), f_implies(guard, body)));
                case FKind::ExistsMono:
                    return f_quant(FKind::Exists, x, f->type, f_and(f_st(v), f_and(guard, body)));
                default: return f_quant(f->kind, x, f->type, body);
            }
        }
    }
}

namespace {
bool is_self_bound(const FormulaP& g) {
    return g->kind == FKind::Atom && g->rel == Rel::LeqStar && is_bvar0(g->lhs) && is_bvar0(g->rhs);
}

bool is_st_of_bvar0(const FormulaP& g) { return g->kind == FKind::St && is_bvar0(g->lhs); }
}  // namespace

FormulaP resugar(const FormulaP& f) {
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St:
        case FKind::Approx: return f;
        case FKind::Not: return f_not(resugar(f->left));
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: return f_binary(f->kind, resugar(f->left), resugar(f->right));
        default: break;
    }
    std::string x;
    FormulaP body = open_binder(f, x);
    TermP v = mk_var(x);
    auto is_st_x = [&](const FormulaP& g) { return g->kind == FKind::St && alpha_eq(g->lhs, v); };
    auto is_self_x = [&](const FormulaP& g) {
        return g->kind == FKind::Atom && g->rel == Rel::LeqStar && alpha_eq(g->lhs, v) && alpha_eq(g->rhs, v);
    };
    FKind kind = f->kind;
    FKind conn = f->kind == FKind::Forall ? FKind::Implies : FKind::And;
    if ((f->kind == FKind::Forall || f->kind == FKind::Exists) && body->kind == conn && is_st_x(body->left)) {
        body = body->right;
        if (body->kind == conn && is_self_x(body->left)) {
            kind = f->kind == FKind::Forall ? FKind::ForallMono : FKind::ExistsMono;
            body = body->right;
        } else {
            kind = f->kind == FKind::Forall ? FKind::ForallSt : FKind::ExistsSt;
        }
        // (forall-st N : O (=0 (t N) 0)) is the approx macro when t does not mention N.
        if (kind == FKind::ForallSt && type_eq(f->type, base_type()) && body->kind == FKind::Atom &&
            body->rel == Rel::Eq0 && as_numeral(body->rhs) == std::optional<std::uint64_t>(0) &&
            body->lhs->kind == TermKind::App && alpha_eq(body->lhs->arg, v) && !occurs_free(body->lhs->fn, x))
            return f_approx(f->name, body->lhs->fn);
    }
    return f_quant(kind, x, f->type, resugar(body));
}

// ---------------------------------------------------------------------------
// Normal forms
// ---------------------------------------------------------------------------

FormulaP render_nf(const NormalForm& nf) {
    FormulaP acc = nf.matrix;
    for (auto it = nf.exist.rbegin(); it != nf.exist.rend(); ++it)
        acc = f_quant(it->mono ? FKind::ExistsMono : FKind::ExistsSt, it->name, it->type, acc);
    for (auto it = nf.univ.rbegin(); it != nf.univ.rend(); ++it)
        acc = f_quant(it->mono ? FKind::ForallMono : FKind::ForallSt, it->name, it->type, acc);
    return acc;
}

namespace {
// Recognizes a (sugared or expanded) st-quantifier of the given polarity and returns its body.
bool peel_st(const FormulaP& f, bool universal, bool& mono, FormulaP& body) {
    FKind st = universal ? FKind::ForallSt : FKind::ExistsSt;
    FKind mq = universal ? FKind::ForallMono : FKind::ExistsMono;
    FKind plain = universal ? FKind::Forall : FKind::Exists;
    FKind conn = universal ? FKind::Implies : FKind::And;
    if (f->kind == mq) {
        mono = true;
        body = f->left;
        return true;
    }
    if (f->kind == st) {
        body = f->left;
    } else if (f->kind == plain && f->left->kind == conn && is_st_of_bvar0(f->left->left)) {
        body = f->left->right;
    } else {
        return false;
    }
    mono = false;
    if (body->kind == conn && is_self_bound(body->left)) {
        mono = true;
        body = body->right;
    }
    return true;
}
}  // namespace

std::optional<NormalForm> try_recognize_normal_form(const FormulaP& f, std::string* reason) {
    NormalForm nf;
    std::set<std::string> avoid = free_vars(f);
    std::vector<std::string> taken;
    FormulaP cur = f;
    for (bool universal : {true, false}) {
        auto& out = universal ? nf.univ : nf.exist;
        bool mono = false;
        FormulaP body;
        while (peel_st(cur, universal, mono, body)) {
            std::string name = choose_name(cur->name, taken, avoid);
            taken.push_back(name);
            out.push_back({name, cur->type, mono});
            cur = open_formula(body, mk_var(name), 0);
        }
    }
    if (auto bad = first_external(cur)) {
        if (reason) *reason = "st occurs in the matrix at " + render_formula(bad);
        return std::nullopt;
    }
    nf.matrix = cur;
    return nf;
}

NormalForm recognize_normal_form(const FormulaP& f) {
    std::string why;
    auto nf = try_recognize_normal_form(f, &why);
    if (!nf) throw FormulaError(FormulaError::Kind::NotNormalForm, "not a normal form", why);
    return *nf;
}

}  // namespace nsa
