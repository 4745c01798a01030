#include "nsa/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <regex>

namespace nsa {

PipelineError::PipelineError(Kind k, const std::string& msg, FormulaP f)
    : std::runtime_error(msg), kind(k), at(std::move(f)) {}

namespace {

struct Binder {
    FKind kind;
    std::string var;
    TypeP type;
};

bool is_base(const TypeP& t) { return t->kind == FinType::Kind::Base; }
bool universal_st(FKind k) { return k == FKind::ForallSt || k == FKind::ForallMono; }
bool existential_st(FKind k) { return k == FKind::ExistsSt || k == FKind::ExistsMono; }
bool st_quant(FKind k) { return universal_st(k) || existential_st(k); }

FKind dual(FKind k) {
    switch (k) {
        case FKind::ForallSt: return FKind::ExistsSt;
        case FKind::ExistsSt: return FKind::ForallSt;
        case FKind::ForallMono: return FKind::ExistsMono;
        case FKind::ExistsMono: return FKind::ForallMono;
        case FKind::Forall: return FKind::Exists;
        case FKind::Exists: return FKind::Forall;
        default: return k;
    }
}

// Opens binders while `keep` accepts them; returns the remaining body.
FormulaP peel(FormulaP f, const std::function<bool(const FormulaP&)>& keep, std::vector<Binder>& out) {
    while (is_quantifier(f->kind) && keep(f)) {
        Binder b{f->kind, {}, f->type};
        FormulaP body = open_binder(f, b.var);
        out.push_back(b);
        f = body;
    }
    return f;
}

FormulaP wrap(const std::vector<Binder>& qs, FormulaP m) {
    for (auto it = qs.rbegin(); it != qs.rend(); ++it) m = f_quant(it->kind, it->var, it->type, m);
    return m;
}

FormulaP with_hint(const FormulaP& q, const std::string& hint) {
    auto c = std::make_shared<Formula>(*q);
    c->name = hint;
    return c;
}

bool is_var(const TermP& t, const std::string& name) { return t->kind == TermKind::FVar && t->name == name; }

// (exists n : O (and (<=* n bound) phi)) with n opened; fills n, bound and phi.
bool bounded_exists(const FormulaP& f, std::string& n, TermP& bound, FormulaP& phi) {
    if (f->kind != FKind::Exists || !is_base(f->type)) return false;
    std::string v;
    FormulaP body = open_binder(f, v);
    if (body->kind != FKind::And) return false;
    const FormulaP& g = body->left;
    if (g->kind != FKind::Atom || g->rel != Rel::LeqStar || !is_var(g->lhs, v)) return false;
    if (occurs_free(g->rhs, v)) return false;
    n = v;
    bound = g->rhs;
    phi = body->right;
    return true;
}

// ---------------------------------------------------------------------------
// Occurrence analysis for Base bounds
// ---------------------------------------------------------------------------

struct Occurrence {
    FormulaP atom;
    int polarity;
    std::set<std::string> binders;  // opened between the bound and the atom
};

void occurrences(const FormulaP& f, const std::string& n, int pol, std::set<std::string>& binders,
                 std::vector<Occurrence>& out) {
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St:
        case FKind::Approx:
            if (occurs_free(f, n)) out.push_back({f, pol, binders});
            return;
        case FKind::Not: occurrences(f->left, n, -pol, binders, out); return;
        case FKind::And:
        case FKind::Or: occurrences(f->left, n, pol, binders, out); occurrences(f->right, n, pol, binders, out); return;
        case FKind::Implies: occurrences(f->left, n, -pol, binders, out); occurrences(f->right, n, pol, binders, out); return;
        default: {
            std::string x;
            FormulaP body = open_binder(f, x);
            binders.insert(x);
            occurrences(body, n, pol, binders, out);
            binders.erase(x);
        }
    }
}

// Reaches an atom mentioning n without passing through a negation or an antecedent.
bool occurs_positively_reachable(const FormulaP& f, const std::string& n) {
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St:
        case FKind::Approx: return occurs_free(f, n);
        case FKind::Not: return false;
        case FKind::Implies: return occurs_positively_reachable(f->right, n);
        case FKind::And:
        case FKind::Or: return occurs_positively_reachable(f->left, n) || occurs_positively_reachable(f->right, n);
        default: {
            std::string x;
            return occurs_positively_reachable(open_binder(f, x), n);
        }
    }
}

// (=0 (P a1 .. ak) 0) with P a vocabulary predicate.
bool predicate_atom(const FormulaP& a, std::string& pred, std::vector<TermP>& args) {
    if (a->kind != FKind::Atom || a->rel != Rel::Eq0) return false;
    if (as_numeral(a->rhs) != std::optional<std::uint64_t>(0)) return false;
    TermP head = spine(a->lhs, args);
    if (head->kind != TermKind::FVar || !vocabulary().count(head->name)) return false;
    pred = head->name;
    return true;
}

bool only_in_slot(const std::vector<TermP>& args, std::size_t slot, const std::string& n) {
    if (slot == 0 || slot > args.size()) return false;
    for (std::size_t i = 0; i < args.size(); ++i)
        if (i != slot - 1 && occurs_free(args[i], n)) return false;
    return occurs_free(args[slot - 1], n);
}

bool all_reciprocal(const std::vector<Occurrence>& occ, const std::string& n) {
    if (occ.empty()) return false;
    for (const auto& o : occ) {
        std::string p;
        std::vector<TermP> args;
        if (o.polarity >= 0 || !predicate_atom(o.atom, p, args)) return false;
        auto s = reciprocal_slot(p);
        if (!s || !only_in_slot(args, *s, n) || !is_var(args[*s - 1], n)) return false;
    }
    return true;
}

bool all_maximizable(const std::vector<Occurrence>& occ, const std::string& n, const std::set<std::string>& outer) {
    if (occ.empty()) return false;
    for (const auto& o : occ) {
        std::string p;
        std::vector<TermP> args;
        if (o.polarity <= 0 || !predicate_atom(o.atom, p, args)) return false;
        auto s = maximizable_slot(p);
        if (!s || !only_in_slot(args, *s, n)) return false;
        for (const auto& v : free_vars(args[*s - 1]))
            if (v != n && (outer.count(v) || o.binders.count(v))) return false;
    }
    return true;
}

enum class BoundAction { Instantiate, Drop, Keep };

BoundAction decide(const FormulaP& phi, const std::string& n, const std::set<std::string>& outer, int pol,
                   std::string& why) {
    std::vector<Occurrence> occ;
    std::set<std::string> binders;
    occurrences(phi, n, 1, binders, occ);
    std::string h = strip_hint(n);
    if (occ.empty()) {
        why = h + " unused";
        return BoundAction::Instantiate;
    }
    if (all_reciprocal(occ, n)) {
        why = h + " only at reciprocal slots of negative atoms";
        return BoundAction::Instantiate;
    }
    if (all_maximizable(occ, n, outer)) {
        why = h + " only at maximizable slots with a uniform argmax";
        return BoundAction::Instantiate;
    }
    if (pol > 0 && !occurs_positively_reachable(phi, n)) {
        why = h + " only in antecedents; bound dropped";
        return BoundAction::Drop;
    }
    why = h + " bound kept as <=0";
    return BoundAction::Keep;
}

// ---------------------------------------------------------------------------
// Local rules
// ---------------------------------------------------------------------------

std::string clean(std::string s) {
    static const std::regex internal_suffix("#[0-9]+");
    return std::regex_replace(s, internal_suffix, "");
}

struct Notes {
    std::vector<std::string> evidence;
    std::vector<std::string> violations;
    void add(std::string s) {
        s = clean(std::move(s));
        if (std::find(evidence.begin(), evidence.end(), s) == evidence.end()) evidence.push_back(s);
    }
    std::string joined() const {
        std::string out;
        for (const auto& e : evidence) out += (out.empty() ? "" : "; ") + e;
        return out;
    }
};

std::optional<FormulaP> rule_resolve(const FormulaP& f, int, Notes& notes) {
    if (f->kind != FKind::Approx) return std::nullopt;
    std::string n = fresh_name(f->name.empty() ? "N" : f->name);
    notes.add("approx expanded at 1/" + strip_hint(n));
    return f_quant(FKind::ForallSt, n, base_type(), f_atom(Rel::Eq0, mk_app(f->lhs, mk_var(n)), mk_num(0)));
}

std::optional<FormulaP> rule_pull(const FormulaP& f, int, Notes& notes) {
    if (f->kind == FKind::Forall || f->kind == FKind::Exists) {
        std::string x;
        FormulaP body = open_binder(f, x);
        bool same = f->kind == FKind::Forall ? universal_st(body->kind) : existential_st(body->kind);
        if (!same) return std::nullopt;
        std::string y;
        FormulaP inner = open_binder(body, y);
        notes.add(strip_hint(y) + " moved out of internal " + strip_hint(x));
        return f_quant(body->kind, y, body->type, f_quant(f->kind, x, f->type, inner));
    }
    if (f->kind == FKind::Not && st_quant(f->left->kind)) {
        std::string y;
        FormulaP inner = open_binder(f->left, y);
        notes.add(strip_hint(y) + " moved out of a negation");
        return f_quant(dual(f->left->kind), y, f->left->type, f_not(inner));
    }
    if (!is_binary(f->kind)) return std::nullopt;
    const FormulaP& a = f->left;
    const FormulaP& b = f->right;
    if (st_quant(b->kind) && is_internal(a)) {
        std::string y;
        FormulaP inner = open_binder(b, y);
        notes.add(strip_hint(y) + " moved over an internal left operand");
        return f_quant(b->kind, y, b->type, f_binary(f->kind, a, inner));
    }
    if (st_quant(a->kind) && is_internal(b)) {
        std::string y;
        FormulaP inner = open_binder(a, y);
        FKind k = f->kind == FKind::Implies ? dual(a->kind) : a->kind;
        notes.add(strip_hint(y) + " moved over an internal right operand");
        return f_quant(k, y, a->type, f_binary(f->kind, inner, b));
    }
    return std::nullopt;
}

std::optional<FormulaP> rule_realize(const FormulaP& f, int, Notes& notes) {
    if (f->kind != FKind::Forall) return std::nullopt;
    std::vector<Binder> xs, ys;
    FormulaP rest = peel(f, [](const FormulaP& g) { return g->kind == FKind::Forall; }, xs);
    FormulaP phi = peel(rest, [](const FormulaP& g) { return g->kind == FKind::ExistsSt; }, ys);
    if (ys.empty()) return std::nullopt;
    if (!is_internal(phi)) {
        notes.violations.push_back(render_formula(f));
        return std::nullopt;
    }
    std::vector<Binder> zs;
    bool shared = ys.size() > 1 && std::all_of(ys.begin(), ys.end(), [](const Binder& b) { return is_base(b.type); });
    if (shared)
        zs.push_back({FKind::ExistsSt, fresh_name("l"), base_type()});
    else
        for (const auto& y : ys) zs.push_back({FKind::ExistsSt, fresh_name(strip_hint(y.var) + "'"), y.type});
    FormulaP m = phi;
    for (std::size_t i = ys.size(); i-- > 0;) {
        const Binder& z = shared ? zs[0] : zs[i];
        m = f_quant(FKind::Exists, ys[i].var, ys[i].type, f_and(f_atom(Rel::LeqStar, mk_var(ys[i].var), mk_var(z.var)), m));
    }
    notes.add("matrix internal");
    return wrap(zs, wrap(xs, m));
}

FormulaP collapse_walk(const FormulaP& f, const std::string& z, int pol, std::set<std::string>& outer,
                       std::string& rename, bool& changed, Notes& notes) {
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St:
        case FKind::Approx: return f;
        case FKind::Not: return f_not(collapse_walk(f->left, z, -pol, outer, rename, changed, notes));
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: {
            int lp = f->kind == FKind::Implies ? -pol : pol;
            FormulaP l = collapse_walk(f->left, z, lp, outer, rename, changed, notes);
            FormulaP r = collapse_walk(f->right, z, pol, outer, rename, changed, notes);
            return f_binary(f->kind, l, r);
        }
        default: break;
    }
    std::string n;
    TermP bound;
    FormulaP phi;
    if (bounded_exists(f, n, bound, phi) && is_var(bound, z)) {
        std::string why;
        BoundAction act = decide(phi, n, outer, pol, why);
        notes.add(why);
        changed = true;
        if (act == BoundAction::Instantiate) {
            if (rename.empty() && occurs_free(phi, n)) rename = strip_hint(n);
            return collapse_walk(substitute_formula(phi, n, mk_var(z)), z, pol, outer, rename, changed, notes);
        }
        outer.insert(n);
        FormulaP body = collapse_walk(phi, z, pol, outer, rename, changed, notes);
        outer.erase(n);
        if (act == BoundAction::Drop) return f_quant(FKind::Exists, n, base_type(), body);
        return f_quant(FKind::Exists, n, base_type(), f_and(f_atom(Rel::Leq0, mk_var(n), mk_var(z)), body));
    }
    std::string x;
    FormulaP body = open_binder(f, x);
    outer.insert(x);
    FormulaP b = collapse_walk(body, z, pol, outer, rename, changed, notes);
    outer.erase(x);
    return f_quant(f->kind, x, f->type, b);
}

std::optional<FormulaP> rule_collapse(const FormulaP& f, int pol, Notes& notes) {
    if (f->kind != FKind::ExistsSt || !is_base(f->type)) return std::nullopt;
    std::string z;
    FormulaP body = open_binder(f, z);
    std::set<std::string> outer;
    std::string rename;
    bool changed = false;
    FormulaP nb = collapse_walk(body, z, pol, outer, rename, changed, notes);
    if (!changed) return std::nullopt;
    FormulaP q = f_quant(FKind::ExistsSt, z, base_type(), nb);
    return rename.empty() ? q : with_hint(q, rename);
}

// (forall-st x..)(exists-st y..) phi with Base or monotone binders and phi internal.
bool choice_block(const FormulaP& f, std::vector<Binder>& xs, std::vector<Binder>& ys, FormulaP& phi) {
    auto uni = [](const FormulaP& g) {
        return g->kind == FKind::ForallMono || (g->kind == FKind::ForallSt && is_base(g->type));
    };
    auto exi = [](const FormulaP& g) {
        return g->kind == FKind::ExistsMono || (g->kind == FKind::ExistsSt && is_base(g->type));
    };
    if (!uni(f)) return false;
    FormulaP rest = peel(f, uni, xs);
    phi = peel(rest, exi, ys);
    return !ys.empty() && is_internal(phi);
}

FormulaP choice_body(const std::vector<Binder>& xs, const std::vector<Binder>& ys, const FormulaP& phi,
                     const std::vector<std::string>& gs) {
    std::vector<TermP> args;
    for (const auto& x : xs) args.push_back(mk_var(x.var));
    FormulaP m = phi;
    for (std::size_t i = ys.size(); i-- > 0;)
        m = f_quant(FKind::Exists, ys[i].var, ys[i].type,
                    f_and(f_atom(Rel::LeqStar, mk_var(ys[i].var), mk_apps(mk_var(gs[i]), args)), m));
    return wrap(xs, m);
}

std::vector<TypeP> binder_types(const std::vector<Binder>& bs) {
    std::vector<TypeP> ts;
    for (const auto& b : bs) ts.push_back(b.type);
    return ts;
}

std::optional<FormulaP> rule_mac(const FormulaP& f, int pol, Notes& notes) {
    if (pol >= 0) return std::nullopt;
    std::vector<Binder> xs, ys;
    FormulaP phi;
    if (!choice_block(f, xs, ys, phi)) return std::nullopt;
    std::vector<Binder> gs;
    for (std::size_t i = 0; i < ys.size(); ++i)
        gs.push_back({FKind::ExistsMono, fresh_name(ys.size() == 1 ? "g" : "g" + std::to_string(i + 1)),
                      arrows(binder_types(xs), ys[i].type)});
    std::vector<std::string> names;
    for (const auto& g : gs) names.push_back(g.var);
    notes.add("negative position; matrix internal");
    return wrap(gs, choice_body(xs, ys, phi, names));
}

// mac in negative positions, skipping blocks that are the direct body of an internal
// quantifier: pull has to move their st prefix out first, or g would depend on it.
std::optional<FormulaP> mac_step(const FormulaP& f, int pol, bool under_internal, Notes& notes) {
    if (!under_internal)
        if (auto r = rule_mac(f, pol, notes)) return r;
    switch (f->kind) {
        case FKind::Atom:
        case FKind::St:
        case FKind::Approx: return std::nullopt;
        case FKind::Not:
            if (auto a = mac_step(f->left, -pol, false, notes)) return f_not(*a);
            return std::nullopt;
        case FKind::And:
        case FKind::Or:
        case FKind::Implies: {
            int lp = f->kind == FKind::Implies ? -pol : pol;
            if (auto a = mac_step(f->left, lp, false, notes)) return f_binary(f->kind, *a, f->right);
            if (auto b = mac_step(f->right, pol, false, notes)) return f_binary(f->kind, f->left, *b);
            return std::nullopt;
        }
        default: {
            std::string x;
            FormulaP body = open_binder(f, x);
            bool internal = f->kind == FKind::Forall || f->kind == FKind::Exists;
            if (auto b = mac_step(body, pol, internal, notes)) return f_quant(f->kind, x, f->type, *b);
            return std::nullopt;
        }
    }
}

std::optional<FormulaP> mac_root(const FormulaP& f, Notes& notes) {
    std::vector<Binder> xs, ys;
    FormulaP phi;
    if (!choice_block(f, xs, ys, phi)) return std::nullopt;
    std::set<std::string> avoid = free_vars(f);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        std::string g = choose_name(ys.size() == 1 ? "g" : "g" + std::to_string(i + 1), {}, avoid);
        avoid.insert(g);
        names.push_back(g);
    }
    std::string list;
    for (const auto& g : names) list += (list.empty() ? "" : ", ") + g;
    notes.add("root block; " + list + " free, standard and monotone");
    return choice_body(xs, ys, phi, names);
}

std::optional<FormulaP> rule_instantiate(const FormulaP& f, int, Notes& notes) {
    std::string n;
    TermP bound;
    FormulaP phi;
    if (!bounded_exists(f, n, bound, phi) || bound->kind != TermKind::App) return std::nullopt;
    std::vector<Occurrence> occ;
    std::set<std::string> binders;
    occurrences(phi, n, 1, binders, occ);
    if (!all_reciprocal(occ, n)) return std::nullopt;
    notes.add(strip_hint(n) + " := " + render_term(bound) + " (reciprocal slots only)");
    return substitute_formula(phi, n, bound);
}

std::optional<FormulaP> rule_combine(const FormulaP& f, int, Notes& notes) {
    if (f->kind != FKind::Implies) return std::nullopt;
    std::vector<Binder> le, lu, ru, re;
    FormulaP lm = peel(f->left, [](const FormulaP& g) { return existential_st(g->kind); }, le);
    lm = peel(lm, [](const FormulaP& g) { return universal_st(g->kind); }, lu);
    FormulaP rm = peel(f->right, [](const FormulaP& g) { return universal_st(g->kind); }, ru);
    rm = peel(rm, [](const FormulaP& g) { return existential_st(g->kind); }, re);
    if (le.empty() && lu.empty() && ru.empty() && re.empty()) return std::nullopt;
    if (!is_internal(lm) || !is_internal(rm)) return std::nullopt;
    std::vector<Binder> prefix;
    for (auto b : le) prefix.push_back({dual(b.kind), b.var, b.type});
    for (const auto& b : ru) prefix.push_back(b);
    for (const auto& b : re) prefix.push_back(b);
    for (auto b : lu) prefix.push_back({dual(b.kind), b.var, b.type});
    notes.add("both sides prenex over internal matrices");
    return wrap(prefix, f_implies(lm, rm));
}

std::optional<FormulaP> drop_mono_root(const FormulaP& f, Notes& notes) {
    std::vector<Binder> prefix;
    FormulaP m = peel(f, [](const FormulaP& g) { return st_quant(g->kind); }, prefix);
    bool changed = false;
    for (auto& b : prefix) {
        if (b.kind == FKind::ForallMono && type_level(b.type) == 1) {
            b.kind = FKind::ForallSt;
            changed = true;
            notes.add("monotonicity of " + strip_hint(b.var) + " dropped; not verified mechanically");
        }
    }
    if (!changed) return std::nullopt;
    return wrap(prefix, m);
}

bool binary_guard(const FormulaP& g, const std::string& a) {
    static const TermP one = parse_term("(lam n : O 1)");
    return g->kind == FKind::Atom && g->rel == Rel::LeqStar && is_var(g->lhs, a) && alpha_eq(g->rhs, one);
}

bool unit_guard(const FormulaP& g, const std::string& a) {
    std::string p;
    std::vector<TermP> args;
    return predicate_atom(g, p, args) && p == "unit" && args.size() == 1 && is_var(args[0], a);
}

std::optional<FormulaP> rule_drop_st(const FormulaP& f, int, Notes& notes) {
    if (f->kind != FKind::ForallSt) return std::nullopt;
    std::string a;
    FormulaP body = open_binder(f, a);
    if (body->kind != FKind::Implies) return std::nullopt;
    bool bin = binary_guard(body->left, a);
    if (!bin && !unit_guard(body->left, a)) return std::nullopt;
    RefEvidence ev = check_ref(body->right, a);
    if (!ev.ok) {
        notes.violations.push_back(ev.offending);
        return std::nullopt;
    }
    std::string heads;
    for (const auto& h : ev.heads) heads += (heads.empty() ? "" : ", ") + h;
    notes.add(std::string(bin ? "binary" : "unit") + " guard on " + strip_hint(a) + "; REF whitelist ok (" + heads + ")");
    return f_quant(FKind::Forall, a, f->type, body);
}

std::optional<FormulaP> rule_converge(const FormulaP& f, int, Notes& notes) {
    if (f->kind != FKind::Forall || !is_base(f->type)) return std::nullopt;
    std::string m;
    FormulaP body = open_binder(f, m);
    if (body->kind != FKind::Implies || body->left->kind != FKind::Not) return std::nullopt;
    const FormulaP& s = body->left->left;
    if (s->kind != FKind::St || !is_var(s->lhs, m) || !is_internal(body->right)) return std::nullopt;
    std::string n = fresh_name("N");
    notes.add("least threshold below every nonstandard " + strip_hint(m) + " is standard");
    return f_quant(FKind::ExistsSt, n, base_type(),
                   f_quant(FKind::Forall, m, base_type(), f_implies(f_atom(Rel::Leq0, mk_var(n), mk_var(m)), body->right)));
}

using Step = std::function<std::optional<FormulaP>(const FormulaP&, Notes&)>;

Step local(std::optional<FormulaP> (*fn)(const FormulaP&, int, Notes&)) {
    return [fn](const FormulaP& f, Notes& notes) {
        return rewrite_first(f, [&](const FormulaP& g, int pol) { return fn(g, pol, notes); });
    };
}

const std::map<std::string, Step>& rules() {
    static const std::map<std::string, Step> r = {
        {"resolve", local(rule_resolve)},
        {"realize", local(rule_realize)},
        {"collapse", local(rule_collapse)},
        {"pull", local(rule_pull)},
        {"drop-mono", [](const FormulaP& f, Notes& n) { return drop_mono_root(f, n); }},
        {"mac", [](const FormulaP& f, Notes& n) { return mac_step(f, 1, false, n); }},
        {"mac-root", [](const FormulaP& f, Notes& n) { return mac_root(f, n); }},
        {"instantiate", local(rule_instantiate)},
        {"combine", local(rule_combine)},
        {"drop-st", local(rule_drop_st)},
        {"converge", local(rule_converge)},
    };
    return r;
}

constexpr std::size_t kLocalBudget = 1000;

std::optional<FormulaP> fixpoint(const std::string& name, const FormulaP& f, Notes& notes) {
    auto it = rules().find(name);
    if (it == rules().end()) throw PipelineError(PipelineError::Kind::Stuck, "unknown rule " + name, f);
    FormulaP cur = f;
    bool fired = false;
    for (std::size_t i = 0;; ++i) {
        if (i == kLocalBudget)
            throw PipelineError(PipelineError::Kind::Stuck, "rule " + name + " does not reach a fixpoint", cur);
        auto next = it->second(cur, notes);
        if (!next) break;
        cur = *next;
        fired = true;
    }
    if (!fired) return std::nullopt;
    return cur;
}

FormulaP apply_or_same(const std::string& name, const FormulaP& f) {
    Notes notes;
    auto r = fixpoint(name, f, notes);
    return r ? *r : f;
}

}  // namespace

std::optional<std::size_t> reciprocal_slot(const std::string& pred) {
    static const std::map<std::string, std::size_t> s = {{"near", 3}, {"fine", 3}, {"punct", 2}};
    auto it = s.find(pred);
    if (it == s.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> maximizable_slot(const std::string& pred) {
    static const std::map<std::string, std::size_t> s = {{"below", 2}, {"gap", 2}};
    auto it = s.find(pred);
    if (it == s.end()) return std::nullopt;
    return it->second;
}

const std::vector<std::string>& rule_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : rules()) v.push_back(k);
        return v;
    }();
    return names;
}

Strategy default_strategy() {
    return {"resolve", "realize", "collapse", "pull", "drop-mono", "mac", "instantiate", "combine", "drop-st", "converge"};
}

std::vector<Strategy> registered_strategies() {
    return {
        default_strategy(),
        {"resolve", "combine", "pull", "realize", "collapse", "mac", "instantiate", "drop-mono", "drop-st", "converge"},
        {"converge", "drop-st", "resolve", "pull", "combine", "mac", "instantiate", "realize", "collapse", "drop-mono"},
    };
}

std::optional<FormulaP> apply_rule(const std::string& rule, const FormulaP& f, std::string* evidence) {
    Notes notes;
    auto r = fixpoint(rule, f, notes);
    if (evidence) *evidence = notes.joined();
    return r;
}

TemplateResult run_template(const FormulaP& a, const Strategy& strategy, std::size_t step_budget) {
    TemplateResult out;
    FormulaP cur = a;
    for (bool progress = true; progress;) {
        progress = false;
        for (const auto& rule : strategy) {
            Notes notes;
            auto next = fixpoint(rule, cur, notes);
            if (!next) continue;
            if (out.trace.steps.size() == step_budget)
                throw PipelineError(PipelineError::Kind::Stuck, "step budget exhausted", cur);
            out.trace.steps.push_back({rule, cur, *next, notes.joined()});
            cur = *next;
            progress = true;
        }
    }
    std::string reason;
    auto nf = try_recognize_normal_form(cur, &reason);
    if (!nf) throw PipelineError(PipelineError::Kind::Stuck, "no rule applies: " + reason, cur);
    out.nf = *nf;
    out.final = cur;
    return out;
}

FormulaP resolve_infinitesimal(const FormulaP& a) { return apply_or_same("resolve", a); }
FormulaP pull_standard_quantifiers(const FormulaP& a) { return apply_or_same("pull", a); }
FormulaP type0_star_collapse(const FormulaP& a) { return apply_or_same("collapse", a); }
FormulaP instantiate_base_bound(const FormulaP& a) { return apply_or_same("instantiate", a); }
FormulaP drop_monotonicity(const FormulaP& a) { return apply_or_same("drop-mono", a); }

FormulaP apply_realization(const FormulaP& a) {
    Notes notes;
    if (auto r = fixpoint("realize", a, notes)) return *r;
    if (!notes.violations.empty())
        throw PipelineError(PipelineError::Kind::ProvisoViolated, "matrix not internal: " + notes.violations.front(), a);
    return a;
}

FormulaP apply_monotone_choice(const FormulaP& a) {
    Notes notes;
    FormulaP cur = a;
    if (auto r = mac_root(cur, notes)) cur = *r;
    if (auto r = fixpoint("mac", cur, notes)) cur = *r;
    return cur;
}

FormulaP combine_normal_forms(const FormulaP& impl) {
    if (impl->kind != FKind::Implies)
        throw PipelineError(PipelineError::Kind::NotNormalForm, "not an implication", impl);
    Notes notes;
    auto r = rule_combine(impl, 1, notes);
    if (!r) throw PipelineError(PipelineError::Kind::NotNormalForm, "prefixes cannot be merged", impl);
    return *r;
}

RefEvidence check_ref(const FormulaP& phi, const std::string& var) {
    RefEvidence ev;
    Context types;
    try {
        types = infer_types(phi);
    } catch (const FormulaError&) {
    }
    const TypeP F = arrow(type1(), type1());
    auto extensional = [&](const TermP& head) {
        if (head->kind != TermKind::FVar || head->name == var) return false;
        if (vocabulary().count(head->name)) return true;
        auto it = types.find(head->name);
        return it != types.end() && type_eq(it->second, F);
    };
    std::set<std::string> heads;
    std::function<bool(const TermP&)> term_ok = [&](const TermP& t) -> bool {
        if (!occurs_free(t, var)) return true;
        if (t->kind == TermKind::FVar) return false;  // bare occurrence outside a whitelisted head
        if (t->kind == TermKind::Abs) return term_ok(t->fn);
        std::vector<TermP> args;
        TermP head = spine(t, args);
        if (is_var(head, var)) return false;  // reads the representation of the argument
        bool ext = extensional(head);
        if (!ext && !term_ok(head)) return false;
        for (const auto& x : args) {
            if (is_var(x, var)) {
                if (!ext) return false;
                heads.insert(head->name);
            } else if (!term_ok(x)) {
                return false;
            }
            if (ext && occurs_free(x, var)) heads.insert(head->name);
        }
        return true;
    };
    std::function<bool(const FormulaP&)> walk = [&](const FormulaP& f) -> bool {
        switch (f->kind) {
            case FKind::Atom:
            case FKind::St:
            case FKind::Approx: {
                bool ok = term_ok(f->lhs) && (f->kind != FKind::Atom || term_ok(f->rhs));
                if (!ok && ev.offending.empty()) ev.offending = clean(render_formula(f));
                return ok;
            }
            case FKind::Not: return walk(f->left);
            case FKind::And:
            case FKind::Or:
            case FKind::Implies: return walk(f->left) && walk(f->right);
            default: {
                std::string x;
                return walk(open_binder(f, x));
            }
        }
    };
    ev.ok = walk(phi);
    ev.heads.assign(heads.begin(), heads.end());
    return ev;
}

FormulaP drop_st_on_sequence_quantifier(const FormulaP& a, RefEvidence* evidence) {
    Notes notes;
    auto r = fixpoint("drop-st", a, notes);
    if (!r && !notes.violations.empty())
        throw PipelineError(PipelineError::Kind::ProvisoViolated, "non-REF atom " + notes.violations.front(), a);
    if (evidence) {
        evidence->ok = true;
        evidence->guard.clear();
        evidence->heads.clear();
        if (r) {
            // Re-derive the structured evidence for the first dropped quantifier.
            std::optional<FormulaP> probe = rewrite_first(a, [&](const FormulaP& g, int) -> std::optional<FormulaP> {
                if (g->kind != FKind::ForallSt) return std::nullopt;
                std::string v;
                FormulaP body = open_binder(g, v);
                if (body->kind != FKind::Implies) return std::nullopt;
                bool bin = binary_guard(body->left, v);
                if (!bin && !unit_guard(body->left, v)) return std::nullopt;
                *evidence = check_ref(body->right, v);
                evidence->guard = bin ? "binary" : "unit";
                return g;
            });
            (void)probe;
        }
    }
    return r ? *r : a;
}

}  // namespace nsa
