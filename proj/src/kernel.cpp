#include "nsa/kernel.hpp"

#include <algorithm>
#include <functional>

namespace nsa {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

TypeP base_type() {
    static const TypeP b = std::make_shared<FinType>();
    return b;
}

TypeP arrow(TypeP dom, TypeP cod) {
    auto t = std::make_shared<FinType>();
    t->kind = FinType::Kind::Arrow;
    t->dom = std::move(dom);
    t->cod = std::move(cod);
    return t;
}

TypeP arrows(const std::vector<TypeP>& doms, TypeP cod) {
    TypeP t = std::move(cod);
    for (auto it = doms.rbegin(); it != doms.rend(); ++it) t = arrow(*it, t);
    return t;
}

bool type_eq(const TypeP& a, const TypeP& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    if (a->kind == FinType::Kind::Base) return true;
    return type_eq(a->dom, b->dom) && type_eq(a->cod, b->cod);
}

std::string render_type(const TypeP& t) {
    if (!t) return "?";
    if (t->kind == FinType::Kind::Base) return "O";
    return "(-> " + render_type(t->dom) + " " + render_type(t->cod) + ")";
}

int type_level(const TypeP& t) {
    if (t->kind == FinType::Kind::Base) return 0;
    return std::max(type_level(t->dom) + 1, type_level(t->cod));
}

TypeP type1() {
    static const TypeP t = arrow(base_type(), base_type());
    return t;
}

TypeP type2() {
    static const TypeP t = arrow(type1(), base_type());
    return t;
}

// ---------------------------------------------------------------------------
// Term construction
// ---------------------------------------------------------------------------

namespace {
std::shared_ptr<Term> node(TermKind k) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    return t;
}

std::string hint_of(const std::string& var) {
    auto pos = var.find('#');
    return pos == std::string::npos ? var : var.substr(0, pos);
}
}  // namespace

TermP mk_bvar(std::uint32_t i) {
    auto t = node(TermKind::BVar);
    t->index = i;
    return t;
}

TermP mk_var(const std::string& name) {
    auto t = node(TermKind::FVar);
    t->name = name;
    return t;
}

TermP mk_zero() {
    static const TermP z = node(TermKind::Zero);
    return z;
}

TermP mk_succ() {
    static const TermP s = node(TermKind::Succ);
    return s;
}

TermP mk_max() {
    static const TermP m = node(TermKind::Max);
    return m;
}

TermP mk_rec(TypeP sigma) {
    auto t = node(TermKind::Rec);
    t->type = std::move(sigma);
    return t;
}

TermP mk_num(std::uint64_t n) {
    auto t = node(TermKind::Num);
    t->num = n;
    return t;
}

TermP mk_app(TermP f, TermP x) {
    auto t = node(TermKind::App);
    t->fn = std::move(f);
    t->arg = std::move(x);
    return t;
}

TermP mk_apps(TermP f, const std::vector<TermP>& xs) {
    for (const auto& x : xs) f = mk_app(f, x);
    return f;
}

TermP mk_lam(const std::string& var, TypeP type, TermP body) {
    auto t = node(TermKind::Abs);
    t->name = hint_of(var);
    t->type = std::move(type);
    t->fn = close_term(body, var, 0);
    return t;
}

// ---------------------------------------------------------------------------
// Locally nameless plumbing
// ---------------------------------------------------------------------------

TermP open_term(const TermP& body, const TermP& u, std::uint32_t depth) {
    switch (body->kind) {
        case TermKind::BVar:
            return body->index == depth ? u : body;
        case TermKind::Abs: {
            auto b = open_term(body->fn, u, depth + 1);
            if (b == body->fn) return body;
            auto t = std::make_shared<Term>(*body);
            t->fn = b;
            return t;
        }
        case TermKind::App: {
            auto f = open_term(body->fn, u, depth);
            auto x = open_term(body->arg, u, depth);
            if (f == body->fn && x == body->arg) return body;
            return mk_app(f, x);
        }
        default:
            return body;
    }
}

TermP close_term(const TermP& t, const std::string& var, std::uint32_t depth) {
    switch (t->kind) {
        case TermKind::FVar:
            return t->name == var ? mk_bvar(depth) : t;
        case TermKind::Abs: {
            auto b = close_term(t->fn, var, depth + 1);
            if (b == t->fn) return t;
            auto n = std::make_shared<Term>(*t);
            n->fn = b;
            return n;
        }
        case TermKind::App: {
            auto f = close_term(t->fn, var, depth);
            auto x = close_term(t->arg, var, depth);
            if (f == t->fn && x == t->arg) return t;
            return mk_app(f, x);
        }
        default:
            return t;
    }
}

void collect_free_vars(const TermP& t, std::set<std::string>& out) {
    switch (t->kind) {
        case TermKind::FVar: out.insert(t->name); break;
        case TermKind::Abs: collect_free_vars(t->fn, out); break;
        case TermKind::App:
            collect_free_vars(t->fn, out);
            collect_free_vars(t->arg, out);
            break;
        default: break;
    }
}

std::set<std::string> free_vars(const TermP& t) {
    std::set<std::string> s;
    collect_free_vars(t, s);
    return s;
}

bool occurs_free(const TermP& t, const std::string& var) {
    switch (t->kind) {
        case TermKind::FVar: return t->name == var;
        case TermKind::Abs: return occurs_free(t->fn, var);
        case TermKind::App: return occurs_free(t->fn, var) || occurs_free(t->arg, var);
        default: return false;
    }
}

bool locally_closed(const TermP& t, std::uint32_t depth) {
    switch (t->kind) {
        case TermKind::BVar: return t->index < depth;
        case TermKind::Abs: return locally_closed(t->fn, depth + 1);
        case TermKind::App: return locally_closed(t->fn, depth) && locally_closed(t->arg, depth);
        default: return true;
    }
}

std::optional<std::uint64_t> as_numeral(const TermP& t) {
    std::uint64_t extra = 0;
    const Term* cur = t.get();
    while (cur->kind == TermKind::App && cur->fn->kind == TermKind::Succ) {
        ++extra;
        cur = cur->arg.get();
    }
    if (cur->kind == TermKind::Num) return cur->num + extra;
    if (cur->kind == TermKind::Zero) return extra;
    return std::nullopt;
}

bool alpha_eq(const TermP& a, const TermP& b) {
    if (a == b) return true;
    auto na = as_numeral(a);
    auto nb = as_numeral(b);
    if (na || nb) return na && nb && *na == *nb;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case TermKind::BVar: return a->index == b->index;
        case TermKind::FVar: return a->name == b->name;
        case TermKind::Rec: return type_eq(a->type, b->type);
        case TermKind::Abs: return type_eq(a->type, b->type) && alpha_eq(a->fn, b->fn);
        case TermKind::App: return alpha_eq(a->fn, b->fn) && alpha_eq(a->arg, b->arg);
        default: return true;
    }
}

TermP spine(const TermP& t, std::vector<TermP>& args) {
    TermP cur = t;
    std::vector<TermP> rev;
    while (cur->kind == TermKind::App) {
        rev.push_back(cur->arg);
        cur = cur->fn;
    }
    args.assign(rev.rbegin(), rev.rend());
    return cur;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string choose_name(const std::string& hint, const std::vector<std::string>& scope,
                        const std::set<std::string>& avoid) {
    std::string name = hint.empty() ? "x" : hint;
    auto taken = [&](const std::string& n) {
        return avoid.count(n) > 0 || std::find(scope.begin(), scope.end(), n) != scope.end();
    };
    while (taken(name)) name += "'";
    return name;
}

std::string render_term(const TermP& t, std::vector<std::string>& scope,
                        const std::set<std::string>& avoid) {
    switch (t->kind) {
        case TermKind::BVar:
            if (t->index < scope.size()) return scope[scope.size() - 1 - t->index];
            return "#" + std::to_string(t->index);
        case TermKind::FVar: return t->name;
        case TermKind::Zero: return "zero";
        case TermKind::Succ: return "succ";
        case TermKind::Max: return "max";
        case TermKind::Num: return std::to_string(t->num);
        case TermKind::Rec: return "(rec " + render_type(t->type) + ")";
        case TermKind::Abs: {
            std::string n = choose_name(t->name, scope, avoid);
            scope.push_back(n);
            std::string body = render_term(t->fn, scope, avoid);
            scope.pop_back();
            return "(lam " + n + " : " + render_type(t->type) + " " + body + ")";
        }
        case TermKind::App: {
            std::vector<TermP> args;
            TermP head = spine(t, args);
            std::string s = "(" + render_term(head, scope, avoid);
            for (const auto& a : args) s += " " + render_term(a, scope, avoid);
            return s + ")";
        }
    }
    return "?";
}

std::string render_term(const TermP& t) {
    std::vector<std::string> scope;
    return render_term(t, scope, free_vars(t));
}

// ---------------------------------------------------------------------------
// Typing
// ---------------------------------------------------------------------------

KernelError::KernelError(Kind k, std::string loc, std::string exp, std::string fnd)
    : std::runtime_error([&] {
          switch (k) {
              case Kind::TypeMismatch:
                  return "TypeMismatch at " + loc + ": expected " + exp + ", found " + fnd;
              case Kind::UnboundVariable: return "UnboundVariable: " + loc;
              case Kind::NotClosed: return "term is not closed: " + loc;
              case Kind::FuelExhausted: return "FuelExhausted while evaluating " + loc;
              case Kind::Parse: return "parse error: " + loc;
          }
          return std::string("kernel error");
      }()),
      kind(k),
      location(std::move(loc)),
      expected(std::move(exp)),
      found(std::move(fnd)) {}

namespace {

TypeP rec_type(const TypeP& s) {
    // (rec s) : s -> (O -> s -> s) -> O -> s
    return arrows({s, arrows({base_type(), s}, s), base_type()}, s);
}

TypeP check(const TermP& t, const Context& ctx, std::vector<TypeP>& bound) {
    switch (t->kind) {
        case TermKind::BVar:
            if (t->index >= bound.size())
                throw KernelError(KernelError::Kind::UnboundVariable, "#" + std::to_string(t->index));
            return bound[bound.size() - 1 - t->index];
        case TermKind::FVar: {
            auto it = ctx.find(t->name);
            if (it == ctx.end()) throw KernelError(KernelError::Kind::UnboundVariable, t->name);
            return it->second;
        }
        case TermKind::Zero:
        case TermKind::Num: return base_type();
        case TermKind::Succ: return type1();
        case TermKind::Max: return arrows({base_type(), base_type()}, base_type());
        case TermKind::Rec: return rec_type(t->type);
        case TermKind::Abs: {
            bound.push_back(t->type);
            TypeP body = check(t->fn, ctx, bound);
            bound.pop_back();
            return arrow(t->type, body);
        }
        case TermKind::App: {
            TypeP f = check(t->fn, ctx, bound);
            TypeP x = check(t->arg, ctx, bound);
            if (f->kind != FinType::Kind::Arrow)
                throw KernelError(KernelError::Kind::TypeMismatch, render_term(t->fn),
                                  "an arrow type", render_type(f));
            if (!type_eq(f->dom, x))
                throw KernelError(KernelError::Kind::TypeMismatch, render_term(t->arg),
                                  render_type(f->dom), render_type(x));
            return f->cod;
        }
    }
    return base_type();
}

}  // namespace

TypeP type_check(const TermP& t, const Context& ctx) {
    std::vector<TypeP> bound;
    return check(t, ctx, bound);
}

TermP substitute(const TermP& t, const std::string& var, const TermP& replacement) {
    switch (t->kind) {
        case TermKind::FVar: return t->name == var ? replacement : t;
        case TermKind::Abs: {
            auto b = substitute(t->fn, var, replacement);
            if (b == t->fn) return t;
            auto n = std::make_shared<Term>(*t);
            n->fn = b;
            return n;
        }
        case TermKind::App: {
            auto f = substitute(t->fn, var, replacement);
            auto x = substitute(t->arg, var, replacement);
            if (f == t->fn && x == t->arg) return t;
            return mk_app(f, x);
        }
        default: return t;
    }
}

TermP substitute(const TermP& t, const std::string& var, const TermP& replacement,
                 const Context& ctx) {
    auto it = ctx.find(var);
    if (it == ctx.end()) throw KernelError(KernelError::Kind::UnboundVariable, var);
    TypeP rt = type_check(replacement, ctx);
    if (!type_eq(rt, it->second))
        throw KernelError(KernelError::Kind::TypeMismatch, render_term(replacement),
                          render_type(it->second), render_type(rt));
    return substitute(t, var, replacement);
}

// ---------------------------------------------------------------------------
// Call-by-value evaluation
// ---------------------------------------------------------------------------

namespace {

struct Evaluator {
    std::uint64_t fuel;
    const TermP& root;

    void tick() {
        if (fuel == 0) throw KernelError(KernelError::Kind::FuelExhausted, render_term(root));
        --fuel;
    }

    static std::uint64_t nat(const TermP& v) {
        auto n = as_numeral(v);
        if (!n) throw KernelError(KernelError::Kind::TypeMismatch, render_term(v), "O", "non-numeral");
        return *n;
    }

    TermP eval(const TermP& t) {
        tick();
        switch (t->kind) {
            case TermKind::Zero: return mk_num(0);
            case TermKind::FVar:
            case TermKind::BVar: throw KernelError(KernelError::Kind::NotClosed, render_term(t));
            case TermKind::App: {
                TermP f = eval(t->fn);
                TermP x = eval(t->arg);
                return apply(f, x);
            }
            default: return t;
        }
    }

    TermP apply(const TermP& f, const TermP& x) {
        tick();
        std::vector<TermP> args;
        TermP head = spine(f, args);
        switch (head->kind) {
            case TermKind::Abs: return eval(open_term(head->fn, x));
            case TermKind::Succ: return mk_num(nat(x) + 1);
            case TermKind::Max:
                if (args.empty()) return mk_app(f, x);
                return mk_num(std::max(nat(args[0]), nat(x)));
            case TermKind::Rec: {
                if (args.size() < 2) return mk_app(f, x);
                std::uint64_t n = nat(x);
                TermP acc = args[0];
                for (std::uint64_t i = 0; i < n; ++i) acc = apply(apply(args[1], mk_num(i)), acc);
                return acc;
            }
            default:
                throw KernelError(KernelError::Kind::TypeMismatch, render_term(f), "a function value",
                                  "non-function");
        }
    }
};

}  // namespace

TermP evaluate(const TermP& t, const EvalOptions& opt) {
    Evaluator ev{opt.fuel, t};
    return ev.eval(t);
}

std::uint64_t eval_nat(const TermP& t, const EvalOptions& opt) {
    auto n = as_numeral(evaluate(t, opt));
    if (!n) throw KernelError(KernelError::Kind::TypeMismatch, render_term(t), "O", "non-numeral value");
    return *n;
}

// ---------------------------------------------------------------------------
// Prelude
// ---------------------------------------------------------------------------

namespace prelude {

namespace {
TermP v(const char* n) { return mk_var(n); }
TermP recO() { return mk_rec(base_type()); }
}  // namespace

TermP add() {
    // x + y by recursion on y
    TermP step = mk_lam("m", base_type(), mk_lam("r", base_type(), mk_app(mk_succ(), v("r"))));
    TermP body = mk_apps(recO(), {v("x"), step, v("y")});
    return mk_lam("x", base_type(), mk_lam("y", base_type(), body));
}

TermP mul() {
    TermP step = mk_lam("m", base_type(),
                        mk_lam("r", base_type(), mk_apps(add(), {v("r"), v("x")})));
    TermP body = mk_apps(recO(), {mk_num(0), step, v("y")});
    return mk_lam("x", base_type(), mk_lam("y", base_type(), body));
}

TermP scale(std::uint64_t c) {
    return mk_lam("n", base_type(), mk_apps(mul(), {mk_num(c), v("n")}));
}

TermP closure() {
    TermP gsucc = mk_app(v("g"), mk_app(mk_succ(), v("m")));
    TermP step = mk_lam("m", base_type(),
                        mk_lam("r", base_type(), mk_apps(mk_max(), {v("r"), gsucc})));
    TermP body = mk_apps(recO(), {mk_app(v("g"), mk_num(0)), step, v("n")});
    return mk_lam("g", type1(), mk_lam("n", base_type(), body));
}

TermP constant(std::uint64_t c, TypeP dom) { return mk_lam("_", std::move(dom), mk_num(c)); }

}  // namespace prelude

}  // namespace nsa
