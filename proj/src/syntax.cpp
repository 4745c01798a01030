#include "nsa/syntax.hpp"

#include <cctype>
#include <set>

namespace nsa {

void parse_fail(const SExpr& at, const std::string& msg) {
    throw KernelError(KernelError::Kind::Parse,
                      "line " + std::to_string(at.line) + ": " + msg + " near " + show_sexpr(at));
}

std::vector<SExpr> read_sexprs(const std::string& text) {
    std::vector<SExpr> stack_top;
    std::vector<SExpr> stack;  // open lists
    int line = 1;
    auto emit = [&](SExpr e) {
        if (stack.empty())
            stack_top.push_back(std::move(e));
        else
            stack.back().items.push_back(std::move(e));
    };
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '(') {
            SExpr l;
            l.atom = false;
            l.line = line;
            stack.push_back(std::move(l));
            ++i;
        } else if (c == ')') {
            if (stack.empty())
                throw KernelError(KernelError::Kind::Parse, "line " + std::to_string(line) + ": unbalanced ')'");
            SExpr done = std::move(stack.back());
            stack.pop_back();
            emit(std::move(done));
            ++i;
        } else if (c == ':') {
            emit(SExpr{true, ":", {}, line});
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
                   text[j] != ')' && text[j] != ';' && text[j] != ':')
                ++j;
            emit(SExpr{true, text.substr(i, j - i), {}, line});
            i = j;
        }
    }
    if (!stack.empty())
        throw KernelError(KernelError::Kind::Parse,
                          "line " + std::to_string(stack.back().line) + ": unclosed '('");
    return stack_top;
}

std::string show_sexpr(const SExpr& e) {
    if (e.atom) return e.text;
    std::string s = "(";
    for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) s += " ";
        s += show_sexpr(e.items[i]);
    }
    return s + ")";
}

bool is_identifier(const std::string& s) {
    static const std::set<std::string> reserved = {
        "lam", "rec", "zero", "succ", "max", "st", "not", "and", "or", "implies", "forall", "exists",
        "forall-st", "exists-st", "forall-mono", "exists-mono", "approx", "O"};
    if (s.empty() || reserved.count(s)) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')) return false;
    return true;
}

TypeP parse_type(const SExpr& e) {
    if (e.atom) {
        if (e.text == "O") return base_type();
        parse_fail(e, "expected a type");
    }
    if (e.items.size() == 3 && e.items[0].atom && e.items[0].text == "->")
        return arrow(parse_type(e.items[1]), parse_type(e.items[2]));
    parse_fail(e, "expected (-> type type)");
}

namespace {
bool is_nat(const std::string& s) {
    if (s.empty() || s.size() > 19) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}
}  // namespace

TermP parse_term(const SExpr& e, std::vector<std::string>& bound) {
    if (e.atom) {
        if (e.text == "zero") return mk_zero();
        if (e.text == "succ") return mk_succ();
        if (e.text == "max") return mk_max();
        if (is_nat(e.text)) return mk_num(std::stoull(e.text));
        if (!is_identifier(e.text)) parse_fail(e, "expected a term");
        for (std::size_t k = bound.size(); k-- > 0;)
            if (bound[k] == e.text) return mk_bvar(static_cast<std::uint32_t>(bound.size() - 1 - k));
        return mk_var(e.text);
    }
    if (e.items.empty()) parse_fail(e, "empty application");
    const SExpr& head = e.items[0];
    if (head.atom && head.text == "lam") {
        if (e.items.size() != 5 || !e.items[2].atom || e.items[2].text != ":" ||
            !e.items[1].atom || !is_identifier(e.items[1].text))
            parse_fail(e, "expected (lam ident : type term)");
        auto t = std::make_shared<Term>();
        t->kind = TermKind::Abs;
        t->name = e.items[1].text;
        t->type = parse_type(e.items[3]);
        bound.push_back(t->name);
        t->fn = parse_term(e.items[4], bound);
        bound.pop_back();
        return t;
    }
    if (head.atom && head.text == "rec") {
        if (e.items.size() != 2) parse_fail(e, "expected (rec type)");
        return mk_rec(parse_type(e.items[1]));
    }
    if (e.items.size() < 2) parse_fail(e, "application needs an argument");
    TermP f = parse_term(head, bound);
    for (std::size_t k = 1; k < e.items.size(); ++k) f = mk_app(f, parse_term(e.items[k], bound));
    return f;
}

TypeP parse_type(const std::string& text) {
    auto es = read_sexprs(text);
    if (es.size() != 1) throw KernelError(KernelError::Kind::Parse, "expected exactly one type");
    return parse_type(es[0]);
}

TermP parse_term(const std::string& text) {
    auto es = read_sexprs(text);
    if (es.size() != 1) throw KernelError(KernelError::Kind::Parse, "expected exactly one term");
    std::vector<std::string> bound;
    return parse_term(es[0], bound);
}

}  // namespace nsa
