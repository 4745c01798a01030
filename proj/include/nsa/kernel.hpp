#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsa {

// ---------------------------------------------------------------------------
// Finite types
// ---------------------------------------------------------------------------

struct FinType;
using TypeP = std::shared_ptr<const FinType>;

struct FinType {
    enum class Kind { Base, Arrow };
    Kind kind = Kind::Base;
    TypeP dom;
    TypeP cod;
};

TypeP base_type();
TypeP arrow(TypeP dom, TypeP cod);
// arrows(a, b, c) = a -> (b -> c)
TypeP arrows(const std::vector<TypeP>& doms, TypeP cod);
bool type_eq(const TypeP& a, const TypeP& b);
std::string render_type(const TypeP& t);
// Base has level 0, an arrow has level max(level(dom)+1, level(cod)).
int type_level(const TypeP& t);

// Frequently used shapes.
TypeP type1();  // O -> O
TypeP type2();  // (O -> O) -> O

// ---------------------------------------------------------------------------
// Terms (locally nameless: bound variables are indices, free ones are names)
// ---------------------------------------------------------------------------

struct Term;
using TermP = std::shared_ptr<const Term>;

enum class TermKind { BVar, FVar, Zero, Succ, Rec, Max, Abs, App, Num };

struct Term {
    TermKind kind;
    std::uint32_t index = 0;  // BVar
    std::string name;         // FVar name, or naming hint of an Abs binder
    TypeP type;               // Abs binder type, Rec result type
    TermP fn;                 // App function, Abs body
    TermP arg;                // App argument
    std::uint64_t num = 0;    // Num
};

TermP mk_bvar(std::uint32_t i);
TermP mk_var(const std::string& name);
TermP mk_zero();
TermP mk_succ();
TermP mk_max();
TermP mk_rec(TypeP sigma);
TermP mk_num(std::uint64_t n);
TermP mk_app(TermP f, TermP x);
TermP mk_apps(TermP f, const std::vector<TermP>& xs);
// Abstracts the free variable `var` of `body`; the hint is `var` up to any '#' suffix.
TermP mk_lam(const std::string& var, TypeP type, TermP body);

// Replaces the bound variable of index `depth` by u (u must be locally closed).
TermP open_term(const TermP& body, const TermP& u, std::uint32_t depth = 0);
// Turns free occurrences of `var` into the bound variable of index `depth`.
TermP close_term(const TermP& t, const std::string& var, std::uint32_t depth = 0);

void collect_free_vars(const TermP& t, std::set<std::string>& out);
std::set<std::string> free_vars(const TermP& t);
bool occurs_free(const TermP& t, const std::string& var);
bool locally_closed(const TermP& t, std::uint32_t depth = 0);

// Alpha-equivalence; a NumLiteral equals the matching Succ^n Zero spine.
bool alpha_eq(const TermP& a, const TermP& b);
std::optional<std::uint64_t> as_numeral(const TermP& t);
// Splits an application spine into head and arguments.
TermP spine(const TermP& t, std::vector<TermP>& args);

std::string render_term(const TermP& t);
// Renders with a set of names that bound variables must avoid.
std::string render_term(const TermP& t, std::vector<std::string>& scope,
                        const std::set<std::string>& avoid);
std::string choose_name(const std::string& hint, const std::vector<std::string>& scope,
                        const std::set<std::string>& avoid);

// ---------------------------------------------------------------------------
// Typing, substitution, evaluation
// ---------------------------------------------------------------------------

using Context = std::map<std::string, TypeP>;

struct KernelError : std::runtime_error {
    enum class Kind { TypeMismatch, UnboundVariable, NotClosed, FuelExhausted, Parse };
    Kind kind;
    std::string location;
    std::string expected;
    std::string found;
    KernelError(Kind k, std::string loc, std::string exp = {}, std::string fnd = {});
};

TypeP type_check(const TermP& t, const Context& ctx = {});
TermP substitute(const TermP& t, const std::string& var, const TermP& replacement);
// Checked variant: the replacement must have the type the context gives `var`.
TermP substitute(const TermP& t, const std::string& var, const TermP& replacement,
                 const Context& ctx);

struct EvalOptions {
    std::uint64_t fuel = 50'000'000;
};
TermP evaluate(const TermP& t, const EvalOptions& opt = {});
// Evaluates a closed term of type O to a machine natural.
std::uint64_t eval_nat(const TermP& t, const EvalOptions& opt = {});

// ---------------------------------------------------------------------------
// Small library of closed T-terms
// ---------------------------------------------------------------------------
namespace prelude {
TermP add();              // O -> O -> O
TermP mul();              // O -> O -> O
TermP scale(std::uint64_t c);  // O -> O, n |-> c*n
TermP closure();          // (O -> O) -> O -> O, running maximum
TermP constant(std::uint64_t c, TypeP dom);  // dom -> O
}  // namespace prelude

}  // namespace nsa
