#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsa/kernel.hpp"
#include "nsa/syntax.hpp"

namespace nsa {

enum class FKind {
    Atom, St, Not, And, Or, Implies,
    Forall, Exists, ForallSt, ExistsSt, ForallMono, ExistsMono,
    Approx
};
enum class Rel { Eq0, Leq0, LeqStar };

struct Formula;
using FormulaP = std::shared_ptr<const Formula>;

// Quantifier bodies share the de Bruijn index space with term binders: inside
// the body of a quantifier, index 0 in an atom refers to the quantified variable.
//
// Approx is the macro (approx N t), standing for (forall-st N : O (=0 (t N) 0)).
// It is not a binder; `name` only carries the hint for N.
struct Formula {
    FKind kind = FKind::Atom;
    Rel rel = Rel::Eq0;
    TermP lhs, rhs;            // Atom sides; St and Approx use lhs
    FormulaP left, right;      // connective operands; a quantifier body is `left`
    std::string name;          // binder hint
    TypeP type;                // binder type
};

struct FormulaError : std::runtime_error {
    enum class Kind { NotInternal, NotNormalForm, IllTyped, Parse };
    Kind kind;
    std::string node;  // rendering of the offending subformula, when there is one
    FormulaError(Kind k, const std::string& msg, std::string at = {});
};

bool is_quantifier(FKind k);
bool is_binary(FKind k);

FormulaP f_atom(Rel rel, TermP lhs, TermP rhs);
FormulaP f_st(TermP t);
FormulaP f_not(FormulaP a);
FormulaP f_and(FormulaP a, FormulaP b);
FormulaP f_or(FormulaP a, FormulaP b);
FormulaP f_implies(FormulaP a, FormulaP b);
FormulaP f_binary(FKind k, FormulaP a, FormulaP b);
// Binds the free variable `var` of `body`.
FormulaP f_quant(FKind k, const std::string& var, TypeP type, FormulaP body);
FormulaP f_approx(const std::string& hint, TermP pred);

// Fresh internal name "base#n"; the suffix is dropped when the name becomes a binder hint.
std::string fresh_name(const std::string& base);
std::string strip_hint(const std::string& name);

FormulaP open_formula(const FormulaP& body, const TermP& u, std::uint32_t depth = 0);
FormulaP close_formula(const FormulaP& f, const std::string& var, std::uint32_t depth = 0);
// Opens a quantifier with a fresh variable and returns the body; `var` receives its name.
FormulaP open_binder(const FormulaP& q, std::string& var);

void collect_free_vars(const FormulaP& f, std::set<std::string>& out);
std::set<std::string> free_vars(const FormulaP& f);
bool occurs_free(const FormulaP& f, const std::string& var);
bool alpha_eq(const FormulaP& a, const FormulaP& b);
std::size_t formula_size(const FormulaP& f);

// Pre-order search for the first subformula where `rule` fires. Binders are opened with
// fresh names on the way down, so `rule` only sees locally closed formulas. Polarity is
// +1 or -1 and flips under `not` and in the antecedent of `implies`.
using LocalRule = std::function<std::optional<FormulaP>(const FormulaP&, int polarity)>;
std::optional<FormulaP> rewrite_first(const FormulaP& f, const LocalRule& rule, int polarity = 1);

FormulaP substitute_formula(const FormulaP& f, const std::string& var, const TermP& t);
// Checked: `t` must have the type `var` has in `f` (inferred against `ctx`).
FormulaP substitute_formula(const FormulaP& f, const std::string& var, const TermP& t,
                            const Context& ctx);

// ---------------------------------------------------------------------------
// Text form
// ---------------------------------------------------------------------------

FormulaP parse_formula(const SExpr& e, std::vector<std::string>& bound);
FormulaP parse_formula(const std::string& text);
std::string render_formula(const FormulaP& f);
std::string render_formula(const FormulaP& f, std::vector<std::string>& scope,
                           const std::set<std::string>& avoid);
std::string render_rel(Rel r);
std::string render_quant(FKind k);

// ---------------------------------------------------------------------------
// Typing
// ---------------------------------------------------------------------------

// Symbols every formula may use without declaring them. R = P = (-> O O), F = (-> R R).
const Context& vocabulary();
// Infers the types of the free variables of `f`. Names absent from `given` and from
// the vocabulary get inferred types; anything left undetermined defaults to O.
// Throws FormulaError(IllTyped).
Context infer_types(const FormulaP& f, const Context& given = {});
bool well_typed(const FormulaP& f, const Context& given = {});

// ---------------------------------------------------------------------------
// Internal formulas, relativization, sugar
// ---------------------------------------------------------------------------

bool is_internal(const FormulaP& f);
// Throws FormulaError(NotInternal).
FormulaP relativize(const FormulaP& f);

// Expands st/monotone quantifiers and approx macros into Forall/Exists/St/guards.
FormulaP expand_sugar(const FormulaP& f);
// Inverse of expand_sugar on the expansion patterns.
FormulaP resugar(const FormulaP& f);
// Internal monotone quantifiers: (forall x (implies (<=* x x) body)), (exists x (and (<=* x x) body)).
FormulaP f_mono(bool universal, const std::string& var, TypeP type, FormulaP body);
// Bounded quantifiers (forall x (implies (x <= b) body)) and (exists x (and (x <= b) body));
// the bound is <=0 at type O and <=* otherwise.
FormulaP f_bounded(bool universal, const std::string& var, TypeP type, TermP bound, FormulaP body);
FormulaP f_bound_atom(const TermP& x, TypeP type, const TermP& bound);

// ---------------------------------------------------------------------------
// Normal forms
// ---------------------------------------------------------------------------

struct QVar {
    std::string name;
    TypeP type;
    bool mono = false;
};

struct NormalForm {
    std::vector<QVar> univ;
    std::vector<QVar> exist;
    FormulaP matrix;  // internal; mentions the quantified variables by name
};

FormulaP render_nf(const NormalForm& nf);
// Throws FormulaError(NotNormalForm) naming the first offending node.
NormalForm recognize_normal_form(const FormulaP& f);
std::optional<NormalForm> try_recognize_normal_form(const FormulaP& f, std::string* reason = nullptr);

}  // namespace nsa
