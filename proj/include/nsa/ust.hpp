#pragma once

#include "nsa/formulas.hpp"

namespace nsa {

// Phi^U = (forall-mono b...)(exists-mono c...) lower, with `lower` internal and
// mentioning the tuple variables by name.
struct UstResult {
    std::vector<QVar> b;
    std::vector<QVar> c;
    FormulaP lower;
};

// Clauses (i)-(viii). Sugared quantifiers and approx macros are expanded first.
// `ctx` supplies types for free variables; others are inferred. Throws FormulaError(IllTyped).
UstResult interpret(const FormulaP& phi, const Context& ctx = {});

FormulaP render_ust(const UstResult& r);

enum class SimplifyStatus { Simplified, Unchanged, ShapeMismatch };

struct SimplifyOutcome {
    UstResult result;
    SimplifyStatus status = SimplifyStatus::Unchanged;
};

// (exists-mono f' <=* f)(exists y)(forall-mono b' <=* F(f'))[y <=* f'(b') and psi]
//   ~> (exists y <=* e0) psi, dropping F from b and replacing f by e0 in c.
bool collapse_bound_pair(UstResult& r);
// (forall-mono b' <=* b)(x <=* f(b')) with f universal and b a padding variable
//   ~> x <=* x0, replacing f by x0 in b and dropping b from c.
bool instantiate_constant(UstResult& r);
// Both steps to fixpoint. Internal and st-only results come back Unchanged; anything
// else that matches neither step is returned unchanged with ShapeMismatch.
SimplifyOutcome simplify_monotone(const UstResult& r);

// (forall-mono b...)(forall x <=* b)...(exists y <=* (t b...))... matrix, with one
// fresh term variable t per existential. Their names and types go to `terms`.
FormulaP extraction_contract(const NormalForm& nf, std::vector<QVar>* terms = nullptr);

}  // namespace nsa
