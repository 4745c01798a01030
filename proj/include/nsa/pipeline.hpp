#pragma once

#include <string>
#include <vector>

#include "nsa/formulas.hpp"

namespace nsa {

struct TraceStep {
    std::string rule;
    FormulaP before;
    FormulaP after;
    std::string evidence;
};

struct RewriteTrace {
    std::vector<TraceStep> steps;
};

struct PipelineError : std::runtime_error {
    enum class Kind { ProvisoViolated, NotNormalForm, Stuck };
    Kind kind;
    FormulaP at;
    PipelineError(Kind k, const std::string& msg, FormulaP f = nullptr);
};

// Rule names accepted in a strategy:
//   resolve      approx macros -> (forall-st N (=0 (t N) 0))
//   realize      (forall x..)(exists-st y..) phi -> (exists-st z)(forall x..)(exists y <=* z) phi
//   collapse     Base bounds <=* z introduced by realize: instantiate, drop or keep as <=0
//   pull         st quantifiers out of internal quantifiers and connectives
//   drop-mono    leading (forall-mono g) of type 1 becomes (forall-st g)
//   mac          monotone choice on a negative (forall-st x)(exists-st y) phi block
//   mac-root     the same at the root, leaving the choice function free
//   instantiate  (exists n <=* (g k)) phi -> phi[n := g k] when phi is upward closed in n
//   combine      implication between two normal forms -> one normal form
//   drop-st      (forall-st a) guarded by a <=* 1 or (unit a), under the REF whitelist
//   converge     (forall M)(not st M -> phi) -> (exists-st N)(forall M)(N <= M -> phi)
using Strategy = std::vector<std::string>;

const std::vector<std::string>& rule_names();
Strategy default_strategy();
// Orderings the confluence tests run against; the first is the default.
std::vector<Strategy> registered_strategies();

// Applies one named rule to fixpoint. Returns nullopt when it never fires.
std::optional<FormulaP> apply_rule(const std::string& rule, const FormulaP& f, std::string* evidence = nullptr);

struct TemplateResult {
    NormalForm nf;
    FormulaP final;
    RewriteTrace trace;
};

// Runs the strategy in rounds until no rule fires. Throws PipelineError(Stuck) when the
// result is not a normal form or the step budget runs out.
TemplateResult run_template(const FormulaP& a, const Strategy& strategy = default_strategy(),
                            std::size_t step_budget = 200);

FormulaP resolve_infinitesimal(const FormulaP& a);
FormulaP pull_standard_quantifiers(const FormulaP& a);
// Throws ProvisoViolated when a matching block has a non-internal matrix and nothing else applies.
FormulaP apply_realization(const FormulaP& a);
FormulaP type0_star_collapse(const FormulaP& a);
// Negative positions get an explicit (exists-mono g); a root block leaves g free.
FormulaP apply_monotone_choice(const FormulaP& a);
FormulaP instantiate_base_bound(const FormulaP& a);
// Throws NotNormalForm unless `impl` is an implication between two prenex st-blocks.
FormulaP combine_normal_forms(const FormulaP& impl);
FormulaP drop_monotonicity(const FormulaP& a);

struct RefEvidence {
    bool ok = true;
    std::string guard;                // "binary" or "unit"
    std::vector<std::string> heads;   // extensional heads the variable passes through
    std::string offending;            // rendering of the first non-REF atom
};
// Whitelist check for the quantified variable `var` in `phi`.
RefEvidence check_ref(const FormulaP& phi, const std::string& var);
// Throws ProvisoViolated(non-REF atom) when a guarded st quantifier fails the whitelist.
FormulaP drop_st_on_sequence_quantifier(const FormulaP& a, RefEvidence* evidence = nullptr);

// Slot metadata for vocabulary predicates. A reciprocal slot k reads as 1/k, so the
// atom gets stronger as k grows; a maximizable slot is a real the atom prefers large.
std::optional<std::size_t> reciprocal_slot(const std::string& pred);
std::optional<std::size_t> maximizable_slot(const std::string& pred);

}  // namespace nsa
