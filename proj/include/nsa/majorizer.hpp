#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsa/kernel.hpp"

namespace nsa {

// An eventually constant sequence of naturals: prefix, then `tail` forever.
struct Seq {
    std::vector<std::uint64_t> prefix;
    std::uint64_t tail = 0;
    std::uint64_t at(std::uint64_t n) const { return n < prefix.size() ? prefix[n] : tail; }
    std::string show() const;
};

using Fn1 = std::function<std::uint64_t(std::uint64_t)>;
using Fn2 = std::function<std::uint64_t(const Seq&)>;

// A closed T-term computing the sequence (built from case distinctions on n).
TermP seq_term(const Seq& s);

// A value of type 0, 1 or 2 that can be evaluated at sampled arguments,
// backed either by a closed kernel term or by a native function.
class MajObject {
public:
    static MajObject number(std::uint64_t n);
    static MajObject fn1(Fn1 f);
    static MajObject fn2(Fn2 f);
    static MajObject term(TermP t);

    std::uint64_t value() const;
    std::uint64_t at(std::uint64_t n) const;
    std::uint64_t at(const Seq& s) const;

private:
    enum class Rep { Number, Native1, Native2, Term } rep_ = Rep::Number;
    std::uint64_t n_ = 0;
    Fn1 f1_;
    Fn2 f2_;
    TermP t_;
};

struct SamplingPlan {
    // type 1: every pair v <= u <= bound is tested
    std::optional<std::uint64_t> bound;
    // type 2: the type-1 arguments to test
    std::vector<Seq> family;
};

struct MajError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MajOutcome { Holds, FailsWithWitness, Inconclusive };

struct MajVerdict {
    MajOutcome outcome = MajOutcome::Holds;
    std::uint64_t samples_used = 0;
    // witness pair (v <=* u) violating the clause; terms of the argument type
    TermP u;
    TermP v;
    std::optional<Seq> u_seq;
    std::optional<Seq> v_seq;
    std::string detail;
    bool holds() const { return outcome == MajOutcome::Holds; }
};

bool maj_base(std::uint64_t x, std::uint64_t y);
// x <=* y at the given type (0, 1 or 2), refuted by sampling; throws MajError
// (budget invalid) on an empty plan or an unsupported type.
MajVerdict maj_check(const MajObject& x, const MajObject& y, const TypeP& type, const SamplingPlan& plan);
MajVerdict is_monotone(const MajObject& x, const TypeP& type, const SamplingPlan& plan);
// Re-evaluates the clause at the verdict's witness; true iff it still fails.
bool reproduces_failure(const MajVerdict& verdict, const MajObject& x, const MajObject& y, const TypeP& type);

// v <=*_1 u checked exactly for eventually constant sequences.
bool seq_majorized(const Seq& v, const Seq& u);

// g~(k) = max_{n<=k} g(n)
Fn1 monotone_closure(Fn1 g);
// the same as a T-term applied to a closed term for g
TermP monotone_closure_term(TermP g);

// least n with f(n) = 0, if it exists
std::optional<std::uint64_t> mu(const Seq& f);

struct MuCounterexample {
    Seq f;
    std::uint64_t mu_value;
};
// f <=*_1 (lam n. 1) whose first zero sits just past the candidate bound.
MuCounterexample refute_mu_majorant(std::uint64_t candidate_bound);

// All 0/1 sequences with prefix length `len` and the given tail.
std::vector<Seq> binary_family(std::size_t len, std::uint64_t tail);

}  // namespace nsa
