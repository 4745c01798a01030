#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsa/creal.hpp"
#include "nsa/kernel.hpp"
#include "nsa/majorizer.hpp"

namespace nsa {

inline constexpr std::uint64_t kDefaultSeed = 24301;

struct VerificationReport {
    std::string theorem_id;
    std::string term;  // rendered bound term
    std::uint64_t trials = 0;
    Rational worst_residual = 0;
    Rational threshold = 0;
    std::vector<std::pair<std::string, std::string>> params;
    bool pass = false;
    double wall_time = 0;
    std::uint64_t seed = kDefaultSeed;
    std::string witness;  // the worst case, when it fails

    std::string text() const;
    // One JSON object without the wall time, so equal runs give equal lines.
    std::string json_line() const;
};

struct VerifyError : std::runtime_error {
    enum class Kind { PreconditionViolated, ProvisoViolated };
    Kind kind;
    std::optional<Seq> u, v;  // monotonicity witness: v <=* u but g2(v) > g2(u)
    VerifyError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Bound terms in the kernel calculus. Each one agrees with the native function next to it.
TermP cri_term();    // (O->O) -> O -> O
TermP ftc_term();    // (O->O) -> O -> O -> O
TermP ulc_term();    // (O->O->O) -> (O->O) -> O -> O
TermP grid_term();   // (O->O) -> O -> O, the WEI / IVT / second-FTC grid
TermP uniformize_term();  // ((O->O)->O->O) -> O -> O

// Riemann sums of partitions with mesh < 1/cri_mesh_bound(g,n) differ by at most 1/n.
std::uint64_t cri_mesh_bound(const Fn1& g, std::uint64_t n);
// `trials` random pairs plus one pair of extreme tags on a uniform grid.
VerificationReport check_cri(const RealFn& f, const Fn1& g, std::uint64_t n, std::uint64_t trials,
                             std::uint64_t seed = kDefaultSeed);

// For x in [1/l, 1-1/l] and N = ftc_bound: |N (I(x + 1/N) - I(x)) - f(x)| <= 1/k,
// with I evaluated at level ftc_level.
std::uint64_t ftc_bound(const Fn1& g, std::uint64_t k, std::uint64_t l);
std::uint64_t ftc_level(const Fn1& g, const Rational& sup, std::uint64_t k, std::uint64_t n);
Rational ftc_quotient(const RealFn& f, const Rational& x, std::uint64_t n, std::uint64_t level);
VerificationReport check_ftc(const RealFn& f, const Fn1& g, std::uint64_t k, std::uint64_t l, std::uint64_t trials,
                             std::uint64_t seed = kDefaultSeed);
// |I(D_eps f, 1) - (f(1) - f(0))| <= 1/k for eps = 1/ftc2_bound, f read as f(min(x,1)) past 1.
std::uint64_t ftc2_bound(const Fn1& g, std::uint64_t k);
VerificationReport check_ftc_second(const RealFn& f, const Fn1& g, std::uint64_t k);

using ModulusFamily = std::function<Fn1(std::uint64_t)>;
using FnFamily = std::function<RealFn(std::uint64_t)>;
// k |-> g~_M(3k) with M = h~(3k)
Fn1 ulc_modulus(const ModulusFamily& gs, const Fn1& h);
// The limit of fs, given h(k) with |f_M(x) - f(x)| <= 1/k for M >= h(k).
RealFn uniform_limit(const FnFamily& fs, const Fn1& h);
VerificationReport check_ulc(const FnFamily& fs, const ModulusFamily& gs, const Fn1& h, std::uint64_t k,
                             std::uint64_t trials, std::uint64_t seed = kDefaultSeed);

std::uint64_t grid_size(const Fn1& g, std::uint64_t k);
// The best point of the grid {i/G}, G = grid_size(g,k): f(y) <= f(q) + 1/k for every y.
Rational wei_approx(const RealFn& f, const Fn1& g, std::uint64_t k);
VerificationReport check_wei(const RealFn& f, const Fn1& g, std::uint64_t k, std::uint64_t trials,
                             std::uint64_t seed = kDefaultSeed);
// wei_approx along ks, read as a real.
CReal wei_unique_limit(const RealFn& f, const Fn1& g, const std::vector<std::uint64_t>& ks);

enum class IvtMode { Root, FixedPoint };
// |f(q)| <= 1/k, or |f(q) - q| <= 1/k in fixed-point mode. Throws PreconditionViolated
// when the endpoints show no sign change.
Rational ivt_approx(const RealFn& f, const Fn1& g, std::uint64_t k, IvtMode mode = IvtMode::Root);
VerificationReport check_ivt(const RealFn& f, const Fn1& g, std::uint64_t k, IvtMode mode = IvtMode::Root);

// g2(x, k): digits of x up to g2(x,k) fix F(x) to within 1/k.
using PointwiseModulus = std::function<std::uint64_t(const Seq&, std::uint64_t)>;
struct UniformizeBudget {
    std::uint64_t k_max = 6;
    std::size_t prefix_len = 5;
};
// k |-> g2(11..., k) after checking g2(., k) is monotone on the budget.
// Throws ProvisoViolated with the refuting pair.
Fn1 uniformize_pointwise_modulus(const PointwiseModulus& g2, const UniformizeBudget& budget = {});
// Pairs of binary sequences agreeing on the first g(k) digits.
VerificationReport check_uniform_modulus(const std::function<Rational(const Seq&)>& F, const Fn1& g, std::uint64_t k,
                                         std::uint64_t trials, std::uint64_t seed = kDefaultSeed);

}  // namespace nsa
