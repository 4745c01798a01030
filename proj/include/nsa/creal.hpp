#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsa/majorizer.hpp"

namespace nsa {

using Rational = mpq_class;

struct CRealError : std::runtime_error {
    enum class Kind { DomainViolation, InvalidPartition, Parse };
    Kind kind;
    CRealError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

mpz_class ceil_q(const Rational& q);
mpz_class floor_q(const Rational& q);
Rational pow2(std::int64_t e);  // 2^e, exact
std::string show(const Rational& q);
// the least j with 2^j >= v (v >= 1)
std::uint64_t ceil_log2(const mpz_class& v);

// A real as a sequence of rationals with |q_n - q_{n+i}| < 2^-n, so |x - q_n| <= 2^-n.
// Values are immutable; copies share the evaluator.
class CReal {
public:
    using Approx = std::function<Rational(std::uint64_t)>;

    CReal();  // zero
    static CReal from_rational(const Rational& q);
    // The caller guarantees the invariant.
    static CReal from_fast(Approx seq);
    // Wraps an arbitrary rational sequence: it is kept while it satisfies the invariant
    // on every checked pair, and frozen at the last good value afterwards.
    static CReal clamped(Approx raw);

    Rational approx(std::uint64_t n) const { return (*f_)(n); }

private:
    explicit CReal(std::shared_ptr<const Approx> f) : f_(std::move(f)) {}
    std::shared_ptr<const Approx> f_;
};

CReal add(const CReal& x, const CReal& y);
CReal sub(const CReal& x, const CReal& y);
CReal neg(const CReal& x);
CReal mul(const CReal& x, const CReal& y);
CReal abs(const CReal& x);
CReal min(const CReal& x, const CReal& y);
CReal max(const CReal& x, const CReal& y);
CReal scale(const CReal& x, const Rational& c);
Rational approx_at(const CReal& x, std::uint64_t k);

// Three-valued comparison at precision k. Equal means |q_n - r_n| <= 2^-n for all n <= k;
// apart means |q_n - r_n| > 2^(1-n) for some n <= k, which separates the limits.
enum class Comparison { EqualAtK, ApartWithWitness, Undecided };
struct EqVerdict {
    Comparison kind = Comparison::EqualAtK;
    std::uint64_t n = 0;  // witness index when apart, first violation when undecided
    Rational gap;         // |q_n - r_n| at that index
};
EqVerdict eq_real(const CReal& x, const CReal& y, std::uint64_t k);

// sum_{n>=1} alpha(n) / 2^n for a 0/1 sequence alpha
CReal binary_real(const Fn1& alpha);
// The same for an eventually constant sequence: digit i of `s` weighs 2^-(i+1). Exact.
Rational binary_real(const Seq& s);
// b(f)(k) = 0 if f(k) = 0 and 1 otherwise
Fn1 binarize(const Fn1& f);

// A function on [0,1]. `exact` is set when rational inputs have exactly computable outputs.
struct RealFn {
    std::string name;
    std::function<CReal(const CReal&)> eval;
    std::function<Rational(const Rational&)> exact;
    std::optional<Fn1> modulus;          // |x-y| < 1/g(k) => |f(x)-f(y)| <= 1/k
    std::optional<Rational> sup_bound;   // |f| <= B on [0,1]

    // f(q) to within 2^-p, exact when possible
    Rational at(const Rational& q, std::uint64_t p) const;
    bool is_exact() const { return static_cast<bool>(exact); }
    // A sup bound, derived from the modulus when none is attached.
    Rational bound() const;
};

struct Partition {
    std::vector<Rational> points;  // 0 = x_0 < ... < x_M = 1
    std::vector<Rational> tags;    // tags[i] in [x_i, x_{i+1}]
    Rational mesh() const;
    void validate() const;  // throws InvalidPartition
};
// M equal pieces with tags at x_i + pos * (x_{i+1} - x_i)
Partition uniform_partition(std::uint64_t m, const Rational& pos);

// sum f(t_i) (x_{i+1} - x_i), to within 2^-k
Rational riemann_sum(const RealFn& f, const Partition& p, std::uint64_t k);

// sum_{i=0}^{i(x)} f(i/2^k) / 2^k with i(x) = ceil(x 2^k)
Rational integral(const RealFn& f, const Rational& x, std::uint64_t k);
Rational integral(const RealFn& f, const CReal& x, std::uint64_t k);
// The least dyadic level j >= 1 at which the sum above is within 1/d of the integral
// for every x with x + 2^(2-j) <= 1, given modulus g and |f| <= b.
std::uint64_t integral_level(const Fn1& g, const Rational& b, std::uint64_t d);
// The integral as a real; needs a modulus.
CReal integral_real(const RealFn& f, const CReal& x);

// (f(x+eps) - f(x)) / eps
CReal diff_quotient(const RealFn& f, const CReal& x, const Rational& eps);
Rational diff_quotient(const RealFn& f, const Rational& x, const Rational& eps, std::uint64_t p);

// Expression language: x, rational constants (decimals allowed), + - * /, ^ with a natural
// exponent, abs(e) or |e|, min(a,b), max(a,b), implicit multiplication ("2k", "3(x+1)").
// Named parameters other than the main variable are bound before evaluation.
struct Expr;
using ExprP = std::shared_ptr<const Expr>;
ExprP parse_expr(const std::string& text);
std::string render_expr(const ExprP& e);
std::vector<std::string> expr_variables(const ExprP& e);

// A RealFn in x with a Lipschitz modulus and sup bound derived by interval analysis
// over [0,1]. Throws Parse on unknown variables or on division by a term in x.
RealFn real_fn(const ExprP& e, const std::map<std::string, Rational>& params = {});
RealFn parse_real_fn(const std::string& text);
// A modulus in k. Values are rounded up; anything below 1 reads as 1.
Fn1 modulus_fn(const ExprP& e, const std::map<std::string, Rational>& params = {});
Fn1 parse_modulus(const std::string& text);

}  // namespace nsa
