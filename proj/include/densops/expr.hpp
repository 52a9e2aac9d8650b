#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "densops/base.hpp"
#include "densops/chart.hpp"
#include "densops/poly.hpp"

namespace densops {

// Element of the function algebra on a superdomain: a sum of terms
// c(x) * theta_{i1}...theta_{ik} with even rational-function coefficients
// (possibly involving exp/log/pow atoms) and an odd-variable bitmask.
class Expr {
  public:
    using Term = std::pair<std::uint64_t, RatFunc>;

    Expr() = default;
    Expr(ChartPtr chart, const Rational& c);
    static Expr zero(ChartPtr chart = nullptr) { return Expr(std::move(chart), Rational(0)); }
    static Expr one(ChartPtr chart = nullptr) { return Expr(std::move(chart), Rational(1)); }
    static Expr constant(ChartPtr chart, const Rational& c) { return Expr(std::move(chart), c); }
    static Expr of_var(const ChartPtr& chart, VarId v);
    static Expr of_ratfunc(ChartPtr chart, RatFunc f);  // even coefficients only

    const ChartPtr& chart() const { return chart_; }
    const std::vector<Term>& terms() const { return ts_; }
    bool is_zero() const { return ts_.empty(); }
    bool is_constant() const;
    bool is_one() const;
    const Rational& constant_value() const;

    // coefficient of the given odd monomial (zero if absent)
    RatFunc coeff(std::uint64_t mask) const;
    RatFunc body() const { return coeff(0); }
    Expr soul() const;
    Expr even_part() const;
    Expr odd_part() const;
    Parity parity() const;  // throws ParityError if mixed and nonzero
    bool is_even() const;
    bool is_odd() const;

    Expr operator-() const;
    Expr operator+(const Expr& o) const;
    Expr operator-(const Expr& o) const;
    Expr operator*(const Expr& o) const;
    Expr operator/(const Expr& o) const;  // requires invertible body
    Expr mul_rat(const Rational& c) const;
    Expr mul_coeff(const RatFunc& f) const;  // even scalar multiply
    Expr pow(long e) const;
    Expr inv() const;

    // partial derivative: even coordinates act on coefficients, odd
    // coordinates act from the left; parameters are rejected
    Expr derivative(VarId v) const;

    bool depends_on(VarId v) const;
    void collect_vars(std::set<VarId>& out) const;
    bool atom_free() const;

    // evaluate under a complete map of source variables to expressions on a
    // target chart (atoms are rebuilt through make_exp/make_log/make_pow)
    Expr substitute(const std::map<VarId, Expr>& map, const ChartPtr& target) const;

    friend int compare(const Expr& a, const Expr& b);
    friend bool operator==(const Expr& a, const Expr& b);
    bool operator!=(const Expr& o) const { return !(*this == o); }
    std::size_t hash() const;

  private:
    ChartPtr chart_;
    std::vector<Term> ts_;  // sorted by mask, no zero coefficients

    void insert_term(std::uint64_t mask, RatFunc c);
    static Expr from_terms(ChartPtr chart, std::map<std::uint64_t, RatFunc>&& acc);
    friend Expr eval_poly_at(const Poly&, const std::function<Expr(VarId)>&, const ChartPtr&);
};

// Koszul sign for merging two ascending odd monomials; 0 if they collide
int koszul_sign(std::uint64_t a, std::uint64_t b);

// analytic functions of expressions, expanding the nilpotent soul
Expr make_exp(const Expr& e);
Expr make_log(const Expr& e);
Expr make_pow(const Expr& e, const Rational& r);
Expr make_sqrt(const Expr& e);

// structural zero / structural nonzero / zero at all sampled points
enum class Zeroness { Zero, NonZero, ProbablyZero };

struct ZeroCheck {
    Zeroness verdict = Zeroness::Zero;
    std::string detail;  // counterexample point for NonZero with atoms
};

ZeroCheck check_zero(const Expr& e, std::uint64_t seed = 0, int npoints = 16);
const char* zeroness_name(Zeroness z);

}  // namespace densops
