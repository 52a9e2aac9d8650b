#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "densops/base.hpp"

namespace densops {

struct Atom;
using AtomPtr = std::shared_ptr<const Atom>;
class Poly;
class RatFunc;

enum class AtomKind : int { Exp = 0, Log = 1, Pow = 2 };

// A commuting generator of the coefficient ring: an even variable/parameter or
// an opaque atom (exp/log/fractional power of an even argument).
struct Gen {
    VarId var = -1;
    AtomPtr atom;

    bool is_var() const { return var >= 0; }
    static Gen of_var(VarId v) { return Gen{v, nullptr}; }
    static Gen of_atom(AtomPtr a) { return Gen{-1, std::move(a)}; }
};

int compare(const Gen& a, const Gen& b);
bool operator==(const Gen& a, const Gen& b);
std::size_t gen_hash(const Gen& g);

struct GenPow {
    Gen g;
    int e = 1;  // > 0
};

// Product of generator powers; generators strictly increasing.
class Monomial {
public:
    Monomial() = default;
    explicit Monomial(std::vector<GenPow> factors);  // sorts and merges
    static Monomial one() { return Monomial(); }
    static Monomial of_var(VarId v, int e = 1);

    bool is_one() const { return fs_.empty(); }
    const std::vector<GenPow>& factors() const { return fs_; }
    long total_degree() const;
    int exponent_of_var(VarId v) const;

    friend int compare(const Monomial& a, const Monomial& b);
    friend bool operator==(const Monomial& a, const Monomial& b);
    std::size_t hash() const;

    static Monomial gcd(const Monomial& a, const Monomial& b);
    // a / b; throws DivisionError when not divisible
    static Monomial quotient(const Monomial& a, const Monomial& b);

private:
    std::vector<GenPow> fs_;
};

struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

// Numeric point for the randomized zero test: values for every variable id.
struct NumPoint {
    std::vector<long double> vals;
    long double var(VarId v) const { return vals.at(static_cast<std::size_t>(v)); }
};

// Sparse polynomial with rational coefficients over Gen generators, treated
// as a free commutative ring (multiplication concatenates factors; atom merge
// rules such as exp(u)exp(v) = exp(u+v) are applied by RatFunc, where results
// like exp(-log x) = 1/x are representable).
// Terms are sorted by decreasing monomial; no zero coefficients.
class Poly {
public:
    Poly() = default;
    explicit Poly(const Rational& c);
    static Poly zero() { return Poly(); }
    static Poly one() { return Poly(Rational(1)); }
    static Poly of_var(VarId v, int e = 1);
    static Poly of_atom(AtomPtr a);
    static Poly of_term(Monomial m, Rational c);

    bool is_zero() const { return ts_.empty(); }
    bool is_constant() const;
    bool is_one() const;
    const Rational& constant_value() const;  // requires is_constant
    const std::vector<std::pair<Monomial, Rational>>& terms() const { return ts_; }
    const Monomial& leading_monomial() const { return ts_.front().first; }
    const Rational& leading_coeff() const { return ts_.front().second; }
    std::size_t n_terms() const { return ts_.size(); }
    long total_degree() const;
    int degree_in(const Gen& g) const;

    Poly operator-() const;
    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly mul_rat(const Rational& c) const;
    Poly pow(long e) const;  // e >= 0

    RatFunc derivative(VarId v) const;
    // derivative when no atom in this polynomial depends on v (stays a Poly)
    Poly derivative_poly(VarId v) const;
    bool atom_free() const;
    bool depends_on(VarId v) const;
    void collect_vars(std::set<VarId>& out) const;
    void collect_atoms(std::vector<AtomPtr>& out) const;

    friend int compare(const Poly& a, const Poly& b);
    friend bool operator==(const Poly& a, const Poly& b);
    std::size_t hash() const;

    // rational content (positive; leading sign stays in the primitive part)
    Rational content() const;
    Poly primitive_part() const;  // this / content()

    long double evalf(const NumPoint& pt) const;

    static void accumulate(std::map<Monomial, Rational, MonoLess>& acc, const Monomial& m,
                           const Rational& c);
    static Poly from_map(std::map<Monomial, Rational, MonoLess>&& acc);

private:
    std::vector<std::pair<Monomial, Rational>> ts_;
};

Poly gcd(const Poly& a, const Poly& b);
Poly exact_div(const Poly& a, const Poly& b);
std::optional<Poly> try_nth_root(const Poly& p, long n);

// Normalized fraction of polynomials: atom products merged to canonical form,
// gcd-cancelled, denominator monic, and no exp/pow atom in the denominator's
// monomial content (those flip into the numerator via exp(-u) / pow(u, 1-f)).
class RatFunc {
public:
    RatFunc() : de_(Poly::one()) {}
    explicit RatFunc(const Rational& c) : nu_(Poly(c)), de_(Poly::one()) {}
    explicit RatFunc(Poly p) : nu_(std::move(p)), de_(Poly::one()) {}
    RatFunc(Poly nu, Poly de);  // normalizes; throws DivisionError on zero de

    static RatFunc zero() { return RatFunc(); }
    static RatFunc one() { return RatFunc(Rational(1)); }
    static RatFunc of_var(VarId v) { return RatFunc(Poly::of_var(v)); }

    const Poly& num() const { return nu_; }
    const Poly& den() const { return de_; }
    bool is_zero() const { return nu_.is_zero(); }
    bool is_constant() const { return nu_.is_constant() && de_.is_one(); }
    bool is_poly() const { return de_.is_one(); }
    const Rational& constant_value() const { return nu_.constant_value(); }

    RatFunc operator-() const;
    RatFunc operator+(const RatFunc& o) const;
    RatFunc operator-(const RatFunc& o) const;
    RatFunc operator*(const RatFunc& o) const;
    RatFunc operator/(const RatFunc& o) const;
    RatFunc mul_rat(const Rational& c) const;
    RatFunc pow(long e) const;  // any integer
    RatFunc inv() const;

    RatFunc derivative(VarId v) const;
    bool atom_free() const { return nu_.atom_free() && de_.atom_free(); }
    bool depends_on(VarId v) const { return nu_.depends_on(v) || de_.depends_on(v); }
    void collect_vars(std::set<VarId>& out) const;
    void collect_atoms(std::vector<AtomPtr>& out) const;

    friend int compare(const RatFunc& a, const RatFunc& b);
    friend bool operator==(const RatFunc& a, const RatFunc& b);
    std::size_t hash() const;

    long double evalf(const NumPoint& pt) const;

private:
    void normalize();
    Poly nu_, de_;
};

struct Atom {
    AtomKind kind;
    RatFunc arg;      // Exp: any even body; Log/Pow: primitive polynomial
    Rational expo;    // Pow only, in (0,1)
    std::size_t h = 0;

    Atom(AtomKind k, RatFunc a, Rational e);
    RatFunc derivative(VarId v) const;
    bool depends_on(VarId v) const { return arg.depends_on(v); }
    long double evalf(const NumPoint& pt) const;
};

int compare(const Atom& a, const Atom& b);

// Body-level smart constructors (arguments must not involve odd variables;
// the Grassmann layer expands souls before calling these).
// Canonical constructors. exp extracts rational multiples of logarithms
// (exp(c*log u + v) = u^c * exp(v)), log distributes over factorizations, and
// pow takes exact roots where they exist.
RatFunc atom_exp(const RatFunc& u);
RatFunc atom_log(const RatFunc& u);
RatFunc atom_pow(const RatFunc& u, const Rational& r);

}  // namespace densops
