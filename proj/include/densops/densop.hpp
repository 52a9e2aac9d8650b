#pragma once

#include <functional>

#include "densops/density.hpp"

namespace densops {

// One summand coeff * euler^lampow * d_{v1} ... d_{vm} of an operator on
// densities. The derivative list is ascending (even ids may repeat, odd ids
// may not); reordering of odd derivatives is tracked with signs on the way in.
struct OpTerm {
    Expr coeff;
    long lampow = 0;
    std::vector<VarId> derivs;
};

// Linear differential operator on densities in the normal form
//   L = t^delta * sum_i coeff_i * euler^{k_i} * d_{I_i},
// where euler = t d/dt reads off the weight and t^delta shifts every weight
// by delta. Operators on the same chart with equal delta form an algebra
// under +; composition adds the deltas and commutes the factors into normal
// form.
class DensOperator {
  public:
    DensOperator() = default;

    static DensOperator zero(ChartPtr chart, const Rational& delta = 0);
    static DensOperator identity(ChartPtr chart);
    static DensOperator multiplication(const Expr& f);
    static DensOperator partial(ChartPtr chart, VarId v);
    static DensOperator euler(ChartPtr chart);
    static DensOperator weight_shift(ChartPtr chart, const Rational& delta);
    // normalizes: sorts, merges, drops zero coefficients
    static DensOperator from_terms(ChartPtr chart, const Rational& delta,
                                   std::vector<OpTerm> terms);

    const ChartPtr& chart() const { return chart_; }
    const Rational& delta() const { return delta_; }
    const std::vector<OpTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int order() const;           // highest number of derivatives in a term
    long lambda_degree() const;  // highest power of the Euler operator
    Parity parity() const;       // throws ParityError if terms disagree
    Expr coefficient(const std::vector<VarId>& derivs, long lampow) const;

    DensOperator operator-() const;
    DensOperator operator+(const DensOperator& o) const;  // requires equal delta
    DensOperator operator-(const DensOperator& o) const;
    DensOperator operator*(const DensOperator& o) const;  // composition
    DensOperator mul_rat(const Rational& c) const;
    DensOperator mul_expr(const Expr& f) const;  // multiplication operator from the left
    DensOperator pow(int n) const;

    Density apply(const Density& s) const;

    friend bool operator==(const DensOperator& a, const DensOperator& b);

  private:
    ChartPtr chart_;
    Rational delta_ = 0;
    std::vector<OpTerm> terms_;

    void normalize();
};

// Formal adjoint with respect to the canonical scalar product of densities:
// coordinates are self-adjoint, d_v flips sign, euler goes to 1 - euler, and
// the weight shift is self-adjoint.
DensOperator adjoint(const DensOperator& L);

// div X = -(X + adjoint(X)) for a weight-delta derivation X; the result is a
// multiplication operator, returned as the weight-delta density it multiplies
// by. Throws if X + adjoint(X) fails to be a pure multiplication.
Density divergence(const DensOperator& X);

// Canonical divergence-free lift of a weight-delta vector field to densities
// (delta = 1 has no such lift and throws).
DensOperator lie_derivative(const DensOperator& X);

// Component of an extended vector field along the Euler direction that is
// invariantly defined: X minus the projection is the lift of its coordinate
// part. Throws for delta = 1.
DensOperator vertical_projection(const DensOperator& X);

// (symmetric, antisymmetric) halves of L under the adjoint.
std::pair<DensOperator, DensOperator> split_adjoint_parts(const DensOperator& L);

// Integrand of <L a, b> - (-1)^{p(L)p(a)} <a, adjoint(L) b>; integrates to
// zero, and boundary_certificate exhibits it as a total derivative: component
// v of the certificate is the flux along coordinate v, and
// total_derivative_integrand sums d_v of the components.
Expr adjoint_defect_integrand(const DensOperator& L, const Density& a, const Density& b);
std::vector<Expr> boundary_certificate(const DensOperator& L, const Density& a,
                                       const Density& b);
Expr total_derivative_integrand(const ChartPtr& chart, const std::vector<Expr>& comps);

// Recover an operator in normal form from its action on densities, probing
// with coordinate monomials at integer weights 0..max_lamdeg and solving the
// Vandermonde system in the weight. Throws if the action does not match an
// operator within the given order and weight degree.
DensOperator reconstruct_operator(const std::function<Density(const Density&)>& action,
                                  ChartPtr chart, const Rational& delta, int max_order,
                                  long max_lamdeg);

// Conjugate L by a change of coordinates: the unique operator L' on the
// target with L'(transform s) = transform(L s).
DensOperator transform_operator(const DensOperator& L, const Diffeomorphism& d);

// Zero test over all coefficients, in the sense of check_zero.
ZeroCheck operator_zero_check(const DensOperator& L, uint64_t seed = 0);

}  // namespace densops
