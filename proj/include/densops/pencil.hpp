#pragma once

#include "densops/densop.hpp"
#include "densops/diffeo.hpp"

namespace densops {

// Coefficient data of the canonical self-adjoint second-order operator
// family on densities: a graded-symmetric contravariant tensor S, upper
// connection components gamma^A and a scalar theta, together with the weight
// shift delta of the resulting operator and the parity of S.
struct PencilSpec {
    ChartPtr chart;
    Rational delta = 0;
    Parity s_parity = Parity::Even;
    ExprMat S;                // n_coords x n_coords
    std::vector<Expr> gamma;  // upper components gamma^A
    Expr theta;

    // zero data of the right shape
    static PencilSpec make(ChartPtr chart, const Rational& delta = 0,
                           Parity s_parity = Parity::Even);

    // checks shapes, graded symmetry S^{AB} = (-1)^{p(A)p(B)} S^{BA} and the
    // parity pattern of every entry against s_parity
    void validate() const;
};

// The operator
//   t^delta/2 ( S^{AB} d_B d_A + (-1)^{p(A)(p(S)+1)} (d_B S^{BA}) d_A
//               + (2 euler + delta - 1) gamma^A d_A
//               + euler (-1)^{p(A)(p(S)+1)} (d_A gamma^A)
//               + euler (euler + delta - 1) theta ),
// self-adjoint for the canonical scalar product by construction.
DensOperator build_pencil(const PencilSpec& spec);

// Substitute a fixed weight for the Euler operator, giving the member of the
// family acting on densities of that weight.
DensOperator restrict_to_weight(const DensOperator& pencil, const Rational& lambda);
DensOperator restrict_to_weight(const DensOperator& pencil, const Expr& lambda);

// Recover the coefficient data from a self-adjoint operator of order <= 2,
// Euler degree <= 2 and vanishing constant term; throws PatternError if the
// operator is not of the built form.
PencilSpec extract_pencil_spec(const DensOperator& P);

// The unique family member data through a given fixed-weight operator of
// order <= 2: solves for S, gamma, theta at weight lambda. The excluded
// weights throw SingularWeight with the failed condition:
//   LambdaZero  lambda = 0            (constant term carries no data)
//   MuOne       lambda + delta = 1    (theta cannot be recovered)
//   SumOne      2 lambda + delta = 1  (gamma cannot be recovered)
PencilSpec pencil_through(const DensOperator& L, const Rational& lambda);

// Transport an operator on weight-lambda densities to weight-mu densities
// along the family through it (delta = 0 only; lambda, mu outside {0, 1/2, 1}).
DensOperator weight_isomorphism(const DensOperator& L, const Rational& lambda,
                                const Rational& mu);

// The weight at which the family member is independent of gamma itself and
// depends only on the divergence class of gamma.
Rational singular_weight(const Rational& delta);

// Data built from lower connection components: gamma^A = S^{AB} gamma_B,
// theta = gamma_A S^{AB} gamma_B.
PencilSpec spec_from_connection(ChartPtr chart, const Rational& delta, Parity s_parity,
                                const ExprMat& S, const std::vector<Expr>& gamma_lower);

// Family member at the singular weight.
DensOperator singular_weight_operator(const PencilSpec& spec);

// Scalar ((1-delta)/4)(sum_A (-1)^{p(A)(p(S)+1)} d_A gamma^A
//                      + ((delta-1)/2) gamma_A gamma^A)
// with gamma^A = S^{AB} gamma_B; equals the constant term of the singular
// weight operator built from the same connection.
Expr pseudoscalar(const ChartPtr& chart, const Rational& delta, Parity s_parity,
                  const ExprMat& S, const std::vector<Expr>& gamma_lower);

// Component transformation laws of the coefficient data on even charts, with
// J the Jacobian determinant and x^{a'}_a = d_a x^{a'}:
//   S'^{a'b'} = J^{-delta} x^{a'}_a x^{b'}_b S^{ab}
//   gamma'^{a'} = J^{-delta} x^{a'}_a (gamma^a + S^{ab} d_b log J)
//   theta' = J^{-delta} (theta + 2 gamma^a d_a log J
//                        + d_a log J S^{ab} d_b log J);
// agrees with extract_pencil_spec of the transformed operator.
PencilSpec transform_pencil_spec(const PencilSpec& sp, const Diffeomorphism& d);

}  // namespace densops
