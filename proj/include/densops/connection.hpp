#pragma once

#include "densops/pencil.hpp"

namespace densops {

// Flat connection on volume forms, stored by its lower components gamma_A.
struct VolConnection {
    ChartPtr chart;
    std::vector<Expr> comps;

    void validate() const;  // shape and parity p(gamma_A) = p(A)
};

VolConnection zero_connection(ChartPtr chart);

// gamma_A = -d_A log rho for an invertible even volume density rho
VolConnection from_volume_form(const Expr& rho);

// gamma_A = -(-1)^{p(B)} Gamma^B_{BA} for affine connection coefficients
// christoffel[a][b][c] = Gamma^a_{bc}
VolConnection from_affine(ChartPtr chart, const std::vector<ExprMat>& christoffel);

// gamma'_{A'} = (dx^A/dx'^{A'}) gamma_A - d_{A'} log J, J the Jacobian of the
// inverse coordinate change; matches from_volume_form of the pushed volume.
VolConnection transform_connection(const VolConnection& g, const Diffeomorphism& d);

VolConnection shift_connection(const VolConnection& g, const std::vector<Expr>& x_lower);
std::vector<Expr> connection_difference(const VolConnection& a, const VolConnection& b);

// div_gamma X = div X - gamma_A X^A for a vector field with upper components
// X^A, where div is the canonical divergence of the weight-zero lift.
Expr divergence_with_connection(const VolConnection& g, const std::vector<Expr>& x_upper);

// Obstruction for two connections gamma and gamma + X to induce the same
// singular weight operator for the tensor S:
//   sum_A (-1)^{p(A)(p(S)+1)} d_A (SX)^A
//   + ((delta-1)/2)(gamma_A (SX)^A + X_A (Sgamma)^A)
//   + ((delta-1)/2) X_A (SX)^A,
// which equals 4/(1-delta) times the difference of the two operators'
// constant terms. delta = 1 has no singular weight data and throws.
Expr groupoid_residual(const Rational& delta, Parity s_parity, const ExprMat& S,
                       const VolConnection& gamma, const std::vector<Expr>& x_lower);

// Defect of the residual under composing the shifts gamma -> gamma + X and
// gamma + X -> gamma + X + Y:
//   residual(gamma, X+Y) - residual(gamma, X) - residual(gamma+X, Y);
// vanishes identically for every delta != 1, S, gamma, X, Y.
Expr groupoid_cocycle_defect(const Rational& delta, Parity s_parity, const ExprMat& S,
                             const VolConnection& gamma, const std::vector<Expr>& x_lower,
                             const std::vector<Expr>& y_lower);

}  // namespace densops
