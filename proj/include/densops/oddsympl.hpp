#pragma once

#include "densops/connection.hpp"

namespace densops {

// Doubled chart (z^A, p_A) with momenta of the same parity as their
// coordinates, for computing canonical brackets of lifted functions.
struct CotangentChart {
    ChartPtr base;
    ChartPtr total;
    std::vector<VarId> pos;  // base coordinate id -> its id on total
    std::vector<VarId> mom;  // base coordinate id -> momentum id on total

    Expr lift(const Expr& f) const;     // rename base variables onto total
    Expr project(const Expr& f) const;  // back to base; momenta must be absent
};

CotangentChart cotangent_chart(const ChartPtr& base);

// Even canonical bracket on the doubled chart,
//   (f,g) = sum_A [ (-1)^{p(A)(p(f)+1)} df/dz^A dg/dp_A
//                   - (-1)^{p(A)p(f)}   df/dp_A dg/dz^A ].
Expr canonical_poisson(const CotangentChart& ct, const Expr& f, const Expr& g);

// H_S = 1/2 S^{AB} p_A p_B for a graded-symmetric odd tensor S on the base.
Expr master_hamiltonian(const CotangentChart& ct, const ExprMat& S);

// Odd bracket from the double commutator {f,g} = ((f,H_S),g), projected back
// to the base chart.
Expr derived_bracket(const CotangentChart& ct, const ExprMat& S, const Expr& f, const Expr& g);

// (H_S, H_S); zero exactly when the derived bracket satisfies Jacobi.
Expr jacobi_obstruction(const CotangentChart& ct, const ExprMat& S);

// The constant tensor pairing even coordinate a with odd coordinate a on an
// n|n chart: {x^a, theta_b} = delta^a_b.
ExprMat darboux_tensor(const ChartPtr& chart);

// Re-derive the bracket relations of darboux_tensor from S itself.
bool is_darboux(const CotangentChart& ct, const ExprMat& S);

// Components {f, z^A} of the odd Hamiltonian vector field of f.
std::vector<Expr> hamiltonian_field(const CotangentChart& ct, const ExprMat& S, const Expr& f);

// Odd Laplacian on functions, Delta_rho f = 1/2 div_rho grad f with
// grad f = {f, z^A} d_A; for the coordinate volume in Darboux coordinates it
// is d^2/dx^a dtheta_a.
DensOperator bv_laplacian(const CotangentChart& ct, const ExprMat& S, const Expr& rho);

// sum_a d^2/dx^a dtheta_a on an n|n chart; squares to zero and is
// self-adjoint on half-densities.
DensOperator canonical_bv_operator(const ChartPtr& chart);

// (1/sqrt B) Delta(sqrt B) for B the Berezinian of a coordinate change
// between Darboux charts; vanishes when d preserves the bracket relations.
Expr bv_identity_defect(const Diffeomorphism& d);

// Difference of the two sides of
//   -e^{F/2} Delta_rho e^{-F/2} = 1/4 div_gamma X - 1/8 {F,F},
// X the Hamiltonian field of an even F, gamma the connection of rho.
Expr bv_conjugation_defect(const CotangentChart& ct, const ExprMat& S, const Expr& rho,
                           const Expr& F);

// Residual of the arrow between the connections vanishing in the source and
// target Darboux coordinates of d: zero exactly when the two coordinate
// volumes induce the same singular weight operator.
Expr darboux_flat_defect(const Diffeomorphism& d);

// Delta_rho sqrt(rho2/rho); zero exactly for arrows of the groupoid of
// volume forms.
Expr bv_volume_arrow_defect(const CotangentChart& ct, const ExprMat& S, const Expr& rho,
                            const Expr& rho2);

// Bracket relations of darboux_tensor re-verified for the pullbacks of the
// target coordinates through d.
bool preserves_darboux(const Diffeomorphism& d);

// Cotangent-style lift of an even coordinate change to an n|n chart:
// x' = f(x), theta'_a = (dx^b/dx'^a) theta_b.
Diffeomorphism point_lift(const ChartPtr& src, const ChartPtr& dst,
                          const std::vector<Expr>& fwd_even, const std::vector<Expr>& inv_even);

// Shear x_j -> x_j + g(x_i), lifted; g must not depend on x_j.
Diffeomorphism momentum_shift(const ChartPtr& chart, VarId j, const Expr& g);

// Genuinely non-point symplectomorphism of a 3|3 chart, generated by
// K(x) theta'_1 theta'_2 theta'_3:
//   x'^a = x^a + K e_a(theta),  theta'_a = theta_a - d_a K theta_1 theta_2 theta_3
// with e_a the signed complementary pairs.
Diffeomorphism odd_cubic_map(const ChartPtr& chart, const Expr& k);

}  // namespace densops
