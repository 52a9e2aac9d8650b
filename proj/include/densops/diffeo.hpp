#pragma once

#include "densops/expr.hpp"

namespace densops {

using ExprMat = std::vector<std::vector<Expr>>;

// determinant / inverse over commuting (even) entries, cofactor expansion
Expr mat_det(const ExprMat& m);
ExprMat mat_mul(const ExprMat& a, const ExprMat& b);
ExprMat mat_inverse(const ExprMat& m);

// Berezinian of a supermatrix in block form (rows/columns ordered evens
// before odds): Ber = det(A - B D^{-1} C) / det(D)
Expr berezinian(const ExprMat& m, int n_even, int n_odd);

// Invertible coordinate change between charts of equal shape. Both directions
// are stored and verified against each other on construction. Parameters are
// shared by name and map identically.
class Diffeomorphism {
  public:
    Diffeomorphism(ChartPtr source, ChartPtr target, std::vector<Expr> forward,
                   std::vector<Expr> inverse, bool positive_jacobian = true);

    const ChartPtr& source() const { return src_; }
    const ChartPtr& target() const { return dst_; }
    // image of each target coordinate as an expression on the source chart
    const std::vector<Expr>& forward() const { return fwd_; }
    // image of each source coordinate as an expression on the target chart
    const std::vector<Expr>& inverse() const { return inv_; }
    // caller's assertion that the Jacobian (Berezinian) is positive on the
    // domain, required for non-integer density weights
    bool positive_jacobian() const { return pos_jac_; }

    std::map<VarId, Expr> forward_map() const;  // target var -> expr on source
    std::map<VarId, Expr> inverse_map() const;  // source var -> expr on target

    Expr pushforward(const Expr& f) const;  // function on source -> on target
    Expr pullback(const Expr& g) const;     // function on target -> on source

    Diffeomorphism reversed() const;
    // outer after inner; inner.target() must match outer.source()
    static Diffeomorphism compose(const Diffeomorphism& outer, const Diffeomorphism& inner);

  private:
    ChartPtr src_, dst_;
    std::vector<Expr> fwd_, inv_;
    bool pos_jac_;
};

// Jacobian of the forward map as an expression on the source chart:
// mat[A'][B] = d_B forward[A'] (left derivatives), jac = det or Berezinian.
struct JacobianData {
    ExprMat mat;
    Expr jac;
};
JacobianData jacobian(const Diffeomorphism& d);

}  // namespace densops
