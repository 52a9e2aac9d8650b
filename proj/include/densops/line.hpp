#pragma once

#include "densops/connection.hpp"

namespace densops {

// Schwarzian derivative data of a one-dimensional coordinate change,
// expressed on the target chart: S = L'' - (1/2)(L')^2 for L = log dx/dy.
Expr schwarzian(const Diffeomorphism& d);

// Potential of the singular weight operator on the line for shift 2 and
// S = 1:  U = -(1/4)(gamma' + (1/2) gamma^2).
Expr sturm_liouville_potential(const VolConnection& gamma);

// The singular weight operator itself: (1/2) d^2 + U at weight -1/2, shift 2.
DensOperator sturm_liouville_operator(const VolConnection& gamma);

// Change of the potential along a coordinate change of the line with
// source() == target(): the difference U(transform gamma) - U(gamma),
// equal to -(1/4)(X' + gamma X + (1/2) X^2) for X = transform gamma - gamma.
// At gamma = 0 it is (1/4) schwarzian.
Expr line_cocycle(const VolConnection& gamma, const Diffeomorphism& d);

// y = (a x + b)/(c x + d) on a one-dimensional chart; the inverse is exact.
Diffeomorphism mobius(const ChartPtr& chart, const Expr& a, const Expr& b, const Expr& c,
                      const Expr& d);

}  // namespace densops
