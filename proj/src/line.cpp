#include "densops/line.hpp"

namespace densops {

namespace {

void check_line_chart(const ChartPtr& ch) {
    if (ch->n_even() != 1 || ch->n_odd() != 0)
        throw Error("expected a one-dimensional even chart, got " + ch->name());
}

}  // namespace

Expr schwarzian(const Diffeomorphism& d) {
    check_line_chart(d.source());
    check_line_chart(d.target());
    Expr l = make_log(jacobian(d.reversed()).jac);
    Expr l1 = l.derivative(0);
    return l1.derivative(0) - (l1 * l1).mul_rat(rat(1, 2));
}

Expr sturm_liouville_potential(const VolConnection& gamma) {
    check_line_chart(gamma.chart);
    ExprMat s = {{Expr::one(gamma.chart)}};
    return pseudoscalar(gamma.chart, 2, Parity::Even, s, gamma.comps);
}

DensOperator sturm_liouville_operator(const VolConnection& gamma) {
    check_line_chart(gamma.chart);
    ExprMat s = {{Expr::one(gamma.chart)}};
    return singular_weight_operator(
        spec_from_connection(gamma.chart, 2, Parity::Even, s, gamma.comps));
}

Expr line_cocycle(const VolConnection& gamma, const Diffeomorphism& d) {
    check_line_chart(gamma.chart);
    if (d.source() != d.target())
        throw ChartMismatch("cocycle values need a coordinate change of a single chart");
    if (gamma.chart != d.source()) throw ChartMismatch("connection lives on a different chart");
    std::vector<Expr> x = connection_difference(transform_connection(gamma, d), gamma);
    ExprMat s = {{Expr::one(gamma.chart)}};
    return groupoid_residual(2, Parity::Even, s, gamma, x).mul_rat(rat(-1, 4));
}

Diffeomorphism mobius(const ChartPtr& chart, const Expr& a, const Expr& b, const Expr& c,
                      const Expr& d) {
    check_line_chart(chart);
    Expr x = Expr::of_var(chart, 0);
    Expr fwd = (a * x + b) / (c * x + d);
    Expr inv = (d * x - b) / (a - c * x);
    return Diffeomorphism(chart, chart, {fwd}, {inv});
}

}  // namespace densops
