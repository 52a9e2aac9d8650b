#include "densops/connection.hpp"

namespace densops {

void VolConnection::validate() const {
    if (!chart) throw Error("connection has no chart");
    if (comps.size() != static_cast<std::size_t>(chart->n_coords()))
        throw Error("connection has the wrong shape for chart " + chart->name());
    for (VarId a : chart->coords())
        if (!comps[a].is_zero() && comps[a].parity() != chart->parity(a))
            throw ParityError("connection component has the wrong parity");
}

VolConnection zero_connection(ChartPtr chart) {
    VolConnection g;
    g.comps.assign(chart->n_coords(), Expr::zero(chart));
    g.chart = std::move(chart);
    return g;
}

VolConnection from_volume_form(const Expr& rho) {
    if (!rho.is_even()) throw ParityError("volume density must be even");
    VolConnection g = zero_connection(rho.chart());
    Expr inv = rho.inv();
    for (VarId a : g.chart->coords()) g.comps[a] = -(rho.derivative(a) * inv);
    return g;
}

VolConnection from_affine(ChartPtr chart, const std::vector<ExprMat>& christoffel) {
    int n = chart->n_coords();
    if (christoffel.size() != static_cast<std::size_t>(n))
        throw Error("affine connection has the wrong shape for chart " + chart->name());
    VolConnection g = zero_connection(chart);
    for (VarId a : chart->coords())
        for (VarId b : chart->coords()) {
            Rational s = chart->is_odd(b) ? -1 : 1;
            g.comps[a] = g.comps[a] - christoffel.at(b).at(b).at(a).mul_rat(s);
        }
    g.validate();
    return g;
}

VolConnection transform_connection(const VolConnection& g, const Diffeomorphism& d) {
    g.validate();
    if (g.chart != d.source()) throw ChartMismatch("connection lives on a different chart");
    JacobianData back = jacobian(d.reversed());
    VolConnection out = zero_connection(d.target());
    Expr logj = make_log(back.jac);
    for (VarId ap : out.chart->coords()) {
        Expr acc = Expr::zero(out.chart);
        for (VarId a : g.chart->coords()) acc = acc + back.mat[a][ap] * d.pushforward(g.comps[a]);
        out.comps[ap] = acc - logj.derivative(ap);
    }
    return out;
}

VolConnection shift_connection(const VolConnection& g, const std::vector<Expr>& x_lower) {
    if (x_lower.size() != g.comps.size()) throw Error("shift has the wrong shape");
    VolConnection out = g;
    for (std::size_t a = 0; a < out.comps.size(); ++a)
        out.comps[a] = out.comps[a] + x_lower[a];
    out.validate();
    return out;
}

std::vector<Expr> connection_difference(const VolConnection& a, const VolConnection& b) {
    if (a.chart != b.chart) throw ChartMismatch("connections live on different charts");
    std::vector<Expr> out;
    for (std::size_t i = 0; i < a.comps.size(); ++i) out.push_back(a.comps[i] - b.comps[i]);
    return out;
}

Expr divergence_with_connection(const VolConnection& g, const std::vector<Expr>& x_upper) {
    g.validate();
    const ChartPtr& ch = g.chart;
    if (x_upper.size() != static_cast<std::size_t>(ch->n_coords()))
        throw Error("vector field has the wrong shape for chart " + ch->name());
    DensOperator x_op = DensOperator::zero(ch);
    for (VarId a : ch->coords())
        if (!x_upper[a].is_zero())
            x_op = x_op + DensOperator::multiplication(x_upper[a]) * DensOperator::partial(ch, a);
    Expr out = divergence(x_op).component(0);
    for (VarId a : ch->coords()) out = out - g.comps[a] * x_upper[a];
    return out;
}

Expr groupoid_residual(const Rational& delta, Parity s_parity, const ExprMat& S,
                       const VolConnection& gamma, const std::vector<Expr>& x_lower) {
    gamma.validate();
    if (delta == 1) throw Error("weight shift 1 admits no singular weight");
    const ChartPtr& ch = gamma.chart;
    int n = ch->n_coords();
    if (x_lower.size() != static_cast<std::size_t>(n)) throw Error("shift has the wrong shape");
    auto raise = [&](const std::vector<Expr>& v) {
        std::vector<Expr> up(n, Expr::zero(ch));
        for (VarId a : ch->coords())
            for (VarId b : ch->coords()) up[a] = up[a] + S.at(a).at(b) * v[b];
        return up;
    };
    std::vector<Expr> sx = raise(x_lower), sg = raise(gamma.comps);
    Expr res = Expr::zero(ch);
    for (VarId a : ch->coords()) {
        int e = pint(ch->parity(a)) * (pint(s_parity) + 1);
        res = res + sx[a].derivative(a).mul_rat((e % 2) ? -1 : 1);
        res = res + (gamma.comps[a] * sx[a] + x_lower[a] * sg[a] + x_lower[a] * sx[a])
                        .mul_rat((delta - 1) / 2);
    }
    return res;
}

Expr groupoid_cocycle_defect(const Rational& delta, Parity s_parity, const ExprMat& S,
                             const VolConnection& gamma, const std::vector<Expr>& x_lower,
                             const std::vector<Expr>& y_lower) {
    if (x_lower.size() != y_lower.size()) throw Error("shifts have different shapes");
    std::vector<Expr> xy;
    xy.reserve(x_lower.size());
    for (std::size_t i = 0; i < x_lower.size(); ++i) xy.push_back(x_lower[i] + y_lower[i]);
    return groupoid_residual(delta, s_parity, S, gamma, xy) -
           groupoid_residual(delta, s_parity, S, gamma, x_lower) -
           groupoid_residual(delta, s_parity, S, shift_connection(gamma, x_lower), y_lower);
}

}  // namespace densops
