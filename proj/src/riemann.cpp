#include "densops/riemann.hpp"

namespace densops {

void Metric::validate() const {
    if (!chart) throw Error("metric has no chart");
    if (chart->n_odd() != 0) throw Error("metric requires a purely even chart");
    std::size_t n = chart->n_coords();
    if (g.size() != n) throw Error("metric has the wrong shape for chart " + chart->name());
    for (std::size_t a = 0; a < n; ++a) {
        if (g[a].size() != n) throw Error("metric is not square");
        for (std::size_t b = 0; b < a; ++b)
            if (g[a][b] != g[b][a]) throw Error("metric is not symmetric");
    }
}

ExprMat Metric::inverse() const {
    validate();
    return mat_inverse(g);
}

Expr Metric::det() const {
    validate();
    return mat_det(g);
}

Expr Metric::volume() const { return make_sqrt(det()); }

std::vector<ExprMat> Metric::christoffel() const {
    validate();
    const ChartPtr& ch = chart;
    int n = ch->n_coords();
    ExprMat gi = mat_inverse(g);
    std::vector<ExprMat> out(n, ExprMat(n, std::vector<Expr>(n, Expr::zero(ch))));
    for (VarId a = 0; a < n; ++a)
        for (VarId b = 0; b < n; ++b)
            for (VarId c = 0; c < n; ++c) {
                Expr acc = Expr::zero(ch);
                for (VarId d = 0; d < n; ++d)
                    acc = acc + gi[a][d] * (g[d][c].derivative(b) + g[b][d].derivative(c) -
                                            g[b][c].derivative(d));
                out[a][b][c] = acc.mul_rat(rat(1, 2));
            }
    return out;
}

VolConnection metric_volume_connection(const Metric& m) { return from_volume_form(m.volume()); }

DensOperator laplace_beltrami(const Metric& m) {
    m.validate();
    const ChartPtr& ch = m.chart;
    Expr rho = m.volume();
    Expr rho_inv = rho.inv();
    ExprMat gi = m.inverse();
    DensOperator sum = DensOperator::zero(ch);
    for (VarId a : ch->coords())
        for (VarId b : ch->coords()) {
            if (gi[a][b].is_zero()) continue;
            sum = sum + DensOperator::multiplication(rho_inv) * DensOperator::partial(ch, a) *
                            DensOperator::multiplication(rho * gi[a][b]) *
                            DensOperator::partial(ch, b);
        }
    return sum.mul_rat(rat(1, 2));
}

PencilSpec riemannian_pencil_spec(const Metric& m) {
    return spec_from_connection(m.chart, 0, Parity::Even, m.inverse(),
                                metric_volume_connection(m).comps);
}

}  // namespace densops
