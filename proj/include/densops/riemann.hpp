#pragma once

#include "densops/connection.hpp"

namespace densops {

// Metric on a purely even chart, stored by its lower components.
struct Metric {
    ChartPtr chart;
    ExprMat g;

    void validate() const;  // even chart, square, symmetric
    ExprMat inverse() const;
    Expr det() const;
    Expr volume() const;  // sqrt(det g)
    // christoffel()[a][b][c] = Gamma^a_{bc}
    //   = 1/2 g^{ad} (d_b g_{dc} + d_c g_{bd} - d_d g_{bc})
    std::vector<ExprMat> christoffel() const;
};

// Volume connection of the metric volume, gamma_a = -d_a log sqrt(det g);
// equals the trace of the Levi-Civita connection.
VolConnection metric_volume_connection(const Metric& m);

// (1/2) g^{ab}-divergence of the gradient for the metric volume:
//   (1/2) (1/rho) d_a (rho g^{ab} d_b),  rho = sqrt(det g)
DensOperator laplace_beltrami(const Metric& m);

// Pencil data with S = g^{-1} and the metric volume connection; its weight-0
// member is laplace_beltrami.
PencilSpec riemannian_pencil_spec(const Metric& m);

}  // namespace densops
