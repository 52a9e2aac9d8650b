#pragma once

#include "densops/diffeo.hpp"

namespace densops {

// Finite sum of weighted components s_w(z) t^w, where t marks the coordinate
// volume element and w is the rational weight.
class Density {
  public:
    Density() = default;
    explicit Density(ChartPtr chart) : chart_(std::move(chart)) {}
    static Density of(ChartPtr chart, const Rational& weight, Expr component);

    const ChartPtr& chart() const { return chart_; }
    const std::vector<std::pair<Rational, Expr>>& components() const { return cs_; }
    bool is_zero() const { return cs_.empty(); }
    Expr component(const Rational& w) const;  // zero if absent
    bool is_homogeneous() const { return cs_.size() <= 1; }
    const Rational& weight() const;  // requires exactly one component
    Parity parity() const;           // Grassmann parity; throws if mixed

    Density operator-() const;
    Density operator+(const Density& o) const;
    Density operator-(const Density& o) const;
    Density operator*(const Density& o) const;  // weights add
    Density mul_expr(const Expr& f) const;
    Density mul_rat(const Rational& c) const;

    friend bool operator==(const Density& a, const Density& b);

  private:
    ChartPtr chart_;
    std::vector<std::pair<Rational, Expr>> cs_;  // sorted by weight, nonzero

    void insert(const Rational& w, const Expr& e);
};

// coefficient of t^1 in a*b: the part of the product that is a genuine volume
// element and can be integrated
Expr pair_integrand(const Density& a, const Density& b);

// Change coordinates: each component pushes forward and picks up the Jacobian
// of the backward map to the power of its weight. Non-integer weights require
// the diffeomorphism to assert a positive Jacobian.
Density transform_density(const Density& s, const Diffeomorphism& d);

}  // namespace densops
