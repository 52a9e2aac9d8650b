#include "densops/density.hpp"

namespace densops {

Density Density::of(ChartPtr chart, const Rational& weight, Expr component) {
    Density d(std::move(chart));
    d.insert(weight, component);
    return d;
}

void Density::insert(const Rational& w, const Expr& e) {
    if (e.is_zero()) return;
    chart_ = unify_charts(chart_, e.chart());
    auto it = std::lower_bound(cs_.begin(), cs_.end(), w,
                               [](const auto& p, const Rational& x) { return p.first < x; });
    if (it != cs_.end() && it->first == w) {
        it->second = it->second + e;
        if (it->second.is_zero()) cs_.erase(it);
    } else {
        cs_.insert(it, {w, e});
    }
}

Expr Density::component(const Rational& w) const {
    for (const auto& [cw, e] : cs_)
        if (cw == w) return e;
    return Expr::zero(chart_);
}

const Rational& Density::weight() const {
    if (cs_.size() != 1) throw Error("density is not homogeneous in weight");
    return cs_.front().first;
}

Parity Density::parity() const {
    Parity p = Parity::Even;
    bool seen = false;
    for (const auto& [w, e] : cs_) {
        Parity q = e.parity();
        if (seen && q != p) throw ParityError("density has mixed Grassmann parity");
        p = q;
        seen = true;
    }
    return p;
}

Density Density::operator-() const {
    Density r(chart_);
    for (const auto& [w, e] : cs_) r.cs_.push_back({w, -e});
    return r;
}

Density Density::operator+(const Density& o) const {
    Density r = *this;
    r.chart_ = unify_charts(chart_, o.chart_);
    for (const auto& [w, e] : o.cs_) r.insert(w, e);
    return r;
}

Density Density::operator-(const Density& o) const { return *this + (-o); }

Density Density::operator*(const Density& o) const {
    Density r(unify_charts(chart_, o.chart_));
    for (const auto& [wa, ea] : cs_)
        for (const auto& [wb, eb] : o.cs_) r.insert(wa + wb, ea * eb);
    return r;
}

Density Density::mul_expr(const Expr& f) const {
    Density r(unify_charts(chart_, f.chart()));
    for (const auto& [w, e] : cs_) r.insert(w, f * e);
    return r;
}

Density Density::mul_rat(const Rational& c) const {
    if (c == 0) return Density(chart_);
    Density r(chart_);
    for (const auto& [w, e] : cs_) r.cs_.push_back({w, e.mul_rat(c)});
    return r;
}

bool operator==(const Density& a, const Density& b) {
    if (a.cs_.size() != b.cs_.size()) return false;
    for (size_t i = 0; i < a.cs_.size(); ++i)
        if (a.cs_[i].first != b.cs_[i].first || !(a.cs_[i].second == b.cs_[i].second))
            return false;
    return true;
}

Expr pair_integrand(const Density& a, const Density& b) {
    return (a * b).component(1);
}

Density transform_density(const Density& s, const Diffeomorphism& d) {
    if (s.chart() && s.chart() != d.source())
        throw ChartMismatch("density lives on " + s.chart()->name() + ", map starts at " +
                            d.source()->name());
    JacobianData back = jacobian(d.reversed());
    Density r(d.target());
    for (const auto& [w, e] : s.components()) {
        Expr jw;
        if (is_integer(w)) {
            jw = back.jac.pow(to_long(w));
        } else {
            if (!d.positive_jacobian())
                throw WeightError("fractional weight " + rat_str(w) +
                                  " needs a positive Jacobian; construct the map with "
                                  "positive_jacobian=true if that holds");
            jw = make_pow(back.jac, w);
        }
        r = r + Density::of(d.target(), w, d.pushforward(e) * jw);
    }
    return r;
}

}  // namespace densops
