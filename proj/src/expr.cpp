#include "densops/expr.hpp"

#include <bit>
#include <cmath>
#include <random>

namespace densops {

int koszul_sign(std::uint64_t a, std::uint64_t b) {
    if (a & b) return 0;
    int inversions = 0;
    std::uint64_t bb = b;
    while (bb) {
        int y = std::countr_zero(bb);
        bb &= bb - 1;
        inversions += std::popcount(a >> (y + 1));
    }
    return (inversions & 1) ? -1 : 1;
}

Expr::Expr(ChartPtr chart, const Rational& c) : chart_(std::move(chart)) {
    if (c != 0) ts_.emplace_back(0, RatFunc(c));
}

Expr Expr::of_var(const ChartPtr& chart, VarId v) {
    chart->check_var(v);
    Expr e;
    e.chart_ = chart;
    if (chart->is_odd(v))
        e.ts_.emplace_back(std::uint64_t(1) << chart->odd_index(v), RatFunc::one());
    else
        e.ts_.emplace_back(0, RatFunc::of_var(v));
    return e;
}

Expr Expr::of_ratfunc(ChartPtr chart, RatFunc f) {
    if (chart) {
        std::set<VarId> vars;
        f.collect_vars(vars);
        for (VarId v : vars)
            if (chart->is_odd(v))
                throw ParityError("odd variable inside a scalar coefficient");
    }
    Expr e;
    e.chart_ = std::move(chart);
    if (!f.is_zero()) e.ts_.emplace_back(0, std::move(f));
    return e;
}

bool Expr::is_constant() const {
    if (ts_.empty()) return true;
    return ts_.size() == 1 && ts_[0].first == 0 && ts_[0].second.is_constant();
}

bool Expr::is_one() const {
    return ts_.size() == 1 && ts_[0].first == 0 && ts_[0].second.is_poly() &&
           ts_[0].second.num().is_one();
}

const Rational& Expr::constant_value() const {
    static const Rational z(0);
    if (ts_.empty()) return z;
    if (!is_constant()) throw Error("constant_value on non-constant expression");
    return ts_[0].second.constant_value();
}

RatFunc Expr::coeff(std::uint64_t mask) const {
    for (const auto& t : ts_)
        if (t.first == mask) return t.second;
    return RatFunc();
}

Expr Expr::soul() const {
    Expr e;
    e.chart_ = chart_;
    for (const auto& t : ts_)
        if (t.first != 0) e.ts_.push_back(t);
    return e;
}

Expr Expr::even_part() const {
    Expr e;
    e.chart_ = chart_;
    for (const auto& t : ts_)
        if (std::popcount(t.first) % 2 == 0) e.ts_.push_back(t);
    return e;
}

Expr Expr::odd_part() const {
    Expr e;
    e.chart_ = chart_;
    for (const auto& t : ts_)
        if (std::popcount(t.first) % 2 == 1) e.ts_.push_back(t);
    return e;
}

Parity Expr::parity() const {
    if (ts_.empty()) return Parity::Even;
    int p = std::popcount(ts_[0].first) % 2;
    for (const auto& t : ts_)
        if (std::popcount(t.first) % 2 != p)
            throw ParityError("expression has mixed parity");
    return p ? Parity::Odd : Parity::Even;
}

bool Expr::is_even() const {
    for (const auto& t : ts_)
        if (std::popcount(t.first) % 2 != 0) return false;
    return true;
}

bool Expr::is_odd() const {
    for (const auto& t : ts_)
        if (std::popcount(t.first) % 2 != 1) return false;
    return true;
}

Expr Expr::operator-() const {
    Expr e = *this;
    for (auto& t : e.ts_) t.second = -t.second;
    return e;
}

Expr Expr::operator+(const Expr& o) const {
    Expr out;
    out.chart_ = unify_charts(chart_, o.chart_);
    std::size_t i = 0, j = 0;
    while (i < ts_.size() || j < o.ts_.size()) {
        if (j >= o.ts_.size() || (i < ts_.size() && ts_[i].first < o.ts_[j].first)) {
            out.ts_.push_back(ts_[i++]);
        } else if (i >= ts_.size() || o.ts_[j].first < ts_[i].first) {
            out.ts_.push_back(o.ts_[j++]);
        } else {
            RatFunc s = ts_[i].second + o.ts_[j].second;
            if (!s.is_zero()) out.ts_.emplace_back(ts_[i].first, std::move(s));
            ++i, ++j;
        }
    }
    return out;
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

Expr Expr::from_terms(ChartPtr chart, std::map<std::uint64_t, RatFunc>&& acc) {
    Expr out;
    out.chart_ = std::move(chart);
    for (auto& [m, c] : acc)
        if (!c.is_zero()) out.ts_.emplace_back(m, std::move(c));
    return out;
}

Expr Expr::operator*(const Expr& o) const {
    ChartPtr ch = unify_charts(chart_, o.chart_);
    std::map<std::uint64_t, RatFunc> acc;
    for (const auto& a : ts_)
        for (const auto& b : o.ts_) {
            int s = koszul_sign(a.first, b.first);
            if (s == 0) continue;
            RatFunc c = a.second * b.second;
            if (s < 0) c = -c;
            auto it = acc.find(a.first | b.first);
            if (it == acc.end())
                acc.emplace(a.first | b.first, std::move(c));
            else
                it->second = it->second + c;
        }
    return from_terms(std::move(ch), std::move(acc));
}

Expr Expr::mul_rat(const Rational& c) const {
    if (c == 0) return Expr::zero(chart_);
    Expr e = *this;
    for (auto& t : e.ts_) t.second = t.second.mul_rat(c);
    return e;
}

Expr Expr::mul_coeff(const RatFunc& f) const {
    if (f.is_zero()) return Expr::zero(chart_);
    Expr e;
    e.chart_ = chart_;
    for (const auto& t : ts_) {
        RatFunc c = t.second * f;
        if (!c.is_zero()) e.ts_.emplace_back(t.first, std::move(c));
    }
    return e;
}

Expr Expr::pow(long e) const {
    if (e < 0) return inv().pow(-e);
    Expr r = Expr::one(chart_);
    Expr b = *this;
    while (e > 0) {
        if (e & 1) r = r * b;
        if (e >>= 1) b = b * b;
    }
    return r;
}

Expr Expr::inv() const {
    RatFunc b = body();
    if (b.is_zero()) throw DivisionError("inverse of an expression with nilpotent body");
    RatFunc bi = b.inv();
    Expr ratio = soul().mul_coeff(bi);
    Expr series = Expr::one(chart_);
    Expr p = Expr::one(chart_);
    int sign = 1;
    for (int k = 1; k <= 64; ++k) {
        p = p * ratio;
        if (p.is_zero()) break;
        sign = -sign;
        series = series + p.mul_rat(Rational(sign));
    }
    return series.mul_coeff(bi);
}

Expr Expr::operator/(const Expr& o) const { return *this * o.inv(); }

Expr Expr::derivative(VarId v) const {
    if (!chart_) return Expr::zero(chart_);
    chart_->check_var(v);
    if (chart_->is_param(v)) throw Error("derivative with respect to a parameter");
    Expr out;
    out.chart_ = chart_;
    if (!chart_->is_odd(v)) {
        for (const auto& t : ts_) {
            RatFunc d = t.second.derivative(v);
            if (!d.is_zero()) out.ts_.emplace_back(t.first, std::move(d));
        }
        return out;
    }
    std::uint64_t bit = std::uint64_t(1) << chart_->odd_index(v);
    std::map<std::uint64_t, RatFunc> acc;
    for (const auto& t : ts_) {
        if (!(t.first & bit)) continue;
        int sign = (std::popcount(t.first & (bit - 1)) & 1) ? -1 : 1;
        acc.emplace(t.first & ~bit, sign < 0 ? -t.second : t.second);
    }
    return from_terms(chart_, std::move(acc));
}

bool Expr::depends_on(VarId v) const {
    if (!chart_) return false;
    if (chart_->is_odd(v)) {
        std::uint64_t bit = std::uint64_t(1) << chart_->odd_index(v);
        for (const auto& t : ts_)
            if (t.first & bit) return true;
        return false;
    }
    for (const auto& t : ts_)
        if (t.second.depends_on(v)) return true;
    return false;
}

void Expr::collect_vars(std::set<VarId>& out) const {
    for (const auto& t : ts_) {
        t.second.collect_vars(out);
        std::uint64_t m = t.first;
        while (m) {
            int i = std::countr_zero(m);
            m &= m - 1;
            out.insert(chart_->odd_var(i));
        }
    }
}

bool Expr::atom_free() const {
    for (const auto& t : ts_)
        if (!t.second.atom_free()) return false;
    return true;
}

Expr eval_poly_at(const Poly& p, const std::function<Expr(VarId)>& val, const ChartPtr& target) {
    Expr out = Expr::zero(target);
    for (const auto& t : p.terms()) {
        Expr m = Expr::constant(target, t.second);
        for (const auto& f : t.first.factors()) {
            Expr g;
            if (f.g.is_var()) {
                g = val(f.g.var);
            } else {
                const Atom& at = *f.g.atom;
                auto eval_rf = [&](const RatFunc& r) {
                    Expr nu = eval_poly_at(r.num(), val, target);
                    if (r.den().is_one()) return nu;
                    return nu / eval_poly_at(r.den(), val, target);
                };
                switch (at.kind) {
                    case AtomKind::Exp:
                        g = make_exp(eval_rf(at.arg));
                        break;
                    case AtomKind::Log:
                        g = make_log(eval_rf(at.arg));
                        break;
                    case AtomKind::Pow:
                        g = make_pow(eval_rf(at.arg), at.expo);
                        break;
                }
            }
            m = m * g.pow(f.e);
        }
        out = out + m;
    }
    return out;
}

Expr Expr::substitute(const std::map<VarId, Expr>& map, const ChartPtr& target) const {
    if (!chart_) {
        Expr out = *this;
        out.chart_ = target;
        return out;
    }
    for (VarId v = 0; v < chart_->n_vars(); ++v)
        if (map.find(v) == map.end())
            throw Error("substitute: no image for variable " + chart_->var_name(v));
    auto val = [&](VarId v) -> Expr { return map.at(v); };
    Expr out = Expr::zero(target);
    for (const auto& t : ts_) {
        Expr nu = eval_poly_at(t.second.num(), val, target);
        Expr r = t.second.den().is_one() ? nu : nu / eval_poly_at(t.second.den(), val, target);
        std::uint64_t m = t.first;
        while (m) {
            int i = std::countr_zero(m);
            m &= m - 1;
            r = r * map.at(chart_->odd_var(i));
        }
        out = out + r;
    }
    return out;
}

int compare(const Expr& a, const Expr& b) {
    std::string an = a.chart_ ? a.chart_->name() : "";
    std::string bn = b.chart_ ? b.chart_->name() : "";
    if (an != bn) return an < bn ? -1 : 1;
    std::size_t i = 0;
    for (; i < a.ts_.size() && i < b.ts_.size(); ++i) {
        if (a.ts_[i].first != b.ts_[i].first) return a.ts_[i].first < b.ts_[i].first ? -1 : 1;
        int c = compare(a.ts_[i].second, b.ts_[i].second);
        if (c != 0) return c;
    }
    if (i < a.ts_.size()) return 1;
    if (i < b.ts_.size()) return -1;
    return 0;
}

bool operator==(const Expr& a, const Expr& b) {
    // charts may differ as objects; equality is term equality on unifiable charts
    unify_charts(a.chart_, b.chart_);
    if (a.ts_.size() != b.ts_.size()) return false;
    for (std::size_t i = 0; i < a.ts_.size(); ++i)
        if (a.ts_[i].first != b.ts_[i].first || !(a.ts_[i].second == b.ts_[i].second))
            return false;
    return true;
}

std::size_t Expr::hash() const {
    std::size_t h = 0x5e11;
    for (const auto& t : ts_) {
        hash_mix(h, static_cast<std::size_t>(t.first));
        hash_mix(h, t.second.hash());
    }
    return h;
}

// ---------------------------------------------------------------------------
// analytic functions via soul expansion

Expr make_exp(const Expr& e) {
    RatFunc b = e.body();
    Expr series = Expr::one(e.chart());
    Expr soul = e.soul();
    Expr p = Expr::one(e.chart());
    Rational kfact(1);
    for (int k = 1; k <= 64; ++k) {
        p = p * soul;
        if (p.is_zero()) break;
        kfact *= k;
        series = series + p.mul_rat(1 / kfact);
    }
    return series.mul_coeff(atom_exp(b));
}

Expr make_log(const Expr& e) {
    RatFunc b = e.body();
    if (b.is_zero()) throw DivisionError("log of an expression with nilpotent body");
    Expr ratio = e.soul().mul_coeff(b.inv());
    Expr series = Expr::zero(e.chart());
    Expr p = Expr::one(e.chart());
    int sign = -1;
    for (int k = 1; k <= 64; ++k) {
        p = p * ratio;
        if (p.is_zero()) break;
        sign = -sign;
        series = series + p.mul_rat(Rational(sign, k));
    }
    return Expr::of_ratfunc(e.chart(), atom_log(b)) + series;
}

Expr make_pow(const Expr& e, const Rational& r) {
    if (is_integer(r)) return e.pow(to_long(r));
    RatFunc b = e.body();
    if (b.is_zero()) throw DivisionError("fractional power of an expression with nilpotent body");
    Expr ratio = e.soul().mul_coeff(b.inv());
    Expr series = Expr::one(e.chart());
    Expr p = Expr::one(e.chart());
    for (long k = 1; k <= 64; ++k) {
        p = p * ratio;
        if (p.is_zero()) break;
        series = series + p.mul_rat(rat_binom(r, k));
    }
    return series.mul_coeff(atom_pow(b, r));
}

Expr make_sqrt(const Expr& e) { return make_pow(e, rat(1, 2)); }

// ---------------------------------------------------------------------------
// zero checking

namespace {

struct EvalScale {
    long double val = 0;
    long double scale = 0;
    bool ok = true;
};

EvalScale eval_poly_scaled(const Poly& p, const NumPoint& pt) {
    EvalScale out;
    for (const auto& t : p.terms()) {
        long double v = static_cast<long double>(t.second.get_d());
        for (const auto& f : t.first.factors()) {
            long double g = f.g.is_var() ? pt.var(f.g.var) : f.g.atom->evalf(pt);
            v *= std::pow(g, static_cast<long double>(f.e));
        }
        if (!std::isfinite(v)) {
            out.ok = false;
            return out;
        }
        out.val += v;
        out.scale += std::fabs(v);
    }
    return out;
}

}  // namespace

const char* zeroness_name(Zeroness z) {
    switch (z) {
        case Zeroness::Zero:
            return "zero";
        case Zeroness::NonZero:
            return "nonzero";
        case Zeroness::ProbablyZero:
            return "probably-zero";
    }
    return "?";
}

ZeroCheck check_zero(const Expr& e, std::uint64_t seed, int npoints) {
    if (e.is_zero()) return {Zeroness::Zero, ""};
    if (e.atom_free()) return {Zeroness::NonZero, "structurally nonzero"};
    std::set<VarId> vars;
    for (const auto& t : e.terms()) t.second.collect_vars(vars);
    VarId maxv = -1;
    for (VarId v : vars) maxv = std::max(maxv, v);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<int> dnum(1, 40);
    std::uniform_int_distribution<int> dden(1, 12);
    int done = 0, attempts = 0;
    while (done < npoints && attempts < npoints * 8) {
        ++attempts;
        NumPoint pt;
        pt.vals.assign(static_cast<std::size_t>(maxv + 1), 1.0L);
        for (VarId v : vars)
            pt.vals[static_cast<std::size_t>(v)] =
                static_cast<long double>(dnum(rng)) / static_cast<long double>(dden(rng));
        bool bad = false;
        for (const auto& t : e.terms()) {
            EvalScale nu = eval_poly_scaled(t.second.num(), pt);
            EvalScale de = eval_poly_scaled(t.second.den(), pt);
            if (!nu.ok || !de.ok || std::fabs(de.val) < 1e-14L * std::max(1.0L, de.scale)) {
                bad = true;
                break;
            }
            long double val = nu.val / de.val;
            long double scale = nu.scale / std::fabs(de.val);
            if (std::fabs(val) > 1e-8L * std::max(1.0L, scale)) {
                std::string d = "nonzero at sampled point (|value| ~ " +
                                std::to_string(static_cast<double>(std::fabs(val))) + ")";
                return {Zeroness::NonZero, d};
            }
        }
        if (!bad) ++done;
    }
    if (done == 0) return {Zeroness::NonZero, "no valid sample points found"};
    return {Zeroness::ProbablyZero, std::to_string(done) + " sample points"};
}

}  // namespace densops
