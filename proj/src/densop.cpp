#include "densops/densop.hpp"

#include <algorithm>
#include <map>

namespace densops {

namespace {

bool term_key_less(const OpTerm& a, const OpTerm& b) {
    if (a.derivs != b.derivs) return a.derivs < b.derivs;
    return a.lampow < b.lampow;
}

// Prepend d_v to the ascending list I: returns the merged list and the sign
// from moving d_v past the odd derivatives below it, or nullopt if v is odd
// and already present (d_v d_v = 0).
std::optional<std::pair<std::vector<VarId>, int>> insert_deriv(const Chart& ch,
                                                               const std::vector<VarId>& I,
                                                               VarId v) {
    int sign = 1;
    if (ch.is_odd(v)) {
        for (VarId w : I) {
            if (w == v) return std::nullopt;
            if (w < v && ch.is_odd(w)) sign = -sign;
        }
    }
    std::vector<VarId> out = I;
    out.insert(std::upper_bound(out.begin(), out.end(), v), v);
    return std::make_pair(std::move(out), sign);
}

// terms := d_v o terms (coefficients split by parity for the Leibniz sign)
std::vector<OpTerm> d_left(const ChartPtr& chart, VarId v, const std::vector<OpTerm>& R) {
    std::vector<OpTerm> out;
    const Parity pv = chart->parity(v);
    for (const OpTerm& t : R) {
        for (Parity pc : {Parity::Even, Parity::Odd}) {
            Expr part = pc == Parity::Even ? t.coeff.even_part() : t.coeff.odd_part();
            if (part.is_zero()) continue;
            Expr dpart = part.derivative(v);
            if (!dpart.is_zero()) out.push_back({dpart, t.lampow, t.derivs});
            if (auto ins = insert_deriv(*chart, t.derivs, v)) {
                int sign = ins->second;
                if (pv == Parity::Odd && pc == Parity::Odd) sign = -sign;
                out.push_back({sign < 0 ? -part : part, t.lampow, std::move(ins->first)});
            }
        }
    }
    return out;
}

// terms := (shift + euler)^k applied on top of each term's euler power
void lambda_poly_left(std::vector<OpTerm>& io, long k, const Rational& shift) {
    if (k == 0) return;
    std::vector<OpTerm> out;
    for (const OpTerm& t : io) {
        for (long j = 0; j <= k; ++j) {
            Rational c = rat_binom(k, j) * rat_pow(shift, k - j);
            if (c == 0) continue;
            out.push_back({t.coeff.mul_rat(c), t.lampow + j, t.derivs});
        }
    }
    io = std::move(out);
}

Parity term_parity(const Chart& ch, const OpTerm& t) {
    Parity p = t.coeff.parity();
    for (VarId v : t.derivs) p = p + ch.parity(v);
    return p;
}

}  // namespace

DensOperator DensOperator::zero(ChartPtr chart, const Rational& delta) {
    DensOperator L;
    L.chart_ = std::move(chart);
    L.delta_ = delta;
    return L;
}

DensOperator DensOperator::identity(ChartPtr chart) {
    return multiplication(Expr::one(std::move(chart)));
}

DensOperator DensOperator::multiplication(const Expr& f) {
    DensOperator L;
    L.chart_ = f.chart();
    if (!f.is_zero()) L.terms_.push_back({f, 0, {}});
    return L;
}

DensOperator DensOperator::partial(ChartPtr chart, VarId v) {
    chart->check_var(v);
    if (chart->is_param(v)) throw Error("cannot differentiate along the parameter " +
                                        chart->var_name(v));
    DensOperator L;
    L.terms_.push_back({Expr::one(chart), 0, {v}});
    L.chart_ = std::move(chart);
    return L;
}

DensOperator DensOperator::euler(ChartPtr chart) {
    DensOperator L;
    L.terms_.push_back({Expr::one(chart), 1, {}});
    L.chart_ = std::move(chart);
    return L;
}

DensOperator DensOperator::weight_shift(ChartPtr chart, const Rational& delta) {
    DensOperator L = identity(std::move(chart));
    L.delta_ = delta;
    return L;
}

DensOperator DensOperator::from_terms(ChartPtr chart, const Rational& delta,
                                      std::vector<OpTerm> terms) {
    DensOperator L;
    L.chart_ = std::move(chart);
    L.delta_ = delta;
    L.terms_ = std::move(terms);
    for (OpTerm& t : L.terms_) {
        if (t.coeff.chart() && t.coeff.chart() != L.chart_)
            throw ChartMismatch("operator coefficient lives on a different chart");
        if (t.lampow < 0) throw Error("negative power of the Euler operator");
        for (std::size_t i = 0; i < t.derivs.size(); ++i) {
            L.chart_->check_var(t.derivs[i]);
            if (L.chart_->is_param(t.derivs[i]))
                throw Error("cannot differentiate along the parameter " +
                            L.chart_->var_name(t.derivs[i]));
            if (i > 0 && t.derivs[i] < t.derivs[i - 1])
                throw Error("derivative list must be ascending");
            if (i > 0 && t.derivs[i] == t.derivs[i - 1] && L.chart_->is_odd(t.derivs[i]))
                throw Error("repeated odd derivative vanishes");
        }
    }
    L.normalize();
    return L;
}

void DensOperator::normalize() {
    std::sort(terms_.begin(), terms_.end(), term_key_less);
    std::vector<OpTerm> out;
    for (OpTerm& t : terms_) {
        if (!out.empty() && out.back().derivs == t.derivs && out.back().lampow == t.lampow) {
            out.back().coeff = out.back().coeff + t.coeff;
            if (out.back().coeff.is_zero()) out.pop_back();
        } else if (!t.coeff.is_zero()) {
            out.push_back(std::move(t));
        }
    }
    terms_ = std::move(out);
}

int DensOperator::order() const {
    std::size_t m = 0;
    for (const OpTerm& t : terms_) m = std::max(m, t.derivs.size());
    return static_cast<int>(m);
}

long DensOperator::lambda_degree() const {
    long m = 0;
    for (const OpTerm& t : terms_) m = std::max(m, t.lampow);
    return m;
}

Parity DensOperator::parity() const {
    Parity p = Parity::Even;
    bool seen = false;
    for (const OpTerm& t : terms_) {
        Parity q = term_parity(*chart_, t);
        if (seen && q != p) throw ParityError("operator has terms of both parities");
        p = q;
        seen = true;
    }
    return p;
}

Expr DensOperator::coefficient(const std::vector<VarId>& derivs, long lampow) const {
    for (const OpTerm& t : terms_)
        if (t.derivs == derivs && t.lampow == lampow) return t.coeff;
    return Expr::zero(chart_);
}

DensOperator DensOperator::operator-() const { return mul_rat(-1); }

DensOperator DensOperator::operator+(const DensOperator& o) const {
    if (is_zero() && terms_.empty() && !chart_) return o;
    DensOperator L;
    L.chart_ = unify_charts(chart_, o.chart_);
    if (delta_ != o.delta_ && !is_zero() && !o.is_zero())
        throw Error("cannot add operators shifting the weight by " + rat_str(delta_) +
                    " and " + rat_str(o.delta_));
    L.delta_ = is_zero() ? o.delta_ : delta_;
    L.terms_ = terms_;
    L.terms_.insert(L.terms_.end(), o.terms_.begin(), o.terms_.end());
    L.normalize();
    return L;
}

DensOperator DensOperator::operator-(const DensOperator& o) const { return *this + (-o); }

DensOperator DensOperator::mul_rat(const Rational& c) const {
    DensOperator L = zero(chart_, delta_);
    if (c == 0) return L;
    for (const OpTerm& t : terms_) L.terms_.push_back({t.coeff.mul_rat(c), t.lampow, t.derivs});
    return L;
}

DensOperator DensOperator::mul_expr(const Expr& f) const {
    DensOperator L = zero(unify_charts(chart_, f.chart()), delta_);
    for (const OpTerm& t : terms_) L.terms_.push_back({f * t.coeff, t.lampow, t.derivs});
    L.normalize();
    return L;
}

DensOperator DensOperator::operator*(const DensOperator& o) const {
    ChartPtr ch = unify_charts(chart_, o.chart_);
    DensOperator L = zero(ch, delta_ + o.delta_);
    for (const OpTerm& ta : terms_) {
        // the Euler powers of the left factor pass the right factor's weight
        // shift: euler t^d = t^d (euler + d)
        std::vector<OpTerm> R = o.terms_;
        for (auto it = ta.derivs.rbegin(); it != ta.derivs.rend(); ++it)
            R = d_left(ch, *it, R);
        lambda_poly_left(R, ta.lampow, o.delta_);
        for (OpTerm& t : R)
            L.terms_.push_back({ta.coeff * t.coeff, t.lampow, std::move(t.derivs)});
    }
    L.normalize();
    return L;
}

DensOperator DensOperator::pow(int n) const {
    if (n < 0) throw Error("negative operator power");
    DensOperator r = identity(chart_);
    for (int i = 0; i < n; ++i) r = r * *this;
    return r;
}

Density DensOperator::apply(const Density& s) const {
    if (s.chart() && chart_ && s.chart() != chart_)
        throw ChartMismatch("density on " + s.chart()->name() + ", operator on " +
                            chart_->name());
    Density out(chart_);
    for (const auto& [w, e] : s.components()) {
        Expr acc = Expr::zero(chart_);
        for (const OpTerm& t : terms_) {
            Expr d = e;
            for (auto it = t.derivs.rbegin(); it != t.derivs.rend(); ++it)
                d = d.derivative(*it);
            if (d.is_zero()) continue;
            acc = acc + (t.coeff * d).mul_rat(rat_pow(w, t.lampow));
        }
        if (!acc.is_zero()) out = out + Density::of(chart_, w + delta_, acc);
    }
    return out;
}

bool operator==(const DensOperator& a, const DensOperator& b) {
    if (a.delta_ != b.delta_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
        const OpTerm &x = a.terms_[i], &y = b.terms_[i];
        if (x.lampow != y.lampow || x.derivs != y.derivs || !(x.coeff == y.coeff))
            return false;
    }
    return true;
}

DensOperator adjoint(const DensOperator& L) {
    const ChartPtr& ch = L.chart();
    std::vector<OpTerm> acc;
    for (const OpTerm& t : L.terms()) {
        int modd = 0;
        for (VarId v : t.derivs)
            if (ch->is_odd(v)) ++modd;
        for (Parity pc : {Parity::Even, Parity::Odd}) {
            Expr part = pc == Parity::Even ? t.coeff.even_part() : t.coeff.odd_part();
            if (part.is_zero()) continue;
            // reversing coeff * euler^k * d_I factor by factor:
            // Koszul signs between odd factors, a minus per derivative, and
            // euler -> 1 - delta - euler once pulled left of the weight shift
            long flips = static_cast<long>(pint(pc)) * modd +
                         static_cast<long>(modd) * (modd - 1) / 2 +
                         static_cast<long>(t.derivs.size());
            std::vector<OpTerm> R{{flips % 2 ? -part : part, 0, {}}};
            if (t.lampow > 0) {
                std::vector<OpTerm> out;
                for (long j = 0; j <= t.lampow; ++j) {
                    Rational c = rat_binom(t.lampow, j) *
                                 rat_pow(Rational(1) - L.delta(), t.lampow - j) *
                                 (j % 2 ? -1 : 1);
                    if (c == 0) continue;
                    for (const OpTerm& r : R)
                        out.push_back({r.coeff.mul_rat(c), r.lampow + j, r.derivs});
                }
                R = std::move(out);
            }
            for (VarId v : t.derivs) R = d_left(ch, v, R);
            acc.insert(acc.end(), R.begin(), R.end());
        }
    }
    return DensOperator::from_terms(ch, L.delta(), std::move(acc));
}

Density divergence(const DensOperator& X) {
    DensOperator S = (X + adjoint(X)).mul_rat(-1);
    Expr g = Expr::zero(X.chart());
    for (const OpTerm& t : S.terms()) {
        if (!t.derivs.empty() || t.lampow != 0)
            throw Error("divergence is defined for derivations; X + adjoint(X) is not a "
                        "multiplication operator");
        g = g + t.coeff;
    }
    return Density::of(X.chart(), X.delta(), g);
}

namespace {

// X^A d_A part and the Euler coefficient of an extended first-order field
void split_field(const DensOperator& X, DensOperator& horiz, Expr& x0) {
    std::vector<OpTerm> h;
    x0 = Expr::zero(X.chart());
    for (const OpTerm& t : X.terms()) {
        if (t.derivs.size() + static_cast<std::size_t>(t.lampow) != 1)
            throw Error("expected a first-order derivation without constant term");
        if (t.lampow == 1)
            x0 = x0 + t.coeff;
        else
            h.push_back(t);
    }
    horiz = DensOperator::from_terms(X.chart(), X.delta(), std::move(h));
}

}  // namespace

DensOperator lie_derivative(const DensOperator& X) {
    if (X.delta() == 1)
        throw Error("weight-one vector fields have no divergence-free lift");
    DensOperator horiz;
    Expr x0 = Expr::zero(X.chart());
    split_field(X, horiz, x0);
    Expr g = divergence(horiz).component(X.delta());
    DensOperator vert = DensOperator::from_terms(
        X.chart(), X.delta(), {{g.mul_rat(1 / (Rational(1) - X.delta())), 1, {}}});
    return horiz + vert;
}

DensOperator vertical_projection(const DensOperator& X) {
    if (X.delta() == 1) throw Error("no invariant vertical direction at weight one");
    Expr g = divergence(X).component(X.delta());
    return DensOperator::from_terms(X.chart(), X.delta(),
                                    {{g.mul_rat(1 / (X.delta() - Rational(1))), 1, {}}});
}

std::pair<DensOperator, DensOperator> split_adjoint_parts(const DensOperator& L) {
    DensOperator a = adjoint(L);
    return {(L + a).mul_rat(rat(1, 2)), (L - a).mul_rat(rat(1, 2))};
}

Expr adjoint_defect_integrand(const DensOperator& L, const Density& a, const Density& b) {
    Expr lhs = pair_integrand(L.apply(a), b);
    Expr rhs = pair_integrand(a, adjoint(L).apply(b));
    int sign = (pint(L.parity()) * pint(a.parity())) % 2 ? -1 : 1;
    return lhs - rhs.mul_rat(sign);
}

namespace {

// certificate of d_{I} against (a, b), accumulated with an overall sign
void cert_derivs(const ChartPtr& ch, const std::vector<VarId>& I, std::size_t i,
                 const Density& a, const Density& b, int sign, std::vector<Expr>& out) {
    if (i == I.size()) return;
    VarId v = I[i];
    Density ra = a;
    for (std::size_t j = I.size(); j > i + 1; --j)
        ra = DensOperator::partial(ch, I[j - 1]).apply(ra);
    Expr flux = pair_integrand(ra, b).mul_rat(sign);
    out[static_cast<std::size_t>(v)] = out[static_cast<std::size_t>(v)] + flux;
    int prest = 0;
    for (std::size_t j = i + 1; j < I.size(); ++j) prest += pint(ch->parity(I[j]));
    int s2 = (pint(ch->parity(v)) * (prest + pint(a.parity()))) % 2 ? -1 : 1;
    cert_derivs(ch, I, i + 1, a, DensOperator::partial(ch, v).apply(b).mul_rat(-1),
                sign * s2, out);
}

}  // namespace

std::vector<Expr> boundary_certificate(const DensOperator& L, const Density& a,
                                       const Density& b) {
    const ChartPtr& ch = L.chart();
    std::vector<Expr> out(static_cast<std::size_t>(ch->n_coords()), Expr::zero(ch));
    for (const OpTerm& t : L.terms()) {
        for (Parity pc : {Parity::Even, Parity::Odd}) {
            Expr part = pc == Parity::Even ? t.coeff.even_part() : t.coeff.odd_part();
            if (part.is_zero()) continue;
            // the non-derivative prefix t^delta part euler^k contributes no
            // flux of its own; its adjoint lands on b
            int pI = 0;
            for (VarId v : t.derivs) pI += pint(ch->parity(v));
            int sign = (pint(pc) * (pI + pint(a.parity()))) % 2 ? -1 : 1;
            DensOperator prefix = DensOperator::from_terms(ch, L.delta(), {{part, t.lampow, {}}});
            Density pb = adjoint(prefix).apply(b);
            cert_derivs(ch, t.derivs, 0, a, pb, sign, out);
        }
    }
    return out;
}

Expr total_derivative_integrand(const ChartPtr& chart, const std::vector<Expr>& comps) {
    Expr acc = Expr::zero(chart);
    for (std::size_t v = 0; v < comps.size(); ++v)
        acc = acc + comps[v].derivative(static_cast<VarId>(v));
    return acc;
}

namespace {

void enumerate_multi(const Chart& ch, int max_order, std::vector<VarId>& cur,
                     std::vector<std::vector<VarId>>& out, VarId start) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) == max_order) return;
    for (VarId v = start; v < ch.n_coords(); ++v) {
        if (ch.is_odd(v) && !cur.empty() && cur.back() == v) continue;
        cur.push_back(v);
        enumerate_multi(ch, max_order, cur, out, v);
        cur.pop_back();
    }
}

Expr probe_monomial(const ChartPtr& ch, const std::vector<VarId>& I) {
    Expr m = Expr::one(ch);
    for (VarId v : I) m = m * Expr::of_var(ch, v);
    return m;
}

}  // namespace

DensOperator reconstruct_operator(const std::function<Density(const Density&)>& action,
                                  ChartPtr chart, const Rational& delta, int max_order,
                                  long max_lamdeg) {
    if (max_order < 0 || max_lamdeg < 0) throw Error("reconstruction bounds must be >= 0");
    const long K = max_lamdeg;
    // inverse of the Vandermonde matrix V[w][k] = w^k for w = 0..K
    std::vector<std::vector<Rational>> V(K + 1, std::vector<Rational>(K + 1));
    std::vector<std::vector<Rational>> W(K + 1, std::vector<Rational>(K + 1));
    for (long w = 0; w <= K; ++w)
        for (long k = 0; k <= K; ++k) {
            V[w][k] = rat_pow(Rational(w), k);
            W[w][k] = (w == k) ? 1 : 0;
        }
    for (long col = 0; col <= K; ++col) {
        long piv = col;
        while (V[piv][col] == 0) ++piv;
        std::swap(V[piv], V[col]);
        std::swap(W[piv], W[col]);
        Rational d = V[col][col];
        for (long j = 0; j <= K; ++j) {
            V[col][j] /= d;
            W[col][j] /= d;
        }
        for (long r = 0; r <= K; ++r) {
            if (r == col || V[r][col] == 0) continue;
            Rational f = V[r][col];
            for (long j = 0; j <= K; ++j) {
                V[r][j] -= f * V[col][j];
                W[r][j] -= f * W[col][j];
            }
        }
    }

    std::vector<std::vector<VarId>> multis;
    std::vector<VarId> cur;
    enumerate_multi(*chart, max_order, cur, multis, 0);
    std::stable_sort(multis.begin(), multis.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });

    std::vector<OpTerm> solved;
    for (const std::vector<VarId>& I : multis) {
        Expr sI = probe_monomial(chart, I);
        // weight-k pieces of the action on sI, by inverting the Vandermonde
        std::vector<Expr> A(K + 1, Expr::zero(chart));
        for (long w = 0; w <= K; ++w) {
            Density img = action(Density::of(chart, w, sI));
            Expr e = Expr::zero(chart);
            for (const auto& [iw, ie] : img.components()) {
                if (iw != Rational(w) + delta)
                    throw Error("action does not shift every weight by " + rat_str(delta));
                e = ie;
            }
            for (long k = 0; k <= K; ++k) {
                if (W[k][w] == 0) continue;
                A[k] = A[k] + e.mul_rat(W[k][w]);
            }
        }
        // subtract the contributions of the already determined lower terms
        for (const OpTerm& t : solved) {
            Expr d = sI;
            for (auto it = t.derivs.rbegin(); it != t.derivs.rend(); ++it)
                d = d.derivative(*it);
            if (d.is_zero()) continue;
            A[t.lampow] = A[t.lampow] - t.coeff * d;
        }
        // d_I applied to its own monomial is an invertible constant
        Expr kap = sI;
        for (auto it = I.rbegin(); it != I.rend(); ++it) kap = kap.derivative(*it);
        Rational kv = kap.constant_value();
        for (long k = 0; k <= K; ++k) {
            if (A[k].is_zero()) continue;
            solved.push_back({A[k].mul_rat(1 / kv), k, I});
        }
    }
    DensOperator L = DensOperator::from_terms(chart, delta, std::move(solved));

    // cross-check on a probe outside the solving set: a product containing
    // every coordinate monomial up to one order beyond the bound, with
    // generic coefficients
    Expr extra = Expr::one(chart);
    for (VarId v = 0; v < chart->n_coords(); ++v) {
        Expr zv = Expr::of_var(chart, v);
        Expr factor = Expr::one(chart);
        int top = chart->is_odd(v) ? 1 : max_order + 1;
        Expr zp = Expr::one(chart);
        for (int j = 1; j <= top; ++j) {
            zp = zp * zv;
            factor = factor + zp.mul_rat(rat(static_cast<long>(v) + 2, j + 1));
        }
        extra = extra * factor;
    }
    Density probe = Density::of(chart, K + 1, extra);
    if (!(action(probe) == L.apply(probe)))
        throw Error("action is not an operator within order " + std::to_string(max_order) +
                    " and weight degree " + std::to_string(K));
    return L;
}

DensOperator transform_operator(const DensOperator& L, const Diffeomorphism& d) {
    if (L.chart() && L.chart() != d.source())
        throw ChartMismatch("operator lives on " + L.chart()->name() + ", map starts at " +
                            d.source()->name());
    Diffeomorphism back = d.reversed();
    auto act = [&](const Density& s) {
        return transform_density(L.apply(transform_density(s, back)), d);
    };
    return reconstruct_operator(act, d.target(), L.delta(), L.order(),
                                L.lambda_degree() + L.order());
}

ZeroCheck operator_zero_check(const DensOperator& L, uint64_t seed) {
    ZeroCheck worst{Zeroness::Zero, ""};
    for (const OpTerm& t : L.terms()) {
        ZeroCheck c = check_zero(t.coeff, seed);
        if (c.verdict == Zeroness::NonZero) return c;
        if (c.verdict == Zeroness::ProbablyZero) worst = c;
    }
    return worst;
}

}  // namespace densops
