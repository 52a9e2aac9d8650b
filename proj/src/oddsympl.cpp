#include "densops/oddsympl.hpp"

#include <map>
#include <set>

#include "densops/diffeo.hpp"

namespace densops {

namespace {

void check_no_odd_vars(const ChartPtr& ch, const Expr& e, const char* what) {
    std::set<VarId> vs;
    e.collect_vars(vs);
    for (VarId v : vs)
        if (ch->is_coord(v) && ch->is_odd(v))
            throw Error(std::string(what) + " must not involve odd coordinates");
}

void check_square(const ChartPtr& ch, const char* what) {
    if (ch->n_even() != ch->n_odd())
        throw Error(std::string(what) + " needs a chart with as many odd as even coordinates");
}

}  // namespace

Expr CotangentChart::lift(const Expr& f) const {
    std::map<VarId, Expr> m;
    for (VarId v = 0; v < base->n_coords(); ++v) m[v] = Expr::of_var(total, pos[v]);
    for (VarId v = base->n_coords(); v < base->n_vars(); ++v)
        m[v] = Expr::of_var(total, total->require(base->var_name(v)));
    return f.substitute(m, total);
}

Expr CotangentChart::project(const Expr& f) const {
    for (VarId v = 0; v < base->n_coords(); ++v)
        if (f.depends_on(mom[v]))
            throw Error("projection of an expression depending on the momentum " +
                        total->var_name(mom[v]));
    std::map<VarId, Expr> m;
    for (VarId v = 0; v < base->n_coords(); ++v) {
        m[pos[v]] = Expr::of_var(base, v);
        m[mom[v]] = Expr::zero(base);
    }
    for (VarId v = base->n_coords(); v < base->n_vars(); ++v)
        m[total->require(base->var_name(v))] = Expr::of_var(base, v);
    return f.substitute(m, base);
}

CotangentChart cotangent_chart(const ChartPtr& base) {
    std::vector<std::string> evens, odds, params;
    for (VarId v : base->even_coords()) evens.push_back(base->var_name(v));
    for (VarId v : base->even_coords()) evens.push_back("p_" + base->var_name(v));
    for (VarId v : base->odd_coords()) odds.push_back(base->var_name(v));
    for (VarId v : base->odd_coords()) odds.push_back("p_" + base->var_name(v));
    for (VarId v = base->n_coords(); v < base->n_vars(); ++v) params.push_back(base->var_name(v));
    CotangentChart ct;
    ct.base = base;
    ct.total = make_chart(base->name() + "*", std::move(evens), std::move(odds), std::move(params));
    for (VarId v = 0; v < base->n_coords(); ++v) {
        ct.pos.push_back(ct.total->require(base->var_name(v)));
        ct.mom.push_back(ct.total->require("p_" + base->var_name(v)));
    }
    return ct;
}

Expr canonical_poisson(const CotangentChart& ct, const Expr& f, const Expr& g) {
    Expr out = Expr::zero(ct.total);
    for (int pf = 0; pf < 2; ++pf) {
        Expr fp = pf ? f.odd_part() : f.even_part();
        if (fp.is_zero()) continue;
        for (VarId v = 0; v < ct.base->n_coords(); ++v) {
            int pa = pint(ct.base->parity(v));
            Rational s1 = pa * (pf + 1) % 2 ? -1 : 1;
            Rational s2 = pa * pf % 2 ? -1 : 1;
            out = out + (fp.derivative(ct.pos[v]) * g.derivative(ct.mom[v])).mul_rat(s1) -
                  (fp.derivative(ct.mom[v]) * g.derivative(ct.pos[v])).mul_rat(s2);
        }
    }
    return out;
}

Expr master_hamiltonian(const CotangentChart& ct, const ExprMat& S) {
    Parity sp = Parity::Odd;
    bool found = false;
    for (size_t a = 0; !found && a < S.size(); ++a)
        for (size_t b = 0; !found && b < S[a].size(); ++b)
            if (!S[a][b].is_zero()) {
                sp = S[a][b].parity() + ct.base->parity(static_cast<VarId>(a)) +
                     ct.base->parity(static_cast<VarId>(b));
                found = true;
            }
    PencilSpec sp_check = PencilSpec::make(ct.base, 0, sp);
    sp_check.S = S;
    sp_check.validate();
    Expr h = Expr::zero(ct.total);
    for (VarId a = 0; a < ct.base->n_coords(); ++a)
        for (VarId b = 0; b < ct.base->n_coords(); ++b) {
            if (S[a][b].is_zero()) continue;
            h = h + ct.lift(S[a][b]) * Expr::of_var(ct.total, ct.mom[a]) *
                        Expr::of_var(ct.total, ct.mom[b]);
        }
    return h.mul_rat(Rational(1, 2));
}

namespace {

Expr bracket_with(const CotangentChart& ct, const Expr& h, const Expr& f, const Expr& g) {
    return ct.project(canonical_poisson(ct, canonical_poisson(ct, ct.lift(f), h), ct.lift(g)));
}

// (-1)^{p(f)} {f, z^A}: the sign makes 1/2 div grad parity-independent
std::vector<Expr> field_of(const CotangentChart& ct, const Expr& h, const Expr& f) {
    std::vector<Expr> out;
    Expr fe = f.even_part(), fo = f.odd_part();
    for (VarId v = 0; v < ct.base->n_coords(); ++v) {
        Expr z = Expr::of_var(ct.base, v);
        Expr c = Expr::zero(ct.base);
        if (!fe.is_zero()) c = c + bracket_with(ct, h, fe, z);
        if (!fo.is_zero()) c = c - bracket_with(ct, h, fo, z);
        out.push_back(c);
    }
    return out;
}

}  // namespace

Expr derived_bracket(const CotangentChart& ct, const ExprMat& S, const Expr& f, const Expr& g) {
    return bracket_with(ct, master_hamiltonian(ct, S), f, g);
}

Expr jacobi_obstruction(const CotangentChart& ct, const ExprMat& S) {
    Expr h = master_hamiltonian(ct, S);
    return canonical_poisson(ct, h, h);
}

ExprMat darboux_tensor(const ChartPtr& chart) {
    check_square(chart, "darboux_tensor");
    int n = chart->n_coords();
    ExprMat S(n, std::vector<Expr>(n, Expr::zero(chart)));
    for (int a = 0; a < chart->n_even(); ++a) {
        S[a][chart->odd_var(a)] = Expr::one(chart);
        S[chart->odd_var(a)][a] = Expr::one(chart);
    }
    return S;
}

namespace {

// expected derived bracket of a pair of coordinates for darboux_tensor
Rational darboux_value(const ChartPtr& ch, VarId a, VarId b) {
    if (!ch->is_odd(a) && ch->is_odd(b) && ch->odd_index(b) == a) return 1;
    if (ch->is_odd(a) && !ch->is_odd(b) && ch->odd_index(a) == b) return -1;
    return 0;
}

}  // namespace

bool is_darboux(const CotangentChart& ct, const ExprMat& S) {
    const ChartPtr& ch = ct.base;
    check_square(ch, "is_darboux");
    Expr h = master_hamiltonian(ct, S);
    for (VarId a = 0; a < ch->n_coords(); ++a)
        for (VarId b = 0; b < ch->n_coords(); ++b) {
            Expr got = bracket_with(ct, h, Expr::of_var(ch, a), Expr::of_var(ch, b));
            Expr want = Expr::constant(ch, darboux_value(ch, a, b));
            if (check_zero(got - want).verdict == Zeroness::NonZero) return false;
        }
    return true;
}

std::vector<Expr> hamiltonian_field(const CotangentChart& ct, const ExprMat& S, const Expr& f) {
    return field_of(ct, master_hamiltonian(ct, S), f);
}

DensOperator bv_laplacian(const CotangentChart& ct, const ExprMat& S, const Expr& rho) {
    const ChartPtr& ch = ct.base;
    if (!rho.odd_part().is_zero() || rho.body().is_zero())
        throw Error("bv_laplacian needs an invertible even volume density");
    Expr h = master_hamiltonian(ct, S);
    Expr ri = rho.inv();
    std::vector<Expr> dlog;
    for (VarId v = 0; v < ch->n_coords(); ++v) dlog.push_back(rho.derivative(v) * ri);
    auto action = [ct, ch, h, dlog](const Density& s) -> Density {
        Density out(ch);
        for (const auto& [w, f] : s.components()) {
            std::vector<Expr> x = field_of(ct, h, f);
            Expr div = Expr::zero(ch);
            for (VarId v = 0; v < ch->n_coords(); ++v)
                for (int px = 0; px < 2; ++px) {
                    Expr xp = px ? x[v].odd_part() : x[v].even_part();
                    if (xp.is_zero()) continue;
                    Rational sgn = pint(ch->parity(v)) * px % 2 ? -1 : 1;
                    div = div + (xp.derivative(v) + dlog[v] * xp).mul_rat(sgn);
                }
            out = out + Density::of(ch, w, div.mul_rat(Rational(1, 2)));
        }
        return out;
    };
    return reconstruct_operator(action, ch, 0, 2, 0);
}

DensOperator canonical_bv_operator(const ChartPtr& chart) {
    check_square(chart, "canonical_bv_operator");
    DensOperator out = DensOperator::zero(chart);
    for (int a = 0; a < chart->n_even(); ++a)
        out = out + DensOperator::partial(chart, a) * DensOperator::partial(chart, chart->odd_var(a));
    return out;
}

Expr bv_identity_defect(const Diffeomorphism& d) {
    const ChartPtr& ch = d.source();
    check_square(ch, "bv_identity_defect");
    Expr b = jacobian(d).jac;
    Density sq = Density::of(ch, Rational(1, 2), make_sqrt(b));
    Expr app = canonical_bv_operator(ch).apply(sq).component(Rational(1, 2));
    return make_pow(b, Rational(-1, 2)) * app;
}

Expr bv_conjugation_defect(const CotangentChart& ct, const ExprMat& S, const Expr& rho,
                           const Expr& F) {
    const ChartPtr& ch = ct.base;
    if (!F.odd_part().is_zero()) throw Error("bv_conjugation_defect needs an even function");
    Expr em = make_exp(F.mul_rat(Rational(-1, 2)));
    Expr ep = make_exp(F.mul_rat(Rational(1, 2)));
    Expr lhs = -(ep * bv_laplacian(ct, S, rho).apply(Density::of(ch, 0, em)).component(0));
    Expr rhs =
        divergence_with_connection(from_volume_form(rho), hamiltonian_field(ct, S, F))
            .mul_rat(Rational(1, 4)) -
        derived_bracket(ct, S, F, F).mul_rat(Rational(1, 8));
    return lhs - rhs;
}

Expr darboux_flat_defect(const Diffeomorphism& d) {
    const ChartPtr& ch = d.source();
    check_square(ch, "darboux_flat_defect");
    VolConnection pulled = transform_connection(zero_connection(d.target()), d.reversed());
    return groupoid_residual(0, Parity::Odd, darboux_tensor(ch), zero_connection(ch), pulled.comps);
}

Expr bv_volume_arrow_defect(const CotangentChart& ct, const ExprMat& S, const Expr& rho,
                            const Expr& rho2) {
    Expr j = rho2 * rho.inv();
    return bv_laplacian(ct, S, rho).apply(Density::of(ct.base, 0, make_sqrt(j))).component(0);
}

bool preserves_darboux(const Diffeomorphism& d) {
    const ChartPtr& src = d.source();
    const ChartPtr& dst = d.target();
    check_square(src, "preserves_darboux");
    check_square(dst, "preserves_darboux");
    CotangentChart ct = cotangent_chart(src);
    Expr h = master_hamiltonian(ct, darboux_tensor(src));
    for (VarId a = 0; a < dst->n_coords(); ++a)
        for (VarId b = 0; b < dst->n_coords(); ++b) {
            Expr got = bracket_with(ct, h, d.pullback(Expr::of_var(dst, a)),
                                    d.pullback(Expr::of_var(dst, b)));
            Expr want = Expr::constant(src, darboux_value(dst, a, b));
            if (check_zero(got - want).verdict == Zeroness::NonZero) return false;
        }
    return true;
}

Diffeomorphism point_lift(const ChartPtr& src, const ChartPtr& dst,
                          const std::vector<Expr>& fwd_even, const std::vector<Expr>& inv_even) {
    check_square(src, "point_lift");
    check_square(dst, "point_lift");
    int n = src->n_even();
    if (dst->n_even() != n || src->n_params() != dst->n_params())
        throw Error("point_lift: source and target shapes differ");
    if (static_cast<int>(fwd_even.size()) != n || static_cast<int>(inv_even.size()) != n)
        throw Error("point_lift: wrong number of components");
    for (const Expr& e : fwd_even) check_no_odd_vars(src, e, "point_lift components");
    for (const Expr& e : inv_even) check_no_odd_vars(dst, e, "point_lift components");

    ExprMat jf(n, std::vector<Expr>(n, Expr::zero(src)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) jf[a][b] = fwd_even[a].derivative(b);
    ExprMat mi = mat_inverse(jf);

    std::map<VarId, Expr> down;  // even functions on src -> on dst
    for (int a = 0; a < n; ++a) down[a] = inv_even[a];
    for (int j = 0; j < n; ++j) down[src->odd_var(j)] = Expr::of_var(dst, dst->odd_var(j));
    for (VarId v = src->n_coords(); v < src->n_vars(); ++v)
        down[v] = Expr::of_var(dst, dst->n_coords() + (v - src->n_coords()));

    std::vector<Expr> fwd(fwd_even), inv(inv_even);
    for (int j = 0; j < n; ++j) {
        Expr t = Expr::zero(src);
        for (int b = 0; b < n; ++b) t = t + mi[b][j] * Expr::of_var(src, src->odd_var(b));
        fwd.push_back(t);
    }
    for (int b = 0; b < n; ++b) {
        Expr t = Expr::zero(dst);
        for (int j = 0; j < n; ++j)
            t = t + jf[j][b].substitute(down, dst) * Expr::of_var(dst, dst->odd_var(j));
        inv.push_back(t);
    }
    return Diffeomorphism(src, dst, std::move(fwd), std::move(inv));
}

Diffeomorphism momentum_shift(const ChartPtr& chart, VarId j, const Expr& g) {
    check_square(chart, "momentum_shift");
    if (!chart->is_coord(j) || chart->is_odd(j))
        throw Error("momentum_shift: the shifted variable must be an even coordinate");
    check_no_odd_vars(chart, g, "momentum_shift amount");
    if (g.depends_on(j)) throw Error("momentum_shift amount must not depend on the shifted coordinate");
    std::vector<Expr> fwd, inv;
    for (int a = 0; a < chart->n_even(); ++a) {
        Expr x = Expr::of_var(chart, a);
        fwd.push_back(a == j ? x + g : x);
        inv.push_back(a == j ? x - g : x);
    }
    return point_lift(chart, chart, fwd, inv);
}

Diffeomorphism odd_cubic_map(const ChartPtr& chart, const Expr& k) {
    if (chart->n_even() != 3 || chart->n_odd() != 3) throw Error("odd_cubic_map needs a 3|3 chart");
    check_no_odd_vars(chart, k, "odd_cubic_map generator");
    Expr t1 = Expr::of_var(chart, chart->odd_var(0));
    Expr t2 = Expr::of_var(chart, chart->odd_var(1));
    Expr t3 = Expr::of_var(chart, chart->odd_var(2));
    std::vector<Expr> pair = {t2 * t3, -(t1 * t3), t1 * t2};
    Expr top = t1 * t2 * t3;
    auto half = [&](const Rational& s) {
        std::vector<Expr> out;
        for (int a = 0; a < 3; ++a) out.push_back(Expr::of_var(chart, a) + (k * pair[a]).mul_rat(s));
        for (int a = 0; a < 3; ++a)
            out.push_back(Expr::of_var(chart, chart->odd_var(a)) -
                          (k.derivative(a) * top).mul_rat(s));
        return out;
    };
    return Diffeomorphism(chart, chart, half(1), half(-1));
}

}  // namespace densops
