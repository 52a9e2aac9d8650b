#include "densops/pencil.hpp"

namespace densops {

namespace {

// (-1)^{p(A)(p(S)+1)}, the divergence sign of the derivative index: attaching
// it to each d_A in first-order correction terms is what makes the built
// operator self-adjoint on charts with odd coordinates
Rational sgn(const Chart& ch, VarId a, Parity s_parity) {
    int e = pint(ch.parity(a)) * (pint(s_parity) + 1);
    return (e % 2) ? Rational(-1) : Rational(1);
}

Rational par_sign(Parity a, Parity b) {
    return (pint(a) && pint(b)) ? Rational(-1) : Rational(1);
}

void check_entry_parity(const Expr& e, Parity want, const std::string& what) {
    if (e.is_zero()) return;
    if (e.parity() != want) throw ParityError(what + " has the wrong parity");
}

}  // namespace

PencilSpec PencilSpec::make(ChartPtr chart, const Rational& delta, Parity s_parity) {
    PencilSpec sp;
    sp.delta = delta;
    sp.s_parity = s_parity;
    int n = chart->n_coords();
    sp.S.assign(n, std::vector<Expr>(n, Expr::zero(chart)));
    sp.gamma.assign(n, Expr::zero(chart));
    sp.theta = Expr::zero(chart);
    sp.chart = std::move(chart);
    return sp;
}

void PencilSpec::validate() const {
    if (!chart) throw Error("pencil data has no chart");
    std::size_t n = chart->n_coords();
    if (S.size() != n || gamma.size() != n)
        throw Error("pencil data has the wrong shape for chart " + chart->name());
    for (std::size_t a = 0; a < n; ++a)
        if (S[a].size() != n) throw Error("pencil tensor is not square");
    for (VarId a = 0; a < static_cast<VarId>(n); ++a) {
        Parity pa = chart->parity(a);
        for (VarId b = 0; b < static_cast<VarId>(n); ++b) {
            Parity pb = chart->parity(b);
            check_entry_parity(S[a][b], s_parity + pa + pb, "tensor entry");
            if (S[a][b] != S[b][a].mul_rat(par_sign(pa, pb)))
                throw Error("pencil tensor is not graded symmetric");
        }
        check_entry_parity(gamma[a], s_parity + pa, "connection component");
    }
    check_entry_parity(theta, s_parity, "scalar term");
}

DensOperator build_pencil(const PencilSpec& sp) {
    sp.validate();
    const ChartPtr& ch = sp.chart;
    DensOperator sum = DensOperator::zero(ch);
    DensOperator eu = DensOperator::euler(ch);
    DensOperator wcoef = eu.mul_rat(2) + DensOperator::identity(ch).mul_rat(sp.delta - 1);
    Expr divgamma = Expr::zero(ch);
    for (VarId a : ch->coords()) {
        DensOperator da = DensOperator::partial(ch, a);
        Expr h = Expr::zero(ch);
        for (VarId b : ch->coords()) {
            if (!sp.S[a][b].is_zero())
                sum = sum + DensOperator::multiplication(sp.S[a][b]) *
                                DensOperator::partial(ch, b) * da;
            h = h + sp.S[b][a].derivative(b);
        }
        if (!h.is_zero())
            sum = sum + DensOperator::multiplication(h.mul_rat(sgn(*ch, a, sp.s_parity))) * da;
        if (!sp.gamma[a].is_zero())
            sum = sum + wcoef * DensOperator::multiplication(sp.gamma[a]) * da;
        divgamma = divgamma + sp.gamma[a].derivative(a).mul_rat(sgn(*ch, a, sp.s_parity));
    }
    if (!divgamma.is_zero()) sum = sum + eu * DensOperator::multiplication(divgamma);
    if (!sp.theta.is_zero())
        sum = sum + (eu * eu + eu.mul_rat(sp.delta - 1)) * DensOperator::multiplication(sp.theta);
    return DensOperator::weight_shift(ch, sp.delta) * sum.mul_rat(Rational(1, 2));
}

DensOperator restrict_to_weight(const DensOperator& pencil, const Rational& lambda) {
    std::vector<OpTerm> ts;
    for (const auto& t : pencil.terms())
        ts.push_back({t.coeff.mul_rat(rat_pow(lambda, t.lampow)), 0, t.derivs});
    return DensOperator::from_terms(pencil.chart(), pencil.delta(), std::move(ts));
}

DensOperator restrict_to_weight(const DensOperator& pencil, const Expr& lambda) {
    if (!lambda.is_zero() && !lambda.is_even())
        throw ParityError("weight value must be even");
    std::vector<OpTerm> ts;
    for (const auto& t : pencil.terms())
        ts.push_back({t.coeff * lambda.pow(t.lampow), 0, t.derivs});
    return DensOperator::from_terms(pencil.chart(), pencil.delta(), std::move(ts));
}

namespace {

// shared second-order extraction: S[w][v] = coefficient of d_v d_w
ExprMat extract_tensor(const DensOperator& L, long lampow) {
    const ChartPtr& ch = L.chart();
    int n = ch->n_coords();
    ExprMat S(n, std::vector<Expr>(n, Expr::zero(ch)));
    for (VarId v = 0; v < n; ++v) {
        Expr cd = L.coefficient({v, v}, lampow);
        if (!cd.is_zero()) S[v][v] = cd.mul_rat(2);
        for (VarId w = v + 1; w < n; ++w) {
            Expr c = L.coefficient({v, w}, lampow);
            if (c.is_zero()) continue;
            S[w][v] = c;
            S[v][w] = c.mul_rat(par_sign(ch->parity(v), ch->parity(w)));
        }
    }
    return S;
}

}  // namespace

PencilSpec extract_pencil_spec(const DensOperator& P) {
    const ChartPtr& ch = P.chart();
    if (!ch) throw Error("operator has no chart");
    if (P.order() > 2 || P.lambda_degree() > 2)
        throw PatternError("operator exceeds second order in derivatives or the Euler operator");
    if (!(adjoint(P) == P)) throw PatternError("operator is not self-adjoint");
    if (!P.coefficient({}, 0).is_zero())
        throw PatternError("operator has a constant term and does not annihilate constants");
    PencilSpec sp = PencilSpec::make(ch, P.delta(), P.is_zero() ? Parity::Even : P.parity());
    sp.S = extract_tensor(P, 0);
    for (VarId a : ch->coords()) sp.gamma[a] = P.coefficient({a}, 1);
    sp.theta = P.coefficient({}, 2).mul_rat(2);
    if (!(build_pencil(sp) == P))
        throw PatternError("operator is not of the canonical second-order form");
    return sp;
}

PencilSpec pencil_through(const DensOperator& L, const Rational& lambda) {
    const ChartPtr& ch = L.chart();
    if (!ch) throw Error("operator has no chart");
    if (L.lambda_degree() > 0)
        throw Error("expected an operator on a single weight, free of the Euler operator");
    if (L.order() > 2) throw Error("expected an operator of order at most two");
    const Rational& delta = L.delta();
    if (lambda == 0)
        throw SingularWeight(SingularKind::LambdaZero,
                             "weight 0: the constant term carries no scalar data");
    if (lambda + delta == 1)
        throw SingularWeight(SingularKind::MuOne,
                             "co-weight 1: the scalar term cannot be recovered");
    if (lambda * 2 + delta == 1)
        throw SingularWeight(SingularKind::SumOne,
                             "weights summing to 1: the connection cannot be recovered");
    PencilSpec sp = PencilSpec::make(ch, delta, L.is_zero() ? Parity::Even : L.parity());
    sp.S = extract_tensor(L, 0);
    Rational gden = lambda * 2 + delta - 1;
    Expr divgamma = Expr::zero(ch);
    for (VarId a : ch->coords()) {
        Expr h = Expr::zero(ch);
        for (VarId b : ch->coords()) h = h + sp.S[b][a].derivative(b);
        sp.gamma[a] = (L.coefficient({a}, 0).mul_rat(2) - h.mul_rat(sgn(*ch, a, sp.s_parity)))
                          .mul_rat(1 / gden);
        divgamma = divgamma + sp.gamma[a].derivative(a).mul_rat(sgn(*ch, a, sp.s_parity));
    }
    sp.theta = (L.coefficient({}, 0).mul_rat(Rational(2) / lambda) - divgamma)
                   .mul_rat(1 / (lambda + delta - 1));
    sp.validate();
    if (!(restrict_to_weight(build_pencil(sp), lambda) == L))
        throw PatternError("operator is not of the canonical second-order form");
    return sp;
}

namespace {

void check_regular_weight(const Rational& w) {
    if (w == 0)
        throw SingularWeight(SingularKind::LambdaZero, "weight 0 is outside the isomorphism");
    if (w == 1)
        throw SingularWeight(SingularKind::MuOne, "weight 1 is outside the isomorphism");
    if (w == Rational(1, 2))
        throw SingularWeight(SingularKind::SumOne, "weight 1/2 is outside the isomorphism");
}

}  // namespace

DensOperator weight_isomorphism(const DensOperator& L, const Rational& lambda,
                                const Rational& mu) {
    if (L.delta() != 0)
        throw Error("weight transport is defined for weight-preserving operators only");
    if (L.lambda_degree() != 0)
        throw Error("weight transport expects a fixed-weight operator without Euler factors");
    if (L.order() > 2) throw Error("weight transport handles operators of order <= 2 only");
    check_regular_weight(lambda);
    check_regular_weight(mu);
    const ChartPtr& ch = L.chart();
    if (ch->n_odd() != 0)
        throw Error("weight transport components are implemented on even charts");
    std::vector<VarId> xs = ch->even_coords();
    int n = static_cast<int>(xs.size());
    // read off L = A^{ij} d_i d_j + A^i d_i + A with A^{ij} symmetric
    ExprMat a2(static_cast<std::size_t>(n),
               std::vector<Expr>(static_cast<std::size_t>(n), Expr::zero(ch)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Expr c = L.coefficient({xs[static_cast<std::size_t>(i)],
                                    xs[static_cast<std::size_t>(j)]},
                                   0);
            if (i == j) {
                a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
            } else {
                Expr h = c.mul_rat(Rational(1, 2));
                a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = h;
                a2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = h;
            }
        }
    std::vector<Expr> a1;
    for (int i = 0; i < n; ++i) a1.push_back(L.coefficient({xs[static_cast<std::size_t>(i)]}, 0));
    Expr a0 = L.coefficient({}, 0);
    // the image at the new weight:
    //   B^{ij} = A^{ij}
    //   B^i    = ((2mu-1)/(2lambda-1)) A^i
    //            + (2(lambda-mu)/(2lambda-1)) sum_j d_j A^{ji}
    //   B      = (mu(mu-1)/(lambda(lambda-1))) A
    //            + (mu(lambda-mu)/((2lambda-1)(lambda-1)))
    //              (sum_j d_j A^j - sum_{ij} d_i d_j A^{ij})
    Rational c1 = (2 * mu - 1) / (2 * lambda - 1);
    Rational c2 = Rational(2) * (lambda - mu) / (2 * lambda - 1);
    Rational c3 = mu * (mu - 1) / (lambda * (lambda - 1));
    Rational c4 = mu * (lambda - mu) / ((2 * lambda - 1) * (lambda - 1));
    std::vector<OpTerm> terms;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Expr c = L.coefficient({xs[static_cast<std::size_t>(i)],
                                    xs[static_cast<std::size_t>(j)]},
                                   0);
            if (!c.is_zero())
                terms.push_back({c, 0, {xs[static_cast<std::size_t>(i)],
                                        xs[static_cast<std::size_t>(j)]}});
        }
    for (int i = 0; i < n; ++i) {
        Expr dja = Expr::zero(ch);
        for (int j = 0; j < n; ++j)
            dja = dja + a2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].derivative(
                            xs[static_cast<std::size_t>(j)]);
        Expr bi = a1[static_cast<std::size_t>(i)].mul_rat(c1) + dja.mul_rat(c2);
        if (!bi.is_zero()) terms.push_back({bi, 0, {xs[static_cast<std::size_t>(i)]}});
    }
    Expr div1 = Expr::zero(ch), div2 = Expr::zero(ch);
    for (int j = 0; j < n; ++j)
        div1 = div1 + a1[static_cast<std::size_t>(j)].derivative(xs[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            div2 = div2 + a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                              .derivative(xs[static_cast<std::size_t>(i)])
                              .derivative(xs[static_cast<std::size_t>(j)]);
    Expr b0 = a0.mul_rat(c3) + (div1 - div2).mul_rat(c4);
    if (!b0.is_zero()) terms.push_back({b0, 0, {}});
    return DensOperator::from_terms(ch, 0, std::move(terms));
}

Rational singular_weight(const Rational& delta) { return (1 - delta) / 2; }

PencilSpec spec_from_connection(ChartPtr chart, const Rational& delta, Parity s_parity,
                                const ExprMat& S, const std::vector<Expr>& gamma_lower) {
    PencilSpec sp = PencilSpec::make(std::move(chart), delta, s_parity);
    sp.S = S;
    const ChartPtr& ch = sp.chart;
    if (gamma_lower.size() != static_cast<std::size_t>(ch->n_coords()))
        throw Error("connection has the wrong shape for chart " + ch->name());
    for (VarId a : ch->coords())
        for (VarId b : ch->coords()) sp.gamma[a] = sp.gamma[a] + S.at(a).at(b) * gamma_lower[b];
    for (VarId a : ch->coords()) sp.theta = sp.theta + gamma_lower[a] * sp.gamma[a];
    sp.validate();
    return sp;
}

DensOperator singular_weight_operator(const PencilSpec& spec) {
    return restrict_to_weight(build_pencil(spec), singular_weight(spec.delta));
}

Expr pseudoscalar(const ChartPtr& chart, const Rational& delta, Parity s_parity,
                  const ExprMat& S, const std::vector<Expr>& gamma_lower) {
    PencilSpec sp = spec_from_connection(chart, delta, s_parity, S, gamma_lower);
    Expr u = Expr::zero(chart);
    for (VarId a : chart->coords())
        u = u + sp.gamma[a].derivative(a).mul_rat(sgn(*chart, a, s_parity));
    u = u + sp.theta.mul_rat((delta - 1) / 2);
    return u.mul_rat((1 - delta) / 4);
}

PencilSpec transform_pencil_spec(const PencilSpec& sp, const Diffeomorphism& d) {
    sp.validate();
    unify_charts(sp.chart, d.source());
    if (sp.chart->n_odd() != 0)
        throw Error("transform_pencil_spec: component laws are for even charts");
    int n = sp.chart->n_coords();
    JacobianData jd = jacobian(d);
    Expr logj = make_log(jd.jac);
    std::vector<Expr> dlj;
    for (VarId b = 0; b < n; ++b) dlj.push_back(logj.derivative(b));

    PencilSpec out = PencilSpec::make(d.target(), sp.delta, sp.s_parity);
    Expr jfac = make_pow(d.pushforward(jd.jac), -sp.delta);
    for (VarId ap = 0; ap < n; ++ap)
        for (VarId bp = 0; bp < n; ++bp) {
            Expr acc = Expr::zero(sp.chart);
            for (VarId a = 0; a < n; ++a)
                for (VarId b = 0; b < n; ++b)
                    acc = acc + jd.mat[ap][a] * jd.mat[bp][b] * sp.S[a][b];
            out.S[ap][bp] = jfac * d.pushforward(acc);
        }
    for (VarId ap = 0; ap < n; ++ap) {
        Expr acc = Expr::zero(sp.chart);
        for (VarId a = 0; a < n; ++a) {
            Expr shifted = sp.gamma[a];
            for (VarId b = 0; b < n; ++b) shifted = shifted + sp.S[a][b] * dlj[b];
            acc = acc + jd.mat[ap][a] * shifted;
        }
        out.gamma[ap] = jfac * d.pushforward(acc);
    }
    Expr acc = sp.theta;
    for (VarId a = 0; a < n; ++a) {
        acc = acc + (sp.gamma[a] * dlj[a]).mul_rat(2);
        for (VarId b = 0; b < n; ++b) acc = acc + dlj[a] * sp.S[a][b] * dlj[b];
    }
    out.theta = jfac * d.pushforward(acc);
    return out;
}

}  // namespace densops
