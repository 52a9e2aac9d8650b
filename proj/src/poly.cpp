#include "densops/poly.hpp"

#include <algorithm>
#include <cmath>

namespace densops {

// ---------------------------------------------------------------------------
// Gen

int compare(const Gen& a, const Gen& b) {
    if (a.is_var() != b.is_var()) return a.is_var() ? -1 : 1;
    if (a.is_var()) return a.var < b.var ? -1 : (a.var > b.var ? 1 : 0);
    if (a.atom.get() == b.atom.get()) return 0;
    return compare(*a.atom, *b.atom);
}

bool operator==(const Gen& a, const Gen& b) { return compare(a, b) == 0; }

std::size_t gen_hash(const Gen& g) {
    std::size_t h = 0x7a3b;
    if (g.is_var()) {
        hash_mix(h, static_cast<std::size_t>(g.var));
    } else {
        hash_mix(h, 0xa70bUL);
        hash_mix(h, g.atom->h);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(std::vector<GenPow> factors) {
    std::sort(factors.begin(), factors.end(),
              [](const GenPow& x, const GenPow& y) { return compare(x.g, y.g) < 0; });
    for (auto& f : factors) {
        if (f.e == 0) continue;
        if (f.e < 0) throw Error("monomial with negative exponent");
        if (!fs_.empty() && fs_.back().g == f.g)
            fs_.back().e += f.e;
        else
            fs_.push_back(f);
    }
}

Monomial Monomial::of_var(VarId v, int e) {
    Monomial m;
    if (e != 0) m.fs_.push_back(GenPow{Gen::of_var(v), e});
    return m;
}

long Monomial::total_degree() const {
    long d = 0;
    for (const auto& f : fs_) d += f.e;
    return d;
}

int Monomial::exponent_of_var(VarId v) const {
    for (const auto& f : fs_)
        if (f.g.is_var() && f.g.var == v) return f.e;
    return 0;
}

int compare(const Monomial& a, const Monomial& b) {
    std::size_t i = 0;
    for (; i < a.fs_.size() && i < b.fs_.size(); ++i) {
        int c = compare(a.fs_[i].g, b.fs_[i].g);
        if (c != 0) return c < 0 ? 1 : -1;  // earlier generator present => larger monomial
        if (a.fs_[i].e != b.fs_[i].e) return a.fs_[i].e > b.fs_[i].e ? 1 : -1;
    }
    if (i < a.fs_.size()) return 1;
    if (i < b.fs_.size()) return -1;
    return 0;
}

bool operator==(const Monomial& a, const Monomial& b) { return compare(a, b) == 0; }

std::size_t Monomial::hash() const {
    std::size_t h = 0x2c9f;
    for (const auto& f : fs_) {
        hash_mix(h, gen_hash(f.g));
        hash_mix(h, static_cast<std::size_t>(f.e));
    }
    return h;
}

Monomial Monomial::gcd(const Monomial& a, const Monomial& b) {
    Monomial out;
    std::size_t i = 0, j = 0;
    while (i < a.fs_.size() && j < b.fs_.size()) {
        int c = compare(a.fs_[i].g, b.fs_[j].g);
        if (c < 0)
            ++i;
        else if (c > 0)
            ++j;
        else {
            out.fs_.push_back(GenPow{a.fs_[i].g, std::min(a.fs_[i].e, b.fs_[j].e)});
            ++i, ++j;
        }
    }
    return out;
}

Monomial Monomial::quotient(const Monomial& a, const Monomial& b) {
    Monomial out;
    std::size_t i = 0, j = 0;
    while (i < a.fs_.size()) {
        if (j < b.fs_.size()) {
            int c = compare(a.fs_[i].g, b.fs_[j].g);
            if (c > 0) throw DivisionError("monomial quotient: not divisible");
            if (c < 0) {
                out.fs_.push_back(a.fs_[i]);
                ++i;
                continue;
            }
            int e = a.fs_[i].e - b.fs_[j].e;
            if (e < 0) throw DivisionError("monomial quotient: not divisible");
            if (e > 0) out.fs_.push_back(GenPow{a.fs_[i].g, e});
            ++i, ++j;
        } else {
            out.fs_.push_back(a.fs_[i]);
            ++i;
        }
    }
    if (j < b.fs_.size()) throw DivisionError("monomial quotient: not divisible");
    return out;
}

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(const Rational& c) {
    if (c != 0) ts_.emplace_back(Monomial::one(), c);
}

Poly Poly::of_var(VarId v, int e) { return of_term(Monomial::of_var(v, e), Rational(1)); }

Poly Poly::of_atom(AtomPtr a) {
    return of_term(Monomial({GenPow{Gen::of_atom(std::move(a)), 1}}), Rational(1));
}

Poly Poly::of_term(Monomial m, Rational c) {
    Poly p;
    if (c != 0) p.ts_.emplace_back(std::move(m), std::move(c));
    return p;
}

bool Poly::is_constant() const {
    return ts_.empty() || (ts_.size() == 1 && ts_[0].first.is_one());
}

bool Poly::is_one() const {
    return ts_.size() == 1 && ts_[0].first.is_one() && ts_[0].second == 1;
}

const Rational& Poly::constant_value() const {
    static const Rational z(0);
    if (ts_.empty()) return z;
    if (!is_constant()) throw Error("constant_value on non-constant polynomial");
    return ts_[0].second;
}

long Poly::total_degree() const {
    long d = 0;
    for (const auto& t : ts_) d = std::max(d, t.first.total_degree());
    return d;
}

int Poly::degree_in(const Gen& g) const {
    int d = 0;
    for (const auto& t : ts_)
        for (const auto& f : t.first.factors())
            if (f.g == g) d = std::max(d, f.e);
    return d;
}

Poly Poly::operator-() const {
    Poly p = *this;
    for (auto& t : p.ts_) t.second = -t.second;
    return p;
}

Poly Poly::operator+(const Poly& o) const {
    Poly out;
    out.ts_.reserve(ts_.size() + o.ts_.size());
    std::size_t i = 0, j = 0;
    while (i < ts_.size() || j < o.ts_.size()) {
        int c;
        if (i >= ts_.size())
            c = -1;
        else if (j >= o.ts_.size())
            c = 1;
        else
            c = compare(ts_[i].first, o.ts_[j].first);
        if (c > 0)
            out.ts_.push_back(ts_[i++]);
        else if (c < 0)
            out.ts_.push_back(o.ts_[j++]);
        else {
            Rational s = ts_[i].second + o.ts_[j].second;
            if (s != 0) out.ts_.emplace_back(ts_[i].first, std::move(s));
            ++i, ++j;
        }
    }
    return out;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

void Poly::accumulate(std::map<Monomial, Rational, MonoLess>& acc, const Monomial& m,
                      const Rational& c) {
    auto it = acc.find(m);
    if (it == acc.end())
        acc.emplace(m, c);
    else {
        it->second += c;
        if (it->second == 0) acc.erase(it);
    }
}

Poly Poly::from_map(std::map<Monomial, Rational, MonoLess>&& acc) {
    Poly out;
    out.ts_.reserve(acc.size());
    for (auto it = acc.rbegin(); it != acc.rend(); ++it)
        out.ts_.emplace_back(it->first, it->second);
    return out;
}

Poly Poly::operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly();
    // fast scalar paths
    if (is_constant()) return o.mul_rat(constant_value());
    if (o.is_constant()) return mul_rat(o.constant_value());
    std::map<Monomial, Rational, MonoLess> acc;
    for (const auto& t1 : ts_)
        for (const auto& t2 : o.ts_) {
            std::vector<GenPow> merged;
            merged.reserve(t1.first.factors().size() + t2.first.factors().size());
            for (const auto& f : t1.first.factors()) merged.push_back(f);
            for (const auto& f : t2.first.factors()) merged.push_back(f);
            accumulate(acc, Monomial(std::move(merged)), t1.second * t2.second);
        }
    return from_map(std::move(acc));
}

Poly Poly::mul_rat(const Rational& c) const {
    if (c == 0) return Poly();
    Poly p = *this;
    for (auto& t : p.ts_) t.second *= c;
    return p;
}

Poly Poly::pow(long e) const {
    if (e < 0) throw Error("Poly::pow: negative exponent");
    Poly r = Poly::one();
    Poly b = *this;
    while (e > 0) {
        if (e & 1) r = r * b;
        b = b * b;
        e >>= 1;
    }
    return r;
}

bool Poly::atom_free() const {
    for (const auto& t : ts_)
        for (const auto& f : t.first.factors())
            if (!f.g.is_var()) return false;
    return true;
}

bool Poly::depends_on(VarId v) const {
    for (const auto& t : ts_)
        for (const auto& f : t.first.factors()) {
            if (f.g.is_var() && f.g.var == v) return true;
            if (!f.g.is_var() && f.g.atom->depends_on(v)) return true;
        }
    return false;
}

void Poly::collect_vars(std::set<VarId>& out) const {
    for (const auto& t : ts_)
        for (const auto& f : t.first.factors()) {
            if (f.g.is_var())
                out.insert(f.g.var);
            else
                f.g.atom->arg.collect_vars(out);
        }
}

void Poly::collect_atoms(std::vector<AtomPtr>& out) const {
    for (const auto& t : ts_)
        for (const auto& f : t.first.factors())
            if (!f.g.is_var()) {
                out.push_back(f.g.atom);
                f.g.atom->arg.num().collect_atoms(out);
                f.g.atom->arg.den().collect_atoms(out);
            }
}

Poly Poly::derivative_poly(VarId v) const {
    std::map<Monomial, Rational, MonoLess> acc;
    for (const auto& t : ts_) {
        const auto& fs = t.first.factors();
        for (std::size_t k = 0; k < fs.size(); ++k) {
            if (!fs[k].g.is_var()) {
                if (fs[k].g.atom->depends_on(v))
                    throw Error("derivative_poly: atom depends on the variable");
                continue;
            }
            if (fs[k].g.var != v) continue;
            std::vector<GenPow> rest;
            for (std::size_t j = 0; j < fs.size(); ++j) {
                if (j == k) {
                    if (fs[j].e > 1) rest.push_back(GenPow{fs[j].g, fs[j].e - 1});
                } else {
                    rest.push_back(fs[j]);
                }
            }
            accumulate(acc, Monomial(std::move(rest)), t.second * fs[k].e);
        }
    }
    return from_map(std::move(acc));
}

RatFunc Poly::derivative(VarId v) const {
    RatFunc out;
    for (const auto& t : ts_) {
        const auto& fs = t.first.factors();
        for (std::size_t k = 0; k < fs.size(); ++k) {
            bool dep = fs[k].g.is_var() ? (fs[k].g.var == v) : fs[k].g.atom->depends_on(v);
            if (!dep) continue;
            std::vector<GenPow> rest;
            for (std::size_t j = 0; j < fs.size(); ++j) {
                if (j == k) {
                    if (fs[j].e > 1) rest.push_back(GenPow{fs[j].g, fs[j].e - 1});
                } else {
                    rest.push_back(fs[j]);
                }
            }
            Poly base = of_term(Monomial(std::move(rest)), t.second * fs[k].e);
            if (fs[k].g.is_var()) {
                out = out + RatFunc(base);
            } else {
                // e * g^(e-1) * dg, where dg may be a genuine fraction
                out = out + RatFunc(base) * fs[k].g.atom->derivative(v);
            }
        }
    }
    return out;
}

int compare(const Poly& a, const Poly& b) {
    std::size_t i = 0;
    for (; i < a.ts_.size() && i < b.ts_.size(); ++i) {
        int c = compare(a.ts_[i].first, b.ts_[i].first);
        if (c != 0) return c;
        int s = cmp(a.ts_[i].second, b.ts_[i].second);
        if (s != 0) return s;
    }
    if (i < a.ts_.size()) return 1;
    if (i < b.ts_.size()) return -1;
    return 0;
}

bool operator==(const Poly& a, const Poly& b) { return compare(a, b) == 0; }

std::size_t Poly::hash() const {
    std::size_t h = 0x11d4;
    for (const auto& t : ts_) {
        hash_mix(h, t.first.hash());
        hash_mix(h, rat_hash(t.second));
    }
    return h;
}

Rational Poly::content() const {
    if (ts_.empty()) return Rational(0);
    mpz_class num_gcd(0), den_lcm(1);
    for (const auto& t : ts_) {
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), t.second.get_num().get_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), t.second.get_den().get_mpz_t());
    }
    Rational c(num_gcd, den_lcm);
    c.canonicalize();
    return c;  // positive by construction of gcd/lcm
}

Poly Poly::primitive_part() const {
    if (ts_.empty()) return *this;
    Rational c = content();
    return mul_rat(1 / c);
}

long double Poly::evalf(const NumPoint& pt) const {
    long double out = 0;
    for (const auto& t : ts_) {
        long double v = static_cast<long double>(t.second.get_d());
        for (const auto& f : t.first.factors()) {
            long double g = f.g.is_var() ? pt.var(f.g.var) : f.g.atom->evalf(pt);
            v *= std::pow(g, static_cast<long double>(f.e));
        }
        out += v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// gcd machinery (primitive PRS in a recursive univariate view)

namespace {

// largest generator appearing in p
std::optional<Gen> main_gen(const Poly& p) {
    std::optional<Gen> best;
    for (const auto& t : p.terms())
        for (const auto& f : t.first.factors())
            if (!best || compare(f.g, *best) > 0) best = f.g;
    return best;
}

// dense coefficient list of p viewed as univariate in g (index = exponent)
std::vector<Poly> uni_coeffs(const Poly& p, const Gen& g) {
    int d = p.degree_in(g);
    std::vector<Poly> out(static_cast<std::size_t>(d) + 1);
    for (const auto& t : p.terms()) {
        int e = 0;
        std::vector<GenPow> rest;
        for (const auto& f : t.first.factors()) {
            if (f.g == g)
                e = f.e;
            else
                rest.push_back(f);
        }
        out[static_cast<std::size_t>(e)] =
            out[static_cast<std::size_t>(e)] + Poly::of_term(Monomial(std::move(rest)), t.second);
    }
    return out;
}

Poly from_uni(const std::vector<Poly>& cs, const Gen& g) {
    Poly out;
    Poly gp = Poly::of_term(Monomial({GenPow{g, 1}}), Rational(1));
    for (std::size_t e = 0; e < cs.size(); ++e) {
        if (cs[e].is_zero()) continue;
        Poly ge = gp.pow(static_cast<long>(e));
        out = out + cs[e] * ge;
    }
    return out;
}

int uni_deg(const std::vector<Poly>& cs) {
    for (int i = static_cast<int>(cs.size()) - 1; i >= 0; --i)
        if (!cs[static_cast<std::size_t>(i)].is_zero()) return i;
    return -1;
}

// divide a coefficient list by its overall rational content; without this the
// pseudo-remainder sequence blows up exponentially in coefficient size
void strip_rational_content(std::vector<Poly>& cs) {
    mpz_class num_gcd(0), den_lcm(1);
    for (const auto& p : cs)
        for (const auto& t : p.terms()) {
            mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), t.second.get_num().get_mpz_t());
            mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), t.second.get_den().get_mpz_t());
        }
    if (num_gcd == 0) return;
    Rational c(num_gcd, den_lcm);
    c.canonicalize();
    if (c == 1) return;
    Rational inv = 1 / c;
    for (auto& p : cs) p = p.mul_rat(inv);
}

// pseudo-remainder of u by v (both univariate coefficient lists in the same gen)
std::vector<Poly> pseudo_rem(std::vector<Poly> u, const std::vector<Poly>& v) {
    int du = uni_deg(u), dv = uni_deg(v);
    const Poly& lv = v[static_cast<std::size_t>(dv)];
    bool monic = lv.is_one();
    while (du >= dv && du >= 0) {
        Poly lu = u[static_cast<std::size_t>(du)];
        // u = lv * u - lu * g^(du-dv) * v
        if (!monic)
            for (auto& c : u) c = c * lv;
        for (int i = 0; i <= dv; ++i) {
            std::size_t k = static_cast<std::size_t>(du - dv + i);
            u[k] = u[k] - lu * v[static_cast<std::size_t>(i)];
        }
        int nd = uni_deg(u);
        if (nd >= du) throw Error("pseudo_rem: degree did not drop");
        du = nd;
        strip_rational_content(u);
    }
    u.resize(static_cast<std::size_t>(std::max(du, -1) + 1));
    return u;
}

Poly poly_content_in(const std::vector<Poly>& cs) {
    Poly c;
    for (const auto& p : cs) {
        if (p.is_zero()) continue;
        c = gcd(c, p);
        if (c.is_one()) break;
    }
    return c;
}

// unit normalization: rational-content-free with positive leading coefficient
Poly unit_normalize(const Poly& p) {
    if (p.is_zero()) return p;
    Poly q = p.primitive_part();
    if (q.leading_coeff() < 0) q = -q;
    return q;
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return unit_normalize(b);
    if (b.is_zero()) return unit_normalize(a);
    if (a.is_constant() || b.is_constant()) return Poly::one();
    auto ga = main_gen(a), gb = main_gen(b);
    Gen g = compare(*ga, *gb) >= 0 ? *ga : *gb;
    auto ua = uni_coeffs(a, g), ub = uni_coeffs(b, g);
    Poly ca = poly_content_in(ua), cb = poly_content_in(ub);
    Poly cont = gcd(ca, cb);
    if (uni_deg(ua) == 0 || uni_deg(ub) == 0) return unit_normalize(cont);
    // primitive parts in g
    for (auto& c : ua) c = c.is_zero() ? c : exact_div(c, ca);
    for (auto& c : ub) c = c.is_zero() ? c : exact_div(c, cb);
    std::vector<Poly> u = std::move(ua), v = std::move(ub);
    if (uni_deg(u) < uni_deg(v)) std::swap(u, v);
    while (true) {
        std::vector<Poly> r = pseudo_rem(u, v);
        if (uni_deg(r) < 0) break;
        if (uni_deg(r) == 0) return unit_normalize(cont);  // coprime primitive parts
        Poly rc = poly_content_in(r);
        for (auto& c : r) c = c.is_zero() ? c : exact_div(c, rc);
        u = std::move(v);
        v = std::move(r);
    }
    Poly prim = from_uni(v, g);
    return unit_normalize(cont * prim);
}

Poly exact_div(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw DivisionError("exact_div by zero");
    if (a.is_zero()) return Poly();
    if (b.is_constant()) return a.mul_rat(1 / b.constant_value());
    Poly rem = a;
    Poly q;
    while (!rem.is_zero()) {
        Monomial mq = Monomial::quotient(rem.leading_monomial(), b.leading_monomial());
        Rational cq = rem.leading_coeff() / b.leading_coeff();
        Poly t = Poly::of_term(std::move(mq), std::move(cq));
        q = q + t;
        rem = rem - t * b;
        if (!rem.is_zero() && compare(rem.leading_monomial(), a.leading_monomial()) > 0)
            throw DivisionError("exact_div: not divisible");
    }
    return q;
}

std::optional<Poly> try_nth_root(const Poly& p, long n) {
    if (n <= 0) return std::nullopt;
    if (n == 1) return p;
    if (p.is_zero()) return Poly();
    if (p.is_constant()) {
        const Rational& c = p.constant_value();
        if (c < 0) return std::nullopt;
        mpz_class rn, rd;
        if (!mpz_root(rn.get_mpz_t(), c.get_num().get_mpz_t(), static_cast<unsigned long>(n)))
            return std::nullopt;
        if (!mpz_root(rd.get_mpz_t(), c.get_den().get_mpz_t(), static_cast<unsigned long>(n)))
            return std::nullopt;
        Rational r(rn, rd);
        r.canonicalize();
        return Poly(r);
    }
    auto g = main_gen(p);
    if (!g) return std::nullopt;
    std::set<VarId> vars;
    p.collect_vars(vars);
    Poly deriv;
    if (g->is_var() && p.atom_free()) {
        deriv = p.derivative_poly(g->var);
    } else {
        // differentiate formally in the main generator via the univariate view
        auto cs = uni_coeffs(p, *g);
        std::vector<Poly> ds;
        for (std::size_t e = 1; e < cs.size(); ++e)
            ds.push_back(cs[e].mul_rat(Rational(static_cast<long>(e))));
        deriv = from_uni(ds, *g);
    }
    if (deriv.is_zero()) return std::nullopt;
    Poly gg = gcd(p, deriv);
    if (gg.is_zero() || gg.is_constant()) return std::nullopt;
    Poly cand;
    try {
        cand = exact_div(p, gg);
    } catch (const DivisionError&) {
        return std::nullopt;
    }
    if (cand.is_zero() || cand.is_constant()) return std::nullopt;
    // adjust by a rational unit so cand^n == p
    Poly cn = cand.pow(n);
    if (cn.is_zero()) return std::nullopt;
    const Rational lp = p.leading_coeff();
    const Rational lc = cn.leading_coeff();
    Rational t = lp / lc;  // need t = s^n for rational s
    mpz_class sn, sd;
    if (t < 0) return std::nullopt;
    if (!mpz_root(sn.get_mpz_t(), t.get_num().get_mpz_t(), static_cast<unsigned long>(n)))
        return std::nullopt;
    if (!mpz_root(sd.get_mpz_t(), t.get_den().get_mpz_t(), static_cast<unsigned long>(n)))
        return std::nullopt;
    Rational s(sn, sd);
    s.canonicalize();
    Poly scaled = cand.mul_rat(s);
    if (!(scaled.pow(n) == p)) {
        if ((n % 2) != 0) return std::nullopt;
        scaled = -scaled;
        if (!(scaled.pow(n) == p)) return std::nullopt;
    }
    if ((n % 2) == 0) {
        // Even roots carry a sign choice. Extract only when the candidate has
        // a definite sign wherever variables and atom bodies are positive
        // (all coefficients of one sign, no logarithm factors); otherwise the
        // two branches cannot be told apart and we keep the power unevaluated.
        bool pos = true, neg = true;
        for (const auto& t : scaled.terms()) {
            for (const auto& f : t.first.factors())
                if (!f.g.is_var() && f.g.atom->kind == AtomKind::Log) return std::nullopt;
            (t.second > 0 ? neg : pos) = false;
        }
        if (!pos && !neg) return std::nullopt;
        if (neg) scaled = -scaled;
    }
    return scaled;
}

// ---------------------------------------------------------------------------
// canonicalization of atom products

namespace {

// does exp(u) reduce, i.e. does u contain a term c * log(w)?
bool exp_arg_extractable(const RatFunc& u) {
    if (!u.den().is_one()) return false;
    for (const auto& t : u.num().terms()) {
        const auto& fs = t.first.factors();
        if (fs.size() == 1 && fs[0].e == 1 && !fs[0].g.is_var() &&
            fs[0].g.atom->kind == AtomKind::Log)
            return true;
    }
    return false;
}

bool canonical_monomial(const Monomial& m) {
    int n_exp = 0;
    std::vector<const RatFunc*> pow_args;
    for (const auto& f : m.factors()) {
        if (f.g.is_var()) continue;
        const Atom& at = *f.g.atom;
        if (at.kind == AtomKind::Log) continue;
        if (f.e != 1) return false;
        if (at.kind == AtomKind::Exp) {
            if (++n_exp > 1) return false;
            if (exp_arg_extractable(at.arg)) return false;
        } else {
            for (const RatFunc* a : pow_args)
                if (*a == at.arg) return false;
            pow_args.push_back(&at.arg);
        }
    }
    return true;
}

bool canonical_poly(const Poly& p) {
    for (const auto& t : p.terms())
        if (!canonical_monomial(t.first)) return false;
    return true;
}

// merge exp and pow factors of one monomial into canonical form
RatFunc canon_monomial(const Monomial& m, const Rational& c) {
    if (canonical_monomial(m)) return RatFunc(Poly::of_term(m, c));
    std::vector<GenPow> pass;
    RatFunc exp_arg;
    bool has_exp = false;
    std::vector<std::pair<RatFunc, Rational>> pows;
    for (const auto& f : m.factors()) {
        if (f.g.is_var() || f.g.atom->kind == AtomKind::Log) {
            pass.push_back(f);
            continue;
        }
        const Atom& at = *f.g.atom;
        if (at.kind == AtomKind::Exp) {
            exp_arg = exp_arg + at.arg.mul_rat(Rational(f.e));
            has_exp = true;
        } else {
            Rational add = at.expo * f.e;
            bool found = false;
            for (auto& pr : pows)
                if (pr.first == at.arg) {
                    pr.second += add;
                    found = true;
                    break;
                }
            if (!found) pows.emplace_back(at.arg, add);
        }
    }
    RatFunc out(Poly::of_term(Monomial(std::move(pass)), c));
    if (has_exp) out = out * atom_exp(exp_arg);
    for (const auto& pr : pows) out = out * atom_pow(pr.first, pr.second);
    return out;
}

RatFunc canon_poly_full(const Poly& p) {
    RatFunc out;
    for (const auto& t : p.terms()) out = out + canon_monomial(t.first, t.second);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// RatFunc

RatFunc::RatFunc(Poly nu, Poly de) : nu_(std::move(nu)), de_(std::move(de)) { normalize(); }

void RatFunc::normalize() {
    if (de_.is_zero()) throw DivisionError("division by zero polynomial");
    if (nu_.is_zero()) {
        de_ = Poly::one();
        return;
    }
    if (!canonical_poly(nu_) || !canonical_poly(de_)) {
        RatFunc n2 = canon_poly_full(nu_);
        RatFunc d2 = canon_poly_full(de_);
        RatFunc r(n2.nu_ * d2.de_, n2.de_ * d2.nu_);
        *this = r;
        return;
    }
    // flip exp/pow atoms out of the denominator's common monomial factor:
    // 1/exp(u) = exp(-u) and 1/pow(u,f) = pow(u,1-f)/u
    Monomial common = de_.leading_monomial();
    for (const auto& t : de_.terms()) common = Monomial::gcd(common, t.first);
    std::vector<GenPow> bad;
    for (const auto& f : common.factors())
        if (!f.g.is_var() && f.g.atom->kind != AtomKind::Log) bad.push_back(f);
    if (!bad.empty()) {
        Monomial strip{std::vector<GenPow>(bad)};
        Poly stripped_den;
        for (const auto& t : de_.terms())
            stripped_den =
                stripped_den + Poly::of_term(Monomial::quotient(t.first, strip), t.second);
        RatFunc mult = RatFunc::one();
        Poly den_mult = Poly::one();
        for (const auto& f : bad) {
            const Atom& at = *f.g.atom;
            if (at.kind == AtomKind::Exp) {
                mult = mult * atom_exp(at.arg.mul_rat(Rational(-f.e)));
            } else {
                mult = mult * atom_pow(at.arg, (Rational(1) - at.expo) * f.e);
                den_mult = den_mult * at.arg.num().pow(f.e);
            }
        }
        if (!mult.is_poly()) throw Error("denominator atom flip produced a fraction");
        nu_ = nu_ * mult.num();
        de_ = stripped_den * den_mult;
        if (!canonical_poly(nu_) || !canonical_poly(de_)) {
            RatFunc r(nu_, de_);
            *this = r;
            return;
        }
    }
    Poly g = gcd(nu_, de_);
    if (!g.is_one() && !g.is_zero()) {
        nu_ = exact_div(nu_, g);
        de_ = exact_div(de_, g);
    }
    const Rational& lc = de_.leading_coeff();
    if (lc != 1) {
        nu_ = nu_.mul_rat(1 / lc);
        de_ = de_.mul_rat(1 / lc);
    }
}

RatFunc RatFunc::operator-() const {
    RatFunc r = *this;
    r.nu_ = -r.nu_;
    return r;
}

RatFunc RatFunc::operator+(const RatFunc& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    if (de_ == o.de_) return RatFunc(nu_ + o.nu_, de_);
    Poly g = gcd(de_, o.de_);
    Poly da = g.is_one() ? de_ : exact_div(de_, g);
    Poly db = g.is_one() ? o.de_ : exact_div(o.de_, g);
    return RatFunc(nu_ * db + o.nu_ * da, da * o.de_);
}

RatFunc RatFunc::operator-(const RatFunc& o) const { return *this + (-o); }

RatFunc RatFunc::operator*(const RatFunc& o) const {
    if (is_zero() || o.is_zero()) return RatFunc();
    return RatFunc(nu_ * o.nu_, de_ * o.de_);
}

RatFunc RatFunc::operator/(const RatFunc& o) const {
    if (o.is_zero()) throw DivisionError("division by zero");
    return RatFunc(nu_ * o.de_, de_ * o.nu_);
}

RatFunc RatFunc::mul_rat(const Rational& c) const {
    if (c == 0) return RatFunc();
    RatFunc r = *this;
    r.nu_ = r.nu_.mul_rat(c);
    return r;
}

RatFunc RatFunc::pow(long e) const {
    if (e == 0) return RatFunc::one();
    if (e < 0) return inv().pow(-e);
    return RatFunc(nu_.pow(e), de_.pow(e));
}

RatFunc RatFunc::inv() const {
    if (is_zero()) throw DivisionError("inverse of zero");
    return RatFunc(de_, nu_);
}

RatFunc RatFunc::derivative(VarId v) const {
    RatFunc dn = nu_.derivative(v);
    if (de_.is_one()) return dn;
    RatFunc dd = de_.derivative(v);
    RatFunc den2(de_ * de_);
    return (dn * RatFunc(de_) - RatFunc(nu_) * dd) / den2;
}

void RatFunc::collect_vars(std::set<VarId>& out) const {
    nu_.collect_vars(out);
    de_.collect_vars(out);
}

void RatFunc::collect_atoms(std::vector<AtomPtr>& out) const {
    nu_.collect_atoms(out);
    de_.collect_atoms(out);
}

int compare(const RatFunc& a, const RatFunc& b) {
    int c = compare(a.nu_, b.nu_);
    if (c != 0) return c;
    return compare(a.de_, b.de_);
}

bool operator==(const RatFunc& a, const RatFunc& b) { return compare(a, b) == 0; }

std::size_t RatFunc::hash() const {
    std::size_t h = nu_.hash();
    hash_mix(h, de_.hash());
    return h;
}

long double RatFunc::evalf(const NumPoint& pt) const {
    long double d = de_.evalf(pt);
    return nu_.evalf(pt) / d;
}

// ---------------------------------------------------------------------------
// Atom

Atom::Atom(AtomKind k, RatFunc a, Rational e) : kind(k), arg(std::move(a)), expo(std::move(e)) {
    h = 0x8f1c;
    hash_mix(h, static_cast<std::size_t>(kind));
    hash_mix(h, arg.hash());
    hash_mix(h, rat_hash(expo));
}

RatFunc Atom::derivative(VarId v) const {
    RatFunc du = arg.derivative(v);
    if (du.is_zero()) return RatFunc();
    switch (kind) {
        case AtomKind::Exp: {
            auto self = std::make_shared<Atom>(*this);
            return RatFunc(Poly::of_atom(self)) * du;
        }
        case AtomKind::Log:
            return du / arg;
        case AtomKind::Pow: {
            auto self = std::make_shared<Atom>(*this);
            return RatFunc(Poly::of_atom(self)).mul_rat(expo) * du / arg;
        }
    }
    throw Error("unreachable");
}

long double Atom::evalf(const NumPoint& pt) const {
    long double u = arg.evalf(pt);
    switch (kind) {
        case AtomKind::Exp:
            return std::exp(u);
        case AtomKind::Log:
            return std::log(u);
        case AtomKind::Pow:
            return std::pow(u, static_cast<long double>(expo.get_d()));
    }
    throw Error("unreachable");
}

int compare(const Atom& a, const Atom& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
    if (a.h != b.h) return a.h < b.h ? -1 : 1;
    int c = compare(a.arg, b.arg);
    if (c != 0) return c;
    return cmp(a.expo, b.expo);
}

RatFunc atom_exp(const RatFunc& u) {
    if (u.is_zero()) return RatFunc::one();
    RatFunc out = RatFunc::one();
    RatFunc rest = u;
    if (u.den().is_one()) {
        // exp(c*log w + v) = w^c * exp(v)
        Poly rest_num;
        for (const auto& t : u.num().terms()) {
            const auto& fs = t.first.factors();
            if (fs.size() == 1 && fs[0].e == 1 && !fs[0].g.is_var() &&
                fs[0].g.atom->kind == AtomKind::Log) {
                out = out * atom_pow(fs[0].g.atom->arg, t.second);
            } else {
                rest_num = rest_num + Poly::of_term(t.first, t.second);
            }
        }
        rest = RatFunc(rest_num);
    }
    if (!rest.is_zero())
        out = out *
              RatFunc(Poly::of_atom(std::make_shared<Atom>(AtomKind::Exp, rest, Rational(0))));
    return out;
}

namespace {

std::vector<std::pair<mpz_class, long>> factor_trial(mpz_class z, mpz_class& remainder);
RatFunc log_of_ratfunc(const RatFunc& u);

// sign * sum of e_i * log(p_i) over the prime factorization of positive z
Poly log_pos_int(const mpz_class& z, int sign) {
    Poly out;
    if (z == 1) return out;
    mpz_class rem;
    auto factors = factor_trial(z, rem);
    if (rem > 1) factors.emplace_back(rem, 1);
    for (const auto& [p, e] : factors) {
        Poly atom = Poly::of_atom(
            std::make_shared<Atom>(AtomKind::Log, RatFunc(Poly(Rational(p))), Rational(0)));
        out = out + atom.mul_rat(Rational(sign * e));
    }
    return out;
}

RatFunc log_of_poly(const Poly& p) {
    if (p.is_zero()) throw DivisionError("log of zero");
    Rational c = p.content();
    Poly prim = p.mul_rat(1 / c);
    RatFunc out(log_pos_int(c.get_num(), 1) + log_pos_int(c.get_den(), -1));
    if (prim.is_one()) return out;
    if (prim.n_terms() == 1 && prim.leading_coeff() == 1) {
        // log distributes over a product of factors
        for (const auto& f : prim.leading_monomial().factors()) {
            Rational e(f.e);
            if (f.g.is_var()) {
                out = out + RatFunc(Poly::of_atom(std::make_shared<Atom>(
                                        AtomKind::Log, RatFunc(Poly::of_var(f.g.var)),
                                        Rational(0))))
                                .mul_rat(e);
                continue;
            }
            const Atom& at = *f.g.atom;
            switch (at.kind) {
                case AtomKind::Exp:
                    out = out + at.arg.mul_rat(e);
                    break;
                case AtomKind::Log:
                    out = out + RatFunc(Poly::of_atom(std::make_shared<Atom>(
                                            AtomKind::Log, RatFunc(Poly::of_atom(f.g.atom)),
                                            Rational(0))))
                                    .mul_rat(e);
                    break;
                case AtomKind::Pow:
                    out = out + log_of_ratfunc(at.arg).mul_rat(e * at.expo);
                    break;
            }
        }
        return out;
    }
    return out +
           RatFunc(Poly::of_atom(std::make_shared<Atom>(AtomKind::Log, RatFunc(prim), Rational(0))));
}

RatFunc log_of_ratfunc(const RatFunc& u) {
    RatFunc out = log_of_poly(u.num());
    if (!u.den().is_one()) out = out - log_of_poly(u.den());
    return out;
}

}  // namespace

RatFunc atom_log(const RatFunc& u) {
    if (u.is_zero()) throw DivisionError("log of zero");
    return log_of_ratfunc(u);
}

namespace {

RatFunc pow_poly(const Poly& p, const Rational& r);

// trial-division factorization; factors beyond the bound stay in the remainder
std::vector<std::pair<mpz_class, long>> factor_trial(mpz_class z, mpz_class& remainder) {
    std::vector<std::pair<mpz_class, long>> out;
    for (long p = 2; p <= 9973 && z > 1; p = (p == 2 ? 3 : p + 2)) {
        if (z % p != 0) continue;
        long e = 0;
        while (z % p == 0) {
            z /= p;
            ++e;
        }
        out.emplace_back(mpz_class(p), e);
    }
    remainder = z;
    return out;
}

// z^r for a positive integer z, split over prime factors so that
// constant surds multiply canonically
RatFunc pow_pos_int(const mpz_class& z, const Rational& r) {
    if (z == 1) return RatFunc::one();
    mpz_class rem;
    auto factors = factor_trial(z, rem);
    if (rem > 1) factors.emplace_back(rem, 1);
    RatFunc out = RatFunc::one();
    for (const auto& [p, e] : factors) {
        Rational tot = r * e;
        Rational k = rat_floor(tot);
        Rational f = tot - k;
        out = out.mul_rat(rat_pow(Rational(p), to_long(k)));
        if (f != 0)
            out = out * RatFunc(Poly::of_atom(
                            std::make_shared<Atom>(AtomKind::Pow, RatFunc(Poly(Rational(p))), f)));
    }
    return out;
}

// c^r for a positive rational c; atoms carry integer arguments only
RatFunc pow_rat_const(const Rational& c, const Rational& r) {
    if (c <= 0) throw DivisionError("fractional power of a non-positive constant");
    return pow_pos_int(c.get_num(), r) / pow_pos_int(c.get_den(), r);
}

// m^r for a coefficient-one monomial: powers distribute over the factors
RatFunc pow_mono(const Monomial& m, const Rational& r) {
    RatFunc out = RatFunc::one();
    for (const auto& f : m.factors()) {
        Rational tot = r * f.e;
        if (!f.g.is_var() && f.g.atom->kind == AtomKind::Exp) {
            out = out * atom_exp(f.g.atom->arg.mul_rat(tot));
            continue;
        }
        if (!f.g.is_var() && f.g.atom->kind == AtomKind::Pow) {
            out = out * atom_pow(f.g.atom->arg, f.g.atom->expo * tot);
            continue;
        }
        Poly base = f.g.is_var() ? Poly::of_var(f.g.var) : Poly::of_atom(f.g.atom);
        Rational k = rat_floor(tot);
        Rational fr = tot - k;
        out = out * RatFunc(base).pow(to_long(k));
        if (fr != 0)
            out = out * RatFunc(Poly::of_atom(
                            std::make_shared<Atom>(AtomKind::Pow, RatFunc(base), fr)));
    }
    return out;
}

// p^r for a polynomial p and non-integer rational r
RatFunc pow_poly(const Poly& p, const Rational& r) {
    if (p.is_zero()) {
        if (r > 0) return RatFunc();
        throw DivisionError("zero to a non-positive fractional power");
    }
    Rational c = p.content();
    Poly prim = p.mul_rat(1 / c);
    RatFunc out = pow_rat_const(c, r);
    if (prim.is_one()) return out;
    if (prim.n_terms() == 1 && prim.leading_coeff() == 1)
        return out * pow_mono(prim.leading_monomial(), r);
    // a common monomial factor distributes out
    Monomial mc = prim.leading_monomial();
    for (const auto& t : prim.terms()) mc = Monomial::gcd(mc, t.first);
    if (!mc.is_one()) {
        Poly rest;
        for (const auto& t : prim.terms())
            rest = rest + Poly::of_term(Monomial::quotient(t.first, mc), t.second);
        return out * pow_mono(mc, r) * pow_poly(rest, r);
    }
    Rational k = rat_floor(r);
    Rational f = r - k;
    out = out * RatFunc(prim).pow(to_long(k));
    if (f != 0) {
        long y = to_long(Rational(f.get_den()));
        long x = to_long(Rational(f.get_num()));
        if (auto root = try_nth_root(prim, y)) {
            out = out * atom_pow(RatFunc(*root), Rational(x));
        } else {
            out = out *
                  RatFunc(Poly::of_atom(std::make_shared<Atom>(AtomKind::Pow, RatFunc(prim), f)));
        }
    }
    return out;
}

}  // namespace

RatFunc atom_pow(const RatFunc& u, const Rational& r) {
    if (is_integer(r)) return u.pow(to_long(r));
    RatFunc out = pow_poly(u.num(), r);
    if (!u.den().is_one()) out = out / pow_poly(u.den(), r);
    return out;
}

}  // namespace densops
