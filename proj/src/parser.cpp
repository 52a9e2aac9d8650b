#include "densops/parser.hpp"

#include <bit>
#include <cctype>
#include <sstream>

namespace densops {

namespace {

enum class Tok { End, Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma };

struct Lexer {
    const std::string& s;
    std::size_t pos = 0;
    int line = 1, col = 1;

    Tok kind = Tok::End;
    std::string text;
    Rational num;
    int tline = 1, tcol = 1;

    explicit Lexer(const std::string& src) : s(src) { advance(); }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tline, tcol); }

    void bump(char c) {
        ++pos;
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }

    void advance() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) bump(s[pos]);
        tline = line;
        tcol = col;
        if (pos >= s.size()) {
            kind = Tok::End;
            return;
        }
        char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                digits += s[pos];
                bump(s[pos]);
            }
            kind = Tok::Num;
            num = Rational(mpz_class(digits));
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            text.clear();
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
                text += s[pos];
                bump(s[pos]);
            }
            kind = Tok::Ident;
            return;
        }
        bump(c);
        switch (c) {
            case '+': kind = Tok::Plus; return;
            case '-': kind = Tok::Minus; return;
            case '*': kind = Tok::Star; return;
            case '/': kind = Tok::Slash; return;
            case '^': kind = Tok::Caret; return;
            case '(': kind = Tok::LParen; return;
            case ')': kind = Tok::RParen; return;
            case ',': kind = Tok::Comma; return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", tline, tcol);
    }
};

struct Parser {
    Lexer lx;
    ChartPtr chart;

    Parser(const std::string& src, ChartPtr ch) : lx(src), chart(std::move(ch)) {}

    Expr parse() {
        Expr e = parse_sum();
        if (lx.kind != Tok::End) lx.fail("trailing input");
        return e;
    }

    Expr parse_sum() {
        Expr e = parse_product();
        while (lx.kind == Tok::Plus || lx.kind == Tok::Minus) {
            bool minus = lx.kind == Tok::Minus;
            lx.advance();
            Expr r = parse_product();
            e = minus ? e - r : e + r;
        }
        return e;
    }

    Expr parse_product() {
        Expr e = parse_unary();
        while (lx.kind == Tok::Star || lx.kind == Tok::Slash) {
            bool div = lx.kind == Tok::Slash;
            int l = lx.tline, c = lx.tcol;
            lx.advance();
            Expr r = parse_unary();
            if (div) {
                try {
                    e = e / r;
                } catch (const DivisionError& ex) {
                    throw ParseError(ex.what(), l, c);
                }
            } else {
                e = e * r;
            }
        }
        return e;
    }

    Expr parse_unary() {
        if (lx.kind == Tok::Minus) {
            lx.advance();
            return -parse_unary();
        }
        if (lx.kind == Tok::Plus) {
            lx.advance();
            return parse_unary();
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (lx.kind != Tok::Caret) return base;
        int l = lx.tline, c = lx.tcol;
        lx.advance();
        Expr expo = parse_unary();  // right-associative, allows x^-1 and x^(1/2)
        if (!expo.is_constant()) throw ParseError("exponent must be a rational constant", l, c);
        Rational r = expo.constant_value();
        try {
            if (is_integer(r)) {
                if (r >= 2 && !base.is_zero() && base.is_odd())
                    throw ParseError("power of an odd expression vanishes", l, c);
                return base.pow(to_long(r));
            }
            return make_pow(base, r);
        } catch (const DivisionError& ex) {
            throw ParseError(ex.what(), l, c);
        }
    }

    Expr parse_atom() {
        switch (lx.kind) {
            case Tok::Num: {
                Rational v = lx.num;
                lx.advance();
                return Expr::constant(chart, v);
            }
            case Tok::LParen: {
                lx.advance();
                Expr e = parse_sum();
                expect(Tok::RParen, "expected ')'");
                return e;
            }
            case Tok::Ident: {
                std::string name = lx.text;
                int l = lx.tline, c = lx.tcol;
                lx.advance();
                if (lx.kind == Tok::LParen &&
                    (name == "exp" || name == "log" || name == "sqrt")) {
                    lx.advance();
                    Expr arg = parse_sum();
                    expect(Tok::RParen, "expected ')'");
                    try {
                        if (name == "exp") return make_exp(arg);
                        if (name == "log") return make_log(arg);
                        return make_sqrt(arg);
                    } catch (const DivisionError& ex) {
                        throw ParseError(ex.what(), l, c);
                    }
                }
                if (!chart) throw ParseError("unknown name '" + name + "'", l, c);
                VarId v = chart->find(name);
                if (v < 0)
                    throw ParseError("unknown name '" + name + "' in chart " + chart->name(), l, c);
                return Expr::of_var(chart, v);
            }
            default:
                lx.fail("expected an expression");
        }
    }

    void expect(Tok k, const std::string& msg) {
        if (lx.kind != k) lx.fail(msg);
        lx.advance();
    }
};

}  // namespace

Expr parse_expr(const std::string& text, const ChartPtr& chart) {
    Parser p(text, chart);
    return p.parse();
}

// ---------------------------------------------------------------------------
// printing

namespace {

void print_rat(std::ostream& os, const Rational& r) {
    if (is_integer(r)) {
        os << r.get_num().get_str();
    } else {
        os << r.get_num().get_str() << "/" << r.get_den().get_str();
    }
}

void print_poly(std::ostream& os, const Poly& p, const ChartPtr& chart, bool parens_if_sum);

void print_ratfunc(std::ostream& os, const RatFunc& f, const ChartPtr& chart, bool as_factor) {
    if (f.den().is_one()) {
        print_poly(os, f.num(), chart, as_factor);
        return;
    }
    print_poly(os, f.num(), chart, true);
    os << "/";
    print_poly(os, f.den(), chart, true);
}

void print_gen(std::ostream& os, const Gen& g, const ChartPtr& chart) {
    if (g.is_var()) {
        os << (chart ? chart->var_name(g.var) : "v" + std::to_string(g.var));
        return;
    }
    const Atom& a = *g.atom;
    switch (a.kind) {
        case AtomKind::Exp:
            os << "exp(";
            print_ratfunc(os, a.arg, chart, false);
            os << ")";
            return;
        case AtomKind::Log:
            os << "log(";
            print_ratfunc(os, a.arg, chart, false);
            os << ")";
            return;
        case AtomKind::Pow:
            if (a.expo == rat(1, 2)) {
                os << "sqrt(";
                print_ratfunc(os, a.arg, chart, false);
                os << ")";
            } else {
                os << "(";
                print_ratfunc(os, a.arg, chart, false);
                os << ")^(";
                print_rat(os, a.expo);
                os << ")";
            }
            return;
    }
}

void print_poly(std::ostream& os, const Poly& p, const ChartPtr& chart, bool parens_if_sum) {
    if (p.is_zero()) {
        os << "0";
        return;
    }
    bool bare = false;
    if (p.n_terms() == 1) {
        const auto& m = p.terms()[0].first;
        const auto& c = p.terms()[0].second;
        if (m.is_one() && c >= 0 && is_integer(c))
            bare = true;  // plain integer
        else if (m.factors().size() == 1 && c == 1)
            bare = true;  // x, x^2, exp(u): ^ binds tighter than * and /
    }
    bool parens = parens_if_sum && !bare;
    if (parens) os << "(";
    bool first = true;
    for (const auto& t : p.terms()) {
        Rational c = t.second;
        if (!first) {
            os << (c < 0 ? " - " : " + ");
            if (c < 0) c = -c;
        }
        first = false;
        bool printed_coeff = false;
        if (t.first.is_one()) {
            print_rat(os, c);
            printed_coeff = true;
        } else if (c != 1) {
            if (c == -1) {
                os << "-";
            } else {
                print_rat(os, c);
                printed_coeff = true;
            }
        }
        bool need_star = printed_coeff;
        for (const auto& f : t.first.factors()) {
            if (need_star) os << "*";
            need_star = true;
            print_gen(os, f.g, chart);
            if (f.e != 1) os << "^" << f.e;
        }
    }
    if (parens) os << ")";
}

}  // namespace

std::string to_string(const Poly& p, const ChartPtr& chart) {
    std::ostringstream os;
    print_poly(os, p, chart, false);
    return os.str();
}

std::string to_string(const RatFunc& f, const ChartPtr& chart) {
    std::ostringstream os;
    if (f.den().is_one()) {
        print_poly(os, f.num(), chart, false);
    } else {
        print_ratfunc(os, f, chart, false);
    }
    return os.str();
}

std::string to_string(const Expr& e) {
    if (e.is_zero()) return "0";
    const ChartPtr& ch = e.chart();
    std::ostringstream os;
    bool first = true;
    for (const auto& t : e.terms()) {
        if (!first) os << " + ";
        first = false;
        bool coeff_one = t.second.is_poly() && t.second.num().is_one();
        if (t.first == 0) {
            print_ratfunc(os, t.second, ch, false);
            continue;
        }
        bool need_star = false;
        if (!coeff_one) {
            print_ratfunc(os, t.second, ch, true);
            need_star = true;
        }
        std::uint64_t m = t.first;
        while (m) {
            int i = std::countr_zero(m);
            m &= m - 1;
            if (need_star) os << "*";
            need_star = true;
            os << (ch ? ch->var_name(ch->odd_var(i)) : "th" + std::to_string(i));
        }
    }
    return os.str();
}

}  // namespace densops
