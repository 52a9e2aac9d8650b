#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace densops {

using Rational = mpq_class;

inline Rational rat(long n, long d = 1) {
    Rational r(n, d);
    r.canonicalize();
    return r;
}

inline bool is_integer(const Rational& r) { return r.get_den() == 1; }

inline long to_long(const Rational& r) {
    if (!is_integer(r)) throw std::logic_error("to_long: not an integer");
    return mpz_get_si(r.get_num().get_mpz_t());
}

// r = floor(r) + frac(r), frac in [0,1)
inline Rational rat_floor(const Rational& r) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
    return Rational(q);
}

inline Rational rat_frac(const Rational& r) { return r - rat_floor(r); }

Rational rat_pow(const Rational& base, long e);

// binomial(r, k) for rational r, integer k >= 0
Rational rat_binom(const Rational& r, long k);

std::string rat_str(const Rational& r);

std::size_t rat_hash(const Rational& r);

inline void hash_mix(std::size_t& seed, std::size_t v) {
    seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

enum class Parity : int { Even = 0, Odd = 1 };

inline Parity operator+(Parity a, Parity b) {
    return static_cast<Parity>((static_cast<int>(a) + static_cast<int>(b)) & 1);
}

inline int pint(Parity p) { return static_cast<int>(p); }

struct Error : std::runtime_error {
    explicit Error(const std::string& m) : std::runtime_error(m) {}
};

struct ParseError : Error {
    int line, col;
    ParseError(const std::string& m, int line_, int col_)
        : Error(m + " at line " + std::to_string(line_) + ", column " + std::to_string(col_)),
          line(line_), col(col_) {}
};

struct ChartMismatch : Error {
    using Error::Error;
};

struct ParityError : Error {
    using Error::Error;
};

struct DivisionError : Error {
    using Error::Error;
};

struct WeightError : Error {
    using Error::Error;
};

// Exceptional weights for the fixed-weight pencil reconstruction; each value
// names the precise failed condition.
enum class SingularKind { LambdaZero, MuOne, SumOne };

struct SingularWeight : Error {
    SingularKind kind;
    SingularWeight(SingularKind k, const std::string& m) : Error(m), kind(k) {}
};

struct PatternError : Error {
    using Error::Error;
};

using VarId = int;

}  // namespace densops
