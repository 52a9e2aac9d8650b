#include "densops/base.hpp"

#include <functional>

namespace densops {

Rational rat_pow(const Rational& base, long e) {
    if (e == 0) return Rational(1);
    Rational b = base;
    if (e < 0) {
        if (b == 0) throw DivisionError("zero to a negative power");
        b = 1 / b;
        e = -e;
    }
    Rational r(1);
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

Rational rat_binom(const Rational& r, long k) {
    Rational out(1);
    for (long i = 0; i < k; ++i) {
        out *= (r - i);
        out /= (i + 1);
    }
    return out;
}

std::string rat_str(const Rational& r) { return r.get_str(); }

std::size_t rat_hash(const Rational& r) {
    std::size_t h = 0x51ed270b;
    hash_mix(h, mpz_get_ui(r.get_num().get_mpz_t()));
    hash_mix(h, static_cast<std::size_t>(mpz_sgn(r.get_num().get_mpz_t()) + 1));
    hash_mix(h, mpz_get_ui(r.get_den().get_mpz_t()));
    hash_mix(h, static_cast<std::size_t>(mpz_sizeinbase(r.get_num().get_mpz_t(), 2)));
    return h;
}

}  // namespace densops
