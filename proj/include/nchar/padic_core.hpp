#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nchar {

using Z = mpz_class;
using Q = mpq_class;

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// v_p(0)
inline constexpr long kInfiniteValuation = std::numeric_limits<long>::max();

inline bool is_prime(long p)
{
    if (p < 2) return false;
    for (long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

inline void require_prime(long p)
{
    if (!is_prime(p)) throw DomainError("not a prime: " + std::to_string(p));
}

inline Q rational(long num, long den = 1)
{
    Q q(num, den);
    q.canonicalize();
    return q;
}

inline Q rational(const Z& num, const Z& den = 1)
{
    Q q(num, den);
    q.canonicalize();
    return q;
}

inline Z ipow(long p, long e)
{
    if (e < 0) throw DomainError("negative exponent in ipow");
    Z r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
    return r;
}

// x^e for any integer e; x must be nonzero when e < 0
inline Q qpow(const Q& x, long e)
{
    if (e == 0) return Q(1);
    if (e < 0) {
        if (x == 0) throw DomainError("zero to a negative power");
        return qpow(Q(1) / x, -e);
    }
    Z n, d;
    mpz_pow_ui(n.get_mpz_t(), x.get_num().get_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(d.get_mpz_t(), x.get_den().get_mpz_t(), static_cast<unsigned long>(e));
    return rational(n, d);
}

inline long vp(const Z& x, long p)
{
    if (x == 0) return kInfiniteValuation;
    Z rest;
    Z pz = p;
    return static_cast<long>(mpz_remove(rest.get_mpz_t(), x.get_mpz_t(), pz.get_mpz_t()));
}

inline long vp(const Q& x, long p)
{
    if (x == 0) return kInfiniteValuation;
    return vp(Z(x.get_num()), p) - vp(Z(x.get_den()), p);
}

inline bool is_p_integral(const Q& x, long p) { return vp(Z(x.get_den()), p) == 0; }

inline bool is_p_unit(const Q& x, long p) { return x != 0 && vp(x, p) == 0; }

// |x|_p as an exact rational, |0|_p = 0
inline Q abs_p(const Q& x, long p)
{
    if (x == 0) return Q(0);
    return qpow(Q(p), -vp(x, p));
}

// Magnitude p^q with rational q.
struct PExponent {
    Q q;

    PExponent() = default;
    explicit PExponent(Q e) : q(std::move(e)) {}

    friend bool operator==(const PExponent& a, const PExponent& b) { return a.q == b.q; }
    friend std::strong_ordering operator<=>(const PExponent& a, const PExponent& b)
    {
        int c = cmp(a.q, b.q);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    PExponent operator*(const PExponent& o) const { return PExponent(q + o.q); }

    std::string str(long p) const { return std::to_string(p) + "^" + q.get_str(); }
};

// Parses "p^q", e.g. "3^-1/3"; returns (p, q)
inline std::pair<long, Q> parse_pexponent(const std::string& s)
{
    auto hat = s.find('^');
    if (hat == std::string::npos) throw DomainError("expected p^q, got '" + s + "'");
    long p = std::stol(s.substr(0, hat));
    Q q;
    if (q.set_str(s.substr(hat + 1), 10) != 0) throw DomainError("bad exponent in '" + s + "'");
    q.canonicalize();
    return {p, q};
}

inline Q parse_rational(const std::string& s)
{
    Q q;
    if (s.empty() || q.set_str(s, 10) != 0) throw DomainError("bad rational '" + s + "'");
    if (q.get_den() == 0) throw DomainError("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

inline std::string to_string(const Q& x) { return x.get_str(); }

struct PContext {
    long p;
    int kappa;

    explicit PContext(long prime) : p(prime), kappa(prime == 2 ? 2 : 1) { require_prime(prime); }
};

struct ResidueSplit {
    Z rem; // R in [0, p^h)
    Q quo; // Q = c - R, v_p(Q) >= h
};

inline ResidueSplit residue_split(const Q& c, long p, long h)
{
    require_prime(p);
    if (h < 0) throw DomainError("negative level exponent");
    if (!is_p_integral(c, p)) throw DomainError("residue_split: " + c.get_str() + " is not p-integral");
    Z level = ipow(p, h);
    Z inv;
    if (level == 1) return {Z(0), c};
    Z den = c.get_den();
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), level.get_mpz_t());
    Z r = Z(c.get_num()) * inv;
    mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), level.get_mpz_t());
    return {r, c - Q(r)};
}

// Sum of base-p digits.
inline long digit_sum(Z n, long p)
{
    if (n < 0) throw DomainError("digit_sum of a negative number");
    long s = 0;
    Z pz = p, d;
    while (n > 0) {
        mpz_fdiv_qr(n.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t(), pz.get_mpz_t());
        s += d.get_si();
    }
    return s;
}

inline Z binomial(long n, long k)
{
    if (n < 0 || k < 0 || k > n) return Z(0);
    Z r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

inline Z factorial(long n)
{
    if (n < 0) throw DomainError("factorial of a negative number");
    Z r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return r;
}

// x (x+1) ... (x+m-1)
inline Q rising(const Q& x, long m)
{
    Q r = 1;
    for (long t = 0; t < m; ++t) r *= x + t;
    return r;
}

// Residue of a p-integral rational modulo p^h, as a machine integer.
inline std::int64_t residue_mod(const Q& c, long p, long h) { return residue_split(c, p, h).rem.get_si(); }

} // namespace nchar
