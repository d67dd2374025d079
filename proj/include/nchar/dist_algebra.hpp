#pragma once

#include "padic_core.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nchar {

using MultiIndex = std::vector<long>;

// Norm parameter p^{-q} with 0 < q <= 1.
inline void require_norm_parameter(const PExponent& r)
{
    if (!(r.q < 0 && r.q >= -1)) throw DomainError("norm parameter must lie in [p^-1, 1)");
}

struct EpsilonR {
    long k;  // eps(r) = p^k
    Z value;
};

// Largest p-power m maximizing |m^{-1}| r^{kappa m}.
inline EpsilonR epsilon_r(const PExponent& r, const PContext& ctx)
{
    require_norm_parameter(r);
    const Q q = -r.q;
    // moving from p^k to p^{k+1} changes the exponent by 1 - kappa q p^k (p - 1)
    long k = 0;
    while (Q(1) - Q(ctx.kappa) * q * Q(ipow(ctx.p, k)) * (ctx.p - 1) >= 0) ++k;
    return {k, ipow(ctx.p, k)};
}

struct MahlerSeries {
    std::size_t dim = 1;
    std::function<Q(const MultiIndex&)> coeff;
};

inline MahlerSeries series_from_table(std::size_t dim, std::map<MultiIndex, Q> table)
{
    return {dim, [t = std::move(table)](const MultiIndex& a) {
                auto it = t.find(a);
                return it == t.end() ? Q(0) : it->second;
            }};
}

// (-1)^{n-1}/n, n >= 1
inline MahlerSeries log_one_plus_b()
{
    return {1, [](const MultiIndex& a) {
                long n = a.at(0);
                if (n == 0) return Q(0);
                return rational(n % 2 ? 1 : -1, n);
            }};
}

inline void for_each_index(std::size_t dim, long T, const std::function<void(const MultiIndex&)>& f)
{
    MultiIndex a(dim, 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
        if (i == dim) {
            f(a);
            return;
        }
        for (long v = 0; v <= left; ++v) {
            a[i] = v;
            rec(i + 1, left - v);
        }
        a[i] = 0;
    };
    rec(0, T);
}

inline bool product_leq(const MultiIndex& a, const MultiIndex& b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

struct NormReport {
    std::optional<PExponent> norm;  // nullopt for the zero series
    std::set<MultiIndex> argmax;
    std::optional<MultiIndex> dominant;
    bool boundary = false;  // supremum attained at total degree T
};

// sup |d_a| r^a over |a| <= T for any weights 0 < r_i < 1; r_i = p^{r[i].q}
inline NormReport weighted_dominance(const MahlerSeries& s, const std::vector<PExponent>& r, long p, long T)
{
    if (r.size() != s.dim) throw DomainError("norm parameter has wrong dimension");
    for (const auto& ri : r)
        if (!(ri.q < 0)) throw DomainError("weights must lie in (0, 1)");
    NormReport rep;
    for_each_index(s.dim, T, [&](const MultiIndex& a) {
        Q c = s.coeff(a);
        if (c == 0) return;
        Q e = Q(-vp(c, p));
        for (std::size_t i = 0; i < a.size(); ++i) e += r[i].q * a[i];
        if (!rep.norm || e > rep.norm->q) {
            rep.norm = PExponent(e);
            rep.argmax = {a};
        } else if (e == rep.norm->q) {
            rep.argmax.insert(a);
        }
    });
    // maximum of the argmax set in the product order, if it has one
    for (const auto& a : rep.argmax)
        if (std::all_of(rep.argmax.begin(), rep.argmax.end(), [&](const MultiIndex& b) { return product_leq(b, a); }))
            rep.dominant = a;
    for (const auto& a : rep.argmax) {
        long deg = 0;
        for (long x : a) deg += x;
        if (deg == T) rep.boundary = true;
    }
    return rep;
}

// Norm for parameters in [p^-1, 1)^d.
inline NormReport norm_and_dominant(const MahlerSeries& s, const std::vector<PExponent>& r, long p, long T)
{
    for (const auto& ri : r) require_norm_parameter(ri);
    return weighted_dominance(s, r, p, T);
}

// ---- binomial identities ------------------------------------------------------

// sum_k (-1)^{a-k} C(a,k) C(c k + d, b)
inline Z binom_sum_i(long a, long b, long c, long d)
{
    Z s = 0;
    for (long k = 0; k <= a; ++k) {
        Z t = binomial(a, k) * binomial(c * k + d, b);
        s += (a - k) % 2 ? -t : t;
    }
    return s;
}

// sum_k (-1)^{a-k} C(a,k) C(p^h k, b)
inline Z binom_sum_ii(long a, long b, long h, long p)
{
    return binom_sum_i(a, b, ipow(p, h).get_si(), 0);
}

struct BinomVerdict {
    Z value_i;
    Z value_ii;
    bool claim_i_applies;
    bool claim_i_holds;
    bool claim_ii_holds;
};

inline BinomVerdict binom_identity_checks(long a, long b, long c, long d, long h, long p)
{
    if (a < 0 || b < 0 || c < 0 || d < 0 || h < 0) throw DomainError("binom_identity_checks expects naturals");
    require_prime(p);
    BinomVerdict v;
    v.value_i = binom_sum_i(a, b, c, d);
    v.value_ii = binom_sum_ii(a, b, h, p);
    v.claim_i_applies = b <= a;
    if (b == a) v.claim_i_holds = v.value_i == Z(ipow(c, a));
    else if (b < a) v.claim_i_holds = v.value_i == 0;
    else v.claim_i_holds = true;
    long aph = a * ipow(p, h).get_si();
    if (b == aph) v.claim_ii_holds = v.value_ii == 1;
    else if (b < a || b > aph) v.claim_ii_holds = v.value_ii == 0;
    else v.claim_ii_holds = v.value_ii % p == 0;
    return v;
}

// ---- subgroup re-expansion ------------------------------------------------------

inline Z t_coefficient(const MultiIndex& beta, const MultiIndex& alpha, const std::vector<long>& gamma, long p)
{
    Z t = 1;
    for (std::size_t v = 0; v < beta.size(); ++v) {
        t *= binom_sum_ii(beta[v], alpha[v], gamma[v], p);
        if (t == 0) break;
    }
    return t;
}

struct DominanceReport {
    MultiIndex s_beta;
    bool unit_at_s = false;
    bool strict_elsewhere = false;
    std::vector<MultiIndex> violations;
    bool ok() const { return unit_at_s && strict_elsewhere; }
};

// Checks that S_beta = (beta_v p^gamma_v) is the unique dominance index of t_{beta,.} for alpha_v <= T.
inline DominanceReport subgroup_expansion_dominance(const MultiIndex& beta, const std::vector<long>& gamma,
                                                    const std::vector<PExponent>& r, long p, long T)
{
    const std::size_t d = beta.size();
    if (gamma.size() != d || r.size() != d) throw DomainError("dimension mismatch");
    for (std::size_t v = 0; v < d; ++v) {
        require_norm_parameter(r[v]);
        require_norm_parameter(PExponent(r[v].q * Q(ipow(p, gamma[v]))));
    }
    DominanceReport rep;
    for (std::size_t v = 0; v < d; ++v) rep.s_beta.push_back(beta[v] * ipow(p, gamma[v]).get_si());
    auto weight = [&](const MultiIndex& a) {
        Q e = 0;
        for (std::size_t v = 0; v < d; ++v) e += r[v].q * a[v];
        return e;
    };
    Z ts = t_coefficient(beta, rep.s_beta, gamma, p);
    rep.unit_at_s = ts != 0 && vp(ts, p) == 0;
    const Q top = weight(rep.s_beta);
    MultiIndex a(d, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == d) {
            if (a == rep.s_beta) return;
            Z t = t_coefficient(beta, a, gamma, p);
            if (t == 0) return;
            if (!(Q(-vp(t, p)) + weight(a) < top)) rep.violations.push_back(a);
            return;
        }
        for (long x = 0; x <= T; ++x) {
            a[i] = x;
            rec(i + 1);
        }
    };
    rec(0);
    rep.strict_elsewhere = rep.violations.empty();
    return rep;
}

// ---- Amice function classes --------------------------------------------------------

enum class AmiceClass { C_r, C_r_plus, O_h };

// v_p(b_n) as a function of n; nullopt means b_n = 0.
using ValuationRule = std::function<std::optional<Q>(long n)>;

inline long digit_length(long n, long p)
{
    long l = 0;
    while (n > 0) {
        n /= p;
        ++l;
    }
    return l;
}

// lambda_h = p^{-h} (p-1)^{-1}
inline Q lambda_h(long p, long h) { return Q(1) / (Q(ipow(p, h)) * (p - 1)); }

struct AmiceRule {
    std::string name;
    std::string description;
    ValuationRule rule;
};

inline std::vector<AmiceRule> amice_catalog(long p, long h)
{
    const Q lam = lambda_h(p, h);
    const Q w = Q(ipow(p, h)) * lam;  // = 1/(p-1)
    auto ch = [p](long n) { return Q(digit_sum(Z(n), p)); };
    return {
        {"zero", "b_n = 0", [](long) { return std::optional<Q>{}; }},
        {"bounded", "v = n lambda_h", [lam](long n) { return std::optional<Q>(lam * n); }},
        {"half-digit", "v = n lambda_h - p^h lambda_h ch(n)/2",
         [lam, w, ch](long n) { return std::optional<Q>(lam * n - w * ch(n) / 2); }},
        {"full-digit", "v = n lambda_h - p^h lambda_h ch(n)",
         [lam, w, ch](long n) { return std::optional<Q>(lam * n - w * ch(n)); }},
        {"digit-length", "v = n lambda_h - p^h lambda_h ch(n) + len_p(n)/2",
         [lam, w, ch, p](long n) { return std::optional<Q>(lam * n - w * ch(n) + Q(digit_length(n, p), 2)); }},
    };
}

inline AmiceRule amice_rule(const std::string& name, long p, long h)
{
    for (auto& r : amice_catalog(p, h))
        if (r.name == name) return r;
    throw DomainError("unknown Mahler rule '" + name + "'");
}

struct AmiceVerdict {
    bool member = false;
    // minima of the tested sequence over the blocks [p^{K-1}, p^K), K = 1..
    std::vector<Q> block_minima;
    bool all_zero = false;
};

// Range-qualified class test over n < p^K_max.
// C_{r+}: (v - n lambda) bounded below, judged by non-decreasing block minima over the last `tail` blocks.
// C_r and O_h: the tested sequence tends to infinity, judged by strictly increasing block minima there.
inline AmiceVerdict amice_class_check(const ValuationRule& rule, long p, long h, AmiceClass cls, const Q& lambda,
                                      long k_max, long tail = 3)
{
    require_prime(p);
    if (k_max < tail + 1) throw DomainError("range too short for a verdict");
    const Q lam = lambda_h(p, h);
    const Q w = Q(ipow(p, h)) * lam;
    AmiceVerdict out;
    out.all_zero = true;
    for (long K = 1; K <= k_max; ++K) {
        long lo = ipow(p, K - 1).get_si(), hi = ipow(p, K).get_si();
        std::optional<Q> mn;
        for (long n = lo; n < hi; ++n) {
            auto v = rule(n);
            if (!v) continue;
            out.all_zero = false;
            Q u = cls == AmiceClass::O_h ? Q(*v - lam * n + w * Q(digit_sum(Z(n), p))) : Q(*v - lambda * n);
            if (!mn || u < *mn) mn = u;
        }
        if (mn) out.block_minima.push_back(*mn);
    }
    if (out.all_zero) {
        out.member = true;
        return out;
    }
    const auto& m = out.block_minima;
    bool ok = true;
    for (std::size_t i = m.size() - tail; i < m.size(); ++i) {
        if (cls == AmiceClass::C_r_plus ? m[i] < m[i - 1] : m[i] <= m[i - 1]) ok = false;
    }
    out.member = ok;
    return out;
}

} // namespace nchar
