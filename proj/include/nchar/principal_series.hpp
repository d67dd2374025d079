#pragma once

#include "formal_characters.hpp"
#include "matrix.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nchar {

struct NotRegular : DomainError {
    using DomainError::DomainError;
};
struct NotStabilized : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Side { Plus, Minus };

inline const char* side_name(Side s) { return s == Side::Plus ? "plus" : "minus"; }

// chi(a) = a^c; levels m^+- = p^{h+-}, eps(r) = p^e; k = n-adic cutoff.
struct SL2Config {
    long p = 5;
    long c = 0;
    long h_plus = 0;
    long h_minus = 0;
    long e = 0;
    long k = 2;

    long level_exp(Side s) const { return (s == Side::Plus ? h_plus : h_minus) + e; }

    void validate() const
    {
        require_prime(p);
        if (h_plus < 0 || h_minus < 0 || e < 0) throw DomainError("negative level exponent");
        if (k < 1) throw DomainError("cutoff k must be positive");
        if (-c >= 0 && k <= -c) throw DomainError("cutoff k must exceed -c when -c is a natural number");
    }
};

inline bool minus_c_natural(long c) { return c <= 0; }

inline void require_unit(const Q& a, long p)
{
    if (!is_p_unit(a, p)) throw DomainError("torus coordinate " + a.get_str() + " is not a p-adic unit");
}

inline void require_regular(const Q& a)
{
    if (a == 1 || a == -1) throw NotRegular("a = +-1 is not regular");
}

// ---- base change -----------------------------------------------------------

// z^{j-n} (c+j)(c+j+1)...(c+n-1)
inline Q c_coeff(long n, long j, const Q& z, long c)
{
    if (j > n) throw DomainError("c_coeff needs j <= n");
    if (z == 0) throw DomainError("c_coeff needs z != 0");
    return qpow(z, j - n) * rising(Q(c + j), n - j);
}

// M = (C(l,j) c_{l,j,z}) and its inverse ((-1)^{j+l} C(l,j) c_{l,j,z}), indices 0..k.
inline std::pair<QMatrix, QMatrix> base_change_matrices(long k, const Q& z, long c)
{
    if (z == 0) throw DomainError("base change needs z != 0");
    QMatrix M(k + 1, k + 1), Mi(k + 1, k + 1);
    for (long l = 0; l <= k; ++l)
        for (long j = 0; j <= l; ++j) {
            Q v = Q(binomial(l, j)) * c_coeff(l, j, z, c);
            M(l, j) = v;
            Mi(l, j) = (j + l) % 2 ? -v : v;
        }
    return {M, Mi};
}

// ---- action matrices -------------------------------------------------------

using Label = std::vector<long>;

struct ActionMatrix {
    std::vector<Label> labels;
    SparseMatrix m;

    std::size_t dim() const { return labels.size(); }
    Q trace() const { return m.trace(); }
};

struct LabelIndex {
    std::vector<Label> labels;
    std::map<Label, std::size_t> pos;

    void push(Label l)
    {
        pos.emplace(l, labels.size());
        labels.push_back(std::move(l));
    }
    std::optional<std::size_t> find(const Label& l) const
    {
        auto it = pos.find(l);
        if (it == pos.end()) return std::nullopt;
        return it->second;
    }
};

// Basis of the quotient: (n, i), n < k, i < p^{level}; the minus side drops the (n, 0) with n > -c (all when -c < 0).
inline LabelIndex sl2_basis(const SL2Config& cfg, Side side)
{
    cfg.validate();
    LabelIndex idx;
    const long N = ipow(cfg.p, cfg.level_exp(side)).get_si();
    for (long n = 0; n < cfg.k; ++n)
        for (long i = 0; i < N; ++i) {
            if (side == Side::Minus && i == 0 && !(minus_c_natural(cfg.c) && n <= -cfg.c)) continue;
            idx.push({n, i});
        }
    return idx;
}

inline Q chi(const Q& a, long c) { return qpow(a, c); }

namespace detail {

inline Q inv_factorial(long m) { return Q(1) / Q(factorial(m)); }

// s T_{n',i'} on the full minus-side T basis (no indices dropped).
inline std::map<Label, Q> minus_T_action(const Q& a, const SL2Config& cfg, long n1, long i1)
{
    std::map<Label, Q> col;
    const long lev = cfg.level_exp(Side::Minus);
    const Q z = qpow(a, -2) * i1;
    auto [R, Qz] = residue_split(z, cfg.p, lev);
    const long r = R.get_si();
    const Q base = chi(a, -cfg.c) * qpow(a, -2 * n1);
    Q pw = 1;
    for (long m = 0; n1 + m < cfg.k; ++m) {
        col[{n1 + m, r}] += base * pw * inv_factorial(m);
        pw *= Qz;
    }
    return col;
}

} // namespace detail

// Minus side in the T basis, all (n, i) with i < p^{level}.
inline ActionMatrix sl2_minus_T_matrix(const Q& a, const SL2Config& cfg)
{
    cfg.validate();
    require_unit(a, cfg.p);
    LabelIndex idx;
    const long N = ipow(cfg.p, cfg.level_exp(Side::Minus)).get_si();
    for (long n = 0; n < cfg.k; ++n)
        for (long i = 0; i < N; ++i) idx.push({n, i});
    SparseMatrix m(idx.labels.size());
    for (std::size_t col = 0; col < idx.labels.size(); ++col)
        for (const auto& [row, v] : detail::minus_T_action(a, cfg, idx.labels[col][0], idx.labels[col][1]))
            m.add(*idx.find(row), col, v);
    return {idx.labels, m};
}

inline ActionMatrix sl2_action_matrix(const Q& a, const SL2Config& cfg, Side side)
{
    cfg.validate();
    require_unit(a, cfg.p);
    LabelIndex idx = sl2_basis(cfg, side);
    SparseMatrix m(idx.labels.size());
    const long lev = cfg.level_exp(side);
    const long k = cfg.k;

    if (side == Side::Plus) {
        for (std::size_t col = 0; col < idx.labels.size(); ++col) {
            long n1 = idx.labels[col][0], i1 = idx.labels[col][1];
            auto [R, Qz] = residue_split(a * a * i1, cfg.p, lev);
            const Q base = chi(a, cfg.c) * qpow(a, 2 * n1);
            Q pw = 1;
            for (long mm = 0; n1 + mm < k; ++mm) {
                m.add(*idx.find({n1 + mm, R.get_si()}), col, base * pw * detail::inv_factorial(mm));
                pw *= Qz;
            }
        }
        return {idx.labels, m};
    }

    // Minus side: act on T, change to the T~ basis index by index, drop the torus-stable forbidden lines.
    for (std::size_t col = 0; col < idx.labels.size(); ++col) {
        long n1 = idx.labels[col][0], i1 = idx.labels[col][1];
        std::map<Label, Q> inT;
        if (i1 == 0) {
            inT = detail::minus_T_action(a, cfg, n1, 0);
        } else {
            for (long j = 0; j <= n1; ++j) {
                Q mj = Q(binomial(n1, j)) * c_coeff(n1, j, Q(i1), cfg.c);
                if (mj == 0) continue;
                for (const auto& [lab, v] : detail::minus_T_action(a, cfg, j, i1)) inT[lab] += mj * v;
            }
        }
        for (const auto& [lab, v] : inT) {
            if (v == 0) continue;
            long l = lab[0], R = lab[1];
            if (R == 0) {
                auto row = idx.find({l, 0});
                if (!row) throw DomainError("minus side: allowed vector maps onto a forbidden index");
                m.add(*row, col, v);
                continue;
            }
            for (long n = 0; n <= l; ++n) {
                Q w = Q(binomial(l, n)) * c_coeff(l, n, Q(R), cfg.c);
                if ((n + l) % 2) w = -w;
                m.add(*idx.find({n, R}), col, v * w);
            }
        }
    }
    return {idx.labels, m};
}

// The n-adic alternative on the minus side: transpose of f(x) -> a^c f(a^2 x) on polynomials of degree < k
// on each nonzero class, basis (x - i)^n. The torus is commutative, so the transpose is again a
// representation; it is triangular with n >= n'. The zero class keeps the torus-stable lines.
inline ActionMatrix sl2_action_matrix_nadic_minus(const Q& a, const SL2Config& cfg)
{
    cfg.validate();
    require_unit(a, cfg.p);
    LabelIndex idx = sl2_basis(cfg, Side::Minus);
    SparseMatrix m(idx.labels.size());
    const long lev = cfg.level_exp(Side::Minus);
    const Q b = a * a;
    for (std::size_t col = 0; col < idx.labels.size(); ++col) {
        long n1 = idx.labels[col][0], i1 = idx.labels[col][1];
        if (i1 == 0) {
            m.add(col, col, chi(a, -cfg.c) * qpow(a, -2 * n1));
            continue;
        }
        // (b x - i1)^n1 = b^n1 ((x - R) - Q)^n1 with R + Q = i1 / b
        auto [Rz, Qz] = residue_split(Q(i1) / b, cfg.p, lev);
        for (long n = 0; n <= n1; ++n) {
            Q v = chi(a, cfg.c) * qpow(b, n1) * Q(binomial(n1, n)) * qpow(-Qz, n1 - n);
            m.add(col, *idx.find({n, Rz.get_si()}), v);
        }
    }
    return {idx.labels, m};
}

inline Q sl2_trace(const Q& a, const SL2Config& cfg, Side side) { return sl2_action_matrix(a, cfg, side).trace(); }

// ---- per-level trace closed forms ----------------------------------------------

// Fixed indices of i -> R(mult * i) on {0..p^lev - 1} (nonzero ones when include_zero is false).
inline Z fixpoint_count(const Q& mult, long p, long lev, bool include_zero)
{
    return perm_fixpoints(p, lev, mult, include_zero);
}

inline Q sum_powers(const Q& x, long from, long to_exclusive)
{
    Q s = 0;
    for (long n = from; n < to_exclusive; ++n) s += qpow(x, n);
    return s;
}

// d_{n,j,m} = c_{j+m,j,1}/m! (-1)^{j+m+n} C(n,j) C(j+m,n)
inline Q d_coeff(long n, long j, long m, long c)
{
    Q v = c_coeff(j + m, j, Q(1), c) * detail::inv_factorial(m) * Q(binomial(n, j) * binomial(j + m, n));
    return (j + m + n) % 2 ? -v : v;
}

// sum_{j+m<k} d_{n,j,m} x^j (x-1)^m
inline Q d_row_sum(long n, long k, long c, const Q& x)
{
    Q s = 0;
    for (long j = 0; j < k; ++j)
        for (long m = 0; j + m < k; ++m) {
            Q d = d_coeff(n, j, m, c);
            if (d != 0) s += d * qpow(x, j) * qpow(x - 1, m);
        }
    return s;
}

inline Q minus_correction(const Q& x, long c) { return minus_c_natural(c) ? sum_powers(x, 0, -c + 1) : Q(0); }

inline Q sl2_trace_closed_form(const Q& a, const SL2Config& cfg, Side side)
{
    cfg.validate();
    const long lev = cfg.level_exp(side);
    if (side == Side::Plus)
        return chi(a, cfg.c) * Q(fixpoint_count(a * a, cfg.p, lev, true)) * sum_powers(a * a, 0, cfg.k);
    const Q x = qpow(a, -2);
    Q dsum = 0;
    for (long n = 0; n < cfg.k; ++n) dsum += d_row_sum(n, cfg.k, cfg.c, x);
    return chi(a, -cfg.c) * (Q(fixpoint_count(x, cfg.p, lev, false)) * dsum + minus_correction(x, cfg.c));
}

inline Q sl2_trace_closed_form_nadic_minus(const Q& a, const SL2Config& cfg)
{
    cfg.validate();
    const Q x = qpow(a, -2);
    return chi(a, cfg.c) * Q(fixpoint_count(x, cfg.p, cfg.level_exp(Side::Minus), false)) * sum_powers(a * a, 0, cfg.k) +
           chi(a, -cfg.c) * minus_correction(x, cfg.c);
}

// ---- closed-form characters ----------------------------------------------------

inline Q theta_sl2(const Q& a, long c, long p)
{
    require_regular(a);
    require_unit(a, p);
    const Q x = chi(a, c);
    const Q a2 = a * a, am2 = 1 / a2;
    const long m0 = minus_c_natural(c) ? 1 - c : 0;
    return 1 / (x * abs_p(1 - am2, p) * (1 - am2)) + x / (abs_p(1 - a2, p) * (1 - a2)) - x * qpow(a, 2 * m0) / (1 - a2);
}

inline Q theta_sl2_smooth(const Q& a, long c, long p)
{
    require_regular(a);
    require_unit(a, p);
    const Q x = chi(a, c);
    return 1 / (x * abs_p(1 - 1 / (a * a), p)) + x / abs_p(1 - a * a, p);
}

inline Q weyl_char_sl2(const Q& a, long c)
{
    require_regular(a);
    return (qpow(a, c - 1) - qpow(a, 1 - c)) / (a - 1 / a);
}

// Limit value carried by the n-adic minus quotient, plus side unchanged.
inline Q theta_sl2_nadic(const Q& a, long c, long p)
{
    require_regular(a);
    require_unit(a, p);
    const Q x = chi(a, c);
    const Q L = 1 / abs_p(1 - a * a, p);
    const Q am2 = 1 / (a * a);
    return L / (x * (1 - am2)) + (L - 1) / (x * (1 - am2)) + x * minus_correction(a * a, c);
}

// ---- formal characters ---------------------------------------------------------

// Generators e(eps) and e(chi) evaluated at s = diag(a, a^{-1}): eps -> a^{-1}, chi -> a^{-c}.
inline CharacterLattice sl2_lattice(long c) { return CharacterLattice({{"eps", {-1}}, {"chi", {-c}}}); }

struct SL2Formal {
    FormalFunction perm_part;       // Perm node
    FormalFunction free_part;       // Perm-free factor
    FormalFunction correction;      // added term (minus side), may be null
    FormalFunction whole;
};

namespace detail {

inline SL2Formal assemble(FormalFunction pm, FormalFunction free, FormalFunction corr)
{
    FormalFunction whole = product({pm, free});
    if (corr) whole = sum({whole, corr});
    return {pm, free, corr, whole};
}

inline GroupRingElement power_sum(const CharacterLattice& lat, const Monomial& pre, const Monomial& step, long from,
                                  long to_exclusive)
{
    GroupRingElement g;
    for (long n = from; n < to_exclusive; ++n) g.add(mono_mul(pre, mono_pow(step, n)), 1);
    (void)lat;
    return g;
}

} // namespace detail

// Theta_k for one side at cutoff k (pre-inversion).
inline SL2Formal sl2_formal_theta_k(const SL2Config& cfg, Side side)
{
    cfg.validate();
    auto lat = sl2_lattice(cfg.c);
    const long lev = cfg.level_exp(side);
    if (side == Side::Plus) {
        auto pre = lat.gen("chi", -1);
        return detail::assemble(perm(cfg.p, lev, lat.gen("eps", -2), true),
                                ring(detail::power_sum(lat, pre, lat.gen("eps", -2), 0, cfg.k)), nullptr);
    }
    auto pre = lat.gen("chi", 1);
    FormalFunction corr;
    if (minus_c_natural(cfg.c)) corr = ring(detail::power_sum(lat, pre, lat.gen("eps", 2), 0, -cfg.c + 1));
    return detail::assemble(perm(cfg.p, lev, lat.gen("eps", 2), false),
                            ring(detail::power_sum(lat, pre, lat.gen("eps", 2), 0, cfg.k)), corr);
}

// Theta = lim_k Theta_k (pre-inversion).
inline SL2Formal sl2_formal_theta(const SL2Config& cfg, Side side)
{
    cfg.validate();
    auto lat = sl2_lattice(cfg.c);
    const long lev = cfg.level_exp(side);
    if (side == Side::Plus)
        return detail::assemble(perm(cfg.p, lev, lat.gen("eps", -2), true),
                                product({mono(lat.gen("chi", -1)), geom(lat.gen("eps", -2))}), nullptr);
    FormalFunction corr;
    if (minus_c_natural(cfg.c)) corr = ring(detail::power_sum(lat, lat.gen("chi", 1), lat.gen("eps", 2), 0, -cfg.c + 1));
    return detail::assemble(perm(cfg.p, lev, lat.gen("eps", 2), false),
                            product({mono(lat.gen("chi", 1)), geom(lat.gen("eps", 2))}), corr);
}

// n-adic minus quotient: e(chi^{-1}) Perm(p^lev, eps^2, nonzero) sum_n e(eps)^{-2n} + correction.
inline SL2Formal sl2_formal_theta_nadic_minus(const SL2Config& cfg, bool limit)
{
    cfg.validate();
    auto lat = sl2_lattice(cfg.c);
    FormalFunction corr;
    if (minus_c_natural(cfg.c)) corr = ring(detail::power_sum(lat, lat.gen("chi", 1), lat.gen("eps", 2), 0, -cfg.c + 1));
    FormalFunction free = limit ? product({mono(lat.gen("chi", -1)), geom(lat.gen("eps", -2))})
                                : ring(detail::power_sum(lat, lat.gen("chi", -1), lat.gen("eps", -2), 0, cfg.k));
    return detail::assemble(perm(cfg.p, cfg.level_exp(Side::Minus), lat.gen("eps", 2), false), free, corr);
}

// sum_{n<k} sum_{j+m<k} d_{n,j,m} e(eps)^{2j} (e(eps)^2 - 1)^m in Z[X]
inline GroupRingElement d_sum_formal(long k, long c)
{
    auto lat = sl2_lattice(c);
    const auto one = lat.one();
    const auto e2 = GroupRingElement::monomial(lat.gen("eps", 2));
    const auto e2m1 = e2 - GroupRingElement::monomial(one);
    GroupRingElement total;
    for (long n = 0; n < k; ++n)
        for (long j = 0; j < k; ++j)
            for (long m = 0; j + m < k; ++m) {
                Q d = d_coeff(n, j, m, c);
                if (d == 0) continue;
                if (d.get_den() != 1) throw DomainError("d coefficient is not an integer");
                GroupRingElement t = GroupRingElement::monomial(lat.gen("eps", 2 * j), d.get_num());
                for (long r = 0; r < m; ++r) t = t * e2m1;
                total = total + t;
            }
    return total;
}

// ---- Iwahori case ---------------------------------------------------------------

struct RootDatum {
    long p = 3;
    long t = 1;                          // torus rank
    std::vector<std::vector<long>> roots;
    std::vector<long> chi_w;
    std::vector<long> levels;            // h_j, level p^{h_j}
    long k = 2;

    std::size_t d() const { return roots.size(); }

    void validate() const
    {
        require_prime(p);
        if (roots.empty()) throw DomainError("root datum without roots");
        if (static_cast<long>(chi_w.size()) != t) throw DomainError("chi_w has the wrong rank");
        if (levels.size() != roots.size()) throw DomainError("one level per root expected");
        for (const auto& r : roots) {
            if (static_cast<long>(r.size()) != t) throw DomainError("root has the wrong rank");
            if (std::all_of(r.begin(), r.end(), [](long x) { return x == 0; })) throw DomainError("zero root");
        }
        for (long h : levels)
            if (h < 0) throw DomainError("negative level");
        if (k < 1) throw DomainError("cutoff k must be positive");
    }
};

inline Q character_value(const std::vector<long>& exps, const TorusPoint& s)
{
    Q v = 1;
    for (std::size_t i = 0; i < s.size(); ++i) v *= qpow(s[i], exps[i]);
    return v;
}

inline void require_torus_point(const TorusPoint& s, const RootDatum& rd)
{
    if (static_cast<long>(s.size()) != rd.t) throw DomainError("torus point has the wrong rank");
    for (const auto& x : s) require_unit(x, rd.p);
}

// Labels (alpha_1..alpha_d, beta_1..beta_d).
inline LabelIndex iwahori_basis(const RootDatum& rd)
{
    rd.validate();
    const std::size_t d = rd.d();
    LabelIndex idx;
    Label l(2 * d, 0);
    std::vector<long> bound(2 * d);
    for (std::size_t j = 0; j < d; ++j) {
        bound[j] = ipow(rd.p, rd.levels[j]).get_si();
        bound[d + j] = rd.k;
    }
    for (;;) {
        idx.push(l);
        std::size_t v = 0;
        while (v < l.size() && ++l[v] == bound[v]) l[v++] = 0;
        if (v == l.size()) break;
    }
    return idx;
}

inline ActionMatrix iwahori_action_matrix(const TorusPoint& s, const RootDatum& rd)
{
    rd.validate();
    require_torus_point(s, rd);
    const std::size_t d = rd.d();
    LabelIndex idx = iwahori_basis(rd);
    SparseMatrix m(idx.labels.size());
    std::vector<Q> aj;
    for (const auto& r : rd.roots) aj.push_back(character_value(r, s));
    const Q chi_inv = 1 / character_value(rd.chi_w, s);
    for (std::size_t col = 0; col < idx.labels.size(); ++col) {
        const Label& lab = idx.labels[col];
        std::vector<long> R(d);
        std::vector<Q> Qs(d);
        Q base = chi_inv;
        for (std::size_t j = 0; j < d; ++j) {
            auto sp = residue_split(aj[j] * lab[j], rd.p, rd.levels[j]);
            R[j] = sp.rem.get_si();
            Qs[j] = sp.quo;
            base *= qpow(aj[j], lab[d + j]);
        }
        // gamma with beta' + gamma < k componentwise
        std::vector<long> g(d, 0);
        for (;;) {
            Q v = base;
            Label row(2 * d);
            for (std::size_t j = 0; j < d; ++j) {
                v *= qpow(Qs[j], g[j]) * detail::inv_factorial(g[j]);
                row[j] = R[j];
                row[d + j] = lab[d + j] + g[j];
            }
            m.add(*idx.find(row), col, v);
            std::size_t v2 = 0;
            while (v2 < d && ++g[v2] + lab[d + v2] >= rd.k) g[v2++] = 0;
            if (v2 == d) break;
        }
    }
    return {idx.labels, m};
}

inline Z iwahori_fixpoint_count(const TorusPoint& s, const RootDatum& rd)
{
    Z f = 1;
    for (std::size_t j = 0; j < rd.d(); ++j) f *= perm_fixpoints(rd.p, rd.levels[j], character_value(rd.roots[j], s), true);
    return f;
}

// prod_j p^{min(h_j, v_p(a_j(s) - 1))}
inline Z iwahori_fixpoint_closed_form(const TorusPoint& s, const RootDatum& rd)
{
    Z f = 1;
    for (std::size_t j = 0; j < rd.d(); ++j) {
        long v = vp(character_value(rd.roots[j], s) - 1, rd.p);
        f *= ipow(rd.p, std::min(rd.levels[j], v));
    }
    return f;
}

// prod_j |a_j(s) - 1|_p^{-1}; requires a_j(s) != 1
inline Q iwahori_stable_count(const TorusPoint& s, const RootDatum& rd)
{
    Q f = 1;
    for (const auto& r : rd.roots) {
        Q x = character_value(r, s) - 1;
        if (x == 0) throw NotRegular("a_j(s) = 1");
        f /= abs_p(x, rd.p);
    }
    return f;
}

inline bool iwahori_stable(const TorusPoint& s, const RootDatum& rd)
{
    for (std::size_t j = 0; j < rd.d(); ++j) {
        Q x = character_value(rd.roots[j], s) - 1;
        if (x == 0 || vp(x, rd.p) > rd.levels[j]) return false;
    }
    return true;
}

inline Q iwahori_trace_closed_form(const TorusPoint& s, const RootDatum& rd)
{
    Q v = Q(iwahori_fixpoint_count(s, rd)) / character_value(rd.chi_w, s);
    for (const auto& r : rd.roots) v *= sum_powers(character_value(r, s), 0, rd.k);
    return v;
}

inline Q theta_iwahori(const TorusPoint& s, const RootDatum& rd)
{
    rd.validate();
    require_torus_point(s, rd);
    Q v = character_value(rd.chi_w, s);
    for (const auto& r : rd.roots) {
        Q x = 1 / character_value(r, s);
        if (x == 1) throw NotRegular("a_j(s) = 1");
        v /= (1 - x) * abs_p(1 - x, rd.p);
    }
    return v;
}

// Generators chi_w and a_1..a_d with their exponent rules.
inline CharacterLattice iwahori_lattice(const RootDatum& rd)
{
    std::vector<Generator> g{{"chi_w", rd.chi_w}};
    for (std::size_t j = 0; j < rd.d(); ++j) g.push_back({"a" + std::to_string(j + 1), rd.roots[j]});
    return CharacterLattice(g);
}

struct IwahoriFormal {
    FormalFunction perm_part;
    FormalFunction free_part;
    FormalFunction whole;
};

// Phi_k (finite) or Phi (k = nullopt): e(chi_w^{-1}) prod Perm(p^{h_j}, a_j) prod sum_beta e(a_j)^beta.
inline IwahoriFormal iwahori_formal(const RootDatum& rd, std::optional<long> k)
{
    rd.validate();
    auto lat = iwahori_lattice(rd);
    std::vector<FormalFunction> perms, free{mono(lat.gen("chi_w", -1))};
    for (std::size_t j = 0; j < rd.d(); ++j) {
        std::string name = "a" + std::to_string(j + 1);
        perms.push_back(perm(rd.p, rd.levels[j], lat.gen(name), true));
        if (k) free.push_back(ring(detail::power_sum(lat, lat.one(), lat.gen(name), 0, *k)));
        else free.push_back(geom(lat.gen(name)));
    }
    FormalFunction pp = product(perms), fp = product(free);
    return {pp, fp, product({pp, fp})};
}

// ---- sweeps ------------------------------------------------------------------------

struct SweepRow {
    long h = 0, e = 0, k = 0;
    Q trace;             // brute-force trace at s, both sides summed
    Q closed_trace;      // per-level / block closed form
    Q formal_value;      // evaluated Theta at s^{-1}
    bool stable = false;
    bool trace_ok = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::optional<Q> value;    // stabilized value
    bool limit_certified = false;
};

inline std::string sweep_csv_header() { return "h,e,k,trace,closed_trace,formal_value,stable,trace_ok"; }

inline std::string sweep_csv_row(const SweepRow& r)
{
    return std::to_string(r.h) + "," + std::to_string(r.e) + "," + std::to_string(r.k) + "," + r.trace.get_str() + "," +
           r.closed_trace.get_str() + "," + r.formal_value.get_str() + "," + (r.stable ? "1" : "0") + "," +
           (r.trace_ok ? "1" : "0");
}

struct SweepGrid {
    std::vector<long> h{0, 1, 2};
    std::vector<long> e{0, 1, 2};
    std::vector<long> k;  // empty: defaults from the instance
};

// Levels h + e <= 2: three roots at level 3 already give half a million basis vectors.
inline SweepGrid iwahori_default_grid() { return {{0, 1}, {0, 1}, {}}; }

inline std::vector<long> default_k_range(long c)
{
    long k0 = std::max<long>(2, 1 - c);
    return {k0, k0 + 1, k0 + 2};
}

namespace detail {

// Coefficientwise k-limit of the Perm-free parts, checked against the Geom expansion.
inline bool certify_k_limit(const std::vector<FormalFunction>& finite_parts, const FormalFunction& limit_part, long kmax)
{
    std::vector<GroupRingElement> seq;
    for (const auto& f : finite_parts) seq.push_back(expand(f, std::numeric_limits<long>::max() / 4));
    long window = 2 * kmax - 3;
    auto lim = limit_of_truncations(seq, window);
    return expand(lim, window) == expand(limit_part, window);
}

} // namespace detail

// Full pipeline for SL2 at s = diag(a, a^{-1}); h^+ = h^- = h.
inline SweepResult ncharacter_sweep_sl2(long p, long c, const Q& a, const SweepGrid& grid, bool nadic_minus = false)
{
    require_regular(a);
    require_unit(a, p);
    std::vector<long> ks = grid.k.empty() ? default_k_range(c) : grid.k;
    const long threshold = vp(a * a - 1, p);
    const Q ainv = 1 / a;
    auto lat = sl2_lattice(c);
    SweepResult res;
    res.limit_certified = true;
    for (long h : grid.h)
        for (long e : grid.e) {
            std::vector<FormalFunction> plus_free, minus_free;
            for (long k : ks) {
                SL2Config cfg{p, c, h, h, e, k};
                cfg.validate();
                SweepRow row;
                row.h = h, row.e = e, row.k = k;
                Q tp = sl2_trace(a, cfg, Side::Plus);
                Q tm = nadic_minus ? sl2_action_matrix_nadic_minus(a, cfg).trace() : sl2_trace(a, cfg, Side::Minus);
                row.trace = tp + tm;
                row.closed_trace = sl2_trace_closed_form(a, cfg, Side::Plus) +
                                   (nadic_minus ? sl2_trace_closed_form_nadic_minus(a, cfg)
                                                : sl2_trace_closed_form(a, cfg, Side::Minus));
                auto fp = sl2_formal_theta_k(cfg, Side::Plus);
                auto fm = nadic_minus ? sl2_formal_theta_nadic_minus(cfg, false) : sl2_formal_theta_k(cfg, Side::Minus);
                Q formal_at_s = eval_formal(lat, fp.whole, {a}) + eval_formal(lat, fm.whole, {a});
                row.trace_ok = row.trace == row.closed_trace && row.trace == formal_at_s;
                plus_free.push_back(fp.free_part);
                minus_free.push_back(fm.free_part);

                auto Tp = sl2_formal_theta(cfg, Side::Plus);
                auto Tm = nadic_minus ? sl2_formal_theta_nadic_minus(cfg, true) : sl2_formal_theta(cfg, Side::Minus);
                certify_evaluable(lat, Tp.free_part, {{ainv}}, 16);
                certify_evaluable(lat, Tm.free_part, {{ainv}}, 16);
                row.formal_value = eval_formal(lat, Tp.whole, {ainv}) + eval_formal(lat, Tm.whole, {ainv});
                row.stable = h + e >= threshold;
                res.rows.push_back(row);
            }
            SL2Config last{p, c, h, h, e, ks.back()};
            auto minus_lim = nadic_minus ? sl2_formal_theta_nadic_minus(last, true) : sl2_formal_theta(last, Side::Minus);
            if (!detail::certify_k_limit(plus_free, sl2_formal_theta(last, Side::Plus).free_part, ks.back()) ||
                !detail::certify_k_limit(minus_free, minus_lim.free_part, ks.back()))
                res.limit_certified = false;
        }
    for (const auto& r : res.rows) {
        if (!r.stable) continue;
        if (!res.value) res.value = r.formal_value;
        else if (*res.value != r.formal_value) throw NotStabilized("sweep values differ past the stable threshold");
    }
    return res;
}

// Iwahori pipeline: all levels h_j = h + e.
inline SweepResult ncharacter_sweep_iwahori(RootDatum rd, const TorusPoint& s, const SweepGrid& grid)
{
    require_torus_point(s, rd);
    std::vector<long> ks = grid.k.empty() ? std::vector<long>{2, 3} : grid.k;
    TorusPoint sinv;
    for (const auto& x : s) sinv.push_back(1 / x);
    SweepResult res;
    res.limit_certified = true;
    for (long h : grid.h)
        for (long e : grid.e) {
            std::vector<FormalFunction> free;
            rd.levels.assign(rd.d(), h + e);
            auto lat = iwahori_lattice(rd);
            for (long k : ks) {
                rd.k = k;
                SweepRow row;
                row.h = h, row.e = e, row.k = k;
                row.trace = iwahori_action_matrix(s, rd).trace();
                row.closed_trace = iwahori_trace_closed_form(s, rd);
                auto fk = iwahori_formal(rd, k);
                row.trace_ok = row.trace == row.closed_trace && row.trace == eval_formal(lat, fk.whole, s);
                free.push_back(fk.free_part);
                auto lim = iwahori_formal(rd, std::nullopt);
                certify_evaluable(lat, lim.free_part, {sinv}, 8);
                row.formal_value = eval_formal(lat, lim.whole, sinv);
                row.stable = iwahori_stable(s, rd);
                res.rows.push_back(row);
            }
            // e(chi_w^{-1}) prod_j sum_{beta_j < k} e(a_j)^beta_j is exact up to degree k
            std::vector<GroupRingElement> seq;
            for (const auto& f : free) seq.push_back(expand(f, std::numeric_limits<long>::max() / 4));
            long window = ks.size() >= 2 ? ks[ks.size() - 2] : ks.back();
            try {
                auto l = limit_of_truncations(seq, window);
                if (!(expand(l, window) == expand(iwahori_formal(rd, std::nullopt).free_part, window)))
                    res.limit_certified = false;
            } catch (const NotConverged&) {
                res.limit_certified = false;
            }
        }
    for (const auto& r : res.rows) {
        if (!r.stable) continue;
        if (!res.value) res.value = r.formal_value;
        else if (*res.value != r.formal_value) throw NotStabilized("sweep values differ past the stable threshold");
    }
    return res;
}

} // namespace nchar
