#pragma once

// Acceptance suites shared by the acceptance binary and `nchar_cli verify`.

#include "nchar.hpp"

#include <chrono>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace nchar::verify {

struct Outcome {
    bool pass = true;
    std::size_t checks = 0;
    std::vector<std::string> failures;  // first few only

    void expect(bool ok, const std::function<std::string()>& what)
    {
        ++checks;
        if (ok) return;
        pass = false;
        if (failures.size() < 8) failures.push_back(what());
    }
};

struct Criterion {
    int id;
    std::string suite;
    std::string title;
    double budget_seconds;  // 0: none
    std::function<Outcome(std::uint64_t seed)> run;
};

struct Report {
    int id;
    std::string title;
    Outcome outcome;
    double seconds;
    bool within_budget;
    bool pass() const { return outcome.pass && within_budget; }
};

namespace detail {

inline std::string str(const Q& x) { return x.get_str(); }

// n rational p-adic units from a seeded stream
inline std::vector<Q> sample_units(long p, std::size_t n, std::mt19937_64& rng, bool allow_one = true)
{
    std::uniform_int_distribution<long> num(1, 500);
    std::vector<Q> out;
    while (out.size() < n) {
        Q s = rational(num(rng), num(rng));
        if (!is_p_unit(s, p) || (!allow_one && s == 1)) continue;
        out.push_back(s);
    }
    return out;
}

inline std::vector<Q> sample_exponents()
{
    std::vector<Q> qs;
    for (long den : {1, 2, 3, 4, 5, 7, 8, 9, 11, 13})
        for (long num : std::initializer_list<long>{1, den > 2 ? den - 1 : 1}) qs.push_back(rational(num, den));
    return qs;
}

inline QMatrix random_unimodular(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> small(-2, 2);
    QMatrix u = QMatrix::identity(n);
    for (int s = 0; s < 10; ++s) {
        std::size_t i = rng() % n, j = rng() % n;
        if (i == j) continue;
        Q f = small(rng);
        for (std::size_t r = 0; r < n; ++r) u(r, i) += f * u(r, j);
    }
    return u;
}

inline std::vector<RootDatum> acceptance_root_data()
{
    return {
        {3, 1, {{2}}, {0}, {1}, 2},                          // d = 1, the SL2 plus side
        {3, 1, {{1}, {2}}, {1}, {1, 1}, 2},                  // d = 2, torus rank 1
        {3, 2, {{1, 0}, {0, 1}, {1, 1}}, {1, -1}, {1, 1, 1}, 2},  // d = 3, torus rank 2
    };
}

inline std::vector<TorusPoint> acceptance_points(const RootDatum& rd)
{
    if (rd.t == 1) return {{Q(4)}, {Q(2)}, {rational(1, 2)}};
    return {{Q(4), Q(5)}, {Q(2), Q(5)}};
}

} // namespace detail

inline Outcome smooth_standard(std::uint64_t seed)
{
    Outcome o;
    std::mt19937_64 rng(seed);
    for (long p : {2, 3, 5})
        for (const Q& s : detail::sample_units(p, 10, rng)) {
            long v = s == 1 ? kInfiniteValuation : vp(1 / s - 1, p);
            for (long h = 0; h <= 5; ++h) {
                Z got = smooth_trace(p, h, s, Covering::Standard), want = ipow(p, std::min(h, v));
                o.expect(got == want, [&] { return "p=" + std::to_string(p) + " h=" + std::to_string(h) + " s=" + detail::str(s); });
            }
        }
    return o;
}

inline Outcome smooth_inverted(std::uint64_t seed)
{
    Outcome o;
    std::mt19937_64 rng(seed);
    for (long p : {2, 3, 5})
        for (const Q& s : detail::sample_units(p, 10, rng, false)) {
            const long v = vp(s - 1, p);
            // indices carry valuations up to h - 1
            for (long h = 1; ipow(p, 2 * h - 1) <= 4096; ++h) {
                if (!(2 * h - 1 > v + h - 1)) continue;
                Z got = smooth_trace(p, h, s, Covering::Inverted);
                o.expect(got == 1, [&] { return "p=" + std::to_string(p) + " h=" + std::to_string(h) + " s=" + detail::str(s); });
            }
        }
    return o;
}

inline Outcome divisible_count(std::uint64_t)
{
    Outcome o;
    for (long p : {2, 3, 5})
        for (long b = 0; b <= 6; ++b)
            for (long a = 0; a <= b; ++a)
                o.expect(count_divisible(a, b, p) == ipow(p, a), [&] { return std::to_string(a) + "," + std::to_string(b); });
    return o;
}

inline Outcome binomial_identities(std::uint64_t)
{
    Outcome o;
    for (long a = 0; a <= 8; ++a)
        for (long b = 0; b <= 8; ++b) {
            for (long c = 0; c <= 5; ++c)
                for (long d = 0; d <= 5; ++d)
                    o.expect(binom_identity_checks(a, b, c, d, 0, 2).claim_i_holds, [&] { return "(i) " + std::to_string(a) + "," + std::to_string(b); });
            for (long p : {2, 3, 5})
                for (long h = 0; h <= 2; ++h)
                    o.expect(binom_identity_checks(a, b, 0, 0, h, p).claim_ii_holds, [&] { return "(ii) " + std::to_string(a) + "," + std::to_string(b); });
        }
    return o;
}

inline Outcome lattices(std::uint64_t seed)
{
    Outcome o;
    std::mt19937_64 rng(seed);
    for (long p : {3, 5}) {
        QMatrix Z2 = QMatrix::identity(2), D(2, 2);
        D(0, 0) = Q(p);
        D(1, 1) = Q(p * p);
        std::vector<std::pair<PLattice, PLattice>> cases{
            {PLattice(p, Z2), PLattice(p, D)},
            {heisenberg_lattice(p, 1, 1, 1), heisenberg_lattice(p, 1, 2, 1)},
            {heisenberg_lattice(p, 1, 0, 1), heisenberg_lattice(p, 2, 2, 2)},
        };
        for (const auto& [big, sub] : cases) {
            auto ref = p_elementary_divisors(big, sub);
            for (int t = 0; t < 20; ++t) {
                PLattice b2(p, big.gens * detail::random_unimodular(big.rank_(), rng));
                PLattice s2(p, sub.gens * detail::random_unimodular(sub.rank_(), rng));
                o.expect(p_elementary_divisors(b2, s2) == ref, [&] { return "divisors changed under a basis change"; });
            }
        }
    }
    o.expect(is_powerful(heisenberg_lattice(5, 1, 0, 1)), [] { return "first group should be powerful"; });
    o.expect(is_powerful(heisenberg_lattice(5, 1, 1, 1)), [] { return "second group should be powerful"; });
    o.expect(!is_powerful(heisenberg_lattice(5, 1, 2, 1)), [] { return "third group should not be powerful"; });
    return o;
}

inline Outcome epsilon_properties(std::uint64_t)
{
    Outcome o;
    for (long p : {2, 3, 5}) {
        PContext ctx(p);
        for (const Q& q : detail::sample_exponents()) {
            auto e = epsilon_r(PExponent(-q), ctx);
            auto tag = [&] { return "p=" + std::to_string(p) + " q=" + detail::str(q); };
            // (a) dominant index of log(1+b) under the weight r^kappa, which may drop below p^-1 for p = 2
            auto rep = weighted_dominance(log_one_plus_b(), {PExponent(-q * ctx.kappa)}, p, 50);
            o.expect(rep.dominant && (*rep.dominant)[0] == e.value && !rep.boundary, [&] { return "(a) " + tag(); });
            o.expect(epsilon_r(PExponent(-q / p), ctx).value == e.value * p, [&] { return "(b) " + tag(); });
            Q expo = -q * ctx.kappa * Q(e.value);
            o.expect(Q(-p) / (p - 1) <= expo && expo < Q(-1) / (p - 1), [&] { return "(c) " + tag(); });
        }
    }
    return o;
}

inline Outcome dominance(std::uint64_t)
{
    Outcome o;
    for (long b = 0; b <= 5; ++b) {
        auto rep = subgroup_expansion_dominance({b}, {1}, {PExponent(rational(-1, 4))}, 3, 20);
        o.expect(rep.s_beta[0] == 3 * b && rep.ok(), [&] { return "beta=" + std::to_string(b); });
    }
    return o;
}

inline Outcome straightening(std::uint64_t seed)
{
    Outcome o;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 10; ++t) {
        auto sd = random_heisenberg_data(rng);
        auto e = random_power_word(3, 7, rng);
        auto rep = straighten(sd, e, 1);
        o.expect(rep.remainder_vanished() && rep.min_degree >= 3, [&] { return "word " + std::to_string(t) + " below degree 3"; });
        o.expect(oracle_canonical(sd, e) == oracle_canonical(sd, rep.normal_form),
                 [&] { return "word " + std::to_string(t) + " disagrees with the oracle"; });
    }
    return o;
}

// a = 3 is skipped for p = 3 (not a unit)
inline std::vector<std::pair<long, Q>> sl2_points()
{
    std::vector<std::pair<long, Q>> pts;
    for (long p : {3, 5})
        for (Q a : {Q(2), Q(3), Q(1 + p)})
            if (is_p_unit(a, p)) pts.push_back({p, a});
    return pts;
}

inline Outcome sl2_pipeline(std::uint64_t)
{
    Outcome o;
    for (const auto& [p, a] : sl2_points())
        for (long c : {0, -1, -2, 1, 2}) {
            auto tag = [&, p = p, a = a] { return "p=" + std::to_string(p) + " c=" + std::to_string(c) + " a=" + detail::str(a); };
            auto t0 = std::chrono::steady_clock::now();
            auto res = ncharacter_sweep_sl2(p, c, a, SweepGrid{});
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            o.expect(res.value && *res.value == theta_sl2(a, c, p), [&] { return "value " + tag(); });
            o.expect(res.limit_certified, [&] { return "k-limit " + tag(); });
            bool traces = std::all_of(res.rows.begin(), res.rows.end(), [](const SweepRow& r) { return r.trace_ok; });
            o.expect(traces, [&] { return "trace " + tag(); });
            o.expect(secs < 30, [&] { return "time " + tag(); });
        }
    return o;
}

inline Outcome exact_sequences(std::uint64_t)
{
    Outcome o;
    for (long p : {3, 5, 7})
        for (Q a : {Q(2), Q(3), Q(4), Q(6), Q(1 + p), Q(1 + p * p), rational(1, 2), rational(2, 3)}) {
            if (!is_p_unit(a, p)) continue;
            o.expect(theta_sl2(a, 2, p) - theta_sl2(a, 0, p) + theta_sl2_smooth(a, 0, p) == 0,
                     [&] { return "smooth p=" + std::to_string(p) + " a=" + detail::str(a); });
            for (long c : {0, -1, -2, -3})
                o.expect(theta_sl2(a, 2 - c, p) - theta_sl2(a, c, p) == theta_sl2_smooth(a, 0, p) * weyl_char_sl2(a, c),
                         [&] { return "c=" + std::to_string(c) + " p=" + std::to_string(p) + " a=" + detail::str(a); });
        }
    return o;
}

inline Outcome iwahori_pipeline(std::uint64_t)
{
    Outcome o;
    for (const auto& rd : detail::acceptance_root_data())
        for (const auto& s : detail::acceptance_points(rd)) {
            auto tag = [&] { return "d=" + std::to_string(rd.d()) + " s0=" + detail::str(s[0]); };
            auto res = ncharacter_sweep_iwahori(rd, s, iwahori_default_grid());
            o.expect(res.value && *res.value == theta_iwahori(s, rd), [&] { return "value " + tag(); });
            o.expect(res.limit_certified, [&] { return "k-limit " + tag(); });
            for (const auto& r : res.rows) o.expect(r.trace_ok, [&] { return "trace " + tag(); });
            RootDatum x = rd;
            for (long h = 0; h <= 4; ++h) {
                x.levels.assign(x.d(), h);
                if (!iwahori_stable(s, x)) continue;
                o.expect(Q(iwahori_fixpoint_count(s, x)) == iwahori_stable_count(s, x), [&] { return "fixpoints " + tag(); });
            }
        }
    return o;
}

inline Outcome multiplicativity(std::uint64_t seed)
{
    Outcome o;
    std::mt19937_64 rng(seed);
    for (long p : {3, 5})
        for (long c : {-1, 0, 2}) {
            SL2Config cfg{p, c, 1, 1, 0, 3};
            auto us = detail::sample_units(p, 20, rng);
            for (int t = 0; t < 10; ++t) {
                Q s = us[2 * t], u = us[2 * t + 1];
                for (Side side : {Side::Plus, Side::Minus})
                    o.expect(sl2_action_matrix(s, cfg, side).m * sl2_action_matrix(u, cfg, side).m == sl2_action_matrix(s * u, cfg, side).m,
                             [&] { return std::string(side_name(side)) + " p=" + std::to_string(p) + " c=" + std::to_string(c); });
            }
        }
    for (const auto& rd : detail::acceptance_root_data()) {
        auto us = detail::sample_units(rd.p, 40, rng);
        for (int t = 0; t < 10; ++t) {
            TorusPoint s, u, su;
            for (long i = 0; i < rd.t; ++i) {
                s.push_back(us[4 * t + i]);
                u.push_back(us[4 * t + 2 + i]);
                su.push_back(s.back() * u.back());
            }
            o.expect(iwahori_action_matrix(s, rd).m * iwahori_action_matrix(u, rd).m == iwahori_action_matrix(su, rd).m,
                     [&] { return "iwahori d=" + std::to_string(rd.d()); });
        }
    }
    return o;
}

inline Outcome threshold_control(std::uint64_t)
{
    Outcome o;
    // a = 10: v_3(a^2 - 1) = 2 > level 1
    const long p = 3;
    const Q a = 10;
    Q perm_value = Q(fixpoint_count(a * a, p, 1, true));
    Q stable = 1 / abs_p(1 - a * a, p);
    o.expect(perm_value != stable, [&] { return "Perm " + detail::str(perm_value) + " equals " + detail::str(stable); });
    RootDatum rd{3, 1, {{2}}, {0}, {1}, 2};
    o.expect(!iwahori_stable({a}, rd) && Q(iwahori_fixpoint_count({a}, rd)) != iwahori_stable_count({a}, rd),
             [] { return "Iwahori count already stable"; });
    auto res = ncharacter_sweep_sl2(p, 0, a, SweepGrid{{0}, {1}, {}});
    for (const auto& r : res.rows)
        o.expect(r.formal_value != theta_sl2(a, 0, p), [] { return "sub-threshold value matches the closed form"; });
    return o;
}

inline const std::vector<Criterion>& criteria()
{
    static const std::vector<Criterion> all{
        {1, "smooth", "smooth trace closed form (standard covering)", 1, smooth_standard},
        {2, "smooth", "smooth trace eventually 1 (inverted covering)", 0, smooth_inverted},
        {3, "smooth", "divisible index count", 0, divisible_count},
        {4, "binom", "alternating binomial identities", 5, binomial_identities},
        {5, "lattice", "elementary divisors and powerful lattices", 0, lattices},
        {6, "epsilon", "eps(r) dominance, root scaling and bounds", 0, epsilon_properties},
        {7, "dominance", "subgroup re-expansion dominance", 0, dominance},
        {8, "straighten", "straightening into M(g, k2)", 10, straightening},
        {9, "sl2", "SL2 n-character pipeline equals the closed formula", 0, sl2_pipeline},
        {10, "identities", "exact-sequence character identities", 0, exact_sequences},
        {11, "iwahori", "Iwahori n-character pipeline equals the closed formula", 0, iwahori_pipeline},
        {12, "multiplicative", "action matrices are multiplicative", 0, multiplicativity},
        {13, "threshold", "below the stable threshold the count differs", 0, threshold_control},
    };
    return all;
}

inline std::vector<std::string> suite_names()
{
    std::vector<std::string> names;
    for (const auto& c : criteria())
        if (std::find(names.begin(), names.end(), c.suite) == names.end()) names.push_back(c.suite);
    return names;
}

inline Report run_criterion(const Criterion& c, std::uint64_t seed)
{
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = c.run(seed);
    } catch (const std::exception& e) {
        o.pass = false;
        o.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {c.id, c.title, o, secs, c.budget_seconds == 0 || secs < c.budget_seconds};
}

inline std::string format_report(const Report& r)
{
    std::ostringstream os;
    os << (r.pass() ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.title << " (" << r.outcome.checks
       << " checks, " << std::fixed;
    os.precision(3);
    os << r.seconds << "s)";
    if (!r.within_budget) os << " over time budget";
    for (const auto& f : r.outcome.failures) os << "\n      " << f;
    return os.str();
}

} // namespace nchar::verify
