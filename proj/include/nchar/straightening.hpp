#pragma once

#include "pro_p_groups.hpp"

#include <map>
#include <random>

namespace nchar {

// Word z_1 d_{g_1} z_2 d_{g_2} ... z_d d_{g_d}: slot i holds the letters (basis indices) of z_i.
using SlotWord = std::vector<std::vector<int>>;
using EnvElement = std::map<SlotWord, Q>;

// Lie data with basis x_0..x_{d-1} and group elements g_0..g_{d-1}.
struct SmashData {
    std::vector<QMatrix> basis;
    BracketTable brackets;
    std::vector<QMatrix> group;
    // ad[i][j] = coordinates of Ad(g_i)(x_j)
    std::vector<std::vector<std::vector<Q>>> ad;
    // depth[j] = max{m : x_j in C^m}
    std::vector<int> depth;
    int nilpotency = 0;  // least m with C^m = 0

    std::size_t dim() const { return basis.size(); }
};

// Rejects non-nilpotent data and bases not adapted to the lower central series.
inline SmashData make_smash_data(std::vector<QMatrix> basis, std::vector<QMatrix> group)
{
    if (group.size() != basis.size()) throw DomainError("one group element per basis vector expected");
    SmashData sd;
    sd.brackets = BracketTable::from_matrices(basis);
    auto series = lower_central_series(basis);
    sd.nilpotency = static_cast<int>(series.size()) - 1;
    const std::size_t n = basis.front().rows();
    for (std::size_t j = 0; j < basis.size(); ++j) {
        auto v = flatten(basis[j]);
        int m = 0;
        while (m + 1 < static_cast<int>(series.size()) && series[m + 1].contains(v)) ++m;
        sd.depth.push_back(m);
    }
    for (std::size_t m = 0; m < series.size(); ++m) {
        std::vector<std::vector<Q>> sub;
        for (std::size_t j = 0; j < basis.size(); ++j)
            if (sd.depth[j] >= static_cast<int>(m)) sub.push_back(flatten(basis[j]));
        if (span_of(sub, n * n).basis.size() != series[m].basis.size())
            throw DomainError("basis is not adapted to the lower central series");
    }
    std::vector<std::vector<Q>> flat;
    for (const auto& b : basis) flat.push_back(flatten(b));
    QMatrix B = columns_of(flat, n * n);
    for (const auto& g : group) {
        std::vector<std::vector<Q>> cols;
        for (const auto& x : basis) {
            auto co = coordinates(B, flatten(adjoint(g, x)));
            if (!co) throw DomainError("Ad(g) leaves the Lie algebra");
            cols.push_back(*co);
        }
        sd.ad.push_back(cols);
    }
    sd.basis = std::move(basis);
    sd.group = std::move(group);
    return sd;
}

inline void add_term(EnvElement& e, const SlotWord& w, const Q& c)
{
    if (c == 0) return;
    auto [it, fresh] = e.try_emplace(w, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) e.erase(it);
    }
}

inline bool is_normal(const SlotWord& w)
{
    for (std::size_t i = 0; i < w.size(); ++i)
        for (int l : w[i])
            if (l != static_cast<int>(i)) return false;
    return true;
}

inline long lie_degree(const SlotWord& w)
{
    long L = 0;
    for (const auto& s : w) L += static_cast<long>(s.size());
    return L;
}

namespace detail {

// One rewrite of a non-normal word by (I) or (II); returns the resulting combination.
inline EnvElement rewrite_once(const SmashData& sd, const SlotWord& w)
{
    EnvElement out;
    const std::size_t d = w.size();
    // (I): sort letters inside a slot
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t t = 0; t + 1 < w[i].size(); ++t) {
            int a = w[i][t], b = w[i][t + 1];
            if (a <= b) continue;
            SlotWord sw = w;
            std::swap(sw[i][t], sw[i][t + 1]);
            add_term(out, sw, 1);
            const auto& br = sd.brackets.c[a][b];
            for (std::size_t k = 0; k < br.size(); ++k) {
                if (br[k] == 0) continue;
                SlotWord bw = w;
                bw[i].erase(bw[i].begin() + t + 1);
                bw[i][t] = static_cast<int>(k);
                add_term(out, bw, br[k]);
            }
            return out;
        }
    // (II) leftward: d_{g_{i-1}} x_j = Ad(g_{i-1})(x_j) d_{g_{i-1}}
    for (std::size_t i = 1; i < d; ++i) {
        if (w[i].empty() || w[i].front() >= static_cast<int>(i)) continue;
        int j = w[i].front();
        const auto& col = sd.ad[i - 1][j];
        for (std::size_t k = 0; k < col.size(); ++k) {
            if (col[k] == 0) continue;
            SlotWord nw = w;
            nw[i].erase(nw[i].begin());
            nw[i - 1].push_back(static_cast<int>(k));
            add_term(out, nw, col[k]);
        }
        return out;
    }
    // (II) rightward: x_j d_{g_i} = d_{g_i} x_j - y d_{g_i}, y = Ad(g_i)(x_j) - x_j
    for (std::size_t i = 0; i + 1 < d; ++i) {
        if (w[i].empty() || w[i].back() <= static_cast<int>(i)) continue;
        int j = w[i].back();
        SlotWord moved = w;
        moved[i].pop_back();
        moved[i + 1].insert(moved[i + 1].begin(), j);
        add_term(out, moved, 1);
        const auto& col = sd.ad[i][j];
        for (std::size_t k = 0; k < col.size(); ++k) {
            Q y = col[k] - (static_cast<int>(k) == j ? 1 : 0);
            if (y == 0) continue;
            SlotWord nw = w;
            nw[i].back() = static_cast<int>(k);
            add_term(out, nw, -y);
        }
        return out;
    }
    throw DomainError("rewrite_once called on a word that cannot be rewritten");
}

} // namespace detail

struct FiltrationReport {
    EnvElement input;
    EnvElement normal_form;  // all words normal
    EnvElement b_part;       // normal words with Lie degree >= d k2
    EnvElement remainder;    // normal words of smaller degree; expected empty
    long min_degree = 0;
    std::size_t rewrites = 0;
    bool remainder_vanished() const { return remainder.empty(); }
};

inline FiltrationReport straighten(const SmashData& sd, const EnvElement& e, long k2, std::size_t max_rewrites = 10'000'000)
{
    FiltrationReport rep;
    rep.input = e;
    const std::size_t d = sd.dim();
    for (const auto& [w, c] : e)
        if (w.size() != d) throw DomainError("word has the wrong number of slots");
    EnvElement pending = e;
    while (!pending.empty()) {
        // largest word first keeps collected terms merging
        auto it = std::prev(pending.end());
        SlotWord w = it->first;
        Q c = it->second;
        pending.erase(it);
        if (is_normal(w)) {
            add_term(rep.normal_form, w, c);
            continue;
        }
        if (++rep.rewrites > max_rewrites) throw DomainError("straightening exceeded the rewrite budget");
        for (const auto& [nw, nc] : detail::rewrite_once(sd, w)) add_term(pending, nw, c * nc);
    }
    rep.min_degree = std::numeric_limits<long>::max();
    for (const auto& [w, c] : rep.normal_form) {
        long L = lie_degree(w);
        rep.min_degree = std::min(rep.min_degree, L);
        add_term(L >= static_cast<long>(d) * k2 ? rep.b_part : rep.remainder, w, c);
    }
    return rep;
}

// ---- independent oracle ------------------------------------------------------------

using PbwElement = std::map<std::vector<int>, Q>;

// Sorts letters ascending using (I) only.
inline PbwElement pbw_normalize(const BracketTable& br, PbwElement e)
{
    PbwElement out;
    while (!e.empty()) {
        auto it = std::prev(e.end());
        auto w = it->first;
        Q c = it->second;
        e.erase(it);
        std::size_t t = 0;
        while (t + 1 < w.size() && w[t] <= w[t + 1]) ++t;
        auto add = [](PbwElement& m, const std::vector<int>& k, const Q& v) {
            if (v == 0) return;
            auto [jt, fresh] = m.try_emplace(k, v);
            if (!fresh) {
                jt->second += v;
                if (jt->second == 0) m.erase(jt);
            }
        };
        if (t + 1 >= w.size()) {
            add(out, w, c);
            continue;
        }
        auto sw = w;
        std::swap(sw[t], sw[t + 1]);
        add(e, sw, c);
        const auto& b = br.c[w[t]][w[t + 1]];
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (b[k] == 0) continue;
            auto bw = w;
            bw.erase(bw.begin() + t + 1);
            bw[t] = static_cast<int>(k);
            add(e, bw, c * b[k]);
        }
    }
    return out;
}

// Moves every d symbol to the far right: z_1 d_1 z_2 d_2 ... = z_1 Ad(g_1)(z_2) Ad(g_1 g_2)(z_3) ... d_{g_1...g_d}.
inline PbwElement oracle_canonical(const SmashData& sd, const EnvElement& e)
{
    const std::size_t d = sd.dim();
    std::vector<std::vector<std::vector<Q>>> acc;  // acc[i][j] = coordinates of Ad(g_0...g_{i-1})(x_j)
    {
        std::vector<std::vector<Q>> flat;
        for (const auto& b : sd.basis) flat.push_back(flatten(b));
        QMatrix B = columns_of(flat, flat.front().size());
        QMatrix g = QMatrix::identity(sd.basis.front().rows());
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<std::vector<Q>> cols;
            for (const auto& x : sd.basis) cols.push_back(*coordinates(B, flatten(adjoint(g, x))));
            acc.push_back(cols);
            g = g * sd.group[i];
        }
    }
    PbwElement words;
    for (const auto& [w, c] : e) {
        PbwElement partial{{{}, c}};
        for (std::size_t i = 0; i < d; ++i)
            for (int l : w[i]) {
                PbwElement next;
                for (const auto& [pw, pc] : partial)
                    for (std::size_t k = 0; k < d; ++k) {
                        Q v = acc[i][l][k];
                        if (v == 0) continue;
                        auto nw = pw;
                        nw.push_back(static_cast<int>(k));
                        next[nw] += pc * v;
                    }
                partial = std::move(next);
            }
        for (const auto& [pw, pc] : partial) words[pw] += pc;
    }
    std::erase_if(words, [](const auto& kv) { return kv.second == 0; });
    return pbw_normalize(sd.brackets, words);
}

// ---- Heisenberg example ---------------------------------------------------------

// Basis x_0 = e12, x_1 = e23, x_2 = e13, adapted to C^1 = span(e13).
inline std::vector<QMatrix> heisenberg_adapted_basis()
{
    return {elementary(3, 0, 1), elementary(3, 1, 2), elementary(3, 0, 2)};
}

inline SmashData random_heisenberg_data(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> coef(-3, 3);
    auto basis = heisenberg_adapted_basis();
    std::vector<QMatrix> group;
    for (int i = 0; i < 3; ++i) {
        QMatrix x(3, 3);
        for (const auto& b : basis) x = x + b.scaled(Q(coef(rng)));
        group.push_back(mat_exp(x));
    }
    return make_smash_data(basis, group);
}

// A word lambda d_{g_1} ... d_{g_d} with lambda a product of k1 random basis letters.
inline EnvElement random_power_word(std::size_t d, long k1, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> letter(0, static_cast<int>(d) - 1);
    SlotWord w(d);
    for (long t = 0; t < k1; ++t) w[0].push_back(letter(rng));
    return {{w, Q(1)}};
}

} // namespace nchar
