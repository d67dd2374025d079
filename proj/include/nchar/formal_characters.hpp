#pragma once

#include "padic_core.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace nchar {

// A point of the torus, given by rational unit coordinates.
using TorusPoint = std::vector<Q>;

using Monomial = std::vector<long>;

struct NotEvaluableAt : DomainError {
    using DomainError::DomainError;
};
struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CertificateRejected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A character generator; its value at s is prod_i s_i^rule_i.
struct Generator {
    std::string name;
    std::vector<long> rule;
};

class CharacterLattice {
public:
    CharacterLattice() = default;
    explicit CharacterLattice(std::vector<Generator> gens) : gens_(std::move(gens)) {}

    std::size_t rank() const { return gens_.size(); }
    const std::vector<Generator>& generators() const { return gens_; }

    std::size_t index(const std::string& name) const
    {
        for (std::size_t i = 0; i < gens_.size(); ++i)
            if (gens_[i].name == name) return i;
        throw DomainError("unknown generator '" + name + "'");
    }

    Monomial one() const { return Monomial(rank(), 0); }

    Monomial gen(const std::string& name, long power = 1) const
    {
        Monomial m = one();
        m[index(name)] = power;
        return m;
    }

    Q generator_value(std::size_t g, const TorusPoint& s) const
    {
        const auto& rule = gens_.at(g).rule;
        if (rule.size() != s.size()) throw DomainError("torus point has wrong rank for generator " + gens_[g].name);
        Q v = 1;
        for (std::size_t i = 0; i < s.size(); ++i) v *= qpow(s[i], rule[i]);
        return v;
    }

    Q eval(const Monomial& m, const TorusPoint& s) const
    {
        if (m.size() != rank()) throw DomainError("monomial has wrong rank");
        Q v = 1;
        for (std::size_t g = 0; g < m.size(); ++g)
            if (m[g] != 0) v *= qpow(generator_value(g, s), m[g]);
        return v;
    }

private:
    std::vector<Generator> gens_;
};

inline Monomial mono_mul(const Monomial& a, const Monomial& b)
{
    if (a.size() != b.size()) throw DomainError("monomial rank mismatch");
    Monomial r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Monomial mono_pow(const Monomial& a, long e)
{
    Monomial r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * e;
    return r;
}

inline long degree(const Monomial& m)
{
    long d = 0;
    for (long x : m) d += x < 0 ? -x : x;
    return d;
}

// Element of Z[X]: finite integer combination of monomials.
class GroupRingElement {
public:
    using Terms = std::map<Monomial, Z>;

    GroupRingElement() = default;
    static GroupRingElement monomial(const Monomial& m, const Z& coeff = 1)
    {
        GroupRingElement r;
        r.add(m, coeff);
        return r;
    }

    void add(const Monomial& m, const Z& coeff)
    {
        if (coeff == 0) return;
        auto [it, fresh] = terms_.try_emplace(m, coeff);
        if (!fresh) {
            it->second += coeff;
            if (it->second == 0) terms_.erase(it);
        }
    }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Z coeff(const Monomial& m) const
    {
        auto it = terms_.find(m);
        return it == terms_.end() ? Z(0) : it->second;
    }

    long max_degree() const
    {
        long d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, degree(m));
        return d;
    }

    GroupRingElement truncated(long T) const
    {
        GroupRingElement r;
        for (const auto& [m, c] : terms_)
            if (degree(m) <= T) r.terms_.emplace(m, c);
        return r;
    }

    GroupRingElement operator+(const GroupRingElement& o) const
    {
        GroupRingElement r = *this;
        for (const auto& [m, c] : o.terms_) r.add(m, c);
        return r;
    }
    GroupRingElement operator-(const GroupRingElement& o) const
    {
        GroupRingElement r = *this;
        for (const auto& [m, c] : o.terms_) r.add(m, -c);
        return r;
    }
    GroupRingElement operator*(const GroupRingElement& o) const
    {
        GroupRingElement r;
        for (const auto& [m1, c1] : terms_)
            for (const auto& [m2, c2] : o.terms_) r.add(mono_mul(m1, m2), c1 * c2);
        return r;
    }
    // product keeping only terms of degree <= T
    GroupRingElement mul_truncated(const GroupRingElement& o, long T) const
    {
        GroupRingElement r;
        for (const auto& [m1, c1] : terms_)
            for (const auto& [m2, c2] : o.terms_) {
                Monomial m = mono_mul(m1, m2);
                if (degree(m) <= T) r.add(m, c1 * c2);
            }
        return r;
    }

    friend bool operator==(const GroupRingElement& a, const GroupRingElement& b) { return a.terms_ == b.terms_; }

private:
    Terms terms_;
};

inline Q eval_group_ring(const CharacterLattice& lat, const GroupRingElement& f, const TorusPoint& s)
{
    Q v = 0;
    for (const auto& [m, c] : f.terms()) v += Q(c) * lat.eval(m, s);
    return v;
}

// ---- expression trees --------------------------------------------------------

struct FormalNode;
using FormalFunction = std::shared_ptr<const FormalNode>;

struct RingNode {
    GroupRingElement value;
};
// sum_{j >= 0} e(lambda)^j
struct GeomNode {
    Monomial lambda;
};
// formal character of i -> multiplier(s) * i mod p^h
struct PermNode {
    long p;
    long h;
    Monomial multiplier;
    bool include_zero;
};
struct SumNode {
    std::vector<FormalFunction> children;
};
struct ProductNode {
    std::vector<FormalFunction> children;
};

struct FormalNode {
    std::variant<RingNode, GeomNode, PermNode, SumNode, ProductNode> v;
};

inline FormalFunction ring(GroupRingElement g) { return std::make_shared<FormalNode>(FormalNode{RingNode{std::move(g)}}); }
inline FormalFunction mono(const Monomial& m, const Z& c = 1) { return ring(GroupRingElement::monomial(m, c)); }
inline FormalFunction geom(Monomial lambda) { return std::make_shared<FormalNode>(FormalNode{GeomNode{std::move(lambda)}}); }
inline FormalFunction perm(long p, long h, Monomial mult, bool include_zero)
{
    require_prime(p);
    if (h < 0) throw DomainError("negative Perm level");
    return std::make_shared<FormalNode>(FormalNode{PermNode{p, h, std::move(mult), include_zero}});
}
inline FormalFunction sum(std::vector<FormalFunction> c) { return std::make_shared<FormalNode>(FormalNode{SumNode{std::move(c)}}); }
inline FormalFunction product(std::vector<FormalFunction> c)
{
    return std::make_shared<FormalNode>(FormalNode{ProductNode{std::move(c)}});
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline bool contains_perm(const FormalFunction& f)
{
    return std::visit(Overloaded{[](const PermNode&) { return true; },
                                 [](const SumNode& n) {
                                     for (const auto& c : n.children)
                                         if (contains_perm(c)) return true;
                                     return false;
                                 },
                                 [](const ProductNode& n) {
                                     for (const auto& c : n.children)
                                         if (contains_perm(c)) return true;
                                     return false;
                                 },
                                 [](const auto&) { return false; }},
                      f->v);
}

inline bool contains_geom(const FormalFunction& f)
{
    return std::visit(Overloaded{[](const GeomNode&) { return true; },
                                 [](const SumNode& n) {
                                     for (const auto& c : n.children)
                                         if (contains_geom(c)) return true;
                                     return false;
                                 },
                                 [](const ProductNode& n) {
                                     for (const auto& c : n.children)
                                         if (contains_geom(c)) return true;
                                     return false;
                                 },
                                 [](const auto&) { return false; }},
                      f->v);
}

// Number of i in the index set with mult * i = i mod p^h.
inline Z perm_fixpoints(long p, long h, const Q& mult, bool include_zero)
{
    if (!is_p_unit(mult, p)) throw DomainError("Perm multiplier is not a p-adic unit");
    Z level = ipow(p, h);
    if (level > Z(1) << 40) throw DomainError("Perm level too large for fixpoint counting");
    std::int64_t n = level.get_si();
    std::int64_t m = residue_mod(mult, p, h);
    Z count = 0;
    for (std::int64_t i = include_zero ? 0 : 1; i < n; ++i)
        if (static_cast<std::int64_t>((static_cast<__int128>(m) * i) % n) == i) ++count;
    return count;
}

inline Q eval_formal(const CharacterLattice& lat, const FormalFunction& f, const TorusPoint& s)
{
    return std::visit(Overloaded{[&](const RingNode& n) -> Q { return eval_group_ring(lat, n.value, s); },
                                 [&](const GeomNode& n) -> Q {
                                     Q l = lat.eval(n.lambda, s);
                                     if (l == 1) throw NotEvaluableAt("geometric series at a point with e(lambda) = 1");
                                     return Q(1) / (1 - l);
                                 },
                                 [&](const PermNode& n) -> Q {
                                     return Q(perm_fixpoints(n.p, n.h, lat.eval(n.multiplier, s), n.include_zero));
                                 },
                                 [&](const SumNode& n) -> Q {
                                     Q v = 0;
                                     for (const auto& c : n.children) v += eval_formal(lat, c, s);
                                     return v;
                                 },
                                 [&](const ProductNode& n) -> Q {
                                     Q v = 1;
                                     for (const auto& c : n.children) v *= eval_formal(lat, c, s);
                                     return v;
                                 }},
                      f->v);
}

// Coefficients of f on all monomials of total degree <= T.
inline GroupRingElement expand(const FormalFunction& f, long T)
{
    if (T < 0) return {};
    return std::visit(
        Overloaded{[&](const RingNode& n) { return n.value.truncated(T); },
                   [&](const GeomNode& n) {
                       long d = degree(n.lambda);
                       if (d == 0) throw DomainError("geometric series of the trivial character has no expansion");
                       GroupRingElement r;
                       for (long j = 0; j * d <= T; ++j) r.add(mono_pow(n.lambda, j), 1);
                       return r;
                   },
                   [&](const PermNode&) -> GroupRingElement {
                       throw DomainError("Perm nodes have no coefficient expansion");
                   },
                   [&](const SumNode& n) {
                       GroupRingElement r;
                       for (const auto& c : n.children) r = r + expand(c, T);
                       return r;
                   },
                   [&](const ProductNode& n) {
                       std::vector<GroupRingElement> finite;
                       std::vector<FormalFunction> infinite;
                       long slack = 0;
                       for (const auto& c : n.children) {
                           if (contains_geom(c)) {
                               infinite.push_back(c);
                           } else {
                               finite.push_back(expand(c, std::numeric_limits<long>::max() / 4));
                               slack += finite.back().max_degree();
                           }
                       }
                       std::vector<GroupRingElement> inf_exp;
                       for (const auto& c : infinite) inf_exp.push_back(expand(c, T + slack));
                       if (inf_exp.size() >= 2) {
                           // degrees must add up across infinite factors
                           std::size_t rank = 0;
                           for (const auto& e : inf_exp)
                               if (!e.is_zero()) rank = e.terms().begin()->first.size();
                           for (std::size_t i = 0; i < rank; ++i) {
                               int sign = 0;
                               for (const auto& e : inf_exp)
                                   for (const auto& [m, c] : e.terms()) {
                                       int sg = (m[i] > 0) - (m[i] < 0);
                                       if (sg == 0) continue;
                                       if (sign != 0 && sg != sign)
                                           throw DomainError("product of series with mixed exponent signs is not expandable");
                                       sign = sg;
                                   }
                           }
                       }
                       GroupRingElement r;
                       bool first = true;
                       for (const auto& e : inf_exp) {
                           r = first ? e : r.mul_truncated(e, T + slack);
                           first = false;
                       }
                       for (const auto& e : finite) {
                           r = first ? e : r * e;
                           first = false;
                       }
                       if (first) {
                           // empty product
                           throw DomainError("empty product");
                       }
                       return r.truncated(T);
                   }},
        f->v);
}

struct EvalCertificate {
    GroupRingElement g;
    GroupRingElement h;
    long checked_to = 0;
};

namespace detail {

inline std::pair<GroupRingElement, GroupRingElement> certificate_parts(const FormalFunction& f, std::size_t rank)
{
    const auto one = GroupRingElement::monomial(Monomial(rank, 0));
    return std::visit(
        Overloaded{[&](const RingNode& n) { return std::pair{n.value, one}; },
                   [&](const GeomNode& n) { return std::pair{one, one - GroupRingElement::monomial(n.lambda)}; },
                   [&](const PermNode&) -> std::pair<GroupRingElement, GroupRingElement> {
                       throw DomainError("certify_evaluable: Perm nodes are not certifiable");
                   },
                   [&](const SumNode& n) {
                       std::vector<std::pair<GroupRingElement, GroupRingElement>> parts;
                       for (const auto& c : n.children) parts.push_back(certificate_parts(c, rank));
                       GroupRingElement g, h = one;
                       for (std::size_t i = 0; i < parts.size(); ++i) {
                           GroupRingElement t = parts[i].first;
                           for (std::size_t j = 0; j < parts.size(); ++j)
                               if (j != i) t = t * parts[j].second;
                           g = g + t;
                           h = h * parts[i].second;
                       }
                       return std::pair{g, h};
                   },
                   [&](const ProductNode& n) {
                       GroupRingElement g = one, h = one;
                       for (const auto& c : n.children) {
                           auto [gi, hi] = certificate_parts(c, rank);
                           g = g * gi;
                           h = h * hi;
                       }
                       return std::pair{g, h};
                   }},
        f->v);
}

} // namespace detail

inline EvalCertificate certify_evaluable(const CharacterLattice& lat, const FormalFunction& f,
                                         const std::vector<TorusPoint>& samples, long T)
{
    if (contains_perm(f)) throw DomainError("certify_evaluable: Perm nodes are not certifiable");
    auto [g, h] = detail::certificate_parts(f, lat.rank());
    if (!(expand(product({ring(h), f}), T) == g.truncated(T)))
        throw CertificateRejected("h*f differs from g below the truncation degree");
    for (const auto& s : samples) {
        Q hv = eval_group_ring(lat, h, s);
        if (hv == 0) throw CertificateRejected("h vanishes at a sample point");
        if (eval_formal(lat, f, s) != eval_group_ring(lat, g, s) / hv)
            throw CertificateRejected("g/h disagrees with the recursive value");
    }
    return {g, h, T};
}

inline FormalFunction formal_character_triangular(const std::vector<Monomial>& diag, std::size_t rank)
{
    GroupRingElement r;
    for (const auto& m : diag) {
        if (m.size() != rank) throw DomainError("diagonal monomial has wrong rank");
        r.add(m, 1);
    }
    return ring(r);
}

// Lazily generated diagonal: entries from index `tail` on must all have degree > T.
inline FormalFunction formal_character_triangular(const std::function<Monomial(std::size_t)>& diag, std::size_t tail,
                                                  std::size_t probe_end, long T)
{
    GroupRingElement r;
    for (std::size_t i = 0; i < probe_end; ++i) {
        Monomial m = diag(i);
        if (degree(m) > T) continue;
        if (i >= tail) throw DomainError("summability violated: low-degree diagonal entry beyond the witness bound");
        r.add(m, 1);
    }
    return ring(r);
}

// Stabilized coefficients of the sequence on monomials of degree <= window.
inline FormalFunction limit_of_truncations(const std::vector<GroupRingElement>& seq, long window)
{
    if (seq.empty()) throw NotConverged("empty sequence");
    GroupRingElement last = seq.back().truncated(window);
    if (seq.size() >= 2 && !(seq[seq.size() - 2].truncated(window) == last))
        throw NotConverged("coefficients still changing at the end of the sequence");
    return ring(last);
}

// ---- smooth traces -----------------------------------------------------------

enum class Covering { Standard, Inverted };

// Trace of s on locally constant functions for the covering at level h.
inline Z smooth_trace(long p, long h, const Q& s, Covering cov)
{
    require_prime(p);
    if (!is_p_unit(s, p)) throw DomainError("smooth_trace: s is not a p-adic unit");
    if (cov == Covering::Standard) {
        if (h < 0) throw DomainError("negative level");
        std::int64_t n = ipow(p, h).get_si();
        std::int64_t m = residue_mod(1 / s, p, h);
        Z count = 0;
        for (std::int64_t i = 0; i < n; ++i)
            if (static_cast<std::int64_t>((static_cast<__int128>(m) * i) % n) == i) ++count;
        return count;
    }
    if (h < 1) throw DomainError("inverted covering needs h >= 1");
    std::int64_t n = ipow(p, 2 * h - 1).get_si();
    std::int64_t ph = ipow(p, h).get_si();
    std::int64_t m = residue_mod(s, p, 2 * h - 1);
    Z count = 1;
    for (std::int64_t i = 1; i < n; ++i) {
        if (i % ph == 0) continue;
        if (static_cast<std::int64_t>((static_cast<__int128>(m) * i) % n) == i) ++count;
    }
    return count;
}

// #{0 <= i < p^beta : v_p(i) >= beta - alpha}
inline Z count_divisible(long alpha, long beta, long p)
{
    require_prime(p);
    if (alpha < 0 || alpha > beta) throw DomainError("count_divisible needs 0 <= alpha <= beta");
    std::int64_t n = ipow(p, beta).get_si();
    std::int64_t step = ipow(p, beta - alpha).get_si();
    Z count = 0;
    for (std::int64_t i = 0; i < n; ++i)
        if (i % step == 0) ++count;
    return count;
}

} // namespace nchar
