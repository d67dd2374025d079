#pragma once

#include "matrix.hpp"

#include <set>

namespace nchar {

inline bool is_strictly_upper(const QMatrix& x)
{
    if (x.rows() != x.cols()) return false;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            if (x(i, j) != 0) return false;
    return true;
}

inline bool is_unipotent_upper(const QMatrix& u)
{
    if (u.rows() != u.cols()) return false;
    return is_strictly_upper(u - QMatrix::identity(u.rows()));
}

inline QMatrix mat_exp(const QMatrix& x)
{
    if (!is_strictly_upper(x)) throw DomainError("mat_exp expects a strictly upper triangular matrix");
    const std::size_t n = x.rows();
    QMatrix r = QMatrix::identity(n), term = QMatrix::identity(n);
    for (std::size_t k = 1; k < n; ++k) {
        term = (term * x).scaled(Q(1, k));
        r = r + term;
    }
    return r;
}

inline QMatrix mat_log(const QMatrix& u)
{
    if (!is_unipotent_upper(u)) throw DomainError("mat_log expects an upper unitriangular matrix");
    const std::size_t n = u.rows();
    QMatrix y = u - QMatrix::identity(n);
    QMatrix r(n, n), pw = QMatrix::identity(n);
    for (std::size_t k = 1; k < n; ++k) {
        pw = pw * y;
        r = r + pw.scaled(Q(k % 2 ? 1 : -1, k));
    }
    return r;
}

inline QMatrix adjoint(const QMatrix& g, const QMatrix& x)
{
    auto gi = inverse(g);
    if (!gi) throw DomainError("adjoint: singular group element");
    return g * x * *gi;
}

inline QMatrix bracket(const QMatrix& x, const QMatrix& y) { return x * y - y * x; }

// Lie algebra with basis b_0..b_{n-1}: [b_i, b_j] = sum_k c[i][j][k] b_k.
struct BracketTable {
    std::vector<std::vector<std::vector<Q>>> c;

    std::size_t dim() const { return c.size(); }

    std::vector<Q> apply(const std::vector<Q>& x, const std::vector<Q>& y) const
    {
        std::vector<Q> r(dim());
        for (std::size_t i = 0; i < dim(); ++i) {
            if (x[i] == 0) continue;
            for (std::size_t j = 0; j < dim(); ++j) {
                if (y[j] == 0) continue;
                for (std::size_t k = 0; k < dim(); ++k) r[k] += x[i] * y[j] * c[i][j][k];
            }
        }
        return r;
    }

    // Structure constants of the span of matrices `basis`, which must be closed under brackets.
    static BracketTable from_matrices(const std::vector<QMatrix>& basis);
};

inline std::vector<Q> flatten(const QMatrix& m)
{
    std::vector<Q> v;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
    return v;
}

inline QMatrix columns_of(const std::vector<std::vector<Q>>& cols, std::size_t height)
{
    QMatrix m(height, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < height; ++i) m(i, j) = cols[j][i];
    return m;
}

// Coordinates of v in the basis given by the columns of b, or nullopt if outside the span.
inline std::optional<std::vector<Q>> coordinates(const QMatrix& b, const std::vector<Q>& v)
{
    QMatrix rhs(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) rhs(i, 0) = v[i];
    auto x = solve(b, rhs);
    if (!x) return std::nullopt;
    return x->column(0);
}

inline BracketTable BracketTable::from_matrices(const std::vector<QMatrix>& basis)
{
    std::vector<std::vector<Q>> flat;
    for (const auto& b : basis) flat.push_back(flatten(b));
    QMatrix B = columns_of(flat, flat.front().size());
    BracketTable t;
    t.c.assign(basis.size(), std::vector<std::vector<Q>>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j) {
            auto co = coordinates(B, flatten(bracket(basis[i], basis[j])));
            if (!co) throw DomainError("span of the matrices is not closed under brackets");
            t.c[i][j] = *co;
        }
    return t;
}

// Z_(p)-lattice spanned by the columns of `gens` in the ambient coordinate space.
struct PLattice {
    long p = 2;
    QMatrix gens;
    std::optional<BracketTable> brackets;

    PLattice() = default;
    PLattice(long prime, QMatrix g, std::optional<BracketTable> br = std::nullopt)
        : p(prime), gens(std::move(g)), brackets(std::move(br))
    {
        require_prime(p);
        if (rank(gens) != gens.cols()) throw DomainError("lattice generators are not linearly independent");
    }

    std::size_t ambient_dim() const { return gens.rows(); }
    std::size_t rank_() const { return gens.cols(); }

    PLattice scaled(const Q& f) const { return PLattice(p, gens.scaled(f), brackets); }

    // v in p^shift * Lambda
    bool contains(const std::vector<Q>& v, long shift = 0) const
    {
        auto x = coordinates(gens, v);
        if (!x) return false;
        for (const auto& c : *x)
            if (c != 0 && vp(c, p) < shift) return false;
        return true;
    }
};

// Lattice spanned by Log of unipotent group generators; coordinates are flattened matrix entries.
inline PLattice lattice_from_group(long p, const std::vector<QMatrix>& group_gens, const std::vector<QMatrix>& lie_basis)
{
    std::vector<std::vector<Q>> amb;
    for (const auto& b : lie_basis) amb.push_back(flatten(b));
    QMatrix B = columns_of(amb, amb.front().size());
    std::vector<std::vector<Q>> cols;
    for (const auto& g : group_gens) {
        auto co = coordinates(B, flatten(mat_log(g)));
        if (!co) throw DomainError("group generator outside the ambient Lie algebra");
        cols.push_back(*co);
    }
    return PLattice(p, columns_of(cols, lie_basis.size()), BracketTable::from_matrices(lie_basis));
}

using ElemDivisors = std::vector<long>;

inline ElemDivisors p_elementary_divisors(const PLattice& big, const PLattice& sub)
{
    if (big.p != sub.p) throw DomainError("lattices over different primes");
    auto x = solve(big.gens, sub.gens);
    if (!x) throw DomainError("sublattice is not contained in the lattice (outside the span)");
    Z den = 1;
    for (std::size_t i = 0; i < x->rows(); ++i)
        for (std::size_t j = 0; j < x->cols(); ++j) {
            const Q& e = (*x)(i, j);
            if (!is_p_integral(e, big.p)) throw DomainError("sublattice is not contained in the lattice");
            mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), e.get_den().get_mpz_t());
        }
    ZMatrix m(x->rows(), x->cols());
    for (std::size_t i = 0; i < x->rows(); ++i)
        for (std::size_t j = 0; j < x->cols(); ++j) {
            Q e = (*x)(i, j) * den;
            m(i, j) = e.get_num();
        }
    ElemDivisors a;
    for (const auto& d : smith_invariants(m)) a.push_back(vp(d, big.p));
    std::sort(a.begin(), a.end());
    return a;
}

inline long uniform_defect(const ElemDivisors& alpha, std::size_t d)
{
    if (alpha.size() != d || d == 0) throw DomainError("uniform defect needs an open sublattice");
    return alpha.back() - alpha.front();
}

inline bool is_powerful(const PLattice& lat)
{
    if (!lat.brackets) throw DomainError("is_powerful needs a bracket table");
    long shift = lat.p == 2 ? 2 : 1;
    for (std::size_t i = 0; i < lat.rank_(); ++i)
        for (std::size_t j = i + 1; j < lat.rank_(); ++j) {
            auto w = lat.brackets->apply(lat.gens.column(i), lat.gens.column(j));
            if (!lat.contains(w, shift)) return false;
        }
    return true;
}

// ---- lower central series ------------------------------------------------------

// Basis of a subspace as flattened columns.
struct Subspace {
    std::vector<std::vector<Q>> basis;
    std::size_t height = 0;

    bool contains(const std::vector<Q>& v) const
    {
        bool zero = std::all_of(v.begin(), v.end(), [](const Q& x) { return x == 0; });
        if (zero) return true;
        if (basis.empty()) return false;
        return coordinates(columns_of(basis, height), v).has_value();
    }
};

inline Subspace span_of(const std::vector<std::vector<Q>>& vecs, std::size_t height)
{
    Subspace s;
    s.height = height;
    for (const auto& v : vecs) {
        if (s.contains(v)) continue;
        s.basis.push_back(v);
    }
    return s;
}

inline QMatrix unflatten(const std::vector<Q>& v, std::size_t n)
{
    QMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = v[i * n + j];
    return m;
}

// C^0 = g, C^{i+1} = [g, C^i], until zero.
inline std::vector<Subspace> lower_central_series(const std::vector<QMatrix>& gens, std::size_t max_len = 32)
{
    const std::size_t n = gens.front().rows();
    std::vector<std::vector<Q>> flat;
    for (const auto& g : gens) flat.push_back(flatten(g));
    std::vector<Subspace> series{span_of(flat, n * n)};
    while (!series.back().basis.empty()) {
        if (series.size() > max_len) throw DomainError("lower central series does not terminate: not nilpotent");
        std::vector<std::vector<Q>> next;
        for (const auto& x : series.front().basis)
            for (const auto& y : series.back().basis)
                next.push_back(flatten(bracket(unflatten(x, n), unflatten(y, n))));
        series.push_back(span_of(next, n * n));
    }
    return series;
}

// ---- coset representatives --------------------------------------------------------

namespace detail {

using ModMatrix = std::vector<std::int64_t>;

inline ModMatrix reduce(const QMatrix& m, long p, long M)
{
    ModMatrix r;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(residue_mod(m(i, j), p, M));
    return r;
}

inline ModMatrix mul_mod(const ModMatrix& a, const ModMatrix& b, std::size_t n, std::int64_t N)
{
    ModMatrix r(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            if (a[i * n + k] == 0) continue;
            for (std::size_t j = 0; j < n; ++j) r[i * n + j] = (r[i * n + j] + a[i * n + k] * b[k * n + j]) % N;
        }
    return r;
}

inline std::set<ModMatrix> closure(const std::vector<ModMatrix>& gens, std::size_t n, std::int64_t N, std::size_t cap)
{
    ModMatrix id(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) id[i * n + i] = 1 % N;
    std::set<ModMatrix> seen{id};
    std::vector<ModMatrix> frontier{id};
    while (!frontier.empty()) {
        std::vector<ModMatrix> next;
        for (const auto& x : frontier)
            for (const auto& g : gens) {
                auto y = mul_mod(x, g, n, N);
                if (seen.insert(y).second) {
                    if (seen.size() > cap) throw DomainError("finite model too large");
                    next.push_back(std::move(y));
                }
            }
        frontier = std::move(next);
    }
    return seen;
}

} // namespace detail

struct CosetReport {
    std::vector<std::vector<long>> exponents;
    std::size_t group_order = 0;
    std::size_t subgroup_order = 0;
    bool distinct = false;
    bool covering = false;
    bool verified() const { return distinct && covering; }
};

// Enumerates h_1^{l_1}...h_d^{l_d}, 0 <= l_nu < p^alpha(nu), and checks them against H' = <h_nu^{p^alpha(nu)}> mod p^M.
inline CosetReport coset_representatives(const std::vector<QMatrix>& basis, const ElemDivisors& alpha, long p, long M,
                                         std::size_t cap = 2'000'000)
{
    require_prime(p);
    if (basis.size() != alpha.size()) throw DomainError("one divisor per basis element expected");
    const std::size_t n = basis.front().rows();
    const std::int64_t N = ipow(p, M).get_si();
    std::vector<detail::ModMatrix> hg, sg;
    for (std::size_t v = 0; v < basis.size(); ++v) {
        hg.push_back(detail::reduce(basis[v], p, M));
        sg.push_back(detail::reduce(matrix_power(basis[v], ipow(p, alpha[v]).get_si()), p, M));
    }
    auto H = detail::closure(hg, n, N, cap);
    auto Hs = detail::closure(sg, n, N, cap);

    CosetReport rep;
    rep.group_order = H.size();
    rep.subgroup_order = Hs.size();
    std::vector<long> l(alpha.size(), 0);
    std::set<std::set<detail::ModMatrix>> cosets;
    for (;;) {
        rep.exponents.push_back(l);
        QMatrix r = QMatrix::identity(n);
        for (std::size_t v = 0; v < l.size(); ++v) r = r * matrix_power(basis[v], l[v]);
        auto rm = detail::reduce(r, p, M);
        std::set<detail::ModMatrix> coset;
        for (const auto& x : Hs) coset.insert(detail::mul_mod(rm, x, n, N));
        cosets.insert(std::move(coset));
        std::size_t v = 0;
        while (v < l.size() && ++l[v] == ipow(p, alpha[v])) l[v++] = 0;
        if (v == l.size()) break;
    }
    rep.distinct = cosets.size() == rep.exponents.size();
    rep.covering = rep.exponents.size() * rep.subgroup_order == rep.group_order;
    return rep;
}

// ---- standard examples ---------------------------------------------------------

inline QMatrix elementary(std::size_t n, std::size_t i, std::size_t j, const Q& v = 1)
{
    QMatrix m(n, n);
    m(i, j) = v;
    return m;
}

// Heisenberg Lie algebra basis (e12, e13, e23) inside 3x3 matrices.
inline std::vector<QMatrix> heisenberg_basis()
{
    return {elementary(3, 0, 1), elementary(3, 0, 2), elementary(3, 1, 2)};
}

// Unipotent subgroup with entries in p^{x12} Z_p, p^{x13} Z_p, p^{x23} Z_p, as a lattice in Log coordinates.
inline PLattice heisenberg_lattice(long p, long x12, long x13, long x23)
{
    auto I = QMatrix::identity(3);
    std::vector<QMatrix> g{I + elementary(3, 0, 1, Q(ipow(p, x12))), I + elementary(3, 0, 2, Q(ipow(p, x13))),
                           I + elementary(3, 1, 2, Q(ipow(p, x23)))};
    return lattice_from_group(p, g, heisenberg_basis());
}

} // namespace nchar
