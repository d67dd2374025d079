#include <nchar/pro_p_groups.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace nchar;

namespace {

QMatrix random_strict_upper(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_int_distribution<long> num(-9, 9), den(1, 6);
    QMatrix x(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) x(i, j) = rational(num(rng), den(rng));
    return x;
}

QMatrix random_unimodular(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> small(-2, 2);
    QMatrix u = QMatrix::identity(n);
    for (int s = 0; s < 8; ++s) {
        std::size_t i = rng() % n, j = rng() % n;
        if (i == j) continue;
        Q f = small(rng);
        for (std::size_t r = 0; r < n; ++r) u(r, i) += f * u(r, j);
    }
    return u;
}

PLattice diag_lattice(long p, const std::vector<long>& exps)
{
    QMatrix g(exps.size(), exps.size());
    for (std::size_t i = 0; i < exps.size(); ++i) g(i, i) = Q(ipow(p, exps[i]));
    return PLattice(p, g);
}

} // namespace

TEST(ExpLog, Examples)
{
    EXPECT_EQ(mat_exp(QMatrix(3, 3)), QMatrix::identity(3));
    QMatrix u{{Q(1), Q(1)}, {Q(0), Q(1)}};
    QMatrix x{{Q(0), Q(1)}, {Q(0), Q(0)}};
    EXPECT_EQ(mat_log(u), x);
    EXPECT_THROW(mat_log(QMatrix{{Q(2), Q(0)}, {Q(0), Q(1)}}), DomainError);
}

TEST(ExpLog, RoundTripAndPowerLaw)
{
    std::mt19937_64 rng(31);
    for (int t = 0; t < 25; ++t) {
        QMatrix x = random_strict_upper(4, rng);
        EXPECT_EQ(mat_log(mat_exp(x)), x);
        EXPECT_EQ(mat_exp(mat_log(mat_exp(x))), mat_exp(x));
        for (long m = 0; m <= 5; ++m) EXPECT_EQ(mat_exp(x.scaled(Q(m))), matrix_power(mat_exp(x), m));
    }
}

TEST(ElementaryDivisors, Examples)
{
    for (long p : {2, 3, 5}) {
        auto L = diag_lattice(p, {0, 0});
        EXPECT_EQ(p_elementary_divisors(L, L), (ElemDivisors{0, 0}));
        EXPECT_EQ(p_elementary_divisors(L, diag_lattice(p, {1, 2})), (ElemDivisors{1, 2}));
        EXPECT_THROW(p_elementary_divisors(diag_lattice(p, {1, 1}), L), DomainError);
    }
    // units prime to p are absorbed
    PLattice a(3, QMatrix{{Q(1), Q(0)}, {Q(0), Q(1)}});
    PLattice b(3, QMatrix{{Q(2), Q(0)}, {Q(0), Q(9)}});
    EXPECT_EQ(p_elementary_divisors(a, b), (ElemDivisors{0, 2}));
}

TEST(ElementaryDivisors, BasisIndependence)
{
    std::mt19937_64 rng(37);
    for (long p : {3, 5}) {
        std::vector<std::pair<PLattice, PLattice>> cases{
            {diag_lattice(p, {0, 0}), diag_lattice(p, {1, 2})},
            {heisenberg_lattice(p, 1, 1, 1), heisenberg_lattice(p, 1, 2, 1)},
            {heisenberg_lattice(p, 1, 0, 1), heisenberg_lattice(p, 2, 2, 2)},
        };
        for (const auto& [big, sub] : cases) {
            auto ref = p_elementary_divisors(big, sub);
            for (int t = 0; t < 20; ++t) {
                PLattice b2(p, big.gens * random_unimodular(big.rank_(), rng));
                PLattice s2(p, sub.gens * random_unimodular(sub.rank_(), rng));
                EXPECT_EQ(p_elementary_divisors(b2, s2), ref);
            }
        }
    }
}

TEST(UniformDefect, Examples)
{
    EXPECT_EQ(uniform_defect({1, 2}, 2), 1);
    EXPECT_THROW(uniform_defect({1}, 2), DomainError);
    auto L = heisenberg_lattice(5, 1, 0, 1);
    for (long m = 0; m <= 3; ++m) {
        auto a = p_elementary_divisors(L, L.scaled(Q(ipow(5, m))));
        EXPECT_EQ(a, ElemDivisors(3, m));
        EXPECT_EQ(uniform_defect(a, 3), 0);
    }
}

// the defect does not depend on the chosen powers, and agrees in both directions
TEST(UniformDefect, ShiftInvariance)
{
    const long p = 3;
    auto H = heisenberg_lattice(p, 1, 0, 1), H2 = heisenberg_lattice(p, 1, 1, 1);
    std::set<long> defects;
    for (long k = 1; k <= 3; ++k) {
        defects.insert(uniform_defect(p_elementary_divisors(H2, H.scaled(Q(ipow(p, k)))), 3));
        defects.insert(uniform_defect(p_elementary_divisors(H, H2.scaled(Q(ipow(p, k)))), 3));
    }
    EXPECT_EQ(defects, std::set<long>{1});
}

TEST(Powerful, ThreeUnipotentGroups)
{
    for (long p : {3, 5, 7}) {
        EXPECT_TRUE(is_powerful(heisenberg_lattice(p, 1, 0, 1)));
        EXPECT_TRUE(is_powerful(heisenberg_lattice(p, 1, 1, 1)));
        EXPECT_FALSE(is_powerful(heisenberg_lattice(p, 1, 2, 1)));
    }
    EXPECT_THROW(is_powerful(diag_lattice(3, {0, 0})), DomainError);
}

TEST(Powerful, ScalingMakesPowerful)
{
    for (long p : {3, 5}) {
        for (auto L : {heisenberg_lattice(p, 1, 0, 1), heisenberg_lattice(p, 1, 1, 1), heisenberg_lattice(p, 1, 2, 1)}) {
            for (long m = 1; m <= 3; ++m) EXPECT_TRUE(is_powerful(L.scaled(Q(ipow(p, m)))));
        }
    }
}

TEST(Cosets, Examples)
{
    const long p = 3;
    auto I = QMatrix::identity(3);
    std::vector<QMatrix> h{I + elementary(3, 0, 1, Q(p)), I + elementary(3, 0, 2, Q(p)), I + elementary(3, 1, 2, Q(p))};
    auto triv = coset_representatives(h, {0, 0, 0}, p, 2);
    EXPECT_EQ(triv.exponents.size(), 1u);
    EXPECT_TRUE(triv.verified());

    std::vector<QMatrix> cyc{QMatrix{{Q(1), Q(1)}, {Q(0), Q(1)}}};
    auto c = coset_representatives(cyc, {1}, p, 2);
    EXPECT_EQ(c.exponents.size(), 3u);
    EXPECT_TRUE(c.verified());

    for (long M : {2, 3}) {
        auto r = coset_representatives(h, {1, 1, 1}, p, M);
        EXPECT_EQ(r.exponents.size(), 27u);
        EXPECT_TRUE(r.verified()) << "M = " << M;
    }
    auto r5 = coset_representatives({I + elementary(3, 0, 1, Q(5)), I + elementary(3, 0, 2, Q(5)), I + elementary(3, 1, 2, Q(5))},
                                    {1, 1, 1}, 5, 2);
    EXPECT_EQ(r5.exponents.size(), 125u);
    EXPECT_TRUE(r5.verified());
}

TEST(Adjoint, Examples)
{
    std::mt19937_64 rng(41);
    QMatrix x = random_strict_upper(3, rng);
    EXPECT_EQ(adjoint(QMatrix::identity(3), x), x);
    auto e12 = elementary(3, 0, 1), e13 = elementary(3, 0, 2), e23 = elementary(3, 1, 2);
    EXPECT_EQ(adjoint(mat_exp(e12), e23), e23 + e13);
    EXPECT_THROW(adjoint(QMatrix(3, 3), x), DomainError);
}

TEST(Adjoint, ShiftsLowerCentralSeries)
{
    std::mt19937_64 rng(43);
    auto series = lower_central_series(heisenberg_basis());
    ASSERT_EQ(series.size(), 3u);
    EXPECT_TRUE(series[2].basis.empty());
    for (int t = 0; t < 20; ++t) {
        QMatrix g = mat_exp(random_strict_upper(3, rng));
        for (std::size_t m = 0; m < 2; ++m)
            for (const auto& v : series[m].basis) {
                QMatrix x = unflatten(v, 3);
                EXPECT_TRUE(series[m + 1].contains(flatten(adjoint(g, x) - x)));
            }
    }
}

TEST(LowerCentralSeries, RejectsNonNilpotent)
{
    std::vector<QMatrix> sl2{QMatrix{{Q(0), Q(1)}, {Q(0), Q(0)}}, QMatrix{{Q(0), Q(0)}, {Q(1), Q(0)}},
                             QMatrix{{Q(1), Q(0)}, {Q(0), Q(-1)}}};
    EXPECT_THROW(lower_central_series(sl2), DomainError);
}
