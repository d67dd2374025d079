#include <nchar/matrix.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace nchar;

TEST(Dense, InverseAndSolve)
{
    QMatrix a{{Q(2), Q(1)}, {Q(5), Q(3)}};
    auto inv = inverse(a);
    ASSERT_TRUE(inv);
    EXPECT_EQ(a * *inv, QMatrix::identity(2));
    QMatrix sing{{Q(1), Q(2)}, {Q(2), Q(4)}};
    EXPECT_FALSE(inverse(sing));
    EXPECT_EQ(rank(sing), 1u);
    QMatrix b{{Q(1)}, {Q(2)}};
    auto x = solve(a, b);
    ASSERT_TRUE(x);
    EXPECT_EQ(a * *x, b);
    QMatrix tall{{Q(1)}, {Q(1)}};
    QMatrix rhs{{Q(1)}, {Q(2)}};
    EXPECT_FALSE(solve(tall, rhs));
}

TEST(Smith, KnownExamples)
{
    ZMatrix m{{Z(2), Z(4), Z(4)}, {Z(-6), Z(6), Z(12)}, {Z(10), Z(-4), Z(-16)}};
    EXPECT_EQ(smith_invariants(m), (std::vector<Z>{2, 6, 12}));
    ZMatrix d{{Z(3), Z(0)}, {Z(0), Z(9)}};
    EXPECT_EQ(smith_invariants(d), (std::vector<Z>{3, 9}));
    ZMatrix z(2, 3);
    EXPECT_TRUE(smith_invariants(z).empty());
}

// invariant factors are unchanged by unimodular row and column operations
TEST(Smith, UnimodularInvariance)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> small(-3, 3);
    ZMatrix m{{Z(4), Z(0), Z(2)}, {Z(0), Z(6), Z(0)}, {Z(2), Z(0), Z(10)}};
    auto ref = smith_invariants(m);
    for (int t = 0; t < 30; ++t) {
        ZMatrix a = m;
        for (int s = 0; s < 6; ++s) {
            std::size_t i = rng() % 3, j = rng() % 3;
            if (i == j) continue;
            Z f = small(rng);
            for (std::size_t c = 0; c < 3; ++c) a(i, c) += f * a(j, c);
            f = small(rng);
            for (std::size_t r = 0; r < 3; ++r) a(r, i) += f * a(r, j);
        }
        EXPECT_EQ(smith_invariants(a), ref);
    }
}

TEST(Sparse, MatchesDense)
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> v(-4, 4);
    SparseMatrix a(5), b(5);
    for (int t = 0; t < 12; ++t) {
        a.add(rng() % 5, rng() % 5, Q(v(rng)));
        b.add(rng() % 5, rng() % 5, Q(v(rng)));
    }
    EXPECT_EQ((a * b).dense(), a.dense() * b.dense());
    Q tr = 0;
    for (std::size_t i = 0; i < 5; ++i) tr += a.dense()(i, i);
    EXPECT_EQ(a.trace(), tr);
    EXPECT_EQ(SparseMatrix::identity(5) * a, a);
}
