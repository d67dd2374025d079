#include <nchar/principal_series.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace nchar;

namespace {

SparseMatrix product_of(const ActionMatrix& a, const ActionMatrix& b) { return a.m * b.m; }

std::vector<Q> units(long p)
{
    std::vector<Q> out;
    for (Q a : {Q(2), Q(3), Q(4), rational(1, 2), rational(2, 3), Q(7), rational(5, 4), Q(1 + p), rational(3, 7)})
        if (is_p_unit(a, p)) out.push_back(a);
    return out;
}

const std::vector<RootDatum>& root_data()
{
    static const std::vector<RootDatum> rds{
        {3, 1, {{2}}, {0}, {1}, 3},
        {3, 1, {{1}, {2}}, {1}, {1, 1}, 2},
        {3, 2, {{1, 0}, {0, 1}, {1, 1}}, {1, -1}, {1, 1, 1}, 2},
    };
    return rds;
}

} // namespace

TEST(CCoeff, Examples)
{
    for (long n = 0; n < 6; ++n) EXPECT_EQ(c_coeff(n, n, rational(3, 5), -2), 1);
    EXPECT_EQ(c_coeff(3, 1, Q(1), -2), 0);
    EXPECT_EQ(c_coeff(2, 0, Q(2), 1), rational(2, 4));  // 2^{-2} * 1 * 2
    EXPECT_THROW(c_coeff(1, 2, Q(1), 0), DomainError);
}

TEST(CCoeff, Cocycle)
{
    std::mt19937_64 rng(81);
    std::uniform_int_distribution<long> num(-9, 9), den(1, 9), idx(0, 7), cc(-4, 4);
    for (int t = 0; t < 200; ++t) {
        long a = idx(rng), b = idx(rng), e = idx(rng);
        long j = std::min({a, b, e}), k = std::max({a, b, e}), l = a + b + e - j - k;
        Q z = rational(num(rng), den(rng));
        if (z == 0) continue;
        long c = cc(rng);
        EXPECT_EQ(c_coeff(l, j, z, c) * c_coeff(k, l, z, c), c_coeff(k, j, z, c));
    }
}

TEST(BaseChange, InversePair)
{
    auto [M0, N0] = base_change_matrices(0, Q(5), 2);
    EXPECT_EQ(M0, QMatrix::identity(1));
    EXPECT_EQ(N0, QMatrix::identity(1));
    auto [M, N] = base_change_matrices(3, Q(2), 1);
    EXPECT_EQ(M * N, QMatrix::identity(4));
    for (long k = 0; k <= 10; ++k)
        for (Q z : {Q(1), Q(2), rational(-3, 4), Q(7)})
            for (long c : {-3, -1, 0, 2}) {
                auto [A, B] = base_change_matrices(k, z, c);
                EXPECT_EQ(A * B, QMatrix::identity(k + 1));
                EXPECT_EQ(B * A, QMatrix::identity(k + 1));
                for (long i = 0; i <= k; ++i) {
                    EXPECT_EQ(A(i, i), 1);
                    for (long j = i + 1; j <= k; ++j) EXPECT_EQ(A(i, j), 0);
                }
            }
    EXPECT_THROW(base_change_matrices(2, Q(0), 0), DomainError);
}

TEST(SL2Action, IdentityElement)
{
    for (long c : {-2, 0, 1})
        for (Side side : {Side::Plus, Side::Minus}) {
            SL2Config cfg{3, c, 1, 1, 0, 3};
            auto A = sl2_action_matrix(Q(1), cfg, side);
            EXPECT_EQ(A.m, SparseMatrix::identity(A.dim())) << side_name(side) << " " << c;
            EXPECT_EQ(A.trace(), Q(static_cast<long>(A.dim())));
        }
}

TEST(SL2Action, PlusDiagonalEntries)
{
    SL2Config cfg{5, 1, 1, 1, 0, 3};
    const Q a = 2;
    auto A = sl2_action_matrix(a, cfg, Side::Plus);
    for (std::size_t t = 0; t < A.dim(); ++t) {
        long n = A.labels[t][0], i = A.labels[t][1];
        bool fixed = residue_split(a * a * i, 5, 1).rem == i;
        EXPECT_EQ(A.m.get(t, t), fixed ? chi(a, 1) * qpow(a, 2 * n) : Q(0));
    }
}

TEST(SL2Action, TraceExamples)
{
    SL2Config cfg{5, 0, 1, 1, 0, 2};
    EXPECT_EQ(sl2_trace(Q(2), cfg, Side::Plus), 5);
    EXPECT_EQ(sl2_trace(Q(2), cfg, Side::Minus), 1);
    EXPECT_EQ(sl2_trace_closed_form(Q(2), cfg, Side::Plus), 5);
    EXPECT_EQ(sl2_trace_closed_form(Q(2), cfg, Side::Minus), 1);
    EXPECT_THROW((SL2Config{5, -2, 0, 0, 0, 2}.validate()), DomainError);
}

TEST(SL2Action, TraceEqualsClosedForm)
{
    for (long p : {3, 5})
        for (long c : {-2, -1, 0, 1, 2})
            for (const Q& a : units(p))
                for (long h : {0, 1})
                    for (long e : {0, 1})
                        for (long k = std::max<long>(1, 1 - c); k <= std::max<long>(1, 1 - c) + 2; ++k) {
                            SL2Config cfg{p, c, h, h, e, k};
                            for (Side side : {Side::Plus, Side::Minus})
                                EXPECT_EQ(sl2_trace(a, cfg, side), sl2_trace_closed_form(a, cfg, side))
                                    << p << " " << c << " " << a << " " << h << e << k << side_name(side);
                        }
}

// per n, the diagonal entries over i != 0 on the minus side add up to a^{-c} l^-(a) sum_{j+m<k} d_{n,j,m} x^j (x-1)^m
TEST(SL2Action, MinusDiagonalPerLevel)
{
    for (long c : {-1, 0, 2}) {
        SL2Config cfg{3, c, 1, 1, 0, 3};
        for (Q a : {Q(2), Q(4), rational(1, 2)}) {
            auto A = sl2_action_matrix(a, cfg, Side::Minus);
            const Q x = 1 / (a * a);
            const Q l = Q(fixpoint_count(x, 3, 1, false));
            for (long n = 0; n < cfg.k; ++n) {
                Q s = 0;
                for (std::size_t t = 0; t < A.dim(); ++t)
                    if (A.labels[t][0] == n && A.labels[t][1] != 0) s += A.m.get(t, t);
                EXPECT_EQ(s, chi(a, -c) * l * d_row_sum(n, cfg.k, c, x));
            }
        }
    }
}

TEST(SL2Action, Multiplicative)
{
    std::mt19937_64 rng(83);
    for (long p : {3, 5})
        for (long c : {-1, 0, 2}) {
            SL2Config cfg{p, c, 1, 1, 0, 3};
            auto us = units(p);
            for (int t = 0; t < 10; ++t) {
                Q s = us[rng() % us.size()], u = us[rng() % us.size()];
                for (Side side : {Side::Plus, Side::Minus})
                    EXPECT_EQ(product_of(sl2_action_matrix(s, cfg, side), sl2_action_matrix(u, cfg, side)),
                              sl2_action_matrix(s * u, cfg, side).m);
                EXPECT_EQ(product_of(sl2_action_matrix_nadic_minus(s, cfg), sl2_action_matrix_nadic_minus(u, cfg)),
                          sl2_action_matrix_nadic_minus(s * u, cfg).m);
            }
        }
}

struct NCounts {
    int below = 0;  // nonzero entries with n > n'
    int above = 0;  // nonzero entries with n < n'
};

NCounts count_off_level(const ActionMatrix& A)
{
    NCounts out;
    for (std::size_t col = 0; col < A.dim(); ++col)
        for (const auto& [row, v] : A.m.column(col)) {
            if (v == 0) continue;
            out.below += A.labels[row][0] > A.labels[col][0];
            out.above += A.labels[row][0] < A.labels[col][0];
        }
    return out;
}

// Plus side and the n-adic minus model: entries vanish for n < n', and some n > n' entries survive.
// The minus side with dropped lines is triangular the same way only for c <= -2.
TEST(SL2Action, TriangularInN)
{
    for (long p : {3, 5})
        for (long c : {-2, -1, 0, 1, 2})
            for (Q a : {Q(2), Q(4), rational(1, 2)}) {
                SL2Config cfg{p, c, 1, 1, 0, 4};
                auto plus = count_off_level(sl2_action_matrix(a, cfg, Side::Plus));
                EXPECT_EQ(plus.above, 0);
                EXPECT_GT(plus.below, 0);
                auto nadic = count_off_level(sl2_action_matrix_nadic_minus(a, cfg));
                EXPECT_EQ(nadic.above, 0);
                EXPECT_GT(nadic.below, 0);
                auto minus = count_off_level(sl2_action_matrix(a, cfg, Side::Minus));
                EXPECT_GT(minus.below, 0);
                if (c <= -2) EXPECT_EQ(minus.above, 0) << p << " " << c << " " << a;
                else EXPECT_GT(minus.above, 0) << p << " " << c << " " << a;
            }
}

TEST(SL2Action, NadicMinusTrace)
{
    for (long p : {3, 5})
        for (long c : {-2, 0, 1})
            for (const Q& a : units(p)) {
                SL2Config cfg{p, c, 1, 1, 1, std::max<long>(2, 1 - c)};
                EXPECT_EQ(sl2_action_matrix_nadic_minus(a, cfg).trace(), sl2_trace_closed_form_nadic_minus(a, cfg));
            }
}

TEST(DSum, TelescopesToGeometricPart)
{
    for (long c = -3; c <= 3; ++c)
        for (long k = std::max<long>(1, 1 - c); k <= 6; ++k) {
            auto lat = sl2_lattice(c);
            GroupRingElement expected;
            for (long j = 0; j < k; ++j) expected.add(lat.gen("eps", 2 * j), 1);
            EXPECT_EQ(d_sum_formal(k, c), expected) << c << " " << k;
        }
}

TEST(Theta, ClosedFormExamples)
{
    EXPECT_EQ(theta_sl2(Q(2), 0, 5), rational(7, 3));
    EXPECT_EQ(theta_sl2_smooth(Q(2), 0, 5), 2);
    EXPECT_EQ(theta_sl2_smooth(Q(2), 0, 3), 6);
    EXPECT_EQ(weyl_char_sl2(Q(2), 0), -1);
    EXPECT_EQ(weyl_char_sl2(Q(7), 0), -1);
    EXPECT_EQ(weyl_char_sl2(Q(2), -1), rational(-5, 2));
    EXPECT_THROW(theta_sl2(Q(1), 0, 5), NotRegular);
    EXPECT_THROW(theta_sl2_smooth(Q(-1), 0, 5), NotRegular);
    EXPECT_THROW(weyl_char_sl2(Q(1), 0), NotRegular);
    for (long p : {3, 5})
        for (const Q& a : units(p))
            for (long c : {-2, 0, 3}) EXPECT_EQ(theta_sl2_smooth(a, c, p), theta_sl2_smooth(1 / a, -c, p));
}

TEST(Theta, ExactSequenceIdentities)
{
    for (long p : {3, 5, 7})
        for (Q a : {Q(2), Q(3), Q(4), Q(6), Q(1 + p), Q(1 + p * p), rational(1, 2), rational(2, 3)}) {
            if (!is_p_unit(a, p)) continue;
            EXPECT_EQ(theta_sl2(a, 2, p) - theta_sl2(a, 0, p) + theta_sl2_smooth(a, 0, p), 0) << p << " " << a;
            for (long c : {0, -1, -2, -3})
                EXPECT_EQ(theta_sl2(a, 2 - c, p) - theta_sl2(a, c, p), theta_sl2_smooth(a, 0, p) * weyl_char_sl2(a, c))
                    << p << " " << a << " " << c;
        }
}

TEST(SL2Formal, CorrectionTerm)
{
    SL2Config c0{5, 0, 1, 1, 0, 2};
    auto lat = sl2_lattice(0);
    auto m = sl2_formal_theta(c0, Side::Minus);
    ASSERT_TRUE(m.correction);
    EXPECT_EQ(expand(m.correction, 10), GroupRingElement::monomial(lat.gen("chi")));
    SL2Config c1{5, 1, 1, 1, 0, 2};
    EXPECT_FALSE(sl2_formal_theta(c1, Side::Minus).correction);
    EXPECT_FALSE(sl2_formal_theta(c1, Side::Plus).correction);
    auto plus = sl2_formal_theta(c1, Side::Plus);
    auto lat1 = sl2_lattice(1);
    auto ex = expand(plus.free_part, 31);
    for (long j = 0; 1 + 2 * j <= 31; ++j) EXPECT_EQ(ex.coeff(mono_mul(lat1.gen("chi", -1), lat1.gen("eps", -2 * j))), 1);
}

TEST(SL2Formal, FiniteCharacterMatchesTrace)
{
    for (long c : {-1, 0, 1}) {
        SL2Config cfg{3, c, 1, 1, 1, 3};
        auto lat = sl2_lattice(c);
        for (Q a : {Q(2), Q(4), rational(1, 2)})
            for (Side side : {Side::Plus, Side::Minus})
                EXPECT_EQ(eval_formal(lat, sl2_formal_theta_k(cfg, side).whole, {a}), sl2_trace(a, cfg, side));
    }
}

TEST(Sweep, SL2Example)
{
    auto res = ncharacter_sweep_sl2(5, 0, Q(2), SweepGrid{});
    ASSERT_TRUE(res.value);
    EXPECT_EQ(*res.value, rational(7, 3));
    EXPECT_TRUE(res.limit_certified);
    for (const auto& r : res.rows) EXPECT_TRUE(r.trace_ok);
}

TEST(Sweep, SidesAddUp)
{
    const long p = 3, c = -1;
    const Q a = 2, ainv = rational(1, 2);
    auto lat = sl2_lattice(c);
    SL2Config cfg{p, c, 2, 2, 0, 3};
    Q plus = eval_formal(lat, sl2_formal_theta(cfg, Side::Plus).whole, {ainv});
    Q minus = eval_formal(lat, sl2_formal_theta(cfg, Side::Minus).whole, {ainv});
    EXPECT_EQ(plus + minus, theta_sl2(a, c, p));
    auto res = ncharacter_sweep_sl2(p, c, a, SweepGrid{{1, 2}, {0, 1}, {}});
    EXPECT_EQ(*res.value, plus + minus);
}

TEST(Sweep, StableValuesMatchClosedFormAcrossGrid)
{
    for (long p : {3, 5})
        for (long c : {-2, 0, 2})
            for (Q a : {Q(2), Q(1 + p)}) {
                auto res = ncharacter_sweep_sl2(p, c, a, SweepGrid{});
                ASSERT_TRUE(res.value);
                EXPECT_EQ(*res.value, theta_sl2(a, c, p));
                EXPECT_TRUE(res.limit_certified);
            }
}

// below v_p(a^2 - 1) the permutation count is too small
TEST(Sweep, ThresholdIsNecessary)
{
    const long p = 3;
    const Q a = 10;  // a^2 - 1 = 99
    ASSERT_EQ(vp(a * a - 1, p), 2);
    EXPECT_EQ(fixpoint_count(a * a, p, 1, true), 3);
    EXPECT_EQ(Q(1) / abs_p(1 - a * a, p), 9);
    SweepGrid low{{0}, {1}, {}};
    auto res = ncharacter_sweep_sl2(p, 0, a, low);
    EXPECT_FALSE(res.value);
    for (const auto& r : res.rows) EXPECT_NE(r.formal_value, theta_sl2(a, 0, p));
}

TEST(Sweep, CsvRow)
{
    SweepRow r{1, 2, 3, Q(5), Q(5), rational(7, 3), true, true};
    EXPECT_EQ(sweep_csv_row(r), "1,2,3,5,5,7/3,1,1");
    EXPECT_EQ(sweep_csv_header(), "h,e,k,trace,closed_trace,formal_value,stable,trace_ok");
}

// the n-adic minus quotient carries a different limit when |1 - a^2|^{-1} > 1
TEST(Sweep, NadicMinusAlternative)
{
    auto five = ncharacter_sweep_sl2(5, 0, Q(2), SweepGrid{}, true);
    EXPECT_EQ(*five.value, theta_sl2_nadic(Q(2), 0, 5));
    EXPECT_EQ(*five.value, theta_sl2(Q(2), 0, 5));
    auto three = ncharacter_sweep_sl2(3, 0, Q(2), SweepGrid{}, true);
    EXPECT_EQ(*three.value, theta_sl2_nadic(Q(2), 0, 3));
    EXPECT_NE(*three.value, theta_sl2(Q(2), 0, 3));
    for (const auto& r : three.rows) EXPECT_TRUE(r.trace_ok);
}

TEST(Iwahori, IdentityAndDimension)
{
    for (const auto& rd : root_data()) {
        TorusPoint one(rd.t, Q(1));
        auto A = iwahori_action_matrix(one, rd);
        EXPECT_EQ(A.m, SparseMatrix::identity(A.dim()));
        Z dim = 1;
        for (std::size_t j = 0; j < rd.d(); ++j) dim *= ipow(rd.p, rd.levels[j]) * rd.k;
        EXPECT_EQ(A.trace(), Q(dim));
    }
}

TEST(Iwahori, TraceExample)
{
    RootDatum rd{3, 1, {{1}, {2}}, {0}, {2, 2}, 2};
    TorusPoint s{Q(4)};
    EXPECT_EQ(iwahori_fixpoint_count(s, rd), 9);
    EXPECT_EQ(iwahori_action_matrix(s, rd).trace(), 765);
    EXPECT_EQ(iwahori_trace_closed_form(s, rd), 765);
}

TEST(Iwahori, SingleRootMatchesSL2Plus)
{
    for (long c : {-1, 0, 2})
        for (Q a : {Q(2), Q(4), rational(1, 2)}) {
            SL2Config cfg{3, c, 1, 1, 1, 3};
            RootDatum rd{3, 1, {{2}}, {-c}, {2}, 3};
            auto S = sl2_action_matrix(a, cfg, Side::Plus);
            auto I = iwahori_action_matrix({a}, rd);
            ASSERT_EQ(S.dim(), I.dim());
            LabelIndex sidx;
            for (const auto& l : S.labels) sidx.push(l);
            for (std::size_t col = 0; col < I.dim(); ++col)
                for (std::size_t row = 0; row < I.dim(); ++row) {
                    // (alpha, beta) <-> (n = beta, i = alpha)
                    auto sr = *sidx.find({I.labels[row][1], I.labels[row][0]});
                    auto sc = *sidx.find({I.labels[col][1], I.labels[col][0]});
                    EXPECT_EQ(I.m.get(row, col), S.m.get(sr, sc));
                }
        }
}

TEST(Iwahori, Multiplicative)
{
    std::mt19937_64 rng(89);
    for (const auto& rd : root_data()) {
        auto us = units(rd.p);
        for (int t = 0; t < 10; ++t) {
            TorusPoint s, u, su;
            for (long i = 0; i < rd.t; ++i) {
                s.push_back(us[rng() % us.size()]);
                u.push_back(us[rng() % us.size()]);
                su.push_back(s.back() * u.back());
            }
            EXPECT_EQ(product_of(iwahori_action_matrix(s, rd), iwahori_action_matrix(u, rd)), iwahori_action_matrix(su, rd).m);
        }
    }
}

TEST(Iwahori, FixpointsAndTraces)
{
    for (auto rd : root_data())
        for (long h = 0; h <= 2; ++h) {
            rd.levels.assign(rd.d(), h);
            for (const Q& x : units(rd.p)) {
                TorusPoint s(rd.t, x);
                if (rd.t == 2) s[1] = x + rd.p;
                bool regular = true;
                for (const auto& r : rd.roots) regular = regular && character_value(r, s) != 1;
                if (!regular) continue;
                EXPECT_EQ(iwahori_fixpoint_count(s, rd), iwahori_fixpoint_closed_form(s, rd));
                EXPECT_EQ(iwahori_action_matrix(s, rd).trace(), iwahori_trace_closed_form(s, rd));
                EXPECT_EQ(Q(iwahori_fixpoint_count(s, rd)) == iwahori_stable_count(s, rd), iwahori_stable(s, rd));
            }
        }
}

TEST(Iwahori, ThetaExamples)
{
    RootDatum rd{3, 1, {{1}}, {0}, {1}, 2};
    EXPECT_EQ(theta_iwahori({Q(4)}, rd), 4);
    EXPECT_THROW(theta_iwahori({Q(1)}, rd), NotRegular);
    // one root a^2 with chi_w = a^{-c} is the plus-side summand of the SL2 formula
    for (long c : {-1, 0, 2})
        for (Q a : {Q(2), Q(4), rational(2, 5)}) {
            RootDatum r1{3, 1, {{2}}, {-c}, {1}, 2};
            Q am2 = 1 / (a * a);
            EXPECT_EQ(theta_iwahori({a}, r1), 1 / (chi(a, c) * abs_p(1 - am2, 3) * (1 - am2)));
        }
}

TEST(Iwahori, SweepMatchesClosedForm)
{
    for (const auto& rd : root_data()) {
        TorusPoint s(rd.t, Q(4));
        if (rd.t == 2) s[1] = Q(5);
        auto res = ncharacter_sweep_iwahori(rd, s, iwahori_default_grid());
        ASSERT_TRUE(res.value);
        EXPECT_EQ(*res.value, theta_iwahori(s, rd));
        EXPECT_TRUE(res.limit_certified);
        for (const auto& r : res.rows) EXPECT_TRUE(r.trace_ok);
    }
}
