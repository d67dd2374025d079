#include <nchar/io.hpp>

#include <gtest/gtest.h>

using namespace nchar;

TEST(Json, FormalFunctionRoundTrip)
{
    CharacterLattice lat({{"eps", {-1}}, {"chi", {0}}});
    auto f = sum({product({mono(lat.gen("chi", -1)), geom(lat.gen("eps", -2)), perm(5, 1, lat.gen("eps", -2), true)}),
                  mono(lat.gen("chi"), 3)});
    auto j = to_json(f);
    auto g = formal_from_json(json::parse(j.dump()));
    EXPECT_EQ(to_json(g), j);
    for (Q a : {Q(2), Q(3), rational(1, 4)}) EXPECT_EQ(eval_formal(lat, g, {a}), eval_formal(lat, f, {a}));
    EXPECT_THROW(formal_from_json(json{{"kind", "bogus"}}), DomainError);
}

TEST(Json, ConfigsRoundTrip)
{
    SL2Config c{3, -1, 1, 2, 1, 4};
    auto c2 = sl2_config_from_json(json::parse(to_json(c).dump()));
    EXPECT_EQ(to_json(c2), to_json(c));
    RootDatum rd{3, 2, {{1, 0}, {0, 1}, {1, 1}}, {1, -1}, {1, 2, 1}, 3};
    auto rd2 = root_datum_from_json(json::parse(to_json(rd).dump()));
    EXPECT_EQ(to_json(rd2), to_json(rd));
    EXPECT_THROW(sl2_config_from_json(json{{"p", 4}}), DomainError);
    EXPECT_THROW(root_datum_from_json(json{{"p", 3}, {"t", 1}, {"roots", json::array({json::array({0})})}}), DomainError);
}

TEST(Json, Lattice)
{
    auto L = lattice_from_json(json::parse(R"({"p": 5, "generators": [["1", "0"], [0, "25"]]})"));
    PLattice Z2(5, QMatrix::identity(2));
    EXPECT_EQ(p_elementary_divisors(Z2, L), (ElemDivisors{0, 2}));
    EXPECT_THROW(lattice_from_json(json::parse(R"({"p": 5, "generators": [[1, 0], [2, 0]]})")), DomainError);
}
