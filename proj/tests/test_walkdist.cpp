#include "bangbang/walkdist.hpp"
#include "support/path_oracle.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace bangbang;
using oracle_test::counted_law;
using oracle_test::expect;

namespace {

const std::vector<Rational> kGrid = [] {
    std::vector<Rational> ps;
    for (int k = 1; k <= 9; ++k) ps.push_back(canonical(Rational(k, 10)));
    return ps;
}();

DiscreteReward<Rational> geo(const Rational& d, long L) { return tabulate<Rational>(RewardSpec::geometric(d), L); }

} // namespace

TEST(JointLaw, TrivialHorizons)
{
    const auto l0 = joint_pmf(WalkParams<Rational>{Rational(1, 3), 0});
    EXPECT_EQ(l0(0, 0), 1);
    EXPECT_EQ(l0.total(), 1);
    const Rational p(2, 7);
    const auto l1 = joint_pmf(WalkParams<Rational>{p, 1});
    EXPECT_EQ(l1(1, 1), p);
    EXPECT_EQ(l1(0, -1), 1 - p);
    EXPECT_EQ(l1.total(), 1);
}

TEST(JointLaw, ThreeFairSteps)
{
    const auto law = joint_pmf(WalkParams<Rational>{Rational(1, 2), 3});
    EXPECT_EQ(law(3, 3), Rational(1, 8));
    EXPECT_EQ(law(0, -3), Rational(1, 8));
    EXPECT_EQ(law(1, -1), Rational(1, 8));
    EXPECT_EQ(law(1, 1), Rational(1, 4));
}

TEST(JointLaw, MatchesPathCountingOracle)
{
    for (const auto& p : {Rational(1, 10), Rational(1, 2), Rational(2, 3)})
        for (int n = 0; n <= 10; ++n) {
            const auto law = joint_pmf(WalkParams<Rational>{p, n});
            const auto ref = counted_law(p, n);
            Rational seen = 0;
            law.for_each([&](int k, int l, const Rational& m) {
                ASSERT_TRUE(ref.count({k, l})) << n << ' ' << k << ' ' << l;
                EXPECT_EQ(m, ref.at({k, l}));
                seen += m;
            });
            EXPECT_EQ(seen, 1);
            EXPECT_EQ(law.total(), 1);
        }
}

TEST(JointLaw, SupportAndParity)
{
    const int n = 7;
    const auto law = joint_pmf(WalkParams<Rational>{Rational(3, 5), n});
    law.for_each([&](int k, int l, const Rational&) {
        EXPECT_GE(k, std::max(l, 0));
        EXPECT_EQ((n - l) % 2, 0);
    });
}

TEST(JointLaw, SequenceAgreesWithSingleLaws)
{
    const auto seq = joint_pmf_sequence(Rational(1, 3), 6);
    ASSERT_EQ(seq.size(), 7U);
    for (int j = 0; j <= 6; ++j) EXPECT_TRUE(seq[static_cast<std::size_t>(j)] == joint_pmf(WalkParams<Rational>{Rational(1, 3), j}));
}

TEST(Identities, ReflectionOnGrid)
{
    for (const auto& p : kGrid)
        for (int n = 0; n <= 12; ++n) EXPECT_TRUE(reflection_check(WalkParams<Rational>{p, n})) << p << ' ' << n;
}

TEST(Identities, FairWalkLawsCoincideBeforeTransformation)
{
    const WalkParams<Rational> w{Rational(1, 2), 4};
    EXPECT_TRUE(joint_pmf(w) == joint_pmf(w.swapped()));
}

TEST(Identities, TimeReversalOnGrid)
{
    for (const auto& p : kGrid)
        for (int n = 0; n <= 12; ++n) EXPECT_TRUE(time_reversal_check(WalkParams<Rational>{p, n})) << p << ' ' << n;
}

TEST(Identities, TimeReversalAgainstOracleMarginals)
{
    const Rational p(2, 3);
    const int n = 6;
    const auto mp = joint_pmf(WalkParams<Rational>{p, n}).max_marginal();
    for (int z = 0; z <= n; ++z) {
        const Rational ref = expect(1 - p, n, [&](int k, int l) { return Rational(k - l == z ? 1 : 0); });
        EXPECT_EQ(mp[static_cast<std::size_t>(z)], ref);
    }
}

TEST(ValueFunctions, GAtZeroStepsIsF)
{
    const auto f = geo(Rational(1, 2), 10);
    const WalkParams<Rational> w{Rational(1, 3), 5};
    for (long i = 0; i <= 5; ++i) {
        EXPECT_EQ(g_value(w, f, 0, i), f(i));
        EXPECT_EQ(d_value(w, f, 0, i), f(i));
    }
}

TEST(ValueFunctions, GOneStep)
{
    EXPECT_EQ(g_value(WalkParams<Rational>{Rational(1, 2), 1}, geo(Rational(1, 2), 3), 1, 0), Rational(3, 4));
}

TEST(ValueFunctions, GForNonConvexExample)
{
    const auto f = tabulate<Rational>(RewardSpec::table({1, 1, 0}), 2);
    for (const auto& p : {Rational(1, 4), Rational(1, 3), Rational(3, 4)})
        EXPECT_EQ(g_value(WalkParams<Rational>{p, 2}, f, 2, 0), 1 - p * p);
}

TEST(ValueFunctions, DEqualsGAtZeroForFairWalk)
{
    const WalkParams<Rational> w{Rational(1, 2), 8};
    const auto f = geo(Rational(1, 3), 16);
    for (int k = 0; k <= 8; ++k) EXPECT_EQ(d_value(w, f, k, 0), g_value(w, f, k, 0));
}

TEST(ValueFunctions, DTildeByEnumeration)
{
    const Rational p(2, 3);
    const auto f = geo(Rational(1, 2), 6);
    const Rational ref = expect(p, 2, [&](int k, int l) { return f(std::max(1, k) - l); });
    EXPECT_EQ(d_value(WalkParams<Rational>{p, 2}, f, 2, 1), ref);
    // UU: 1 v 2 - 2 = 0, UD and DU: 1, DD: 3
    EXPECT_EQ(ref, Rational(4, 9) + Rational(2, 9) * Rational(1, 2) + Rational(2, 9) * Rational(1, 2) +
                       Rational(1, 9) * Rational(1, 8));
}

TEST(ValueFunctions, GMonotoneInDrawdown)
{
    const auto f = tabulate<Rational>(RewardSpec::indicator_top(), 20);
    for (const auto& p : {Rational(1, 5), Rational(1, 2), Rational(4, 5)}) {
        const auto g = g_table(p, f, 8, 8);
        for (int k = 0; k <= 8; ++k)
            for (int i = 0; i < 8; ++i) EXPECT_GE(g[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)],
                                                  g[static_cast<std::size_t>(k)][static_cast<std::size_t>(i + 1)]);
    }
}

TEST(KeyInequality, EqualityAtZero)
{
    for (const auto& p : {Rational(1, 5), Rational(3, 5)}) {
        const auto r = check_key_inequality(WalkParams<Rational>{p, 6}, tabulate<Rational>(RewardSpec::table({5, 3, 2, 2, 2, 2, 2}), 6), 0);
        EXPECT_EQ(r.relation, Relation::equal);
        EXPECT_FALSE(r.witness);
    }
}

TEST(KeyInequality, StrictForFavourableDrift)
{
    const Rational p(3, 5);
    const auto f = geo(Rational(1, 2), 4);
    const auto r = check_key_inequality(WalkParams<Rational>{p, 2}, f, 1);
    EXPECT_EQ(r.lhs, expect(p, 2, [&](int k, int l) { return f(std::max(1, k) - l); }));
    EXPECT_EQ(r.rhs, expect(p, 2, [&](int k, int l) { return f(std::max(1, k - l)); }));
    EXPECT_EQ(r.relation, Relation::greater);
    EXPECT_TRUE(r.strict);
    ASSERT_TRUE(r.witness);
    EXPECT_EQ(r.witness->k, 2);
    EXPECT_EQ(r.witness->l, 2);
}

TEST(KeyInequality, LinearRewardGivesEquality)
{
    // f(k) = 3 - k, long enough for every argument i + n.
    const auto f = tabulate<Rational>(RewardSpec::linear(3), 5);
    const auto r = check_key_inequality(WalkParams<Rational>{Rational(1, 2), 3}, f, 2);
    EXPECT_EQ(r.relation, Relation::equal);
    EXPECT_EQ(f(0), 3);
    EXPECT_EQ(f(3), 0);
}

TEST(Corollary, ZeroHorizonEquality)
{
    const auto r = check_corollary(WalkParams<Rational>{Rational(1, 3), 0}, geo(Rational(1, 2), 5), 3);
    EXPECT_EQ(r.relation, Relation::equal);
}

TEST(Corollary, StrictForStrictlyDecreasing)
{
    const auto r = check_corollary(WalkParams<Rational>{Rational(3, 4), 3}, geo(Rational(1, 3), 3), 0);
    EXPECT_EQ(r.relation, Relation::greater);
}

TEST(Corollary, IndicatorFairWalk)
{
    const auto f = tabulate<Rational>(RewardSpec::indicator_top(), 4);
    const Rational p(1, 2);
    const auto r = check_corollary(WalkParams<Rational>{p, 2}, f, 1);
    EXPECT_EQ(r.lhs, expect(p, 2, [&](int k, int l) { return f(std::max(1, k) - l); }));
    EXPECT_EQ(r.rhs, expect(p, 2, [&](int k, int) { return f(std::max(1, k)); }));
    EXPECT_NE(r.relation, Relation::less);
}

TEST(Serialization, CsvAndJson)
{
    const auto law = joint_pmf(WalkParams<Rational>{Rational(1, 3), 1});
    std::ostringstream os;
    write_csv(os, law);
    EXPECT_EQ(os.str(), "n,k,l,prob_numerator,prob_denominator\n1,0,-1,2,3\n1,1,1,1,3\n");
    const auto j = to_json(law);
    EXPECT_EQ(j.dump(), to_json(law).dump());
}

TEST(Walk, RejectsBadParameters)
{
    EXPECT_THROW((WalkParams<Rational>{Rational(0), 3}), config_error);
    EXPECT_THROW((WalkParams<Rational>{Rational(1), 3}), config_error);
    EXPECT_THROW((WalkParams<Rational>{Rational(1, 2), -1}), config_error);
    EXPECT_EQ((WalkParams<Rational>{Rational(2, 4), 1}).p.get_str(), "1/2");
}

TEST(Walk, FloatModeTracksExact)
{
    const auto a = joint_pmf(WalkParams<double>{0.3, 9});
    const auto b = joint_pmf(WalkParams<Rational>{Rational(3, 10), 9});
    b.for_each([&](int k, int l, const Rational& m) { EXPECT_NEAR(a(k, l), m.get_d(), 1e-15); });
}
