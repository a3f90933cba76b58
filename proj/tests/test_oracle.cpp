#include "bangbang/oracle.hpp"
#include "support/path_oracle.hpp"

#include <gtest/gtest.h>

using namespace bangbang;

namespace {

DiscreteReward<Rational> table_of(const RewardSpec& f, long L) { return tabulate<Rational>(f, L); }

} // namespace

TEST(HistoryRules, NodeIndexingAndStoppingIndex)
{
    EXPECT_EQ(HistoryRule::node(0, 0), 0U);
    EXPECT_EQ(HistoryRule::node(1, 1), 2U);
    EXPECT_EQ(HistoryRule::node(2, 3), 6U);
    const HistoryRule all_stop{2, 0b111};
    EXPECT_EQ(all_stop.stopping_index(0b11), 0);
    const HistoryRule stop_after_up{2, 1U << HistoryRule::node(1, 1)};
    EXPECT_EQ(stop_after_up.stopping_index(0b01), 1);
    EXPECT_EQ(stop_after_up.stopping_index(0b10), 2);
}

TEST(Enumerate, OneStepFairGeometric)
{
    const auto f = table_of(RewardSpec::geometric(Rational(1, 2)), 1);
    const auto r = enumerate_optimum(WalkParams<Rational>{Rational(1, 2), 1}, f);
    // E f(M_1) = E f(Z_1) = (f(0) + f(1)) / 2
    EXPECT_EQ(r.optimum, Rational(3, 4));
    EXPECT_EQ(r.n_rules_total, 2U);
    EXPECT_EQ(r.n_optimal_classes, 2U);
}

TEST(Enumerate, NonConvexExampleWinsSurely)
{
    const auto f = table_of(RewardSpec::table({1, 1, 0}), 2);
    const auto r = enumerate_optimum(WalkParams<Rational>{Rational(1, 3), 2}, f);
    EXPECT_EQ(r.optimum, 1);
    // the rule stopping at every length-1 history is among the optimal ones
    const HistoryRule tau1{2, (1U << HistoryRule::node(1, 0)) | (1U << HistoryRule::node(1, 1))};
    bool found = false;
    for (auto c : r.optimal) found = found || r.classes[c] == tau1.stop_map();
    EXPECT_TRUE(found);
}

TEST(Enumerate, FavourableWalkUniqueNeverStop)
{
    const WalkParams<Rational> w{Rational(3, 4), 3};
    const auto f = table_of(RewardSpec::geometric(Rational(1, 2)), 3);
    const auto r = enumerate_optimum(w, f);
    EXPECT_EQ(r.optimum, solve(w, f).value_tauN);
    ASSERT_EQ(r.n_optimal_classes, 1U);
    for (auto t : r.classes[r.optimal[0]]) EXPECT_EQ(t, 3);
}

TEST(Enumerate, RefusesLargeHorizons)
{
    const auto f = table_of(RewardSpec::indicator_top(), 6);
    EXPECT_THROW(enumerate_optimum(WalkParams<Rational>{Rational(1, 2), 5}, f), config_error);
    EXPECT_THROW(enumerate_optimum(WalkParams<Rational>{Rational(1, 2), 6}, f, 6), config_error);
}

TEST(Enumerate, AgreesWithSnellEnvelopeOnHistoryTree)
{
    const std::vector<RewardSpec> specs{RewardSpec::geometric(Rational(1, 2)), RewardSpec::indicator_top(),
                                        RewardSpec::table({1, 1, 0, 0, 0}), RewardSpec::table({2, 5, 1, 3, 0}),
                                        RewardSpec::linear(4)};
    for (const auto& spec : specs)
        for (const auto& p : {Rational(1, 3), Rational(1, 2), Rational(3, 5)})
            for (int N = 0; N <= 4; ++N) {
                const auto f = table_of(spec, 4);
                const auto r = enumerate_optimum(WalkParams<Rational>{p, N}, f);
                const auto ref = oracle_test::tree_optimum(p, N, [&](long k) { return f(k); });
                EXPECT_EQ(r.optimum, ref.value);
                EXPECT_EQ(Rational(static_cast<long>(r.n_optimal_classes)), ref.n_optimal);
                EXPECT_EQ(Rational(static_cast<long>(r.n_classes)), ref.n_classes);
            }
}

TEST(Enumerate, OracleDominatesExplicitPolicies)
{
    const WalkParams<Rational> w{Rational(2, 5), 3};
    const auto f = table_of(RewardSpec::table({4, 4, 1, 0}), 3);
    const auto r = enumerate_optimum(w, f);
    for (const auto& pol : {PolicyTable::tau0(3), PolicyTable::tauN(3), PolicyTable::stop_at_max(3)})
        EXPECT_GE(r.optimum, evaluate_policy(w, f, pol));
}

TEST(CrossValidate, Examples)
{
    EXPECT_TRUE(cross_validate(WalkParams<Rational>{Rational(1, 3), 3}, table_of(RewardSpec::geometric(Rational(1, 2)), 3)));
    const auto tie = cross_validate_report(WalkParams<Rational>{Rational(1, 2), 2}, table_of(RewardSpec::indicator_top(), 2));
    EXPECT_TRUE(tie.ok());
    const auto lin = cross_validate_report(WalkParams<Rational>{Rational(1, 2), 2}, table_of(RewardSpec::linear(2), 2));
    EXPECT_TRUE(lin.ok());
    EXPECT_EQ(lin.unique, Uniqueness::not_unique);
    EXPECT_EQ(lin.oracle.n_optimal_classes, lin.oracle.n_classes);
}

TEST(CrossValidate, StrictlyConvexFairWalkIsTieClass)
{
    const auto cv = cross_validate_report(WalkParams<Rational>{Rational(1, 2), 3},
                                          table_of(RewardSpec::geometric(Rational(1, 3)), 3));
    EXPECT_EQ(cv.unique, Uniqueness::tie_class);
    EXPECT_TRUE(cv.ok());
}

TEST(CrossValidate, JsonSummary)
{
    const auto cv = cross_validate_report(WalkParams<Rational>{Rational(1, 3), 2}, table_of(RewardSpec::table({1, 1, 0}), 2));
    const auto j = to_json(cv);
    EXPECT_EQ(j["optimum"]["value"], "1");
    EXPECT_EQ(j["n_rules_total"], 8);
    EXPECT_EQ(j["dp_match"], true);
}
