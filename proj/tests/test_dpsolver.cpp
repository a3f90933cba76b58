#include "bangbang/dpsolver.hpp"
#include "support/path_oracle.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace bangbang;

namespace {

/// E[f(M_N - S_tau)] summed over all 2^N paths.
Rational path_value(const Rational& p, int N, const DiscreteReward<Rational>& f, const PolicyTable& pol)
{
    const Rational q = 1 - p;
    Rational v = 0;
    for (std::uint32_t bits = 0; bits < (1U << N); ++bits) {
        const auto pa = oracle_test::path_of(bits, N);
        int tau = N;
        for (int k = 0; k < N; ++k)
            if (pol.stops(k, pa.M[static_cast<std::size_t>(k)] - pa.S[static_cast<std::size_t>(k)])) {
                tau = k;
                break;
            }
        v += oracle_test::power(p, pa.ups) * oracle_test::power(q, N - pa.ups) *
             f(pa.M.back() - pa.S[static_cast<std::size_t>(tau)]);
    }
    return v;
}

DiscreteReward<Rational> exact_table(const RewardSpec& f, long L) { return tabulate<Rational>(f, L); }

} // namespace

TEST(ZChainKernel, RowsSumToOne)
{
    const ZChain<Rational> c{Rational(2, 7)};
    for (int z = 0; z <= 5; ++z) {
        Rational s = 0;
        for (const auto& [to, pr] : c.transitions(z)) {
            s += pr;
            EXPECT_LE(std::abs(to - z), 1);
        }
        EXPECT_EQ(s, 1);
    }
}

TEST(Solve, NonConvexExample)
{
    const auto f = exact_table(RewardSpec::table({1, 1, 0}), 2);
    for (const auto& p : {Rational(1, 4), Rational(1, 2), Rational(3, 4)}) {
        const WalkParams<Rational> w{p, 2};
        const auto r = solve(w, f);
        const Rational q = 1 - p;
        EXPECT_EQ(r.optimal_value, 1);
        EXPECT_EQ(r.value_tau0, 1 - p * p);
        EXPECT_EQ(r.value_tauN, 1 - q * q);
        PolicyTable tau1(2);
        tau1.set(1, 0, Decision::stop);
        tau1.set(1, 1, Decision::stop);
        EXPECT_EQ(evaluate_policy(w, f, tau1), 1);
        EXPECT_TRUE(r.policy.stops(1, 0) && r.policy.stops(1, 1));
        EXPECT_FALSE(r.policy.stops(0, 0));
    }
}

TEST(Solve, BangBangAtZeroForUnfavourableWalk)
{
    const auto r = solve(WalkParams<Rational>{Rational(2, 5), 5}, RewardSpec::geometric(Rational(1, 2)));
    EXPECT_EQ(r.optimal_value, r.value_tau0);
    EXPECT_EQ(r.value_tau0, oracle_test::expect(Rational(2, 5), 5, [](int k, int) {
                  return oracle_test::power(Rational(1, 2), k);
              }));
}

TEST(Solve, ZeroHorizon)
{
    const auto r = solve(WalkParams<Rational>{Rational(1, 3), 0}, RewardSpec::table({Rational(7, 2)}));
    EXPECT_EQ(r.optimal_value, Rational(7, 2));
    EXPECT_EQ(r.unique, Uniqueness::unique_tau0);
}

TEST(Solve, ShortTableIsConfigurationError)
{
    EXPECT_THROW(solve(WalkParams<Rational>{Rational(1, 3), 3}, RewardSpec::table({1, 1, 0})), config_error);
}

TEST(Solve, BellmanConsistency)
{
    for (const auto& spec : {RewardSpec::geometric(Rational(1, 2)), RewardSpec::table({3, 1, 4, 1, 5, 9, 2}),
                             RewardSpec::indicator_top()})
        for (const auto& p : {Rational(1, 5), Rational(1, 2), Rational(5, 7)}) {
            const auto r = solve(WalkParams<Rational>{p, 6}, spec);
            for (int k = 0; k < 6; ++k)
                for (int z = 0; z <= k; ++z) {
                    const auto kk = static_cast<std::size_t>(k), zz = static_cast<std::size_t>(z);
                    const auto& v = r.value[kk][zz];
                    EXPECT_GE(v, r.stop_value[kk][zz]);
                    EXPECT_GE(v, r.continue_value[kk][zz]);
                    EXPECT_TRUE(v == r.stop_value[kk][zz] || v == r.continue_value[kk][zz]);
                }
        }
}

TEST(Solve, ValueNonincreasingInDrawdown)
{
    const auto r = solve(WalkParams<Rational>{Rational(3, 5), 8}, RewardSpec::geometric(Rational(2, 3)));
    for (int k = 0; k <= 8; ++k)
        for (int z = 0; z < k; ++z)
            EXPECT_GE(r.value[static_cast<std::size_t>(k)][static_cast<std::size_t>(z)],
                      r.value[static_cast<std::size_t>(k)][static_cast<std::size_t>(z + 1)]);
}

TEST(Solve, OptimalDominatesCanonicalRules)
{
    unsigned state = 99;
    auto next = [&] { return (state = state * 1664525U + 1013904223U) >> 20; };
    for (int trial = 0; trial < 40; ++trial) {
        const int N = 1 + static_cast<int>(next() % 6);
        std::vector<Rational> v;
        for (int k = 0; k <= N; ++k) v.emplace_back(static_cast<long>(next() % 7));
        const Rational p = canonical(Rational(1 + static_cast<long>(next() % 9), 10));
        const auto r = solve(WalkParams<Rational>{p, N}, RewardSpec::table(v));
        EXPECT_GE(r.optimal_value, r.value_tau0);
        EXPECT_GE(r.optimal_value, r.value_tauN);
        // the extracted policy attains the optimum, checked on paths
        EXPECT_EQ(path_value(p, N, DiscreteReward<Rational>(v), r.policy), r.optimal_value);
    }
}

TEST(Evaluate, CanonicalRulesOnExample)
{
    const auto f = exact_table(RewardSpec::table({1, 1, 0}), 2);
    for (const auto& p : {Rational(1, 4), Rational(2, 3)}) {
        const WalkParams<Rational> w{p, 2};
        const Rational q = 1 - p;
        EXPECT_EQ(evaluate_policy(w, f, PolicyTable::tau0(2)), 1 - p * p);
        EXPECT_EQ(evaluate_policy(w, f, PolicyTable::tauN(2)), 1 - q * q);
    }
}

TEST(Evaluate, StopAtMaxAttainsTau0ForFairWalk)
{
    const WalkParams<Rational> w{Rational(1, 2), 4};
    const auto f = exact_table(RewardSpec::indicator_top(), 4);
    EXPECT_EQ(evaluate_policy(w, f, PolicyTable::stop_at_max(4)), solve(w, f).value_tau0);
}

TEST(Evaluate, MatchesPathEnumerationForRandomPolicies)
{
    unsigned state = 7;
    auto next = [&] { return (state = state * 1103515245U + 12345U) >> 16; };
    const auto f = exact_table(RewardSpec::geometric(Rational(1, 3)), 7);
    for (int trial = 0; trial < 60; ++trial) {
        const int N = static_cast<int>(next() % 8);
        PolicyTable pol(N);
        for (int k = 0; k < N; ++k)
            for (int z = 0; z <= k; ++z)
                if (next() % 3 == 0) pol.set(k, z, Decision::stop);
        const Rational p = canonical(Rational(1 + static_cast<long>(next() % 9), 10));
        EXPECT_EQ(evaluate_policy(WalkParams<Rational>{p, N}, f, pol), path_value(p, N, f, pol));
    }
}

TEST(Evaluate, RejectsMalformedPolicies)
{
    const auto f = exact_table(RewardSpec::indicator_top(), 3);
    PolicyTable pol(3);
    pol.set(3, 1, Decision::cont);
    EXPECT_THROW(evaluate_policy(WalkParams<Rational>{Rational(1, 2), 3}, f, pol), config_error);
    EXPECT_THROW(evaluate_policy(WalkParams<Rational>{Rational(1, 2), 2}, f, PolicyTable(3)), config_error);
    EXPECT_THROW(pol.set(1, 2, Decision::stop), config_error);
}

TEST(Uniqueness, UnfavourableWalkStopsAtOnce)
{
    const auto r = solve(WalkParams<Rational>{Rational(1, 3), 6}, RewardSpec::geometric(Rational(1, 2)));
    EXPECT_EQ(r.unique, Uniqueness::unique_tau0);
}

TEST(Uniqueness, FairWalkStrictlyConvexTieClass)
{
    const int N = 5;
    const auto r = solve(WalkParams<Rational>{Rational(1, 2), N}, RewardSpec::geometric(Rational(1, 2)));
    EXPECT_EQ(r.unique, Uniqueness::tie_class);
    std::vector<std::pair<int, int>> expected;
    for (int k = N - 1; k >= 0; --k) expected.emplace_back(k, 0);
    auto got = r.tie_states;
    std::sort(got.begin(), got.end());
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(got, expected);
}

TEST(Uniqueness, FavourableWalkStrictlyDecreasing)
{
    const auto r = solve(WalkParams<Rational>{Rational(3, 4), 6}, RewardSpec::geometric(Rational(1, 2)));
    EXPECT_EQ(r.unique, Uniqueness::unique_tauN);
}

TEST(Uniqueness, LinearFairWalkEveryStateTies)
{
    const auto r = solve(WalkParams<Rational>{Rational(1, 2), 3}, RewardSpec::linear(3));
    EXPECT_EQ(r.unique, Uniqueness::not_unique);
    EXPECT_EQ(r.tie_states.size(), 6U); // all (k, z) with k < 3
    EXPECT_EQ(r.value_tau0, r.value_tauN);
    EXPECT_EQ(r.optimal_value, r.value_tau0);
}

TEST(Uniqueness, FloatModeAnswersUnknown)
{
    const auto r = solve(WalkParams<double>{0.5, 4}, RewardSpec::geometric(Rational(1, 2)));
    EXPECT_EQ(r.unique, Uniqueness::unknown);
    EXPECT_TRUE(r.tie_states.empty());
    const auto [u, ties] = uniqueness_report(WalkParams<Rational>{Rational(1, 2), 4},
                                             tabulate<Rational>(RewardSpec::geometric(Rational(1, 2)), 4));
    EXPECT_EQ(u, Uniqueness::tie_class);
    EXPECT_EQ(ties.size(), 4U);
}

TEST(PolicyIo, CsvRoundTrip)
{
    const auto r = solve(WalkParams<Rational>{Rational(1, 2), 3}, RewardSpec::table({1, 1, 0, 0}));
    std::ostringstream os;
    write_csv(os, r.policy);
    EXPECT_EQ(os.str().substr(0, 15), "k,z,decision\n0,");
    std::istringstream is(os.str());
    EXPECT_TRUE(read_policy_csv(is) == r.policy);
}

TEST(PolicyIo, BadCsvRejected)
{
    std::istringstream bad("k,z,decision\n0,0,MAYBE\n");
    EXPECT_THROW(read_policy_csv(bad), config_error);
}

TEST(PolicyIo, JsonCarriesModeTags)
{
    const auto j = to_json(solve(WalkParams<Rational>{Rational(1, 2), 2}, RewardSpec::table({1, 1, 0})));
    EXPECT_EQ(j["optimal_value"]["mode"], "exact");
    EXPECT_EQ(j["optimal_value"]["value"], "1");
    EXPECT_EQ(j["value_tau0"]["value"], "3/4");
    const auto jf = to_json(solve(WalkParams<double>{0.5, 2}, RewardSpec::table({1, 1, 0})));
    EXPECT_EQ(jf["optimal_value"]["mode"], "float");
}
