#include "bangbang/brownian.hpp"
#include "support/path_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bangbang;

namespace {

RewardSpec expf(int sigma) { return RewardSpec::exp_decay(Rational(sigma)); }

/// E[f(M_t)] for decreasing smooth f, by parts against the closed-form law of M_t.
double g_by_parts(double t, double lambda, const std::function<double(double)>& f, const std::function<double(double)>& df)
{
    // E f(M) = f(0) + int_0^inf f'(m) P(M > m) dm, trapezoid on a fine grid
    const double top = std::abs(lambda) * t + 12 * std::sqrt(t);
    const int n = 200000;
    const double h = top / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double m = i * h;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * df(m) * (1 - oracle_test::max_cdf(m, t, lambda));
    }
    return f(0) + acc * h;
}

} // namespace

TEST(Density, Examples)
{
    EXPECT_NEAR(joint_density(1, 0, 1, 0), std::sqrt(2 / std::numbers::pi) * 2 * std::exp(-2.0), 1e-15);
    EXPECT_EQ(joint_density(-0.1, -1, 1, 0), 0.0);
    EXPECT_EQ(joint_density(0.5, 0.6, 1, 0), 0.0);
    for (double s : {0.0, 0.3, 1.7})
        for (double b : {-2.0, 0.0, 0.2})
            for (double lambda : {-1.0, 0.0, 0.7})
                EXPECT_NEAR(joint_density(s, b, 1.5, lambda), oracle_test::density(s, b, 1.5, lambda), 1e-15);
}

TEST(Density, MassIsOne)
{
    for (double t : {0.5, 1.0, 2.0})
        for (double lambda : {-1.0, 0.0, 1.0}) {
            const auto r = density_mass(t, lambda);
            EXPECT_NEAR(r.value, 1.0, 1e-6) << t << ' ' << lambda;
        }
}

TEST(Density, ReflectionOnRandomPoints)
{
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> s(0.0, 4.0), z(0.0, 4.0);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 10000; ++i) {
        const double si = s(gen);
        pts.emplace_back(si, si - z(gen));
    }
    for (double lambda : {-1.0, 0.0, 0.5, 1.0}) EXPECT_LT(density_reflection_check(1.0, lambda, pts), 1e-12);
}

TEST(Density, MaxCdfAgainstClosedForm)
{
    for (double lambda : {-1.0, 0.0, 1.0})
        for (double m : {0.1, 0.5, 1.0, 2.5})
            EXPECT_NEAR(max_cdf(1.0, lambda, m).value, oracle_test::max_cdf(m, 1.0, lambda), 1e-8);
}

TEST(Density, DriftRaisesMaximum)
{
    // P(M_t <= m) decreases in lambda
    for (double m : {0.2, 1.0})
        EXPECT_GT(max_cdf(1.0, -0.5, m).value, max_cdf(1.0, 0.5, m).value);
}

TEST(Density, PositiveDriftFavoursPositiveEndpoints)
{
    for (double lambda : {0.3, 1.0})
        for (double s = 0.0; s <= 3.0; s += 0.25)
            for (double b = 0.05; b <= s; b += 0.25)
                EXPECT_GE(joint_density(s, b, 1.0, lambda), joint_density(s, b, 1.0, -lambda));
}

TEST(BrownianValues, ZeroTimeReturnsReward)
{
    const auto f = expf(1);
    EXPECT_EQ(g_bm(0, 0.4, 1, f).value, std::exp(-0.4));
    EXPECT_EQ(dtilde_bm(0, 0.4, 1, f).value, std::exp(-0.4));
    EXPECT_EQ(drawdown_floor_bm(0, 0.4, 1, f).value, std::exp(-0.4));
    const auto k = check_bm_key_inequality(0, 0.4, 1, f);
    EXPECT_EQ(k.verdict, BmVerdict::equal);
}

TEST(BrownianValues, GMatchesClosedFormLaw)
{
    for (int sigma : {1, 2})
        for (double lambda : {-1.0, 0.0, 1.0}) {
            const double sg = sigma;
            const double ref = g_by_parts(
                1.0, lambda, [&](double m) { return std::exp(-sg * m); }, [&](double m) { return -sg * std::exp(-sg * m); });
            const auto r = g_bm(1.0, 0.0, lambda, expf(sigma));
            EXPECT_NEAR(r.value, ref, 1e-8) << sigma << ' ' << lambda;
            EXPECT_LT(r.error, 1e-8);
        }
}

TEST(BrownianValues, DriftlessDrawdownHasLawOfMaximum)
{
    const auto f = expf(1);
    for (double t : {0.5, 2.0}) EXPECT_NEAR(g_bm(t, 0, 0, f).value, d_bm(t, 0, 0, f).value, 1e-9);
}

TEST(BrownianValues, RejectsBadArguments)
{
    EXPECT_THROW(g_bm(-1, 0, 0, expf(1)), domain_error);
    EXPECT_THROW(dtilde_bm(1, -0.5, 0, expf(1)), domain_error);
}

TEST(BrownianInequalities, StrictExample)
{
    const auto f = expf(1);
    const auto k = check_bm_key_inequality(1.0, 0.5, 1.0, f);
    EXPECT_EQ(k.verdict, BmVerdict::strict);
    EXPECT_GT(k.strict_margin, k.quad_error_bound);
    EXPECT_NEAR(k.strict_margin, k.lhs.value - k.rhs.value, 1e-9);
    const auto c = check_bm_corollary(1.0, 0.0, 1.0, f);
    EXPECT_EQ(c.verdict, BmVerdict::strict);
}

TEST(BrownianInequalities, LinearDriftlessIsEqual)
{
    const auto f = RewardSpec::linear(1);
    EXPECT_EQ(check_bm_key_inequality(1.0, 0.6, 0.0, f).verdict, BmVerdict::equal);
}

TEST(BrownianInequalities, AtZeroTheKeyInequalityIsAnIdentity)
{
    const auto k = check_bm_key_inequality(1.0, 0.0, 0.5, expf(2));
    EXPECT_EQ(k.verdict, BmVerdict::equal);
    const auto j = to_json(k);
    EXPECT_EQ(j["verdict"], "equal_within_tolerance");
}

TEST(Sampler, BridgeMaximumDominatesEndpoints)
{
    for (double u : {1e-12, 0.3, 0.999999}) {
        const double m = bridge_max(0.2, -0.4, 0.01, u);
        EXPECT_GE(m, 0.2);
    }
    EXPECT_NEAR(bridge_max(0.0, 0.0, 1.0, 1.0), 0.0, 1e-15);
}

TEST(Sampler, ExactPairsHaveTheRightLaw)
{
    const auto xs = sample_max_endpoint(3, 1.0, 0.0, 100000);
    int below = 0;
    double mean_b = 0.0;
    for (const auto& [m, b] : xs) {
        ASSERT_GE(m, std::max(b, 0.0));
        below += m <= 1.0;
        mean_b += b;
    }
    const double p = below / 1e5;
    EXPECT_NEAR(p, 0.6827, 4 * std::sqrt(0.6827 * 0.3173 / 1e5));
    EXPECT_NEAR(mean_b / 1e5, 0.0, 4 / std::sqrt(1e5));
    const auto drifted = sample_max_endpoint(4, 2.0, 0.5, 50000);
    double mb = 0.0;
    for (const auto& [m, b] : drifted) mb += b;
    EXPECT_NEAR(mb / 5e4, 1.0, 4 * std::sqrt(2.0 / 5e4));
}

TEST(Sampler, Reproducible)
{
    EXPECT_EQ(sample_max_endpoint(9, 1.0, 1.0, 10), sample_max_endpoint(9, 1.0, 1.0, 10));
    EXPECT_NE(sample_max_endpoint(9, 1.0, 1.0, 10), sample_max_endpoint(10, 1.0, 1.0, 10));
}

TEST(Rules, Parsing)
{
    EXPECT_EQ(parse_bm_rule("tau0").kind, BmRuleKind::tau0);
    EXPECT_EQ(parse_bm_rule("tauT").kind, BmRuleKind::tauT);
    const auto d = parse_bm_rule("drawdown_threshold:1/2");
    EXPECT_EQ(d.kind, BmRuleKind::drawdown_threshold);
    EXPECT_EQ(d.param, 0.5);
    EXPECT_EQ(d.name(), "drawdown_threshold(0.5)");
    EXPECT_EQ(parse_bm_rule("time_threshold:0.25").param, 0.25);
    EXPECT_THROW(parse_bm_rule("drawdown_threshold:-1"), config_error);
    EXPECT_THROW(parse_bm_rule("whenever"), config_error);
}

TEST(RulesMc, ConstantRewardIsExact)
{
    BmModel m;
    m.mc.replications = 3000;
    const auto vals = mc_bm_rule_values(m, RewardSpec::linear(5, 0),
                                        {parse_bm_rule("tau0"), parse_bm_rule("tauT"), parse_bm_rule("drawdown_threshold:0"),
                                         parse_bm_rule("time_threshold:0.5")});
    for (const auto& v : vals) {
        EXPECT_EQ(v.estimate.estimate, 5.0);
        EXPECT_EQ(v.estimate.stderr_, 0.0);
    }
}

TEST(RulesMc, ExactRulesAgreeWithQuadrature)
{
    BmModel m;
    m.lambda = 0.5;
    m.mc.replications = 50000;
    m.mc.seed = 12;
    const auto f = expf(1);
    const auto vals = mc_bm_rule_values(m, f, {parse_bm_rule("tau0"), parse_bm_rule("tauT")});
    EXPECT_EQ(vals[0].steps, 0);
    EXPECT_LE(std::abs(vals[0].estimate.estimate - g_bm(1.0, 0.0, 0.5, f).value), 4 * vals[0].estimate.stderr_);
    EXPECT_LE(std::abs(vals[1].estimate.estimate - dtilde_bm(1.0, 0.0, 0.5, f).value), 4 * vals[1].estimate.stderr_);
}

TEST(RulesMc, TimeThresholdAtHorizonMatchesTauT)
{
    BmModel m;
    m.mc.replications = 20000;
    const auto f = expf(1);
    const auto v = mc_bm_rule_value(m, f, parse_bm_rule("time_threshold:1"));
    EXPECT_LE(std::abs(v.estimate - d_bm(1.0, 0.0, 0.0, f).value), 4 * v.stderr_ + 0.01);
}

TEST(RulesMc, ConfigValidation)
{
    BmModel m;
    m.T = 0;
    EXPECT_THROW(mc_bm_rule_value(m, expf(1), parse_bm_rule("tau0")), config_error);
    BmModel coarse;
    coarse.mc.steps = 100;
    EXPECT_THROW(mc_bm_rule_value(coarse, expf(1), parse_bm_rule("time_threshold:0.5")), config_error);
}
