#pragma once

// Brownian motion with drift: B_t = W_t + lambda t, running maximum M_t and
// drawdown Z_t = M_t - B_t.
//
// Expectations are integrals against the joint density h(s, b) of (M_t, B_t),
// taken in the coordinates (s, z = s - b) on the quadrant s, z >= 0. There
// the kinks of f(x v s), f(x v z) and f(x v s - b) lie on the lines s = x,
// z = x and z = c - (x - s)^+ (c a kink of f), all of which are passed to the
// quadrature as breakpoints.

#include "bangbang/quadrature.hpp"
#include "bangbang/rational.hpp"
#include "bangbang/rewards.hpp"
#include "bangbang/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bangbang {

struct BmQuadConfig {
    double tail_sigmas = 10.0; // truncation at |lambda| t + tail_sigmas sqrt(t) in s and z
    QuadOptions outer{1e-11, 1e-10, 4000};
    QuadOptions inner{1e-13, 1e-12, 4000};
};

struct BmMcConfig {
    int steps = 1000;
    std::uint64_t replications = 100000;
    std::uint64_t seed = 0;
    double running_max_eps_factor = 0.5; // "Z = 0" realized as Z <= factor sqrt(dt)
};

struct BmModel {
    double lambda = 0.0;
    double T = 1.0;
    BmQuadConfig quad;
    BmMcConfig mc;

    void validate() const
    {
        if (!(T > 0) || !std::isfinite(T)) throw config_error("horizon T must be > 0");
        if (!std::isfinite(lambda)) throw config_error("drift must be finite");
        if (quad.tail_sigmas < 8.0) throw config_error("quadrature bounds must cover at least 8 standard deviations");
        if (mc.steps < 1) throw config_error("steps per path must be >= 1");
    }
};

/// Joint density of (M_t, B_t) at (s, b); zero off {s >= 0, b <= s}.
inline double joint_density(double s, double b, double t, double lambda)
{
    if (!(t > 0)) throw domain_error("joint_density needs t > 0");
    if (s < 0 || b > s) return 0.0;
    const double u = 2 * s - b;
    return std::sqrt(2 / std::numbers::pi) * u / (t * std::sqrt(t)) * std::exp(-u * u / (2 * t)) *
           std::exp(lambda * (b - lambda * t / 2));
}

/// max |h(s,b;l) - h(s-b,-b;-l)| / max(|h(s,b;l)|, tiny) over the points.
inline double density_reflection_check(double t, double lambda, const std::vector<std::pair<double, double>>& points)
{
    double worst = 0.0;
    for (const auto& [s, b] : points) {
        const double a = joint_density(s, b, t, lambda);
        const double r = joint_density(s - b, -b, t, -lambda);
        const double scale = std::max(std::abs(a), std::numeric_limits<double>::min());
        worst = std::max(worst, std::abs(a - r) / scale);
    }
    return worst;
}

namespace detail {

inline double truncation(double t, double lambda, const BmQuadConfig& q)
{
    return std::abs(lambda) * t + q.tail_sigmas * std::sqrt(t);
}

/// Bound on the expectation mass dropped by truncating s and z at L, times
/// sup |integrand| sampled on [0, 3L].
inline double tail_bound(double t, double lambda, const BmQuadConfig& q, const std::function<double(double)>& mag)
{
    const double L = truncation(t, lambda, q);
    const double tail = 2 * std::erfc((L - std::abs(lambda) * t) / std::sqrt(2 * t)); // P(M > L) + P(Z > L)
    double sup = 0.0;
    for (int i = 0; i <= 64; ++i) sup = std::max(sup, std::abs(mag(3 * L * i / 64.0)));
    return 2 * tail * sup;
}

/// E[g(M_t, M_t - B_t)] over the truncated quadrant.
inline QuadResult expect_sz(double t, double lambda, const BmQuadConfig& q, const std::function<double(double, double)>& g,
                            const std::vector<double>& s_breaks, const std::function<std::vector<double>(double)>& z_breaks)
{
    const double L = truncation(t, lambda, q);
    auto integrand = [&](double s, double z) { return g(s, z) * joint_density(s, s - z, t, lambda); };
    return integrate_2d(integrand, 0.0, L, 0.0, L, s_breaks, z_breaks, q.outer, q.inner);
}

inline std::vector<double> with_kinks(std::vector<double> base, const RewardSpec& f, double shift = 0.0)
{
    for (double c : f.kinks()) base.push_back(c + shift);
    return base;
}

inline void check_args(double t, double x)
{
    if (!(t >= 0)) throw domain_error("time must be >= 0");
    if (!(x >= 0)) throw domain_error("x must be >= 0");
}

} // namespace detail

/// Integral of h over the quadrant; should be 1.
inline QuadResult density_mass(double t, double lambda, const BmQuadConfig& q = {})
{
    return detail::expect_sz(t, lambda, q, [](double, double) { return 1.0; }, {}, {});
}

/// P(M_t <= m) by quadrature of h.
inline QuadResult max_cdf(double t, double lambda, double m, const BmQuadConfig& q = {})
{
    return detail::expect_sz(
        t, lambda, q, [m](double s, double) { return s <= m ? 1.0 : 0.0; }, {m}, {});
}

/// G(t, x) = E[f(x v M_t)]
inline QuadResult g_bm(double t, double x, double lambda, const RewardSpec& f, const BmQuadConfig& q = {})
{
    detail::check_args(t, x);
    if (t == 0) return {f(x), 0.0, 0};
    auto r = detail::expect_sz(
        t, lambda, q, [&](double s, double) { return f(std::max(x, s)); }, detail::with_kinks({x}, f), {});
    r.error += detail::tail_bound(t, lambda, q, [&](double u) { return f(u); });
    return r;
}

/// D-tilde(t, x) = E[f(x v M_t - B_t)] at drift lambda.
inline QuadResult dtilde_bm(double t, double x, double lambda, const RewardSpec& f, const BmQuadConfig& q = {})
{
    detail::check_args(t, x);
    if (t == 0) return {f(x), 0.0, 0};
    const auto kinks = f.kinks();
    // x v s - b = z + (x - s)^+
    std::vector<double> s_breaks{x};
    for (double c : kinks)
        if (x - c > 0) s_breaks.push_back(x - c);
    auto z_breaks = [&](double s) {
        std::vector<double> out;
        for (double c : kinks) out.push_back(c - std::max(x - s, 0.0));
        return out;
    };
    auto r = detail::expect_sz(
        t, lambda, q, [&](double s, double z) { return f(z + std::max(x - s, 0.0)); }, s_breaks, z_breaks);
    r.error += detail::tail_bound(t, lambda, q, [&](double u) { return f(u); });
    return r;
}

/// D(t, x) = E[f(x v M_t - B_t)] at drift -lambda.
inline QuadResult d_bm(double t, double x, double lambda, const RewardSpec& f, const BmQuadConfig& q = {})
{
    return dtilde_bm(t, x, -lambda, f, q);
}

/// E[f(x v (M_t - B_t))]
inline QuadResult drawdown_floor_bm(double t, double x, double lambda, const RewardSpec& f, const BmQuadConfig& q = {})
{
    detail::check_args(t, x);
    if (t == 0) return {f(x), 0.0, 0};
    const auto zb = detail::with_kinks({x}, f);
    auto r = detail::expect_sz(
        t, lambda, q, [&](double, double z) { return f(std::max(x, z)); }, {}, [&](double) { return zb; });
    r.error += detail::tail_bound(t, lambda, q, [&](double u) { return f(u); });
    return r;
}

enum class BmVerdict { strict, equal, violated };

inline const char* to_string(BmVerdict v)
{
    switch (v) {
    case BmVerdict::strict: return "strict";
    case BmVerdict::equal: return "equal_within_tolerance";
    case BmVerdict::violated: return "violated";
    }
    return "?";
}

struct BmInequalityReport {
    QuadResult lhs;
    QuadResult rhs;
    double strict_margin = 0.0;    // lhs - rhs, integrated as one difference
    double quad_error_bound = 0.0; // error of that difference integral
    BmVerdict verdict = BmVerdict::equal;
};

namespace detail {

inline BmVerdict verdict(double margin, double bound)
{
    if (margin > bound) return BmVerdict::strict;
    if (margin >= -bound) return BmVerdict::equal;
    return BmVerdict::violated;
}

template <class Rhs>
BmInequalityReport compare_with_dtilde(double t, double x, double lambda, const RewardSpec& f, const BmQuadConfig& q,
                                       const QuadResult& rhs, Rhs&& rhs_integrand, std::vector<double> s_breaks,
                                       std::vector<double> z_extra)
{
    BmInequalityReport rep;
    rep.lhs = dtilde_bm(t, x, lambda, f, q);
    rep.rhs = rhs;
    if (t == 0) {
        rep.strict_margin = rep.lhs.value - rep.rhs.value;
        rep.verdict = verdict(rep.strict_margin, 0.0);
        return rep;
    }
    const auto kinks = f.kinks();
    s_breaks.push_back(x);
    for (double c : kinks)
        if (x - c > 0) s_breaks.push_back(x - c);
    auto z_breaks = [&](double s) {
        auto out = z_extra;
        for (double c : kinks) out.push_back(c - std::max(x - s, 0.0));
        return out;
    };
    auto diff = expect_sz(
        t, lambda, q, [&](double s, double z) { return f(z + std::max(x - s, 0.0)) - rhs_integrand(s, z); }, s_breaks,
        z_breaks);
    rep.strict_margin = diff.value;
    rep.quad_error_bound = diff.error + 2 * tail_bound(t, lambda, q, [&](double u) { return f(u); });
    rep.verdict = verdict(rep.strict_margin, rep.quad_error_bound);
    return rep;
}

} // namespace detail

/// E[f(x v M_t - B_t)] against E[f(x v (M_t - B_t))].
inline BmInequalityReport check_bm_key_inequality(double t, double x, double lambda, const RewardSpec& f,
                                                  const BmQuadConfig& q = {})
{
    return detail::compare_with_dtilde(
        t, x, lambda, f, q, drawdown_floor_bm(t, x, lambda, f, q),
        [&](double, double z) { return f(std::max(x, z)); }, {}, detail::with_kinks({x}, f));
}

/// D-tilde(t, x) against G(t, x) = E[f(x v M_t)].
inline BmInequalityReport check_bm_corollary(double t, double x, double lambda, const RewardSpec& f,
                                             const BmQuadConfig& q = {})
{
    return detail::compare_with_dtilde(
        t, x, lambda, f, q, g_bm(t, x, lambda, f, q), [&](double s, double) { return f(std::max(x, s)); },
        detail::with_kinks({}, f), {});
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Maximum of a Brownian bridge over a step of length dt from a to b, given
/// a uniform u in (0, 1): P(max >= m | a, b) = exp(-2 (m - a)(m - b) / dt).
inline double bridge_max(double a, double b, double dt, double u)
{
    const double d = b - a;
    return 0.5 * (a + b + std::sqrt(d * d - 2 * dt * std::log(u)));
}

/// Exact draw of (M_t, B_t): B_t ~ N(lambda t, t), then M_t from the bridge law.
inline std::pair<double, double> draw_max_endpoint(StreamRng& rng, double t, double lambda)
{
    const double b = lambda * t + std::sqrt(t) * rng.normal();
    return {bridge_max(0.0, b, t, rng.uniform_open()), b};
}

/// `replications` exact samples of (M_t, B_t), in replication order.
inline std::vector<std::pair<double, double>> sample_max_endpoint(std::uint64_t seed, double t, double lambda,
                                                                  std::uint64_t replications)
{
    if (!(t > 0)) throw domain_error("sample_max_endpoint needs t > 0");
    std::vector<std::pair<double, double>> out;
    out.reserve(replications);
    for (std::uint64_t r = 0; r < replications; ++r) {
        StreamRng rng(seed, StreamDomain::bm_sampler, r);
        out.push_back(draw_max_endpoint(rng, t, lambda));
    }
    return out;
}

enum class BmRuleKind { tau0, tauT, drawdown_threshold, time_threshold };

/// tau0 / tauT, or the first grid time t > 0 with Z_t reaching `param`
/// (param = 0: the walk back at its running maximum, Z <= eps), or the first
/// grid time >= param.
struct BmRule {
    BmRuleKind kind = BmRuleKind::tau0;
    double param = 0.0;

    std::string name() const
    {
        auto num = [](double v) {
            std::ostringstream os;
            os << std::setprecision(17) << v;
            return os.str();
        };
        switch (kind) {
        case BmRuleKind::tau0: return "tau0";
        case BmRuleKind::tauT: return "tauT";
        case BmRuleKind::drawdown_threshold: return "drawdown_threshold(" + num(param) + ")";
        case BmRuleKind::time_threshold: return "time_threshold(" + num(param) + ")";
        }
        return "?";
    }
};

/// "tau0", "tauT", "drawdown_threshold:0.5", "time_threshold:0.25"
inline BmRule parse_bm_rule(const std::string& s)
{
    if (s == "tau0") return {BmRuleKind::tau0, 0.0};
    if (s == "tauT") return {BmRuleKind::tauT, 0.0};
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
        const auto head = s.substr(0, colon);
        const double v = parse_rational(s.substr(colon + 1)).get_d();
        if (head == "drawdown_threshold") {
            if (v < 0) throw config_error("drawdown threshold must be >= 0");
            return {BmRuleKind::drawdown_threshold, v};
        }
        if (head == "time_threshold") return {BmRuleKind::time_threshold, v};
    }
    throw config_error("unknown rule '" + s + "'");
}

struct BmRuleValue {
    BmRule rule;
    McEstimate estimate;
    int steps = 0; // 0 for the exact sampler
};

/// Monte Carlo values of several rules. tau0 and tauT use exact (M_T, B_T)
/// draws; the other rules share Euler paths whose running maximum is refined
/// by a bridge-maximum draw on every step, so M_T carries no grid bias.
inline std::vector<BmRuleValue> mc_bm_rule_values(const BmModel& model, const RewardSpec& f,
                                                  const std::vector<BmRule>& rules)
{
    model.validate();
    const auto& mc = model.mc;
    if (mc.replications < 1) throw config_error("replications must be >= 1");
    const double T = model.T, lambda = model.lambda;
    for (const auto& r : rules)
        if ((r.kind == BmRuleKind::time_threshold || r.kind == BmRuleKind::drawdown_threshold) &&
            !(r.param >= 0 && (r.kind != BmRuleKind::time_threshold || r.param <= T)))
            throw config_error("rule parameter outside [0, T]: " + r.name());

    std::vector<BmRuleValue> out(rules.size());
    std::vector<std::size_t> exact_idx, path_idx;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        out[i].rule = rules[i];
        (rules[i].kind == BmRuleKind::tau0 || rules[i].kind == BmRuleKind::tauT ? exact_idx : path_idx).push_back(i);
    }

    // Each exact rule draws from its own substream, so estimates of different
    // rules are independent and their standard errors combine in quadrature.
    for (std::size_t j = 0; j < exact_idx.size(); ++j) {
        const bool at_start = rules[exact_idx[j]].kind == BmRuleKind::tau0;
        const auto sub = static_cast<std::uint32_t>(j + 1);
        auto chunks = map_chunks<RunningStats>(mc.replications, [&](std::uint64_t a, std::uint64_t b) {
            RunningStats st;
            for (std::uint64_t r = a; r < b; ++r) {
                StreamRng rng(mc.seed, StreamDomain::bm_sampler, r, sub);
                const auto [m, e] = draw_max_endpoint(rng, T, lambda);
                st.push(f(at_start ? m : m - e));
            }
            return st;
        });
        RunningStats total;
        for (const auto& c : chunks) total.merge(c);
        out[exact_idx[j]].estimate = {total.mean, total.stderr_of_mean(), total.n};
    }

    if (!path_idx.empty()) {
        if (mc.steps < 1000) throw config_error("discretized rules need >= 1000 steps per path");
        const int n = mc.steps;
        const double dt = T / n, sdt = std::sqrt(dt);
        const double eps = mc.running_max_eps_factor * sdt;
        auto chunks = map_chunks<std::vector<RunningStats>>(mc.replications, [&](std::uint64_t a, std::uint64_t b) {
            std::vector<RunningStats> st(path_idx.size());
            std::vector<double> stopped_at(path_idx.size());
            std::vector<char> done(path_idx.size());
            for (std::uint64_t r = a; r < b; ++r) {
                StreamRng rng(mc.seed, StreamDomain::bm_paths, r);
                std::fill(done.begin(), done.end(), 0);
                double B = 0.0, M = 0.0;
                for (std::size_t j = 0; j < path_idx.size(); ++j) {
                    const auto& rule = rules[path_idx[j]];
                    if (rule.kind == BmRuleKind::time_threshold && rule.param <= 0) {
                        done[j] = 1;
                        stopped_at[j] = 0.0;
                    }
                }
                for (int k = 1; k <= n; ++k) {
                    const double next = B + lambda * dt + sdt * rng.normal();
                    M = std::max(M, bridge_max(B, next, dt, rng.uniform_open()));
                    B = next;
                    const double Z = M - B;
                    const double time = k * dt;
                    for (std::size_t j = 0; j < path_idx.size(); ++j) {
                        if (done[j]) continue;
                        const auto& rule = rules[path_idx[j]];
                        bool stop = k == n;
                        if (rule.kind == BmRuleKind::drawdown_threshold)
                            stop = stop || (rule.param > 0 ? Z >= rule.param : Z <= eps);
                        else
                            stop = stop || time >= rule.param - 1e-12 * T;
                        if (stop) {
                            done[j] = 1;
                            stopped_at[j] = B;
                        }
                    }
                }
                for (std::size_t j = 0; j < path_idx.size(); ++j) st[j].push(f(M - stopped_at[j]));
            }
            return st;
        });
        for (std::size_t j = 0; j < path_idx.size(); ++j) {
            RunningStats total;
            for (const auto& c : chunks) total.merge(c[j]);
            out[path_idx[j]].estimate = {total.mean, total.stderr_of_mean(), total.n};
            out[path_idx[j]].steps = n;
        }
    }
    return out;
}

inline McEstimate mc_bm_rule_value(const BmModel& model, const RewardSpec& f, const BmRule& rule)
{
    return mc_bm_rule_values(model, f, {rule}).front().estimate;
}

inline nlohmann::json to_json(const QuadResult& r)
{
    return {{"mode", "quadrature"}, {"value", r.value}, {"err", r.error}};
}

inline nlohmann::json to_json(const BmInequalityReport& r)
{
    return {{"lhs", to_json(r.lhs)},
            {"rhs", to_json(r.rhs)},
            {"strict_margin", {{"mode", "quadrature"}, {"value", r.strict_margin}, {"err", r.quad_error_bound}}},
            {"quad_error_bound", r.quad_error_bound},
            {"verdict", to_string(r.verdict)}};
}

inline nlohmann::json to_json(const BmRuleValue& v)
{
    return {{"rule", v.rule.name()},
            {"estimate", v.estimate.estimate},
            {"stderr", v.estimate.stderr_},
            {"mode", "mc"},
            {"replications", v.estimate.replications},
            {"steps", v.steps}};
}

} // namespace bangbang
