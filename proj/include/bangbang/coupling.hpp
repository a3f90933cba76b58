#pragma once

// Walks for several p driven by one sequence of uniforms: X_k^p = +1 iff
// U_k <= p. Larger p gives pathwise larger steps and smaller drawdowns.

#include "bangbang/dpsolver.hpp"
#include "bangbang/rational.hpp"
#include "bangbang/rewards.hpp"
#include "bangbang/rng.hpp"
#include "bangbang/walkdist.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

namespace bangbang {

struct WalkPath {
    std::vector<int> S, M, Z; // indices 0..n
};

/// One replication of the coupled family.
struct CoupledPaths {
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;
    int n = 0;
    std::vector<Rational> ps;
    std::vector<WalkPath> paths; // parallel to ps
};

namespace detail {

inline void walk_from_uniforms(const std::vector<double>& u, double p, WalkPath& out)
{
    const std::size_t n = u.size();
    out.S.assign(n + 1, 0);
    out.M.assign(n + 1, 0);
    out.Z.assign(n + 1, 0);
    for (std::size_t k = 1; k <= n; ++k) {
        out.S[k] = out.S[k - 1] + (u[k - 1] <= p ? 1 : -1);
        out.M[k] = std::max(out.M[k - 1], out.S[k]);
        out.Z[k] = out.M[k] - out.S[k];
    }
}

inline std::vector<double> draw_uniforms(StreamRng& rng, int n)
{
    std::vector<double> u(static_cast<std::size_t>(n));
    for (auto& x : u) x = rng.uniform();
    return u;
}

} // namespace detail

/// Simulates `replications` coupled families and hands each to visit(const
/// CoupledPaths&), in replication order.
template <class Visitor>
void simulate(std::uint64_t seed, int n, const std::vector<Rational>& ps, std::uint64_t replications, Visitor&& visit)
{
    if (replications < 1) throw config_error("replications must be >= 1");
    if (n < 0) throw config_error("horizon must be nonnegative");
    for (const auto& p : ps)
        if (p <= 0 || p >= 1) throw config_error("every p must lie in (0, 1)");
    CoupledPaths cp;
    cp.seed = seed;
    cp.n = n;
    cp.ps = ps;
    cp.paths.resize(ps.size());
    for (std::uint64_t r = 0; r < replications; ++r) {
        StreamRng rng(seed, StreamDomain::coupling, r);
        const auto u = detail::draw_uniforms(rng, n);
        cp.replication = r;
        for (std::size_t i = 0; i < ps.size(); ++i) detail::walk_from_uniforms(u, ps[i].get_d(), cp.paths[i]);
        visit(static_cast<const CoupledPaths&>(cp));
    }
}

/// True iff p >= p' implies Z^p_k <= Z^p'_k for every k on this replication.
inline bool drawdowns_ordered(const CoupledPaths& cp)
{
    for (std::size_t a = 0; a < cp.ps.size(); ++a)
        for (std::size_t b = 0; b < cp.ps.size(); ++b) {
            if (!(cp.ps[a] >= cp.ps[b])) continue;
            for (int k = 0; k <= cp.n; ++k)
                if (cp.paths[a].Z[static_cast<std::size_t>(k)] > cp.paths[b].Z[static_cast<std::size_t>(k)]) return false;
        }
    return true;
}

struct SimulationSummary {
    std::uint64_t replications = 0;
    std::uint64_t ordering_violations = 0;
    std::vector<RunningStats> endpoint_per_step; // S_n / n per p (empty stats if n = 0)
};

inline SimulationSummary summarize_simulation(std::uint64_t seed, int n, const std::vector<Rational>& ps,
                                              std::uint64_t replications, std::ostream* csv = nullptr)
{
    SimulationSummary s;
    s.endpoint_per_step.resize(ps.size());
    if (csv) *csv << "replication,k,p,S,M,Z\n";
    simulate(seed, n, ps, replications, [&](const CoupledPaths& cp) {
        ++s.replications;
        if (!drawdowns_ordered(cp)) ++s.ordering_violations;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (n > 0) s.endpoint_per_step[i].push(static_cast<double>(cp.paths[i].S.back()) / n);
            if (csv)
                for (int k = 0; k <= n; ++k) {
                    const auto kk = static_cast<std::size_t>(k);
                    *csv << cp.replication << ',' << k << ',' << ps[i].get_str() << ',' << cp.paths[i].S[kk] << ','
                         << cp.paths[i].M[kk] << ',' << cp.paths[i].Z[kk] << '\n';
                }
        }
    });
    return s;
}

/// Monte Carlo estimate of E[f(M_N - S_tau)] for a Markov rule (TIE stops).
inline McEstimate mc_rule_value(std::uint64_t seed, const WalkParams<Rational>& w, const RewardSpec& f,
                                const PolicyTable& pol, std::uint64_t replications)
{
    if (replications < 1) throw config_error("replications must be >= 1");
    if (pol.horizon() != w.n) throw config_error("policy horizon does not match N");
    pol.validate();
    const int N = w.n;
    const auto fv = tabulate<double>(f, N);
    const double p = w.p.get_d();
    const auto chunks = map_chunks<RunningStats>(replications, [&](std::uint64_t first, std::uint64_t last) {
        RunningStats st;
        for (std::uint64_t r = first; r < last; ++r) {
            StreamRng rng(seed, StreamDomain::mc_rule, r);
            int s = 0, m = 0, stopped_at = 0;
            bool stopped = false;
            for (int k = 0; k <= N; ++k) {
                if (!stopped && pol.stops(k, m - s)) {
                    stopped = true;
                    stopped_at = s;
                }
                if (k == N) break;
                s += rng.uniform() <= p ? 1 : -1;
                m = std::max(m, s);
            }
            st.push(fv(m - stopped_at));
        }
        return st;
    });
    RunningStats total;
    for (const auto& c : chunks) total.merge(c);
    return {total.mean, total.stderr_of_mean(), total.n};
}

struct TimeReversalReport {
    int n = 0;
    std::uint64_t replications = 0;
    bool exact_identity = false;      // law(M_n | p) == law(Z_n | q), exact
    double tv_max_vs_exact = 0.0;     // empirical M_n under p vs its exact law
    double tv_drawdown_vs_exact = 0.0; // empirical Z_n under q vs its exact law
    double tv_between = 0.0;          // the two empirical laws against each other
    double tolerance = 0.0;
    bool pass = false;
};

/// Empirical check that M_n under p and Z_n under q share one law, with
/// independent streams for the two sides.
inline TimeReversalReport time_reversal_check(std::uint64_t seed, const WalkParams<Rational>& w,
                                              std::uint64_t replications, double tolerance = 0.02)
{
    if (replications < 1) throw config_error("replications must be >= 1");
    const int n = w.n;
    TimeReversalReport rep;
    rep.n = n;
    rep.replications = replications;
    rep.tolerance = tolerance;
    rep.exact_identity = time_reversal_check(w);

    const auto exact_m = joint_pmf(w).max_marginal();
    const auto exact_z = joint_pmf(w.swapped()).drawdown_marginal();
    std::vector<double> hist_m(static_cast<std::size_t>(n + 1), 0.0), hist_z(static_cast<std::size_t>(n + 1), 0.0);
    const double p = w.p.get_d();
    const double q = w.q().get_d();
    for (std::uint64_t r = 0; r < replications; ++r) {
        StreamRng a(seed, StreamDomain::time_reversal_p, r);
        StreamRng b(seed, StreamDomain::time_reversal_q, r);
        int s = 0, m = 0, s2 = 0, m2 = 0;
        for (int k = 0; k < n; ++k) {
            s += a.uniform() <= p ? 1 : -1;
            m = std::max(m, s);
            s2 += b.uniform() <= q ? 1 : -1;
            m2 = std::max(m2, s2);
        }
        hist_m[static_cast<std::size_t>(m)] += 1.0;
        hist_z[static_cast<std::size_t>(m2 - s2)] += 1.0;
    }
    for (int k = 0; k <= n; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double em = hist_m[kk] / static_cast<double>(replications);
        const double ez = hist_z[kk] / static_cast<double>(replications);
        rep.tv_max_vs_exact += std::abs(em - exact_m[kk].get_d());
        rep.tv_drawdown_vs_exact += std::abs(ez - exact_z[kk].get_d());
        rep.tv_between += std::abs(em - ez);
    }
    rep.tv_max_vs_exact /= 2;
    rep.tv_drawdown_vs_exact /= 2;
    rep.tv_between /= 2;
    rep.pass = rep.exact_identity && rep.tv_max_vs_exact < tolerance && rep.tv_drawdown_vs_exact < tolerance;
    return rep;
}

inline nlohmann::json to_json(const McEstimate& e)
{
    return {{"mode", "mc"}, {"value", e.estimate}, {"stderr", e.stderr_}, {"replications", e.replications}};
}

inline nlohmann::json to_json(const TimeReversalReport& r)
{
    return {{"n", r.n},
            {"replications", r.replications},
            {"exact_identity", r.exact_identity},
            {"tv_max_vs_exact", {{"mode", "mc"}, {"value", r.tv_max_vs_exact}}},
            {"tv_drawdown_vs_exact", {{"mode", "mc"}, {"value", r.tv_drawdown_vs_exact}}},
            {"tv_between", {{"mode", "mc"}, {"value", r.tv_between}}},
            {"tolerance", r.tolerance},
            {"pass", r.pass}};
}

} // namespace bangbang
