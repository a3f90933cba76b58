#pragma once

// Command driver behind the bangbang executable. run() takes a resolved
// RunConfig, writes one report and returns the exit status:
//   0  success, every asserted check passed
//   1  a check failed (the failing instance is in the report)
//   2  configuration error

#include "bangbang/bangbang.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#ifndef BANGBANG_VERSION
#define BANGBANG_VERSION "0.0.0"
#endif

namespace bangbang {

inline constexpr const char* kToolName = "bangbang";
inline constexpr const char* kToolVersion = BANGBANG_VERSION;
inline constexpr const char* kGridVersion = "grid-v1";
inline constexpr std::uint64_t kDefaultSeed = 20240917;
inline constexpr const char* kSeedEnv = "BANGBANG_SEED";

struct RunConfig {
    std::string command;
    std::string reward = "geometric:1/2";
    std::string p = "1/2";
    int N = 5;
    std::optional<long> i; // drawdown level; all of {0..N} when unset
    std::string mode = "exact";
    std::string policy = "tau0";
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t replications = 100000;
    std::vector<std::string> ps;
    std::vector<int> Ns;
    std::string grid;
    int oracle_max_n = kDefaultOracleMaxN;
    double lambda = 0.0;
    double T = 1.0;
    double t = 1.0;
    double x = 0.0;
    int steps = 1000;
    std::vector<std::string> rules;
    std::string check = "both";
    std::string format = "json";
    std::string output; // empty: stdout

    nlohmann::json to_json() const
    {
        nlohmann::json j = {{"command", command}, {"format", format}};
        auto put = [&](const char* k, auto v) { j[k] = v; };
        const auto& c = command;
        const bool discrete = c == "solve" || c == "evaluate" || c == "oracle";
        if (discrete || c == "sweep" || c == "bm-verify" || c == "bm-mc") put("reward", reward);
        if (discrete) {
            put("p", p);
            put("N", N);
        }
        if (c == "solve" || c == "evaluate" || c == "sweep") put("mode", mode);
        if (c == "evaluate") {
            put("policy", policy);
            put("replications", replications);
            put("seed", seed);
        }
        if (c == "oracle") put("oracle_max_n", oracle_max_n);
        if (c == "simulate") {
            put("N", N);
            put("ps", ps);
            put("replications", replications);
            put("seed", seed);
        }
        if (c == "sweep") {
            put("ps", ps);
            put("Ns", Ns);
        }
        if (c == "verify-discrete" || c == "bm-verify") put("grid", grid);
        if (c == "bm-verify" && grid.empty()) {
            put("lambda", lambda);
            put("t", t);
            put("x", x);
            put("check", check);
        }
        if (c == "bm-mc") {
            put("lambda", lambda);
            put("T", T);
            put("steps", steps);
            put("rules", rules);
            put("replications", replications);
            put("seed", seed);
        }
        if (i) put("i", *i);
        return j;
    }
};

/// Seed from BANGBANG_SEED when set, else the built-in default.
inline std::uint64_t default_seed()
{
    if (const char* env = std::getenv(kSeedEnv); env && *env) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw config_error(std::string(kSeedEnv) + " must be an unsigned integer");
    }
    return kDefaultSeed;
}

/// Probabilities are exact "a/b" (or integer) strings; decimals only in float mode.
inline Rational parse_probability(const std::string& s, bool exact_mode = true)
{
    Rational p;
    try {
        p = parse_rational(s, !exact_mode);
    } catch (const config_error& e) {
        throw config_error("p = '" + s + "': " + e.what() + (exact_mode ? " (exact mode takes a/b)" : ""));
    }
    if (p <= 0 || p >= 1) throw config_error("p must lie strictly between 0 and 1");
    return p;
}

/// Strict/equal pattern the key inequality must show at one grid point.
/// `strict` and `equal` are never both set; neither means only >= is asserted.
struct Prediction {
    bool strict = false;
    bool equal = false;
};

inline Prediction predict_key(const Rational& p, int n, long i, const RewardFlags& fl)
{
    Prediction pr;
    if (n == 0 || i == 0) {
        pr.equal = true;
    } else if ((p > Rational(1, 2) && fl.strictly_decreasing) || (p >= Rational(1, 2) && fl.strictly_convex)) {
        pr.strict = true;
    }
    return pr;
}

/// At p = 1/2 the corollary is the key inequality (both sides reflect onto
/// each other), so its pattern is inherited there.
inline Prediction predict_corollary(const Rational& p, int n, long i, const RewardFlags& fl)
{
    Prediction pr;
    if (n == 0) {
        pr.equal = true;
    } else if (p == Rational(1, 2)) {
        pr = predict_key(p, n, i, fl);
    } else if (p > Rational(1, 2) && fl.strictly_decreasing) {
        pr.strict = true;
    }
    return pr;
}

inline bool matches(const Prediction& pr, Relation r)
{
    if (r == Relation::less) return false;
    if (pr.strict) return r == Relation::greater;
    if (pr.equal) return r == Relation::equal;
    return true;
}

namespace detail {

/// Runs fn(i) for i in [0, n) on a small pool; results are written by index.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(std::max(1U, std::thread::hardware_concurrency()), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned id = 0; id < workers; ++id)
        pool.emplace_back([&, id] {
            for (std::size_t i = id; i < n; i += workers) fn(i);
        });
}

/// Tally of one family of checks, keeping the first failing instance.
struct CheckFamily {
    std::string name;
    std::uint64_t instances = 0;
    std::uint64_t failures = 0;
    nlohmann::json first_failure;

    void record(bool ok, const std::function<nlohmann::json()>& describe)
    {
        ++instances;
        if (ok) return;
        if (failures++ == 0) first_failure = describe();
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j = {{"check", name}, {"instances", instances}, {"failures", failures}};
        if (failures) j["first_failure"] = first_failure;
        return j;
    }
};

struct NamedReward {
    std::string name;
    DiscreteReward<Rational> values;
};

/// Hand-built convex tables on {0..L}: a flat-tailed one and 1/(k+1).
inline RewardSpec flat_tail_table(long L)
{
    std::vector<Rational> v{10, 6, 3, 1};
    while (static_cast<long>(v.size()) <= L) v.push_back(0);
    return RewardSpec::table(std::move(v));
}

inline RewardSpec harmonic_table(long L)
{
    std::vector<Rational> v;
    for (long k = 0; k <= L; ++k) v.push_back(canonical(Rational(1, k + 1)));
    return RewardSpec::table(std::move(v));
}

struct DiscreteGrid {
    std::vector<Rational> ps;
    int optimal_max_n = 0;
    int inequality_max_n = 0;
    long inequality_max_i = 0;
    int identity_max_n = 0;
    std::vector<std::pair<std::string, RewardSpec>> rewards;
    long table_length = 0;
};

inline DiscreteGrid discrete_grid(const std::string& name)
{
    DiscreteGrid g;
    if (name == "default") {
        for (int k = 1; k <= 9; ++k) g.ps.push_back(canonical(Rational(k, 10)));
        g.optimal_max_n = 15;
        g.inequality_max_n = 10;
        g.inequality_max_i = 10;
        g.identity_max_n = 12;
    } else if (name == "quick") {
        g.ps = {Rational(1, 4), Rational(1, 2), Rational(3, 4)};
        g.optimal_max_n = 6;
        g.inequality_max_n = 5;
        g.inequality_max_i = 5;
        g.identity_max_n = 6;
    } else {
        throw config_error("unknown grid '" + name + "' (expected default or quick)");
    }
    g.table_length = std::max<long>(g.optimal_max_n, g.inequality_max_n + g.inequality_max_i);
    g.rewards = {{"indicator_top", RewardSpec::indicator_top()},
                 {"geometric:1/4", RewardSpec::geometric(Rational(1, 4))},
                 {"geometric:1/2", RewardSpec::geometric(Rational(1, 2))},
                 {"geometric:3/4", RewardSpec::geometric(Rational(3, 4))},
                 {"exp_decay:1/2", RewardSpec::exp_decay(Rational(1, 2))},
                 {"exp_decay:1", RewardSpec::exp_decay(Rational(1))},
                 {"table:10,6,3,1,0,...", flat_tail_table(g.table_length)},
                 {"table:1/(k+1)", harmonic_table(g.table_length)},
                 {"linear:" + std::to_string(g.table_length), RewardSpec::linear(Rational(g.table_length))}};
    return g;
}

inline nlohmann::json verify_discrete(const std::string& grid_name, bool& all_ok)
{
    const auto grid = discrete_grid(grid_name);
    std::vector<NamedReward> rewards;
    for (const auto& [name, spec] : grid.rewards) rewards.push_back({name, tabulate<Rational>(spec, grid.table_length)});

    CheckFamily counter, thm1, key, cor, refl, trev;
    counter.name = "counterexample";
    thm1.name = "bang_bang_optimality";
    key.name = "key_inequality";
    cor.name = "corollary_inequality";
    refl.name = "reflection";
    trev.name = "time_reversal";

    // Non-convex example: tau = 1 wins surely, neither bang-bang rule does.
    const auto ex = tabulate<Rational>(RewardSpec::table({1, 1, 0}), 2);
    for (const auto& p : grid.ps) {
        const WalkParams<Rational> w{p, 2};
        const auto r = solve(w, ex);
        const Rational q = 1 - p;
        const bool ok = r.optimal_value == 1 && evaluate_policy(w, ex, PolicyTable::tau0(2)) == 1 - p * p &&
                        evaluate_policy(w, ex, PolicyTable::tauN(2)) == 1 - q * q;
        counter.record(ok, [&] { return nlohmann::json{{"p", p.get_str()}, {"report", to_json(r)}}; });
    }

    for (const auto& fr : rewards) {
        const auto fl = classify_values(fr.values.values());
        if (!(fl.nonincreasing && fl.convex)) continue;
        for (const auto& p : grid.ps) {
            for (int N = 1; N <= grid.optimal_max_n; ++N) {
                const WalkParams<Rational> w{p, N};
                const auto r = solve(w, fr.values);
                bool ok = true;
                if (p <= Rational(1, 2)) ok = ok && r.optimal_value == r.value_tau0;
                if (p >= Rational(1, 2)) ok = ok && r.optimal_value == r.value_tauN;
                if (p == Rational(1, 2)) ok = ok && evaluate_policy(w, fr.values, PolicyTable::stop_at_max(N)) == r.optimal_value;
                thm1.record(ok, [&] {
                    return nlohmann::json{{"reward", fr.name}, {"p", p.get_str()}, {"N", N}, {"report", to_json(r)}};
                });
            }
            if (p < Rational(1, 2)) continue;
            for (int n = 0; n <= grid.inequality_max_n; ++n) {
                const WalkParams<Rational> w{p, n};
                for (long i = 0; i <= grid.inequality_max_i; ++i) {
                    const auto a = check_key_inequality(w, fr.values, i);
                    const auto pa = predict_key(p, n, i, fl);
                    key.record(matches(pa, a.relation), [&] {
                        return nlohmann::json{{"reward", fr.name}, {"p", p.get_str()}, {"n", n}, {"i", i},
                                              {"lhs", tagged(a.lhs)}, {"rhs", tagged(a.rhs)},
                                              {"relation", to_string(a.relation)}, {"predicted_strict", pa.strict}};
                    });
                    const auto b = check_corollary(w, fr.values, i);
                    const auto pb = predict_corollary(p, n, i, fl);
                    cor.record(matches(pb, b.relation), [&] {
                        return nlohmann::json{{"reward", fr.name}, {"p", p.get_str()}, {"n", n}, {"i", i},
                                              {"lhs", tagged(b.lhs)}, {"rhs", tagged(b.rhs)},
                                              {"relation", to_string(b.relation)}, {"predicted_strict", pb.strict}};
                    });
                }
            }
        }
    }

    for (const auto& p : grid.ps)
        for (int n = 0; n <= grid.identity_max_n; ++n) {
            const WalkParams<Rational> w{p, n};
            refl.record(reflection_check(w), [&] { return nlohmann::json{{"p", p.get_str()}, {"n", n}}; });
            trev.record(time_reversal_check(w), [&] { return nlohmann::json{{"p", p.get_str()}, {"n", n}}; });
        }

    nlohmann::json table = nlohmann::json::array();
    all_ok = true;
    for (const auto* c : {&counter, &thm1, &key, &cor, &refl, &trev}) {
        table.push_back(c->to_json());
        all_ok = all_ok && c->failures == 0;
    }
    return {{"grid", grid_name}, {"grid_version", kGridVersion}, {"checks", table}};
}

inline std::vector<Rational> parse_ps(const std::vector<std::string>& ps, bool exact_mode = true)
{
    std::vector<Rational> out;
    for (const auto& s : ps) out.push_back(parse_probability(s, exact_mode));
    return out;
}

inline PolicyTable resolve_policy(const std::string& spec, int N)
{
    if (spec == "tau0") return PolicyTable::tau0(N);
    if (spec == "tauN") return PolicyTable::tauN(N);
    if (spec == "stop_at_max") return PolicyTable::stop_at_max(N);
    std::ifstream in(spec);
    if (!in) throw config_error("policy '" + spec + "' is neither tau0, tauN, stop_at_max nor a readable CSV file");
    auto pol = read_policy_csv(in);
    if (pol.horizon() != N) throw config_error("policy file horizon does not match N");
    return pol;
}

inline void require_continuous(const RewardSpec& f)
{
    if (f.domain() != DomainKind::continuous)
        throw config_error(std::string("reward kind '") + to_string(f.kind()) +
                           "' is discrete; Brownian commands need exp_decay, linear, power_penalty_negated or "
                           "custom_table");
}

/// Probe grid for grid-certified flags: the nodes plus a uniform mesh past them.
inline std::vector<double> default_probe(const RewardSpec& f)
{
    double hi = 4.0;
    for (double k : f.kinks()) hi = std::max(hi, 2 * k);
    std::vector<double> probe;
    for (int i = 0; i <= 400; ++i) probe.push_back(hi * i / 400.0);
    for (double k : f.kinks()) probe.push_back(k);
    std::sort(probe.begin(), probe.end());
    probe.erase(std::unique(probe.begin(), probe.end()), probe.end());
    return probe;
}

struct BmPoint {
    std::string reward;
    double t, x, lambda;
};

inline std::vector<BmPoint> bm_grid(const std::string& name)
{
    std::vector<std::string> rewards{"exp_decay:1", "exp_decay:2", "custom_table:0,1;2,0"};
    std::vector<double> ts{0.5, 1.0, 2.0}, xs{0.0, 0.25, 0.6, 1.5}, lambdas{0.0, 0.5, 1.0};
    if (name == "quick") {
        ts = {1.0};
        xs = {0.0, 0.6};
        lambdas = {0.0, 1.0};
    } else if (name != "default") {
        throw config_error("unknown grid '" + name + "' (expected default or quick)");
    }
    std::vector<BmPoint> out;
    for (const auto& r : rewards)
        for (double t : ts)
            for (double x : xs)
                for (double l : lambdas) out.push_back({r, t, x, l});
    out.push_back({"linear:1", 1.0, 0.6, 0.0});
    return out;
}

/// Verdict the key inequality or its corollary must produce for f at (t, x, lambda >= 0).
inline std::string bm_expected(bool corollary, const RewardFlags& fl, double t, double x, double lambda)
{
    if (t == 0) return "equal";
    if (lambda > 0 && !fl.constant && (corollary || x > 0)) return "strict";
    if (lambda == 0 && !fl.linear && x > 0) return "strict";
    if (x == 0 && !corollary) return "equal";
    if (lambda == 0 && x == 0) return "equal"; // both sides are E f(M_t) by reflection
    if (lambda == 0 && fl.linear) return "equal";
    return "geq";
}

inline bool bm_matches(const std::string& expected, BmVerdict v)
{
    if (v == BmVerdict::violated) return false;
    if (expected == "strict") return v == BmVerdict::strict;
    if (expected == "equal") return v == BmVerdict::equal;
    return true;
}

inline nlohmann::json bm_point_report(const BmPoint& pt, const std::string& check, bool& ok)
{
    const auto f = parse_reward(pt.reward);
    require_continuous(f);
    const auto fl = classify_continuous(f, default_probe(f));
    nlohmann::json j = {{"reward", pt.reward}, {"t", pt.t}, {"x", pt.x}, {"lambda", pt.lambda},
                        {"flags", to_json(fl)}};
    ok = true;
    auto one = [&](bool corollary) {
        const auto rep = corollary ? check_bm_corollary(pt.t, pt.x, pt.lambda, f) : check_bm_key_inequality(pt.t, pt.x, pt.lambda, f);
        auto r = to_json(rep);
        if (pt.lambda >= 0 && fl.nonincreasing && fl.convex) {
            const auto expected = bm_expected(corollary, fl, pt.t, pt.x, pt.lambda);
            r["expected"] = expected;
            r["ok"] = bm_matches(expected, rep.verdict);
            ok = ok && r["ok"].get<bool>();
        }
        return r;
    };
    if (check == "key" || check == "both") j["key_inequality"] = one(false);
    if (check == "corollary" || check == "both") j["corollary"] = one(true);
    return j;
}

inline nlohmann::json bm_density_checks(bool& ok)
{
    nlohmann::json out = nlohmann::json::array();
    for (double t : {1.0, 2.0})
        for (double l : {-1.0, 0.0, 1.0}) {
            const auto m = density_mass(t, l);
            const bool good = std::abs(m.value - 1.0) <= 1e-6;
            ok = ok && good;
            out.push_back({{"t", t}, {"lambda", l}, {"mass", to_json(m)}, {"ok", good}});
        }
    return out;
}

/// Dominance on Monte Carlo values: the predicted rule is not beaten
/// by more than 4 combined standard errors, and at zero drift the members of
/// the indifference class agree within that band.
inline nlohmann::json bm_dominance(double lambda, const std::vector<BmRuleValue>& vals, bool& ok)
{
    auto find = [&](BmRuleKind k, double param) -> const BmRuleValue* {
        for (const auto& v : vals)
            if (v.rule.kind == k && (k == BmRuleKind::tau0 || k == BmRuleKind::tauT || v.rule.param == param)) return &v;
        return nullptr;
    };
    auto band = [](const McEstimate& a, const McEstimate& b) {
        return 4 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
    };
    nlohmann::json checks = nlohmann::json::array();
    ok = true;
    if (lambda != 0) {
        const auto* best = find(lambda < 0 ? BmRuleKind::tau0 : BmRuleKind::tauT, 0);
        if (!best) return checks;
        for (const auto& v : vals) {
            if (&v == best) continue;
            const double gap = best->estimate.estimate - v.estimate.estimate;
            const double tol = band(best->estimate, v.estimate);
            const bool good = gap >= -tol;
            ok = ok && good;
            checks.push_back({{"claim", best->rule.name() + " >= " + v.rule.name()},
                              {"gap", gap},
                              {"tolerance", tol},
                              {"ok", good}});
        }
    } else {
        std::vector<const BmRuleValue*> cls;
        for (const auto* v : {find(BmRuleKind::tau0, 0), find(BmRuleKind::tauT, 0), find(BmRuleKind::drawdown_threshold, 0)})
            if (v) cls.push_back(v);
        for (std::size_t a = 0; a < cls.size(); ++a)
            for (std::size_t b = a + 1; b < cls.size(); ++b) {
                const double gap = cls[a]->estimate.estimate - cls[b]->estimate.estimate;
                const double tol = band(cls[a]->estimate, cls[b]->estimate);
                const bool good = std::abs(gap) <= tol;
                ok = ok && good;
                checks.push_back({{"claim", cls[a]->rule.name() + " == " + cls[b]->rule.name()},
                                  {"gap", gap},
                                  {"tolerance", tol},
                                  {"ok", good}});
            }
    }
    return checks;
}

struct Outcome {
    nlohmann::json result;
    bool ok = true;
    std::string csv; // set when the command produced a CSV artifact
};

template <class Scalar>
Outcome run_solve(const RunConfig& c)
{
    const bool exact = scalar_traits<Scalar>::exact;
    const WalkParams<Scalar> w{scalar_traits<Scalar>::from(parse_probability(c.p, exact)), c.N};
    const auto f = parse_reward(c.reward);
    const auto r = solve(w, f);
    const auto fl = classify(f, c.N);
    Outcome o;
    o.result = to_json(r);
    o.result["flags"] = to_json(fl);
    nlohmann::json checks = nlohmann::json::array();
    auto add = [&](const std::string& name, bool good) {
        checks.push_back({{"check", name}, {"ok", good}});
        o.ok = o.ok && good;
    };
    add("optimal >= max(tau0, tauN)", !(r.optimal_value < r.value_tau0) && !(r.optimal_value < r.value_tauN));
    if (exact && fl.nonincreasing && fl.convex) {
        const auto p = parse_probability(c.p);
        if (p <= Rational(1, 2)) add("optimal == value_tau0", r.optimal_value == r.value_tau0);
        if (p >= Rational(1, 2)) add("optimal == value_tauN", r.optimal_value == r.value_tauN);
    }
    o.result["checks"] = checks;
    if (c.format == "csv") {
        std::ostringstream os;
        write_csv(os, r.policy);
        o.csv = os.str();
    }
    return o;
}

template <class Scalar>
Outcome run_evaluate(const RunConfig& c)
{
    const bool exact = scalar_traits<Scalar>::exact;
    const auto p = parse_probability(c.p, exact);
    const WalkParams<Scalar> w{scalar_traits<Scalar>::from(p), c.N};
    const auto f = parse_reward(c.reward);
    if (auto m = f.max_argument(); m && *m < c.N) throw config_error("reward table shorter than N + 1");
    const auto pol = resolve_policy(c.policy, c.N);
    Outcome o;
    o.result = {{"policy", to_json(pol)}, {"value", tagged(evaluate_policy(w, tabulate<Scalar>(f, c.N), pol))}};
    if (c.replications > 0)
        o.result["mc"] = to_json(mc_rule_value(c.seed, WalkParams<Rational>{p, c.N}, f, pol, c.replications));
    return o;
}

inline Outcome run_oracle(const RunConfig& c)
{
    const WalkParams<Rational> w{parse_probability(c.p), c.N};
    const auto f = parse_reward(c.reward);
    if (auto m = f.max_argument(); m && *m < c.N) throw config_error("reward table shorter than N + 1");
    const auto cv = cross_validate_report(w, tabulate<Rational>(f, c.N), c.oracle_max_n);
    return {to_json(cv), cv.ok(), {}};
}

inline Outcome run_simulate(const RunConfig& c)
{
    if (c.ps.empty()) throw config_error("simulate needs at least one --ps value");
    const auto ps = parse_ps(c.ps);
    std::ostringstream csv;
    const auto s = summarize_simulation(c.seed, c.N, ps, c.replications, c.format == "csv" ? &csv : nullptr);
    Outcome o;
    nlohmann::json per_p = nlohmann::json::array();
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const auto& st = s.endpoint_per_step[k];
        nlohmann::json e = {{"p", ps[k].get_str()}};
        if (c.N > 0)
            e["mean_S_over_n"] = {{"mode", "mc"}, {"value", st.mean}, {"stderr", st.stderr_of_mean()},
                                  {"expected", 2 * ps[k].get_d() - 1}};
        per_p.push_back(e);
    }
    o.ok = s.ordering_violations == 0;
    o.result = {{"replications", s.replications}, {"ordering_violations", s.ordering_violations}, {"per_p", per_p}};
    const auto tr = time_reversal_check(c.seed, WalkParams<Rational>{ps.front(), c.N}, c.replications);
    o.result["time_reversal"] = to_json(tr);
    o.ok = o.ok && tr.exact_identity;
    if (c.format == "csv") o.csv = csv.str();
    return o;
}

inline Outcome run_bm_verify(const RunConfig& c)
{
    Outcome o;
    if (!c.grid.empty()) {
        nlohmann::json points = nlohmann::json::array();
        for (const auto& pt : bm_grid(c.grid)) {
            bool ok = true;
            points.push_back(bm_point_report(pt, "both", ok));
            o.ok = o.ok && ok;
        }
        bool dens_ok = true;
        o.result = {{"grid", c.grid}, {"grid_version", kGridVersion}, {"density", bm_density_checks(dens_ok)},
                    {"points", points}};
        o.ok = o.ok && dens_ok;
        return o;
    }
    if (c.check != "key" && c.check != "corollary" && c.check != "both")
        throw config_error("--check must be key, corollary or both");
    bool ok = true;
    o.result = bm_point_report({c.reward, c.t, c.x, c.lambda}, c.check, ok);
    o.ok = ok;
    return o;
}

inline Outcome run_bm_mc(const RunConfig& c)
{
    BmModel m;
    m.lambda = c.lambda;
    m.T = c.T;
    m.mc.steps = c.steps;
    m.mc.replications = c.replications;
    m.mc.seed = c.seed;
    const auto f = parse_reward(c.reward);
    require_continuous(f);
    std::vector<BmRule> rules;
    for (const auto& r : c.rules) rules.push_back(parse_bm_rule(r));
    if (rules.empty()) throw config_error("bm-mc needs at least one --rule");
    const auto vals = mc_bm_rule_values(m, f, rules);
    Outcome o;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : vals) arr.push_back(to_json(v));
    o.result = {{"values", arr}};
    const auto fl = classify_continuous(f, default_probe(f));
    if (fl.nonincreasing && fl.convex && !fl.constant) {
        bool ok = true;
        o.result["dominance"] = bm_dominance(c.lambda, vals, ok);
        o.ok = ok;
    }
    return o;
}

inline Outcome run_sweep(const RunConfig& c)
{
    if (c.ps.empty() || c.Ns.empty()) throw config_error("sweep needs --ps and --Ns");
    const bool exact = c.mode == "exact";
    std::vector<std::pair<std::string, int>> points;
    for (const auto& s : c.ps)
        for (int N : c.Ns) points.emplace_back(s, N);
    // Sorted key: p as a rational, then N.
    std::sort(points.begin(), points.end(), [&](const auto& a, const auto& b) {
        const auto pa = parse_probability(a.first, exact), pb = parse_probability(b.first, exact);
        if (pa != pb) return pa < pb;
        return a.second < b.second;
    });
    const auto f = parse_reward(c.reward);
    std::vector<nlohmann::json> rows(points.size());
    std::vector<std::string> errors(points.size());
    parallel_for(points.size(), [&](std::size_t k) {
        try {
            RunConfig one = c;
            one.p = points[k].first;
            one.N = points[k].second;
            one.format = "json";
            auto o = exact ? run_solve<Rational>(one) : run_solve<double>(one);
            rows[k] = {{"p", one.p}, {"N", one.N}, {"optimal_value", o.result["optimal_value"]},
                       {"value_tau0", o.result["value_tau0"]}, {"value_tauN", o.result["value_tauN"]},
                       {"uniqueness", o.result["uniqueness"]}, {"ok", o.ok}};
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw config_error(e);
    Outcome o;
    o.result = {{"rows", rows}};
    for (const auto& r : rows) o.ok = o.ok && r["ok"].get<bool>();
    if (c.format == "csv") {
        std::ostringstream os;
        os << "p,N,optimal_value,value_tau0,value_tauN,uniqueness\n";
        auto cell = [](const nlohmann::json& v) {
            return v["value"].is_string() ? v["value"].get<std::string>() : v["value"].dump();
        };
        for (const auto& r : rows)
            os << r["p"].get<std::string>() << ',' << r["N"].get<int>() << ',' << cell(r["optimal_value"]) << ','
               << cell(r["value_tau0"]) << ',' << cell(r["value_tauN"]) << ',' << r["uniqueness"].get<std::string>()
               << '\n';
        o.csv = os.str();
    }
    return o;
}

inline Outcome dispatch(const RunConfig& c)
{
    if (c.mode != "exact" && c.mode != "float") throw config_error("--mode must be exact or float");
    if (c.format != "json" && c.format != "csv") throw config_error("--format must be json or csv");
    const bool csv_ok = c.command == "solve" || c.command == "simulate" || c.command == "sweep";
    if (c.format == "csv" && !csv_ok) throw config_error("--format csv is available for solve, simulate and sweep");
    if (c.N < 0) throw config_error("N must be nonnegative");
    const bool exact = c.mode == "exact";
    if (c.command == "solve") return exact ? run_solve<Rational>(c) : run_solve<double>(c);
    if (c.command == "evaluate") return exact ? run_evaluate<Rational>(c) : run_evaluate<double>(c);
    if (c.command == "verify-discrete") {
        bool ok = true;
        auto j = verify_discrete(c.grid.empty() ? "default" : c.grid, ok);
        return {j, ok, {}};
    }
    if (c.command == "oracle") return run_oracle(c);
    if (c.command == "simulate") return run_simulate(c);
    if (c.command == "bm-verify") return run_bm_verify(c);
    if (c.command == "bm-mc") return run_bm_mc(c);
    if (c.command == "sweep") return run_sweep(c);
    throw config_error("unknown command '" + c.command + "'");
}

} // namespace detail

inline nlohmann::json report_header(const RunConfig& c)
{
    return {{"tool", {{"name", kToolName}, {"version", kToolVersion}, {"rng", kRngName}}}, {"config", c.to_json()}};
}

/// Writes the report to `out` and returns the exit status. Errors go to `err`.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    detail::Outcome o;
    try {
        o = detail::dispatch(c);
    } catch (const config_error& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const quadrature_error& e) {
        err << "numerical error: " << e.what() << '\n';
        return 1;
    } catch (const domain_error& e) {
        err << "domain error: " << e.what() << '\n';
        return 2;
    }
    auto header = report_header(c);
    header["status"] = o.ok ? "pass" : "fail";
    if (c.format == "csv") {
        out << "# " << header.dump() << '\n' << o.csv;
    } else {
        header["result"] = o.result;
        out << header.dump(2) << '\n';
    }
    if (!o.ok) err << c.command << ": check failed; see report\n";
    return o.ok ? 0 : 1;
}

/// run() with the report sent to c.output (stdout when empty).
inline int run(const RunConfig& c)
{
    if (c.output.empty()) return run(c, std::cout, std::cerr);
    std::ostringstream buf;
    const int status = run(c, buf, std::cerr);
    if (status == 2) return status;
    std::ofstream file(c.output, std::ios::binary);
    if (!file) {
        std::cerr << "configuration error: cannot write " << c.output << '\n';
        return 2;
    }
    file << buf.str();
    return status;
}

} // namespace bangbang
