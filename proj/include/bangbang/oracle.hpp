#pragma once

// Exhaustive ground truth for small horizons: every history-dependent
// stopping rule against every one of the 2^N step sequences.
//
// A rule assigns STOP/CONTINUE to each node of the depth-N binary tree of
// histories (2^N - 1 internal nodes). Rules that stop at the same index on
// every path are the same stopping time and are counted once.

#include "bangbang/dpsolver.hpp"
#include "bangbang/rational.hpp"
#include "bangbang/rewards.hpp"
#include "bangbang/walkdist.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace bangbang {

inline constexpr int kDefaultOracleMaxN = 4;

/// Path bit j set means step j + 1 is up.
using PathBits = std::uint32_t;
/// Stopping index per path.
using StopMap = std::vector<std::uint8_t>;

struct HistoryRule {
    int N = 0;
    std::uint64_t stop_bits = 0; // bit of node (k, prefix) = (1 << k) - 1 + prefix

    static std::size_t node(int k, PathBits prefix) { return (std::size_t{1} << k) - 1 + prefix; }

    bool stops_at(int k, PathBits prefix) const { return (stop_bits >> node(k, prefix)) & 1U; }

    /// First k < N whose length-k prefix is marked STOP, else N.
    int stopping_index(PathBits path) const
    {
        for (int k = 0; k < N; ++k)
            if (stops_at(k, path & ((PathBits{1} << k) - 1))) return k;
        return N;
    }

    StopMap stop_map() const
    {
        StopMap m(std::size_t{1} << N);
        for (PathBits path = 0; path < (PathBits{1} << N); ++path) m[path] = static_cast<std::uint8_t>(stopping_index(path));
        return m;
    }
};

struct OracleResult {
    Rational optimum;
    std::uint64_t n_rules_total = 0;
    std::size_t n_classes = 0;
    std::size_t n_optimal_classes = 0;
    std::vector<StopMap> classes;          // one stop map per equivalence class
    std::vector<Rational> class_values;
    std::vector<std::uint64_t> representatives; // stop_bits of the first rule seen per class
    std::vector<std::size_t> optimal;      // indices into classes
};

namespace detail {

struct PathTable {
    int N;
    std::vector<Rational> prob;
    std::vector<std::vector<int>> partial_sum; // S_0..S_N
    std::vector<int> final_max;

    PathTable(const Rational& p, int n) : N(n)
    {
        const Rational q = 1 - p;
        const PathBits count = PathBits{1} << n;
        prob.resize(count);
        partial_sum.resize(count);
        final_max.resize(count);
        for (PathBits path = 0; path < count; ++path) {
            Rational pr = 1;
            int s = 0, m = 0;
            partial_sum[path].push_back(0);
            for (int j = 0; j < n; ++j) {
                const bool up = (path >> j) & 1U;
                pr *= up ? p : q;
                s += up ? 1 : -1;
                m = std::max(m, s);
                partial_sum[path].push_back(s);
            }
            prob[path] = pr;
            final_max[path] = m;
        }
    }

    int drawdown(PathBits path, int k) const
    {
        int m = 0;
        for (int j = 0; j <= k; ++j) m = std::max(m, partial_sum[path][static_cast<std::size_t>(j)]);
        return m - partial_sum[path][static_cast<std::size_t>(k)];
    }
};

inline std::string key_of(const StopMap& m) { return std::string(m.begin(), m.end()); }

} // namespace detail

/// Exact maximum of E[f(M_N - S_tau)] over all adapted rules, N = w.n.
/// Refuses N > max_n; pass a larger max_n explicitly to override (N = 5
/// means 2^31 rules).
inline OracleResult enumerate_optimum(const WalkParams<Rational>& w, const DiscreteReward<Rational>& f,
                                      int max_n = kDefaultOracleMaxN)
{
    const int N = w.n;
    if (N > max_n)
        throw config_error("oracle enumeration refused: N = " + std::to_string(N) + " exceeds bound " +
                           std::to_string(max_n) + " (2^(2^N - 1) rules)");
    if (N > 5) throw config_error("oracle enumeration cannot represent N > 5");
    if (f.max_argument() < N) throw config_error("reward must be tabulated on {0..N}");

    const detail::PathTable paths(w.p, N);
    const PathBits n_paths = PathBits{1} << N;
    // reward[path][k] = P(path) f(M_N - S_k)
    std::vector<std::vector<Rational>> reward(n_paths);
    for (PathBits path = 0; path < n_paths; ++path)
        for (int k = 0; k <= N; ++k)
            reward[path].push_back(paths.prob[path] *
                                   f(paths.final_max[path] - paths.partial_sum[path][static_cast<std::size_t>(k)]));

    OracleResult out;
    const int n_nodes = (1 << N) - 1;
    out.n_rules_total = std::uint64_t{1} << n_nodes;
    std::unordered_map<std::string, std::size_t> index;
    for (std::uint64_t bits = 0; bits < out.n_rules_total; ++bits) {
        const HistoryRule rule{N, bits};
        StopMap m = rule.stop_map();
        auto key = detail::key_of(m);
        if (index.try_emplace(std::move(key), out.classes.size()).second) {
            out.classes.push_back(std::move(m));
            out.representatives.push_back(bits);
        }
    }
    out.n_classes = out.classes.size();

    for (const auto& m : out.classes) {
        Rational v = 0;
        for (PathBits path = 0; path < n_paths; ++path) v += reward[path][m[path]];
        out.class_values.push_back(v);
    }
    out.optimum = *std::max_element(out.class_values.begin(), out.class_values.end());
    for (std::size_t c = 0; c < out.n_classes; ++c)
        if (out.class_values[c] == out.optimum) out.optimal.push_back(c);
    out.n_optimal_classes = out.optimal.size();
    return out;
}

struct CrossValidation {
    bool value_match = false;     // oracle optimum == DP optimal value
    bool argmax_match = false;    // optimal classes == classes consistent with the DP argmax
    bool uniqueness_match = false; // DP uniqueness class agrees with the optimal set
    Uniqueness unique = Uniqueness::unknown;
    OracleResult oracle;
    Rational dp_value;

    bool ok() const { return value_match && argmax_match && uniqueness_match; }
};

inline CrossValidation cross_validate_report(const WalkParams<Rational>& w, const DiscreteReward<Rational>& f,
                                             int max_n = kDefaultOracleMaxN)
{
    CrossValidation cv;
    cv.oracle = enumerate_optimum(w, f, max_n);
    const auto dp = solve(w, f);
    cv.dp_value = dp.optimal_value;
    cv.unique = dp.unique;
    cv.value_match = cv.oracle.optimum == dp.optimal_value;

    const int N = w.n;
    const detail::PathTable paths(w.p, N);
    const PathBits n_paths = PathBits{1} << N;

    auto argmax_consistent = [&](const StopMap& m) {
        for (PathBits path = 0; path < n_paths; ++path) {
            const int tau = m[path];
            for (int k = 0; k <= tau && k < N; ++k) {
                const Decision d = dp.policy(k, paths.drawdown(path, k));
                if (k < tau && d == Decision::stop) return false;
                if (k == tau && d == Decision::cont) return false;
            }
        }
        return true;
    };
    auto stops_only_at_max = [&](const StopMap& m) {
        for (PathBits path = 0; path < n_paths; ++path)
            if (m[path] < N && paths.drawdown(path, m[path]) != 0) return false;
        return true;
    };
    auto constant_index = [&](const StopMap& m, int k) {
        return std::all_of(m.begin(), m.end(), [k](std::uint8_t t) { return t == k; });
    };

    cv.argmax_match = true;
    std::vector<char> is_optimal(cv.oracle.n_classes, 0);
    for (auto c : cv.oracle.optimal) is_optimal[c] = 1;
    for (std::size_t c = 0; c < cv.oracle.n_classes; ++c)
        if (argmax_consistent(cv.oracle.classes[c]) != static_cast<bool>(is_optimal[c])) cv.argmax_match = false;

    const auto& opt = cv.oracle.optimal;
    switch (dp.unique) {
    case Uniqueness::unique_tau0:
        cv.uniqueness_match = opt.size() == 1 && constant_index(cv.oracle.classes[opt[0]], 0);
        break;
    case Uniqueness::unique_tauN:
        cv.uniqueness_match = opt.size() == 1 && constant_index(cv.oracle.classes[opt[0]], N);
        break;
    case Uniqueness::unique_other: cv.uniqueness_match = opt.size() == 1; break;
    case Uniqueness::tie_class: {
        cv.uniqueness_match = true;
        for (std::size_t c = 0; c < cv.oracle.n_classes; ++c)
            if (stops_only_at_max(cv.oracle.classes[c]) != static_cast<bool>(is_optimal[c]))
                cv.uniqueness_match = false;
        break;
    }
    case Uniqueness::not_unique: cv.uniqueness_match = opt.size() > 1; break;
    case Uniqueness::unknown: cv.uniqueness_match = false; break;
    }
    return cv;
}

inline bool cross_validate(const WalkParams<Rational>& w, const DiscreteReward<Rational>& f,
                           int max_n = kDefaultOracleMaxN)
{
    return cross_validate_report(w, f, max_n).ok();
}

/// {optimum, n_rules_total, n_optimal_classes, dp_match, ...}
inline nlohmann::json to_json(const CrossValidation& cv)
{
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t i = 0; i < cv.oracle.optimal.size() && i < 8; ++i) {
        nlohmann::json stops = nlohmann::json::array();
        for (auto t : cv.oracle.classes[cv.oracle.optimal[i]]) stops.push_back(t);
        samples.push_back({{"rule_bits", cv.oracle.representatives[cv.oracle.optimal[i]]}, {"stop_index_by_path", stops}});
    }
    return {{"optimum", tagged(cv.oracle.optimum)},
            {"n_rules_total", cv.oracle.n_rules_total},
            {"n_classes", cv.oracle.n_classes},
            {"n_optimal_classes", cv.oracle.n_optimal_classes},
            {"dp_match", cv.value_match},
            {"argmax_match", cv.argmax_match},
            {"uniqueness", to_string(cv.unique)},
            {"uniqueness_match", cv.uniqueness_match},
            {"sample_optimal_rules", samples}};
}

} // namespace bangbang
