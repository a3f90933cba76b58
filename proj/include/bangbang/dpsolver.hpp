#pragma once

// Backward induction for sup_tau E[f(M_N - S_tau)] on the drawdown chain
// Z_k = M_k - S_k. Stopping at (k, z) is worth G(N - k, z); continuing moves
// z to max(z - 1, 0) with probability p and to z + 1 with probability q.

#include "bangbang/rational.hpp"
#include "bangbang/rewards.hpp"
#include "bangbang/walkdist.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

namespace bangbang {

/// Transition kernel of the drawdown chain; 0 is reflecting.
template <class Scalar>
struct ZChain {
    Scalar p;

    /// {(next state, probability)} for up-step then down-step.
    std::array<std::pair<int, Scalar>, 2> transitions(int z) const
    {
        return {{{z > 0 ? z - 1 : 0, p}, {z + 1, Scalar(1 - p)}}};
    }
};

enum class Decision { stop, cont, tie };

inline const char* to_string(Decision d)
{
    switch (d) {
    case Decision::stop: return "STOP";
    case Decision::cont: return "CONTINUE";
    case Decision::tie: return "TIE";
    }
    return "?";
}

inline Decision decision_from_string(std::string_view s)
{
    if (s == "STOP") return Decision::stop;
    if (s == "CONTINUE") return Decision::cont;
    if (s == "TIE") return Decision::tie;
    throw config_error("unknown decision '" + std::string(s) + "'");
}

/// Markov stopping rule on states (k, z), 0 <= z <= k <= N. Row N is forced
/// STOP. A TIE means both actions are optimal; as a rule it stops.
class PolicyTable {
public:
    explicit PolicyTable(int N, Decision fill = Decision::cont) : N_(N)
    {
        if (N < 0) throw config_error("horizon must be nonnegative");
        rows_.resize(static_cast<std::size_t>(N + 1));
        for (int k = 0; k <= N; ++k)
            rows_[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(k + 1), k == N ? Decision::stop : fill);
    }

    static PolicyTable tau0(int N)
    {
        PolicyTable t(N);
        t.set(0, 0, Decision::stop);
        return t;
    }

    static PolicyTable tauN(int N) { return PolicyTable(N); }

    /// Stop whenever the walk sits at its running maximum (z = 0), else at N.
    static PolicyTable stop_at_max(int N)
    {
        PolicyTable t(N);
        for (int k = 0; k < N; ++k) t.set(k, 0, Decision::stop);
        return t;
    }

    int horizon() const { return N_; }

    Decision operator()(int k, int z) const
    {
        check(k, z);
        return rows_[static_cast<std::size_t>(k)][static_cast<std::size_t>(z)];
    }

    void set(int k, int z, Decision d)
    {
        check(k, z);
        rows_[static_cast<std::size_t>(k)][static_cast<std::size_t>(z)] = d;
    }

    bool stops(int k, int z) const { return (*this)(k, z) != Decision::cont; }

    /// Throws config_error unless row N is all STOP.
    void validate() const
    {
        for (int z = 0; z <= N_; ++z)
            if ((*this)(N_, z) != Decision::stop)
                throw config_error("policy must STOP at the horizon (k = N, z = " + std::to_string(z) + ")");
    }

    bool operator==(const PolicyTable&) const = default;

private:
    void check(int k, int z) const
    {
        if (k < 0 || k > N_ || z < 0 || z > k)
            throw config_error("policy state (" + std::to_string(k) + ", " + std::to_string(z) +
                               ") outside 0 <= z <= k <= N");
    }

    int N_;
    std::vector<std::vector<Decision>> rows_;
};

enum class Uniqueness { unique_tau0, unique_tauN, tie_class, not_unique, unique_other, unknown };

inline const char* to_string(Uniqueness u)
{
    switch (u) {
    case Uniqueness::unique_tau0: return "UNIQUE_TAU0";
    case Uniqueness::unique_tauN: return "UNIQUE_TAUN";
    case Uniqueness::tie_class: return "TIE_CLASS";
    case Uniqueness::not_unique: return "NOT_UNIQUE";
    case Uniqueness::unique_other: return "UNIQUE_OTHER";
    case Uniqueness::unknown: return "UNKNOWN";
    }
    return "?";
}

template <class Scalar>
struct SolveReport {
    Scalar optimal_value;
    Scalar value_tau0; // E[f(M_N)]
    Scalar value_tauN; // E[f(M_N - S_N)]
    PolicyTable policy{0};
    Uniqueness unique = Uniqueness::unknown;
    std::vector<std::pair<int, int>> tie_states;
    // Indexed [k][z], z <= k.
    std::vector<std::vector<Scalar>> value;
    std::vector<std::vector<Scalar>> stop_value;
    std::vector<std::vector<Scalar>> continue_value; // empty row at k = N
};

/// Exact values of arbitrary Markov rules for one (p, f, N), sharing the G table.
template <class Scalar>
class PolicyEvaluator {
public:
    PolicyEvaluator(const WalkParams<Scalar>& w, const DiscreteReward<Scalar>& f) : w_(w)
    {
        if (f.max_argument() < w.n)
            throw config_error("reward defined on {0.." + std::to_string(f.max_argument()) + "} but horizon needs {0.." +
                               std::to_string(w.n) + "}");
        g_ = g_table(w.p, f, w.n, w.n);
    }

    /// G(N - k, z)
    const Scalar& stop_reward(int k, int z) const
    {
        return g_[static_cast<std::size_t>(w_.n - k)][static_cast<std::size_t>(z)];
    }

    Scalar operator()(const PolicyTable& pol) const
    {
        if (pol.horizon() != w_.n)
            throw config_error("policy horizon " + std::to_string(pol.horizon()) + " does not match N = " +
                               std::to_string(w_.n));
        pol.validate();
        const ZChain<Scalar> chain{w_.p};
        std::vector<Scalar> mass{Scalar(1)};
        Scalar total(0);
        for (int k = 0; k <= w_.n; ++k) {
            std::vector<Scalar> next(static_cast<std::size_t>(k + 2), Scalar(0));
            for (int z = 0; z <= k; ++z) {
                const Scalar& m = mass[static_cast<std::size_t>(z)];
                if (m == 0) continue;
                if (pol.stops(k, z)) {
                    total += m * stop_reward(k, z);
                } else {
                    for (const auto& [to, pr] : chain.transitions(z)) next[static_cast<std::size_t>(to)] += m * pr;
                }
            }
            mass = std::move(next);
        }
        return total;
    }

    const WalkParams<Scalar>& walk() const { return w_; }

private:
    WalkParams<Scalar> w_;
    std::vector<std::vector<Scalar>> g_;
};

template <class Scalar>
Scalar evaluate_policy(const WalkParams<Scalar>& w, const DiscreteReward<Scalar>& f, const PolicyTable& pol)
{
    return PolicyEvaluator<Scalar>(w, f)(pol);
}

namespace detail {

inline Uniqueness classify_ties(const PolicyTable& pol)
{
    const int N = pol.horizon();
    if (N == 0 || pol(0, 0) == Decision::stop) return Uniqueness::unique_tau0;

    bool all_continue = true;
    bool tie_pattern = true;
    for (int k = 0; k < N; ++k)
        for (int z = 0; z <= k; ++z) {
            const Decision d = pol(k, z);
            if (d != Decision::cont) all_continue = false;
            if (d != (z == 0 ? Decision::tie : Decision::cont)) tie_pattern = false;
        }
    if (all_continue) return Uniqueness::unique_tauN;
    if (tie_pattern) return Uniqueness::tie_class;

    // Another optimal rule exists iff some state reachable under an optimal
    // rule is a tie (every state z <= k has positive probability).
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(N + 1));
    for (int k = 0; k <= N; ++k) seen[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(k + 1), 0);
    seen[0][0] = 1;
    for (int k = 0; k < N; ++k)
        for (int z = 0; z <= k; ++z) {
            if (!seen[static_cast<std::size_t>(k)][static_cast<std::size_t>(z)]) continue;
            const Decision d = pol(k, z);
            if (d == Decision::tie) return Uniqueness::not_unique;
            if (d == Decision::cont) {
                seen[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(z > 0 ? z - 1 : 0)] = 1;
                seen[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(z + 1)] = 1;
            }
        }
    return Uniqueness::unique_other;
}

} // namespace detail

/// Optimal value, argmax rule (ties kept as TIE, which stop), canonical-rule
/// values and the uniqueness class. Any f works; convexity is not assumed.
template <class Scalar>
SolveReport<Scalar> solve(const WalkParams<Scalar>& w, const DiscreteReward<Scalar>& f)
{
    const int N = w.n;
    const PolicyEvaluator<Scalar> eval(w, f);
    const ZChain<Scalar> chain{w.p};

    SolveReport<Scalar> r;
    r.policy = PolicyTable(N);
    r.value.resize(static_cast<std::size_t>(N + 1));
    r.stop_value.resize(static_cast<std::size_t>(N + 1));
    r.continue_value.resize(static_cast<std::size_t>(N + 1));
    for (int z = 0; z <= N; ++z) {
        r.stop_value[static_cast<std::size_t>(N)].push_back(eval.stop_reward(N, z));
        r.value[static_cast<std::size_t>(N)].push_back(eval.stop_reward(N, z));
    }
    for (int k = N - 1; k >= 0; --k) {
        const auto& after = r.value[static_cast<std::size_t>(k + 1)];
        auto& v = r.value[static_cast<std::size_t>(k)];
        for (int z = 0; z <= k; ++z) {
            Scalar cont(0);
            for (const auto& [to, pr] : chain.transitions(z)) cont += pr * after[static_cast<std::size_t>(to)];
            const Scalar& stop = eval.stop_reward(k, z);
            Decision d;
            if (stop > cont)
                d = Decision::stop;
            else if (stop < cont)
                d = Decision::cont;
            else
                d = scalar_traits<Scalar>::exact ? Decision::tie : Decision::stop;
            r.policy.set(k, z, d);
            if (d == Decision::tie) r.tie_states.emplace_back(k, z);
            r.stop_value[static_cast<std::size_t>(k)].push_back(stop);
            r.continue_value[static_cast<std::size_t>(k)].push_back(cont);
            v.push_back(d == Decision::cont ? cont : stop);
        }
    }
    r.optimal_value = r.value[0][0];
    r.value_tau0 = eval.stop_reward(0, 0);
    r.value_tauN = d_from_law(joint_pmf(w), f, 0);
    r.unique = scalar_traits<Scalar>::exact ? detail::classify_ties(r.policy) : Uniqueness::unknown;
    return r;
}

template <class Scalar>
SolveReport<Scalar> solve(const WalkParams<Scalar>& w, const RewardSpec& f)
{
    if (auto m = f.max_argument(); m && *m < w.n)
        throw config_error("reward table has " + std::to_string(*m + 1) + " values but N = " + std::to_string(w.n) +
                           " needs " + std::to_string(w.n + 1));
    return solve(w, tabulate<Scalar>(f, w.n));
}

/// Uniqueness class and tie states; float mode answers UNKNOWN.
template <class Scalar>
std::pair<Uniqueness, std::vector<std::pair<int, int>>> uniqueness_report(const WalkParams<Scalar>& w,
                                                                          const DiscreteReward<Scalar>& f)
{
    auto r = solve(w, f);
    return {r.unique, r.tie_states};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline void write_csv(std::ostream& os, const PolicyTable& pol)
{
    os << "k,z,decision\n";
    for (int k = 0; k <= pol.horizon(); ++k)
        for (int z = 0; z <= k; ++z) os << k << ',' << z << ',' << to_string(pol(k, z)) << '\n';
}

/// Reads the "k,z,decision" form; every state 0 <= z <= k <= N must appear.
inline PolicyTable read_policy_csv(std::istream& is)
{
    std::string line;
    std::vector<std::tuple<int, int, Decision>> rows;
    int N = -1;
    bool header = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("k,", 0) == 0) continue;
        }
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw config_error("bad policy row '" + line + "'");
        int k = 0, z = 0;
        try {
            k = std::stoi(a);
            z = std::stoi(b);
        } catch (const std::exception&) {
            throw config_error("bad policy row '" + line + "'");
        }
        rows.emplace_back(k, z, decision_from_string(c));
        N = std::max(N, k);
    }
    if (N < 0) throw config_error("empty policy");
    PolicyTable pol(N);
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(N + 1));
    for (int k = 0; k <= N; ++k) seen[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(k + 1), 0);
    for (const auto& [k, z, d] : rows) {
        pol.set(k, z, d);
        seen[static_cast<std::size_t>(k)][static_cast<std::size_t>(z)] = 1;
    }
    for (int k = 0; k <= N; ++k)
        for (int z = 0; z <= k; ++z)
            if (!seen[static_cast<std::size_t>(k)][static_cast<std::size_t>(z)])
                throw config_error("policy is missing state (" + std::to_string(k) + ", " + std::to_string(z) + ")");
    pol.validate();
    return pol;
}

/// {"mode": "exact", "value": "a/b", "approx": x} or {"mode": "float", ...}
template <class Scalar>
nlohmann::json tagged(const Scalar& x)
{
    if constexpr (scalar_traits<Scalar>::exact)
        return {{"mode", "exact"}, {"value", x.get_str()}, {"approx", x.get_d()}};
    else
        return {{"mode", "float"}, {"value", x}};
}

inline nlohmann::json to_json(const PolicyTable& pol)
{
    nlohmann::json rows = nlohmann::json::array();
    for (int k = 0; k <= pol.horizon(); ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (int z = 0; z <= k; ++z) row.push_back(to_string(pol(k, z)));
        rows.push_back(row);
    }
    return rows;
}

template <class Scalar>
nlohmann::json to_json(const SolveReport<Scalar>& r)
{
    nlohmann::json ties = nlohmann::json::array();
    for (const auto& [k, z] : r.tie_states) ties.push_back({k, z});
    return {{"optimal_value", tagged(r.optimal_value)},
            {"value_tau0", tagged(r.value_tau0)},
            {"value_tauN", tagged(r.value_tauN)},
            {"uniqueness", to_string(r.unique)},
            {"tie_states", ties},
            {"policy", to_json(r.policy)}};
}

} // namespace bangbang
