#pragma once

// Finite-horizon law of a Bernoulli(p) walk S with running maximum M:
// the joint mass function of (M_n, S_n), the stop/continue value functions
// built from it, and the comparison inequalities between them.

#include "bangbang/rational.hpp"
#include "bangbang/rewards.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <ostream>
#include <type_traits>
#include <vector>

namespace bangbang {

template <class Scalar>
struct WalkParams {
    Scalar p;
    int n = 0;

    WalkParams(Scalar p_, int n_) : p(std::move(p_)), n(n_)
    {
        if constexpr (std::is_same_v<Scalar, Rational>) p.canonicalize();
        if (!(p > 0) || !(p < 1)) throw config_error("walk parameter p must lie in (0, 1)");
        if (n < 0) throw config_error("horizon must be nonnegative");
    }

    Scalar q() const { return Scalar(1 - p); }
    /// Same horizon, up/down probabilities exchanged.
    WalkParams swapped() const { return WalkParams(q(), n); }
    WalkParams with_steps(int m) const { return WalkParams(p, m); }
};

/// Mass of (M_n = k, S_n = l) over 0 <= k <= n, -n <= l <= k.
template <class Scalar>
class JointLaw {
public:
    explicit JointLaw(int n) : n_(n), mass_(static_cast<std::size_t>((n + 1) * (2 * n + 1)), Scalar(0)) {}

    int steps() const { return n_; }

    Scalar operator()(int k, int l) const
    {
        if (k < 0 || k > n_ || l < -n_ || l > n_) return Scalar(0);
        return mass_[index(k, l)];
    }

    Scalar& at(int k, int l) { return mass_[index(k, l)]; }

    /// fn(k, l, mass) over the support, k ascending then l ascending.
    template <class Fn>
    void for_each(Fn&& fn) const
    {
        for (int k = 0; k <= n_; ++k)
            for (int l = -n_; l <= k; ++l) {
                const Scalar& m = mass_[index(k, l)];
                if (m != 0) fn(k, l, m);
            }
    }

    Scalar total() const
    {
        Scalar s(0);
        for (const auto& m : mass_) s += m;
        return s;
    }

    /// P(M_n = k), k = 0..n
    std::vector<Scalar> max_marginal() const
    {
        std::vector<Scalar> out(static_cast<std::size_t>(n_ + 1), Scalar(0));
        for_each([&](int k, int, const Scalar& m) { out[static_cast<std::size_t>(k)] += m; });
        return out;
    }

    /// P(M_n - S_n = z), z = 0..n
    std::vector<Scalar> drawdown_marginal() const
    {
        std::vector<Scalar> out(static_cast<std::size_t>(n_ + 1), Scalar(0));
        for_each([&](int k, int l, const Scalar& m) { out[static_cast<std::size_t>(k - l)] += m; });
        return out;
    }

    bool operator==(const JointLaw& o) const { return n_ == o.n_ && mass_ == o.mass_; }

private:
    std::size_t index(int k, int l) const
    {
        return static_cast<std::size_t>(k * (2 * n_ + 1) + (l + n_));
    }

    int n_;
    std::vector<Scalar> mass_;
};

/// Laws of (M_j, S_j) for j = 0..n from one forward pass over (max, endpoint).
template <class Scalar>
std::vector<JointLaw<Scalar>> joint_pmf_sequence(const Scalar& p, int n)
{
    const Scalar q = 1 - p;
    std::vector<JointLaw<Scalar>> laws;
    laws.reserve(static_cast<std::size_t>(n + 1));
    JointLaw<Scalar> cur(0);
    cur.at(0, 0) = 1;
    laws.push_back(cur);
    for (int j = 0; j < n; ++j) {
        JointLaw<Scalar> next(j + 1);
        cur.for_each([&](int k, int l, const Scalar& m) {
            next.at(std::max(k, l + 1), l + 1) += m * p;
            next.at(k, l - 1) += m * q;
        });
        laws.push_back(next);
        cur = std::move(next);
    }
    return laws;
}

template <class Scalar>
JointLaw<Scalar> joint_pmf(const WalkParams<Scalar>& w)
{
    return std::move(joint_pmf_sequence(w.p, w.n).back());
}

/// (M_n^p - S_n^p, S_n^p) has the law of (M_n^q, -S_n^q).
template <class Scalar>
bool reflection_check(const WalkParams<Scalar>& w)
{
    const auto lp = joint_pmf(w);
    const auto lq = joint_pmf(w.swapped());
    JointLaw<Scalar> left(w.n), right(w.n);
    lp.for_each([&](int k, int l, const Scalar& m) { left.at(k - l, l) += m; });
    lq.for_each([&](int k, int l, const Scalar& m) { right.at(k, -l) += m; });
    return left == right;
}

/// M_n under p has the law of M_n - S_n under q.
template <class Scalar>
bool time_reversal_check(const WalkParams<Scalar>& w)
{
    return joint_pmf(w).max_marginal() == joint_pmf(w.swapped()).drawdown_marginal();
}

/// E[f(i v M_k)] from a law of (M_k, S_k).
template <class Scalar>
Scalar g_from_law(const JointLaw<Scalar>& law, const DiscreteReward<Scalar>& f, long i)
{
    Scalar s(0);
    const auto mm = law.max_marginal();
    for (long k = 0; k < static_cast<long>(mm.size()); ++k)
        if (mm[static_cast<std::size_t>(k)] != 0) s += mm[static_cast<std::size_t>(k)] * f(std::max(i, k));
    return s;
}

/// E[f(i v M_k - S_k)] from a law of (M_k, S_k).
template <class Scalar>
Scalar d_from_law(const JointLaw<Scalar>& law, const DiscreteReward<Scalar>& f, long i)
{
    Scalar s(0);
    law.for_each([&](int k, int l, const Scalar& m) { s += m * f(std::max<long>(i, k) - l); });
    return s;
}

/// G(k, i) = E[f(i v M_k)] under parameter w.p; requires k <= w.n.
template <class Scalar>
Scalar g_value(const WalkParams<Scalar>& w, const DiscreteReward<Scalar>& f, int k, long i)
{
    if (k < 0 || k > w.n) throw config_error("g_value: steps-remaining outside configured horizon");
    if (i < 0) throw domain_error("drawdown must be >= 0");
    return g_from_law(joint_pmf(w.with_steps(k)), f, i);
}

/// E[f(i v M_k - S_k)] under parameter w.p. Called with w.swapped() this is
/// D(k, i); with w itself it is the D-tilde variant.
template <class Scalar>
Scalar d_value(const WalkParams<Scalar>& w, const DiscreteReward<Scalar>& f, int k, long i)
{
    if (k < 0 || k > w.n) throw config_error("d_value: steps-remaining outside configured horizon");
    if (i < 0) throw domain_error("drawdown must be >= 0");
    return d_from_law(joint_pmf(w.with_steps(k)), f, i);
}

/// G(k, i) for all 0 <= k <= K and 0 <= i <= imax (row k, column i).
template <class Scalar>
std::vector<std::vector<Scalar>> g_table(const Scalar& p, const DiscreteReward<Scalar>& f, int K, long imax)
{
    const auto laws = joint_pmf_sequence(p, K);
    std::vector<std::vector<Scalar>> out(static_cast<std::size_t>(K + 1));
    for (int k = 0; k <= K; ++k) {
        const auto mm = laws[static_cast<std::size_t>(k)].max_marginal();
        auto& row = out[static_cast<std::size_t>(k)];
        row.reserve(static_cast<std::size_t>(imax + 1));
        for (long i = 0; i <= imax; ++i) {
            Scalar s(0);
            for (long m = 0; m <= k; ++m)
                if (mm[static_cast<std::size_t>(m)] != 0) s += mm[static_cast<std::size_t>(m)] * f(std::max(i, m));
            row.push_back(s);
        }
    }
    return out;
}

enum class Relation { less, equal, greater };

inline const char* to_string(Relation r)
{
    switch (r) {
    case Relation::less: return "less";
    case Relation::equal: return "equal";
    case Relation::greater: return "greater";
    }
    return "?";
}

template <class Scalar>
struct InequalityWitness {
    int k = 0;
    int l = 0;
    Scalar psi;        // psi(i, k, l): convexity gap of the integrand
    Scalar domination; // f(i v k - l) - f(i v (k - l)): gap weighted by P_p - P_q
};

template <class Scalar>
struct InequalityReport {
    Scalar lhs;
    Scalar rhs;
    Relation relation = Relation::equal;
    bool strict = false;
    std::optional<InequalityWitness<Scalar>> witness;
};

namespace detail {

template <class Scalar>
Relation compare(const Scalar& a, const Scalar& b)
{
    return a > b ? Relation::greater : a < b ? Relation::less : Relation::equal;
}

template <class Scalar>
std::optional<InequalityWitness<Scalar>> top_path_witness(const DiscreteReward<Scalar>& f, int n, long i)
{
    if (n <= 0 || i <= 0) return std::nullopt;
    // k = l = n: the all-up path.
    const long k = n, l = n;
    const long a = std::max(i, k);     // i v k
    const long b = std::max(i, k - l); // i v (k - l)
    InequalityWitness<Scalar> w;
    w.k = n;
    w.l = n;
    w.domination = f(a - l) - f(b);
    w.psi = Scalar(f(a - l) - f(a)) - Scalar(f(b) - f(b + l));
    if (!(w.psi > 0) && !(w.domination > 0)) return std::nullopt;
    return w;
}

} // namespace detail

/// E[f(i v M_n - S_n)] against E[f(i v (M_n - S_n))], n = w.n.
template <class Scalar>
InequalityReport<Scalar> check_key_inequality(const WalkParams<Scalar>& w, const DiscreteReward<Scalar>& f, long i)
{
    if (i < 0) throw domain_error("drawdown must be >= 0");
    const auto law = joint_pmf(w);
    InequalityReport<Scalar> r;
    r.lhs = d_from_law(law, f, i);
    r.rhs = Scalar(0);
    law.for_each([&](int k, int l, const Scalar& m) { r.rhs += m * f(std::max<long>(i, k - l)); });
    r.relation = detail::compare(r.lhs, r.rhs);
    r.strict = r.relation == Relation::greater;
    if (r.strict) r.witness = detail::top_path_witness(f, w.n, i);
    return r;
}

/// E[f(i v M_n - S_n)] against G(n, i) = E[f(i v M_n)].
template <class Scalar>
InequalityReport<Scalar> check_corollary(const WalkParams<Scalar>& w, const DiscreteReward<Scalar>& f, long i)
{
    if (i < 0) throw domain_error("drawdown must be >= 0");
    const auto law = joint_pmf(w);
    InequalityReport<Scalar> r;
    r.lhs = d_from_law(law, f, i);
    r.rhs = g_from_law(law, f, i);
    r.relation = detail::compare(r.lhs, r.rhs);
    r.strict = r.relation == Relation::greater;
    if (r.strict) r.witness = detail::top_path_witness(f, w.n, i);
    return r;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Rows "n,k,l,prob_numerator,prob_denominator".
inline void write_csv(std::ostream& os, const JointLaw<Rational>& law)
{
    os << "n,k,l,prob_numerator,prob_denominator\n";
    law.for_each([&](int k, int l, const Rational& m) {
        os << law.steps() << ',' << k << ',' << l << ',' << m.get_num().get_str() << ',' << m.get_den().get_str()
           << '\n';
    });
}

template <class Scalar>
nlohmann::json to_json(const JointLaw<Scalar>& law)
{
    nlohmann::json rows = nlohmann::json::array();
    law.for_each([&](int k, int l, const Scalar& m) {
        if constexpr (scalar_traits<Scalar>::exact)
            rows.push_back({{"k", k}, {"l", l}, {"prob", m.get_str()}});
        else
            rows.push_back({{"k", k}, {"l", l}, {"prob", m}});
    });
    return {{"n", law.steps()}, {"mode", scalar_traits<Scalar>::mode}, {"entries", rows}};
}

} // namespace bangbang
