#pragma once

// Reward functions f applied to the gap between the ultimate maximum and the
// stopped value, plus the structural checks (monotone, convex, ...) that gate
// each optimality result.

#include "bangbang/rational.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bangbang {

enum class RewardKind {
    table,                 // discrete, exact values f(0..N)
    exp_decay,             // f(x) = exp(-sigma x)
    geometric,             // f(k) = d^k on the integers
    indicator_top,         // f(0) = 1, f(k) = 0 for k >= 1
    power_penalty_negated, // f(x) = -x^alpha, 0 < alpha < 1
    linear,                // f(x) = c - slope * x
    custom_table,          // piecewise linear through (x_i, y_i), flat past the last node
};

enum class DomainKind { discrete, continuous };

inline const char* to_string(RewardKind k)
{
    switch (k) {
    case RewardKind::table: return "table";
    case RewardKind::exp_decay: return "exp_decay";
    case RewardKind::geometric: return "geometric";
    case RewardKind::indicator_top: return "indicator_top";
    case RewardKind::power_penalty_negated: return "power_penalty_negated";
    case RewardKind::linear: return "linear";
    case RewardKind::custom_table: return "custom_table";
    }
    return "?";
}

inline RewardKind reward_kind_from_string(std::string_view s)
{
    for (auto k : {RewardKind::table, RewardKind::exp_decay, RewardKind::geometric, RewardKind::indicator_top,
                   RewardKind::power_penalty_negated, RewardKind::linear, RewardKind::custom_table})
        if (s == to_string(k)) return k;
    throw config_error("unknown reward kind '" + std::string(s) + "'");
}

/// How a set of flags was established.
enum class Certification {
    exact,    // every point of the discrete domain checked in exact arithmetic
    analytic, // closed-form family, flags known symbolically
    grid,     // sampled on a probe grid only ("grid-certified only")
};

inline const char* to_string(Certification c)
{
    switch (c) {
    case Certification::exact: return "exact";
    case Certification::analytic: return "analytic";
    case Certification::grid: return "grid-certified only";
    }
    return "?";
}

struct RewardFlags {
    bool nonincreasing = false;
    bool convex = false;
    bool strictly_convex = false;
    bool strictly_decreasing = false;
    bool constant = false;
    bool linear = false;
    Certification certification = Certification::exact;

    bool operator==(const RewardFlags&) const = default;
};

class RewardSpec {
public:
    static RewardSpec table(std::vector<Rational> values)
    {
        if (values.empty()) throw config_error("table reward needs at least one value");
        RewardSpec f(RewardKind::table);
        for (auto& v : values) v.canonicalize();
        f.table_ = std::move(values);
        return f;
    }

    static RewardSpec exp_decay(const Rational& sigma)
    {
        if (sigma <= 0) throw config_error("exp_decay requires sigma > 0");
        RewardSpec f(RewardKind::exp_decay);
        f.params_["sigma"] = canonical(sigma);
        return f;
    }

    static RewardSpec geometric(const Rational& d)
    {
        if (d <= 0 || d >= 1) throw config_error("geometric requires 0 < d < 1");
        RewardSpec f(RewardKind::geometric);
        f.params_["d"] = canonical(d);
        return f;
    }

    static RewardSpec indicator_top() { return RewardSpec(RewardKind::indicator_top); }

    static RewardSpec power_penalty_negated(const Rational& alpha)
    {
        if (alpha <= 0 || alpha >= 1) throw config_error("power_penalty_negated requires 0 < alpha < 1");
        RewardSpec f(RewardKind::power_penalty_negated);
        f.params_["alpha"] = canonical(alpha);
        return f;
    }

    static RewardSpec linear(const Rational& c, const Rational& slope = 1)
    {
        RewardSpec f(RewardKind::linear);
        f.params_["c"] = canonical(c);
        f.params_["slope"] = canonical(slope);
        return f;
    }

    /// Nodes must start at x = 0 and be strictly increasing.
    static RewardSpec custom_table(std::vector<std::pair<double, double>> points)
    {
        if (points.empty()) throw config_error("custom_table needs at least one node");
        if (points.front().first != 0.0) throw config_error("custom_table must start at x = 0");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second))
                throw config_error("custom_table values must be finite");
            if (i > 0 && !(points[i].first > points[i - 1].first))
                throw config_error("custom_table nodes must be strictly increasing");
        }
        RewardSpec f(RewardKind::custom_table);
        f.points_ = std::move(points);
        return f;
    }

    /// -f. Turns a reward into the equivalent penalty (and back).
    RewardSpec negated() const
    {
        RewardSpec g = *this;
        g.negated_ = !g.negated_;
        return g;
    }

    RewardKind kind() const { return kind_; }
    bool is_negated() const { return negated_; }
    const std::map<std::string, Rational>& params() const { return params_; }
    const std::vector<Rational>& table_values() const { return table_; }
    const std::vector<std::pair<double, double>>& points() const { return points_; }

    DomainKind domain() const
    {
        switch (kind_) {
        case RewardKind::table:
        case RewardKind::geometric:
        case RewardKind::indicator_top: return DomainKind::discrete;
        default: return DomainKind::continuous;
        }
    }

    /// Largest admissible integer argument, if the domain is bounded.
    std::optional<long> max_argument() const
    {
        if (kind_ == RewardKind::table) return static_cast<long>(table_.size()) - 1;
        return std::nullopt;
    }

    /// True when integer arguments evaluate to exact rationals.
    bool has_exact_values() const
    {
        return kind_ == RewardKind::table || kind_ == RewardKind::geometric || kind_ == RewardKind::indicator_top ||
               kind_ == RewardKind::linear;
    }

    /// Exact f(k). Kinds without exact values throw; see tabulate() for the
    /// rationalized path.
    Rational exact(long k) const
    {
        check_integer_argument(k);
        if (!has_exact_values())
            throw domain_error(std::string(to_string(kind_)) + " has no exact rational values");
        Rational v;
        switch (kind_) {
        case RewardKind::table: v = table_[static_cast<std::size_t>(k)]; break;
        case RewardKind::geometric: {
            const Rational& d = params_.at("d");
            mpz_class num, den;
            mpz_pow_ui(num.get_mpz_t(), d.get_num_mpz_t(), static_cast<unsigned long>(k));
            mpz_pow_ui(den.get_mpz_t(), d.get_den_mpz_t(), static_cast<unsigned long>(k));
            v = Rational(num, den);
            v.canonicalize();
            break;
        }
        case RewardKind::indicator_top: v = k == 0 ? 1 : 0; break;
        case RewardKind::linear: v = params_.at("c") - params_.at("slope") * k; break;
        default: break;
        }
        return negated_ ? Rational(-v) : v;
    }

    /// Floating evaluation. Discrete kinds accept only integral x.
    double operator()(double x) const
    {
        if (!(x >= 0.0) || !std::isfinite(x)) throw domain_error("reward argument must be finite and >= 0");
        if (domain() == DomainKind::discrete) {
            if (x != std::floor(x)) throw domain_error(std::string(to_string(kind_)) + " is defined on integers only");
            return exact(static_cast<long>(x)).get_d();
        }
        double v = 0.0;
        switch (kind_) {
        case RewardKind::exp_decay: v = std::exp(-params_.at("sigma").get_d() * x); break;
        case RewardKind::power_penalty_negated: v = -std::pow(x, params_.at("alpha").get_d()); break;
        case RewardKind::linear: v = params_.at("c").get_d() - params_.at("slope").get_d() * x; break;
        case RewardKind::custom_table: v = interpolate(x); break;
        default: break;
        }
        return negated_ ? -v : v;
    }

    /// Points where f may fail to be smooth; quadrature splits there.
    std::vector<double> kinks() const
    {
        std::vector<double> out;
        if (kind_ == RewardKind::custom_table)
            for (const auto& [x, y] : points_)
                if (x > 0.0) out.push_back(x);
        return out;
    }

private:
    explicit RewardSpec(RewardKind k) : kind_(k) {}

    void check_integer_argument(long k) const
    {
        if (k < 0) throw domain_error("reward argument must be >= 0");
        if (auto m = max_argument(); m && k > *m)
            throw domain_error("reward argument " + std::to_string(k) + " outside table domain {0.." +
                               std::to_string(*m) + "}");
    }

    double interpolate(double x) const
    {
        if (x >= points_.back().first) return points_.back().second;
        auto it = std::upper_bound(points_.begin(), points_.end(), x,
                                   [](double v, const auto& p) { return v < p.first; });
        const auto& [x1, y1] = *it;
        const auto& [x0, y0] = *(it - 1);
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }

    RewardKind kind_;
    bool negated_ = false;
    std::map<std::string, Rational> params_;
    std::vector<Rational> table_;
    std::vector<std::pair<double, double>> points_;
};

/// f restricted to {0..L}, stored in the scalar type of the engine using it.
template <class Scalar>
class DiscreteReward {
public:
    DiscreteReward() = default;
    explicit DiscreteReward(std::vector<Scalar> values, bool rationalized = false)
        : values_(std::move(values)), rationalized_(rationalized)
    {
    }

    const Scalar& operator()(long k) const
    {
        if (k < 0 || k >= static_cast<long>(values_.size()))
            throw domain_error("reward argument " + std::to_string(k) + " outside tabulated range {0.." +
                               std::to_string(static_cast<long>(values_.size()) - 1) + "}");
        return values_[static_cast<std::size_t>(k)];
    }

    long max_argument() const { return static_cast<long>(values_.size()) - 1; }
    const std::vector<Scalar>& values() const { return values_; }
    /// Exact values were obtained from the binary double of an irrational f.
    bool rationalized() const { return rationalized_; }

private:
    std::vector<Scalar> values_;
    bool rationalized_ = false;
};

/// Tabulates f on {0..L}. In exact mode, kinds without exact values are
/// rationalized through the exact binary value of their double evaluation.
template <class Scalar>
DiscreteReward<Scalar> tabulate(const RewardSpec& f, long L)
{
    if (L < 0) throw config_error("tabulation range must be nonnegative");
    std::vector<Scalar> v;
    v.reserve(static_cast<std::size_t>(L + 1));
    const bool exact = f.has_exact_values();
    for (long k = 0; k <= L; ++k) {
        if constexpr (scalar_traits<Scalar>::exact)
            v.push_back(exact ? f.exact(k) : from_double(f(static_cast<double>(k))));
        else
            v.push_back(f(static_cast<double>(k)));
    }
    return DiscreteReward<Scalar>(std::move(v), scalar_traits<Scalar>::exact && !exact);
}

/// Flags of a finite sequence via first and second differences.
template <class Scalar>
RewardFlags classify_values(const std::vector<Scalar>& v, Certification cert = Certification::exact)
{
    RewardFlags fl;
    fl.certification = cert;
    fl.nonincreasing = true;
    bool strict_step = true;
    fl.constant = true;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        if (v[k + 1] > v[k]) fl.nonincreasing = false;
        if (!(v[k + 1] < v[k])) strict_step = false;
        if (v[k + 1] != v[k]) fl.constant = false;
    }
    fl.convex = true;
    fl.strictly_convex = true;
    fl.linear = true;
    for (std::size_t k = 0; k + 2 < v.size(); ++k) {
        const Scalar d2 = v[k] - 2 * v[k + 1] + v[k + 2];
        if (d2 < 0) fl.convex = false;
        if (!(d2 > 0)) fl.strictly_convex = false;
        if (d2 != 0) fl.linear = false;
    }
    fl.strictly_decreasing = strict_step && !fl.constant;
    return fl;
}

/// Exact discrete classification on {0..N} (rationalized values for
/// irrational kinds; the flags then describe the table actually used).
inline RewardFlags classify(const RewardSpec& f, long N)
{
    return classify_values(tabulate<Rational>(f, N).values(), Certification::exact);
}

namespace detail {

enum class Trend { strictly_decreasing, constant, strictly_increasing };
enum class Curvature { strictly_convex, linear, strictly_concave };

inline RewardFlags flags_from(Trend t, Curvature c)
{
    RewardFlags fl;
    fl.certification = Certification::analytic;
    fl.nonincreasing = t != Trend::strictly_increasing;
    fl.strictly_decreasing = t == Trend::strictly_decreasing;
    fl.constant = t == Trend::constant;
    fl.convex = c != Curvature::strictly_concave;
    fl.strictly_convex = c == Curvature::strictly_convex;
    fl.linear = c == Curvature::linear;
    return fl;
}

} // namespace detail

/// Flags on [0, inf). Closed-form kinds are analytic; custom tables are only
/// checked on `probe` (sorted, nonnegative).
inline RewardFlags classify_continuous(const RewardSpec& f, const std::vector<double>& probe)
{
    using detail::Curvature;
    using detail::Trend;
    auto flip = [&](Trend t, Curvature c) {
        if (f.is_negated()) {
            t = t == Trend::strictly_decreasing ? Trend::strictly_increasing
                : t == Trend::strictly_increasing ? Trend::strictly_decreasing
                                                  : t;
            c = c == Curvature::strictly_convex ? Curvature::strictly_concave
                : c == Curvature::strictly_concave ? Curvature::strictly_convex
                                                   : c;
        }
        return detail::flags_from(t, c);
    };
    switch (f.kind()) {
    case RewardKind::exp_decay:
    case RewardKind::power_penalty_negated: return flip(Trend::strictly_decreasing, Curvature::strictly_convex);
    case RewardKind::linear: {
        const Rational& s = f.params().at("slope");
        return flip(s > 0 ? Trend::strictly_decreasing : s == 0 ? Trend::constant : Trend::strictly_increasing,
                    Curvature::linear);
    }
    case RewardKind::custom_table: {
        // Non-uniform grid: compare successive slopes rather than raw second differences.
        RewardFlags fl;
        fl.certification = Certification::grid;
        fl.nonincreasing = fl.constant = fl.convex = fl.strictly_convex = fl.linear = true;
        bool strict_step = true;
        std::vector<double> y;
        for (double x : probe) y.push_back(f(x));
        constexpr double tol = 1e-12;
        for (std::size_t i = 0; i + 1 < probe.size(); ++i) {
            const double dy = y[i + 1] - y[i];
            if (dy > tol) fl.nonincreasing = false;
            if (!(dy < -tol)) strict_step = false;
            if (std::abs(dy) > tol) fl.constant = false;
        }
        for (std::size_t i = 0; i + 2 < probe.size(); ++i) {
            const double s0 = (y[i + 1] - y[i]) / (probe[i + 1] - probe[i]);
            const double s1 = (y[i + 2] - y[i + 1]) / (probe[i + 2] - probe[i + 1]);
            if (s1 - s0 < -tol) fl.convex = false;
            if (!(s1 - s0 > tol)) fl.strictly_convex = false;
            if (std::abs(s1 - s0) > tol) fl.linear = false;
        }
        fl.strictly_decreasing = strict_step && !fl.constant;
        return fl;
    }
    default: throw domain_error(std::string(to_string(f.kind())) + " has a discrete domain; use classify(f, N)");
    }
}

// ---------------------------------------------------------------------------
// JSON / compact string forms
// ---------------------------------------------------------------------------

namespace detail {

inline Rational rational_from_json(const nlohmann::json& j)
{
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number()) return from_double(j.get<double>());
    throw config_error("expected a number or rational string, got " + j.dump());
}

inline nlohmann::json rational_to_json(const Rational& r)
{
    if (r.get_den() == 1 && r.get_num().fits_slong_p()) return r.get_num().get_si();
    return r.get_str();
}

} // namespace detail

/// {"kind": "...", "params": {...}, "table": [...], "negated": bool}
inline RewardSpec reward_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("kind")) throw config_error("reward spec must be an object with a 'kind'");
    const auto kind = reward_kind_from_string(j.at("kind").get<std::string>());
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    auto param = [&](const char* name) -> Rational {
        if (!params.contains(name))
            throw config_error(std::string("reward kind '") + to_string(kind) + "' needs param '" + name + "'");
        return detail::rational_from_json(params.at(name));
    };
    RewardSpec f = RewardSpec::indicator_top();
    switch (kind) {
    case RewardKind::table: {
        std::vector<Rational> v;
        for (const auto& e : j.at("table")) v.push_back(detail::rational_from_json(e));
        f = RewardSpec::table(std::move(v));
        break;
    }
    case RewardKind::exp_decay: f = RewardSpec::exp_decay(param("sigma")); break;
    case RewardKind::geometric: f = RewardSpec::geometric(param("d")); break;
    case RewardKind::indicator_top: break;
    case RewardKind::power_penalty_negated: f = RewardSpec::power_penalty_negated(param("alpha")); break;
    case RewardKind::linear:
        f = RewardSpec::linear(param("c"), params.contains("slope") ? param("slope") : Rational(1));
        break;
    case RewardKind::custom_table: {
        std::vector<std::pair<double, double>> pts;
        for (const auto& e : j.at("table")) {
            if (!e.is_array() || e.size() != 2) throw config_error("custom_table entries are [x, y] pairs");
            pts.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        f = RewardSpec::custom_table(std::move(pts));
        break;
    }
    }
    if (j.value("negated", false)) f = f.negated();
    return f;
}

inline nlohmann::json to_json(const RewardSpec& f)
{
    nlohmann::json j;
    j["kind"] = to_string(f.kind());
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : f.params()) params[k] = detail::rational_to_json(v);
    j["params"] = params;
    if (f.kind() == RewardKind::table) {
        j["table"] = nlohmann::json::array();
        for (const auto& v : f.table_values()) j["table"].push_back(detail::rational_to_json(v));
    } else if (f.kind() == RewardKind::custom_table) {
        j["table"] = nlohmann::json::array();
        for (const auto& [x, y] : f.points()) j["table"].push_back({x, y});
    }
    if (f.is_negated()) j["negated"] = true;
    return j;
}

inline nlohmann::json to_json(const RewardFlags& fl)
{
    return {{"nonincreasing", fl.nonincreasing},
            {"convex", fl.convex},
            {"strictly_convex", fl.strictly_convex},
            {"strictly_decreasing", fl.strictly_decreasing},
            {"constant", fl.constant},
            {"linear", fl.linear},
            {"certification", to_string(fl.certification)}};
}

/// Compact CLI form: "geometric:1/2", "table:1,1,0", "indicator_top",
/// "exp_decay:1", "linear:3" or "linear:3,1/2" (c, slope),
/// "power_penalty_negated:1/2", "custom_table:0,1;2,0". A leading '{' is read
/// as a JSON spec.
inline RewardSpec parse_reward(std::string_view text)
{
    std::string s(text);
    if (!s.empty() && s.front() == '{') {
        try {
            return reward_from_json(nlohmann::json::parse(s));
        } catch (const nlohmann::json::exception& e) {
            throw config_error(std::string("bad reward JSON: ") + e.what());
        }
    }
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
    auto split = [](const std::string& str, char sep) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : str) {
            if (c == sep) {
                out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty() || !out.empty()) out.push_back(cur);
        return out;
    };
    const auto args = split(rest, ',');
    auto need = [&](std::size_t n) {
        if (args.size() < n) throw config_error("reward '" + s + "' is missing parameters");
    };
    switch (reward_kind_from_string(kind)) {
    case RewardKind::table: {
        need(1);
        std::vector<Rational> v;
        for (const auto& a : args) v.push_back(parse_rational(a));
        return RewardSpec::table(std::move(v));
    }
    case RewardKind::exp_decay: need(1); return RewardSpec::exp_decay(parse_rational(args[0]));
    case RewardKind::geometric: need(1); return RewardSpec::geometric(parse_rational(args[0]));
    case RewardKind::indicator_top: return RewardSpec::indicator_top();
    case RewardKind::power_penalty_negated: need(1); return RewardSpec::power_penalty_negated(parse_rational(args[0]));
    case RewardKind::linear:
        need(1);
        return RewardSpec::linear(parse_rational(args[0]), args.size() > 1 ? parse_rational(args[1]) : Rational(1));
    case RewardKind::custom_table: {
        std::vector<std::pair<double, double>> pts;
        for (const auto& node : split(rest, ';')) {
            const auto xy = split(node, ',');
            if (xy.size() != 2) throw config_error("custom_table nodes are 'x,y' separated by ';'");
            pts.emplace_back(parse_rational(xy[0]).get_d(), parse_rational(xy[1]).get_d());
        }
        return RewardSpec::custom_table(std::move(pts));
    }
    }
    throw config_error("unreachable reward kind");
}

} // namespace bangbang
