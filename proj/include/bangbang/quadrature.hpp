#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature in one dimension and an
// iterated two-dimensional version whose inner breakpoints may move with the
// outer variable, so kinks along lines z = a + s are split exactly.
//
// Error estimates are |K15 - G7| per interval, which overstates the true
// error of the K15 value for smooth integrands. The 2D estimate adds the
// integrated inner error to the outer one.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace bangbang {

class quadrature_error : public std::runtime_error {
public:
    quadrature_error(const std::string& what, double achieved) : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
};

struct QuadOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-11;
    std::size_t max_intervals = 4000;
};

namespace detail {

/// Value and error density of an integrand evaluation. Plain integrands
/// carry zero error; inner integrals carry their own estimate.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

struct Interval {
    double a, b;
    double k, g, err; // err includes integrated error densities
    bool operator<(const Interval& o) const { return err < o.err; }
};

template <class F>
Interval gk15(F& f, double a, double b)
{
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    static const auto xk = gauss_kronrod<double, 15>::abscissa();
    static const auto wk = gauss_kronrod<double, 15>::weights();
    static const auto wg = gauss<double, 7>::weights();

    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double k = 0.0, g = 0.0, e = 0.0;
    for (std::size_t i = 0; i < xk.size(); ++i) {
        const int sides = i == 0 ? 1 : 2;
        for (int side = 0; side < sides; ++side) {
            const double x = side == 0 ? c + h * xk[i] : c - h * xk[i];
            const Estimate v = f(x);
            k += wk[i] * v.value;
            e += wk[i] * v.error;
            if (i % 2 == 0) g += wg[i / 2] * v.value;
        }
    }
    return {a, b, k * h, g * h, std::abs(k - g) * h + e * h};
}

inline double neumaier_sum(const std::vector<double>& xs)
{
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        const double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    return s + c;
}

/// Sorted, deduplicated breakpoints clipped to [a, b], endpoints included.
inline std::vector<double> segments(double a, double b, std::vector<double> breaks)
{
    std::vector<double> pts{a, b};
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [](double u, double v) { return std::abs(u - v) <= 1e-15 * (1 + std::abs(u)); }),
              pts.end());
    return pts;
}

template <class F>
QuadResult adaptive(F&& f, double a, double b, const std::vector<double>& breaks, const QuadOptions& opt)
{
    QuadResult out;
    if (!(b > a)) return out;
    std::priority_queue<Interval> heap;
    const auto pts = segments(a, b, breaks);
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto iv = gk15(f, pts[i], pts[i + 1]);
        total += iv.k;
        total_err += iv.err;
        heap.push(iv);
    }
    while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (heap.size() >= opt.max_intervals)
            throw quadrature_error("quadrature did not converge: achieved error " + std::to_string(total_err) +
                                       " after " + std::to_string(heap.size()) + " intervals",
                                   total_err);
        const Interval worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) // interval exhausted at double resolution
            throw quadrature_error("quadrature interval underflow: achieved error " + std::to_string(total_err),
                                   total_err);
        heap.pop();
        const auto left = gk15(f, worst.a, mid);
        const auto right = gk15(f, mid, worst.b);
        total += left.k + right.k - worst.k;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    // Recompute from the final partition; the running sums drift.
    std::vector<double> ks, es;
    out.intervals = heap.size();
    while (!heap.empty()) {
        ks.push_back(heap.top().k);
        es.push_back(heap.top().err);
        heap.pop();
    }
    std::sort(ks.begin(), ks.end(), [](double u, double v) { return std::abs(u) < std::abs(v); });
    std::sort(es.begin(), es.end());
    out.value = neumaier_sum(ks);
    out.error = neumaier_sum(es);
    return out;
}

} // namespace detail

/// Integral of f over [a, b], splitting first at `breaks`.
inline QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                            const std::vector<double>& breaks = {}, const QuadOptions& opt = {})
{
    auto g = [&](double x) { return detail::Estimate{f(x), 0.0}; };
    return detail::adaptive(g, a, b, breaks, opt);
}

/// Iterated integral of f(x, y) over [ax, bx] x [ay, by]. Outer breakpoints
/// are fixed; inner breakpoints come from y_breaks(x).
inline QuadResult integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay,
                               double by, const std::vector<double>& x_breaks,
                               const std::function<std::vector<double>(double)>& y_breaks, const QuadOptions& outer = {},
                               const QuadOptions& inner = {})
{
    std::size_t inner_intervals = 0;
    auto line = [&](double x) {
        const auto r = detail::adaptive([&](double y) { return detail::Estimate{f(x, y), 0.0}; }, ay, by,
                                        y_breaks ? y_breaks(x) : std::vector<double>{}, inner);
        inner_intervals += r.intervals;
        return detail::Estimate{r.value, r.error};
    };
    auto r = detail::adaptive(line, ax, bx, x_breaks, outer);
    r.intervals += inner_intervals;
    return r;
}

} // namespace bangbang
