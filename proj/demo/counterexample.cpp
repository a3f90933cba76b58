// Bang-bang rules against the non-convex reward f = (1, 1, 0) at N = 2.

#include "bangbang/bangbang.hpp"

#include <iostream>

int main()
{
    using namespace bangbang;
    const auto f = tabulate<Rational>(RewardSpec::table({1, 1, 0}), 2);
    PolicyTable tau1(2);
    tau1.set(1, 0, Decision::stop);
    tau1.set(1, 1, Decision::stop);
    for (const Rational p : {Rational(1, 4), Rational(1, 2), Rational(3, 4)}) {
        const WalkParams<Rational> w{p, 2};
        const auto r = solve(w, f);
        std::cout << "p=" << p << "  tau0=" << r.value_tau0 << "  tauN=" << r.value_tauN
                  << "  optimal=" << r.optimal_value << "  tau1=" << evaluate_policy(w, f, tau1) << '\n';
    }
}
