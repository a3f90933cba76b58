#include "bangbang/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using bangbang::RunConfig;

    RunConfig cfg;
    try {
        cfg.seed = bangbang::default_seed();
    } catch (const bangbang::config_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }

    CLI::App app{"Optimal prediction of the ultimate maximum: exact solver and verification suites"};
    app.set_version_flag("--version", std::string(bangbang::kToolVersion));
    app.require_subcommand(1);

    auto common = [&](CLI::App* s) {
        s->add_option("-o,--output", cfg.output, "Report path (default: stdout)");
        s->add_option("--format", cfg.format, "json or csv")->capture_default_str();
    };
    auto walk = [&](CLI::App* s) {
        s->add_option("--p", cfg.p, "Up-step probability as a/b")->capture_default_str();
        s->add_option("--N", cfg.N, "Horizon")->capture_default_str();
        s->add_option("--reward", cfg.reward, "Reward spec, e.g. geometric:1/2 or JSON")->capture_default_str();
    };
    auto seeded = [&](CLI::App* s) {
        s->add_option("--seed", cfg.seed, "Seed (default from BANGBANG_SEED)")->capture_default_str();
        s->add_option("--replications", cfg.replications, "Monte Carlo replications")->capture_default_str();
    };

    auto* solve = app.add_subcommand("solve", "Backward induction on the drawdown chain");
    walk(solve);
    common(solve);
    solve->add_option("--mode", cfg.mode, "exact or float")->capture_default_str();

    auto* evaluate = app.add_subcommand("evaluate", "Exact value of a Markov rule");
    walk(evaluate);
    common(evaluate);
    seeded(evaluate);
    evaluate->add_option("--policy", cfg.policy, "tau0, tauN, stop_at_max or a k,z,decision CSV file")
        ->capture_default_str();
    evaluate->add_option("--mode", cfg.mode, "exact or float")->capture_default_str();

    auto* verify = app.add_subcommand("verify-discrete", "Exact optimal-value and inequality grid");
    common(verify);
    verify->add_option("--grid", cfg.grid, "default or quick (default: default)");

    auto* oracle = app.add_subcommand("oracle", "Exhaustive enumeration of history-dependent rules");
    walk(oracle);
    common(oracle);
    oracle->add_option("--max-N", cfg.oracle_max_n, "Largest N the enumeration accepts")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Coupled walks from shared uniforms");
    common(simulate);
    seeded(simulate);
    simulate->add_option("--N", cfg.N, "Steps")->capture_default_str();
    simulate->add_option("--ps", cfg.ps, "Probabilities as a/b")->required();

    auto* bmv = app.add_subcommand("bm-verify", "Quadrature check of the Brownian inequalities");
    common(bmv);
    bmv->add_option("--reward", cfg.reward, "Continuous reward spec (default: exp_decay:1)");
    bmv->add_option("--lambda", cfg.lambda, "Drift")->capture_default_str();
    bmv->add_option("--t", cfg.t, "Time")->capture_default_str();
    bmv->add_option("--x", cfg.x, "Level x")->capture_default_str();
    bmv->add_option("--check", cfg.check, "key, corollary or both")->capture_default_str();
    bmv->add_option("--grid", cfg.grid, "Run the versioned grid (default or quick) instead of one point");

    auto* bmmc = app.add_subcommand("bm-mc", "Monte Carlo values of Brownian stopping rules");
    common(bmmc);
    seeded(bmmc);
    bmmc->add_option("--reward", cfg.reward, "Continuous reward spec (default: exp_decay:1)");
    bmmc->add_option("--lambda", cfg.lambda, "Drift")->capture_default_str();
    bmmc->add_option("--T", cfg.T, "Horizon")->capture_default_str();
    bmmc->add_option("--steps", cfg.steps, "Grid steps per path")->capture_default_str();
    bmmc->add_option("--rule", cfg.rules,
                     "tau0, tauT, drawdown_threshold:a or time_threshold:t0 (repeatable; default: tau0 tauT "
                     "drawdown_threshold:0)");

    auto* sweep = app.add_subcommand("sweep", "Solve over a (p, N) grid");
    common(sweep);
    sweep->add_option("--reward", cfg.reward, "Reward spec")->capture_default_str();
    sweep->add_option("--ps", cfg.ps, "Probabilities as a/b")->required();
    sweep->add_option("--Ns", cfg.Ns, "Horizons")->required();
    sweep->add_option("--mode", cfg.mode, "exact or float")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    // Subcommands share one config, so per-command defaults are applied here.
    if (cfg.command == "evaluate" && evaluate->count("--replications") == 0) cfg.replications = 0;
    if ((cfg.command == "bm-verify" || cfg.command == "bm-mc") && app.get_subcommands().front()->count("--reward") == 0)
        cfg.reward = "exp_decay:1";
    if (cfg.command == "bm-mc" && cfg.rules.empty()) cfg.rules = {"tau0", "tauT", "drawdown_threshold:0"};
    return bangbang::run(cfg);
}
