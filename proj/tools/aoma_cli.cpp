// Command-line experiment runner.

#include "aoma/aoma.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace aoma;

std::pair<double, double> parse_pair(const std::string& s, const char* what) {
    std::istringstream in(s);
    double a = 0, b = 0;
    char comma = 0;
    if (!(in >> a >> comma >> b) || comma != ',' || !in.eof())
        throw std::invalid_argument(std::string(what) + " must read a,b; got " + s);
    return {a, b};
}

SwitchingPolicy parse_policy(const std::string& s) {
    const auto [a, b] = parse_pair(s, "--policy");
    if (a < 0 || b < 0 || a != static_cast<double>(static_cast<long long>(a)) ||
        b != static_cast<double>(static_cast<long long>(b)))
        throw std::invalid_argument("--policy thresholds must be nonnegative integers");
    return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
}

void emit(const Table& t, const ExperimentConfig& cfg) {
    if (cfg.out.empty()) {
        std::cout << t.to_csv();
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file " + cfg.out);
    f << t.to_csv();
    std::cout << "wrote " << t.rows.size() << " rows to " << cfg.out << "\n";
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

int run(const ExperimentConfig& cfg, bool symmetric, std::size_t max_iter) {
    const auto& m = cfg.params;
    m.validate();
    std::printf("params p=%g q=%g p_s=%g beta=%g lambda=%g\n", m.p, m.q, m.p_s, m.beta, m.lambda);
    const SearchOptions sopt{cfg.epsilon, cfg.n_max, 2};

    switch (cfg.mode) {
    case Mode::Evaluate: {
        const auto r = run_evaluate(cfg);
        std::printf("policy %s  C=%s  F=%s  L=%s\n", r.policy.c_str(), fmt_double(r.cost.metrics.avg_cost).c_str(),
                    fmt_double(r.cost.metrics.frequency).c_str(), fmt_double(r.cost.metrics.objective).c_str());
        emit(evaluation_table(r), cfg);
        return kExitOk;
    }
    case Mode::Search: {
        const auto r = symmetric ? symmetric_search(m, sopt) : algorithm1(m, sopt);
        std::printf("best %s  L=%s  N=%zu  evaluations=%zu%s\n", r.best_policy.to_string().c_str(),
                    fmt_double(r.best_metrics.objective).c_str(), r.truncation, r.evaluations,
                    r.family_restricted ? "  (family-restricted: p > 1 - q)" : "");
        Table t;
        t.header = {"ma_threshold", "fa_threshold", "avg_cost", "frequency", "objective",
                    "evaluations", "truncation", "sigma_bound", "family_restricted"};
        t.rows.push_back({std::to_string(r.best_policy.ma_threshold), std::to_string(r.best_policy.fa_threshold),
                          fmt_double(r.best_metrics.avg_cost), fmt_double(r.best_metrics.frequency),
                          fmt_double(r.best_metrics.objective), std::to_string(r.evaluations),
                          std::to_string(r.truncation), fmt_double(r.sigma_bound),
                          r.family_restricted ? "1" : "0"});
        emit(t, cfg);
        return kExitOk;
    }
    case Mode::Rvi: {
        const std::size_t n = cfg.truncation.value_or(select_truncation(m, cfg.epsilon, cfg.n_max));
        RviOptions opt;
        opt.max_iter = max_iter;
        const auto sol = rvi_solve(build_truncated_mdp(m, n), opt);
        const auto st = check_switching_structure(sol.policy);
        const auto sw = st.as_switching(n);
        std::printf("rho=%s  N=%zu  iterations=%zu  switching=%s%s\n", fmt_double(sol.value.rho).c_str(), n,
                    sol.iterations, yes_no(st.is_switching()).c_str(),
                    sw ? ("  thresholds " + sw->to_string()).c_str() : "");
        Table t;
        t.header = {"rho", "truncation", "iterations", "span", "switching", "ma_threshold", "fa_threshold"};
        t.rows.push_back({fmt_double(sol.value.rho), std::to_string(n), std::to_string(sol.iterations),
                          fmt_double(sol.span), st.is_switching() ? "1" : "0",
                          sw ? std::to_string(sw->ma_threshold) : "", sw ? std::to_string(sw->fa_threshold) : ""});
        emit(t, cfg);
        return kExitOk;
    }
    case Mode::Sweep: {
        std::printf("sweep over %s%s\n", axis_name(cfg.axis),
                    cfg.preset.empty() ? "" : (" (preset " + cfg.preset + ")").c_str());
        emit(run_sweep(cfg), cfg);
        return kExitOk;
    }
    case Mode::Crosscheck: {
        const auto rep = run_crosscheck(cfg);
        for (const auto& c : rep.checks)
            std::printf("%-20s %s  deviation=%s  tolerance=%s  %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                        fmt_double(c.deviation).c_str(), fmt_double(c.tolerance).c_str(), c.detail.c_str());
        emit(crosscheck_table(rep), cfg);
        return rep.passed() ? kExitOk : kExitCheckFailed;
    }
    case Mode::Simulate: {
        SimPolicy pol;
        PolicyMetrics analytic;
        if (cfg.policy) {
            pol = *cfg.policy;
            analytic = switching_metrics(m, *cfg.policy);
        } else if (cfg.rates) {
            pol = *cfg.rates;
            analytic = randomized_metrics(m, *cfg.rates);
        } else {
            throw std::invalid_argument("simulate needs --policy or --rates");
        }
        const auto r = simulate(m, pol, cfg.sim);
        std::printf("empirical L=%s (se %s)  analytic L=%s  slots=%llu\n", fmt_double(r.metrics.objective).c_str(),
                    fmt_double(r.standard_errors.objective).c_str(), fmt_double(analytic.objective).c_str(),
                    static_cast<unsigned long long>(r.slots));
        Table t;
        t.header = {"avg_cost", "avg_cost_se", "frequency", "frequency_se", "objective", "objective_se",
                    "analytic_objective", "transmissions", "slots", "seed"};
        t.rows.push_back({fmt_double(r.metrics.avg_cost), fmt_double(r.standard_errors.avg_cost),
                          fmt_double(r.metrics.frequency), fmt_double(r.standard_errors.frequency),
                          fmt_double(r.metrics.objective), fmt_double(r.standard_errors.objective),
                          fmt_double(analytic.objective), std::to_string(r.transmissions), std::to_string(r.slots),
                          std::to_string(cfg.sim.seed)});
        emit(t, cfg);
        return kExitOk;
    }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transmission scheduling for remote estimation of a two-state alarm source"};
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");

    ExperimentConfig d;
    double p = d.params.p, q = d.params.q, ps = d.params.p_s, beta = d.params.beta, lambda = d.params.lambda;
    std::string mode = "evaluate", policy, rates, preset_name, axis, grid;
    double epsilon = d.epsilon;
    std::size_t nmax = d.n_max, truncation = 0, grid_cap = d.grid_cap, max_iter = 1000000;
    std::uint64_t horizon = d.sim.horizon, seed = d.sim.seed, burn_in = d.sim.burn_in;
    bool symmetric = false;

    auto* o_p = app.add_option("--p", p, "P(0 -> 1) of the source");
    auto* o_q = app.add_option("--q", q, "P(1 -> 0) of the source");
    auto* o_ps = app.add_option("--ps", ps, "channel success probability");
    auto* o_beta = app.add_option("--beta", beta, "weight of the missed-alarm age");
    auto* o_lambda = app.add_option("--lambda", lambda, "price per transmission");
    auto* o_mode = app.add_option("--mode", mode, "evaluate | search | rvi | sweep | crosscheck | simulate");
    auto* o_policy = app.add_option("--policy", policy, "switching thresholds MA,FA");
    auto* o_rates = app.add_option("--rates", rates, "randomized policy rates f0,f1");
    auto* o_eps = app.add_option("--epsilon", epsilon, "truncation error target");
    auto* o_nmax = app.add_option("--nmax", nmax, "largest truncation size allowed");
    auto* o_trunc = app.add_option("--truncation", truncation, "explicit truncation size N (rvi, evaluate)");
    auto* o_horizon = app.add_option("--horizon", horizon, "simulated slots T");
    auto* o_seed = app.add_option("--seed", seed, "simulation seed");
    auto* o_burn = app.add_option("--burn-in", burn_in, "slots discarded before averaging");
    auto* o_axis = app.add_option("--axis", axis, "sweep axis: thresholds | beta | lambda | p | q | ps");
    auto* o_grid = app.add_option("--grid", grid, "sweep grid start:stop:step");
    auto* o_cap = app.add_option("--grid-cap", grid_cap, "largest sweep grid accepted");
    app.add_option("--max-iter", max_iter, "RVI iteration budget");
    app.add_flag("--symmetric", symmetric, "diagonal-only search (p = q, beta = 0.5)");
    auto* o_out = app.add_option("--out", d.out, "CSV output path");
    app.add_option("--preset", preset_name, "fig5a | fig5b | fig5c | fig6 | fig7");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        ExperimentConfig cfg = preset_name.empty() ? ExperimentConfig{} : preset(preset_name);
        auto given = [](const CLI::Option* o) { return o->count() > 0; };
        if (given(o_p)) cfg.params.p = p;
        if (given(o_q)) cfg.params.q = q;
        if (given(o_ps)) cfg.params.p_s = ps;
        if (given(o_beta)) cfg.params.beta = beta;
        if (given(o_lambda)) cfg.params.lambda = lambda;
        if (given(o_mode)) cfg.mode = parse_mode(mode);
        if (given(o_policy)) cfg.policy = parse_policy(policy);
        if (given(o_rates)) {
            const auto [f0, f1] = parse_pair(rates, "--rates");
            cfg.rates = RandomizedPolicy{f0, f1};
            cfg.rates->validate();
        }
        if (given(o_eps)) cfg.epsilon = epsilon;
        if (given(o_nmax)) cfg.n_max = nmax;
        if (given(o_trunc)) cfg.truncation = truncation;
        if (given(o_horizon)) cfg.sim.horizon = horizon;
        if (given(o_seed)) cfg.sim.seed = seed;
        if (given(o_burn)) cfg.sim.burn_in = burn_in;
        if (given(o_axis)) cfg.axis = parse_axis(axis);
        if (given(o_grid)) cfg.grid = parse_grid(grid);
        if (given(o_cap)) cfg.grid_cap = grid_cap;
        if (given(o_out)) cfg.out = d.out;
        return run(cfg, symmetric, max_iter);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
