#pragma once

// Experiment runners behind the command-line tool: single-policy evaluation,
// searches, RVI, parameter sweeps with CSV output, and oracle cross-checks.

#include "aoma/analytic.hpp"
#include "aoma/mdp.hpp"
#include "aoma/model.hpp"
#include "aoma/oracle.hpp"
#include "aoma/policy.hpp"
#include "aoma/search.hpp"
#include "aoma/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace aoma {

enum class Mode { Evaluate, Search, Rvi, Sweep, Crosscheck, Simulate };
enum class SweepAxis { Thresholds, Beta, Lambda, P, Q, Ps };

/// Exit status of the command-line runner.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitCheckFailed = 2, kExitNoConvergence = 3 };

inline Mode parse_mode(const std::string& s) {
    if (s == "evaluate") return Mode::Evaluate;
    if (s == "search") return Mode::Search;
    if (s == "rvi") return Mode::Rvi;
    if (s == "sweep") return Mode::Sweep;
    if (s == "crosscheck") return Mode::Crosscheck;
    if (s == "simulate") return Mode::Simulate;
    throw std::invalid_argument("unknown mode: " + s);
}

inline SweepAxis parse_axis(const std::string& s) {
    if (s == "thresholds") return SweepAxis::Thresholds;
    if (s == "beta") return SweepAxis::Beta;
    if (s == "lambda") return SweepAxis::Lambda;
    if (s == "p") return SweepAxis::P;
    if (s == "q") return SweepAxis::Q;
    if (s == "ps") return SweepAxis::Ps;
    throw std::invalid_argument("unknown sweep axis: " + s);
}

inline const char* axis_name(SweepAxis a) {
    switch (a) {
    case SweepAxis::Thresholds: return "thresholds";
    case SweepAxis::Beta: return "beta";
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::P: return "p";
    case SweepAxis::Q: return "q";
    default: return "ps";
    }
}

/// Inclusive grid start, start + step, ..., stop.
struct Grid {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::vector<double> values() const {
        if (!(step > 0.0) || stop < start) throw std::invalid_argument("empty or malformed grid");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> v(n);
        // round away the accumulated binary noise so CSV values read as typed
        for (std::size_t i = 0; i < n; ++i)
            v[i] = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
        return v;
    }
};

inline Grid parse_grid(const std::string& s) {
    Grid g;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> g.start >> c1 >> g.stop >> c2 >> g.step) || c1 != ':' || c2 != ':' || !in.eof())
        throw std::invalid_argument("grid must read start:stop:step, got " + s);
    g.values();
    return g;
}

struct ExperimentConfig {
    ModelParams params = ModelParams::make(0.2, 0.3, 0.9, 0.8, 8.0);
    Mode mode = Mode::Evaluate;
    std::optional<SwitchingPolicy> policy;
    std::optional<RandomizedPolicy> rates;
    SweepAxis axis = SweepAxis::Lambda;
    Grid grid{0.0, 0.3, 0.01};
    std::size_t grid_cap = 100000;
    double epsilon = 1e-10;
    std::size_t n_max = 100000;
    std::optional<std::size_t> truncation; ///< explicit N for rvi / evaluate
    SimConfig sim;
    std::string out;
    std::string preset;
};

/// Named parameter sets of the numerical study.
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    c.mode = Mode::Sweep;
    if (name == "fig5a" || name == "fig5b" || name == "fig5c") {
        c.axis = SweepAxis::Thresholds;
        c.grid = {0.0, 30.0, 1.0};
        if (name == "fig5a") c.params = ModelParams::make(0.2, 0.3, 0.9, 0.8, 8.0);
        if (name == "fig5b") c.params = ModelParams::make(0.25, 0.25, 0.9, 0.5, 8.0);
        if (name == "fig5c") c.params = ModelParams::make(0.25, 0.25, 0.9, 0.8, 8.0);
    } else if (name == "fig6") {
        c.axis = SweepAxis::Beta;
        c.grid = {0.05, 0.95, 0.05};
        c.params = ModelParams::make(0.25, 0.25, 0.9, 0.5, 1.0);
    } else if (name == "fig7") {
        c.axis = SweepAxis::Lambda;
        c.grid = {0.0, 0.3, 0.01};
        c.params = ModelParams::make(0.2, 0.25, 0.9, 0.5, 0.1);
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return c;
}

/// Shortest decimal form that round-trips ("%.17g").
inline std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header plus rows, all cells already formatted.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const {
        std::string s;
        auto line = [&s](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) s += ',';
                const auto& c = cells[i];
                if (c.find_first_of(",\"\n") == std::string::npos) {
                    s += c;
                    continue;
                }
                s += '"';
                for (char ch : c) {
                    if (ch == '"') s += '"';
                    s += ch;
                }
                s += '"';
            }
            s += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return s;
    }
};

/// Evaluate f(0..n-1) on a small worker pool; results keep index order.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, F f) {
    std::vector<T> out(n);
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](std::size_t w) {
        try {
            for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

struct EvaluationRecord {
    std::string policy;
    CostBreakdown cost;
    double missed_occupancy = 0.0;
    double false_occupancy = 0.0;
    std::optional<std::size_t> truncation;
    std::optional<double> sigma;
};

inline EvaluationRecord run_evaluate(const ExperimentConfig& cfg) {
    const auto& m = cfg.params;
    m.validate();
    EvaluationRecord r;
    if (cfg.policy) {
        const auto& pol = *cfg.policy;
        r.policy = pol.to_string();
        r.cost = switching_breakdown(m, pol);
        const auto d = switching_stationary(m, pol);
        r.missed_occupancy = occupancy_rate(d, ErrorClass::MissedAlarm);
        r.false_occupancy = occupancy_rate(d, ErrorClass::FalseAlarm);
        if (cfg.truncation) {
            r.truncation = cfg.truncation;
            r.sigma = truncation_gap(m, pol, *cfg.truncation);
        }
    } else if (cfg.rates) {
        r.policy = cfg.rates->to_string();
        r.cost = randomized_breakdown(m, *cfg.rates);
        const auto d = randomized_stationary(m, *cfg.rates);
        r.missed_occupancy = occupancy_rate(d, ErrorClass::MissedAlarm);
        r.false_occupancy = occupancy_rate(d, ErrorClass::FalseAlarm);
    } else {
        throw std::invalid_argument("evaluate needs --policy or --rates");
    }
    return r;
}

inline Table evaluation_table(const EvaluationRecord& r) {
    Table t;
    t.header = {"policy", "avg_cost", "missed_cost", "false_cost", "frequency", "objective",
                "missed_occupancy", "false_occupancy", "truncation", "sigma"};
    t.rows.push_back({r.policy, fmt_double(r.cost.metrics.avg_cost), fmt_double(r.cost.missed),
                      fmt_double(r.cost.falsed), fmt_double(r.cost.metrics.frequency),
                      fmt_double(r.cost.metrics.objective), fmt_double(r.missed_occupancy),
                      fmt_double(r.false_occupancy), r.truncation ? std::to_string(*r.truncation) : "",
                      r.sigma ? fmt_double(*r.sigma) : ""});
    return t;
}

/// One point of a parameter sweep: optimum of the switching family, best
/// diagonal threshold policy and best age-agnostic policy, compared against it.
struct ComparisonRow {
    double value = 0.0;
    SearchResult optimal;
    SearchResult diagonal;
    RandomizedSearchResult randomized;
    double gap_diagonal = 0.0;
    double gap_randomized = 0.0;
    double kl_diagonal = 0.0;
    double kl_randomized = 0.0;
    double missed_occupancy = 0.0; ///< under the optimal switching policy
};

inline ModelParams with_axis(ModelParams m, SweepAxis axis, double v) {
    switch (axis) {
    case SweepAxis::Beta: m.beta = v; break;
    case SweepAxis::Lambda: m.lambda = v; break;
    case SweepAxis::P: m.p = v; break;
    case SweepAxis::Q: m.q = v; break;
    case SweepAxis::Ps: m.p_s = v; break;
    case SweepAxis::Thresholds: break;
    }
    m.validate();
    return m;
}

inline ComparisonRow compare_policies(const ModelParams& m, const SearchOptions& opt) {
    ComparisonRow r;
    r.optimal = algorithm1(m, opt);
    r.diagonal = diagonal_search(m, r.optimal.truncation);
    r.randomized = best_randomized(m);
    r.gap_diagonal = performance_gap(r.diagonal.best_metrics, r.optimal.best_metrics);
    r.gap_randomized = performance_gap(r.randomized.metrics, r.optimal.best_metrics);

    const auto& po = r.optimal.best_policy;
    const auto& pd = r.diagonal.best_policy;
    const std::size_t h = std::max({default_horizon(m, po), default_horizon(m, pd),
                                    default_horizon(m, r.randomized.policy)});
    const auto d_opt = switching_stationary(m, po, h);
    r.kl_diagonal = kl_policy_distance(switching_stationary(m, pd, h), d_opt);
    r.kl_randomized = kl_policy_distance(randomized_stationary(m, r.randomized.policy, h), d_opt);
    r.missed_occupancy = occupancy_rate(d_opt, ErrorClass::MissedAlarm);
    return r;
}

inline std::vector<ComparisonRow> run_comparison_sweep(const ExperimentConfig& cfg) {
    const auto vals = cfg.grid.values();
    if (vals.size() > cfg.grid_cap) throw std::invalid_argument("grid exceeds the configured cap");
    const SearchOptions opt{cfg.epsilon, cfg.n_max, 2};
    return parallel_map<ComparisonRow>(vals.size(), [&](std::size_t i) {
        auto r = compare_policies(with_axis(cfg.params, cfg.axis, vals[i]), opt);
        r.value = vals[i];
        return r;
    });
}

/// CSV of a sweep. Threshold sweeps list L over the grid {0..max}^2; the
/// other axes list one policy comparison per grid value.
inline Table run_sweep(const ExperimentConfig& cfg) {
    cfg.params.validate();
    Table t;
    if (cfg.axis == SweepAxis::Thresholds) {
        const auto vals = cfg.grid.values();
        const std::size_t side = vals.size();
        if (side * side > cfg.grid_cap) throw std::invalid_argument("grid exceeds the configured cap");
        for (double v : vals)
            if (v < 0.0 || v != std::floor(v)) throw std::invalid_argument("threshold grid must be nonnegative integers");
        t.header = {"ma_threshold", "fa_threshold", "avg_cost", "frequency", "objective"};
        t.rows = parallel_map<std::vector<std::string>>(side * side, [&](std::size_t i) {
            const auto ma = static_cast<std::size_t>(vals[i / side]);
            const auto fa = static_cast<std::size_t>(vals[i % side]);
            const auto mt = switching_metrics(cfg.params, {ma, fa});
            return std::vector<std::string>{std::to_string(ma), std::to_string(fa), fmt_double(mt.avg_cost),
                                            fmt_double(mt.frequency), fmt_double(mt.objective)};
        });
        return t;
    }
    t.header = {axis_name(cfg.axis), "opt_ma", "opt_fa", "opt_objective", "diag_threshold", "diag_objective",
                "rand_f0", "rand_f1", "rand_objective", "gap_diagonal", "gap_randomized", "kl_diagonal",
                "kl_randomized", "missed_occupancy", "truncation"};
    for (const auto& r : run_comparison_sweep(cfg)) {
        t.rows.push_back({fmt_double(r.value), std::to_string(r.optimal.best_policy.ma_threshold),
                          std::to_string(r.optimal.best_policy.fa_threshold),
                          fmt_double(r.optimal.best_metrics.objective),
                          std::to_string(r.diagonal.best_policy.ma_threshold),
                          fmt_double(r.diagonal.best_metrics.objective), fmt_double(r.randomized.policy.f0),
                          fmt_double(r.randomized.policy.f1), fmt_double(r.randomized.metrics.objective),
                          fmt_double(r.gap_diagonal), fmt_double(r.gap_randomized), fmt_double(r.kl_diagonal),
                          fmt_double(r.kl_randomized), fmt_double(r.missed_occupancy),
                          std::to_string(r.optimal.truncation)});
    }
    return t;
}

/// sigma(pi, N) as used by the cross-check; replaceable for negative controls.
using SigmaFn = std::function<double(const ModelParams&, const SwitchingPolicy&, std::size_t)>;

struct CheckTolerances {
    double stationary = 1e-8;
    double cost = 1e-8;
    double truncation = 1e-10;
    double solver = 1e-6; ///< plus the sigma bound at the search truncation
    double sim_standard_errors = 3.0;
};

struct CheckOutcome {
    std::string name;
    bool passed = false;
    double deviation = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct CrosscheckReport {
    std::vector<CheckOutcome> checks;
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
    }
};

struct CrosscheckOptions {
    CheckTolerances tol;
    SigmaFn sigma = truncation_gap;
    bool simulate = true;
};

/// Compare every evaluation route on one parameter set. The policy under test
/// is cfg.policy, or the searched optimum when none is given.
inline CrosscheckReport run_crosscheck(const ExperimentConfig& cfg, const CrosscheckOptions& opt = {}) {
    const auto& m = cfg.params;
    m.validate();
    CrosscheckReport rep;
    auto add = [&](std::string name, double dev, double tol, std::string detail = {}) {
        rep.checks.push_back({std::move(name), dev <= tol, dev, tol, std::move(detail)});
    };

    const auto search = algorithm1(m, SearchOptions{cfg.epsilon, cfg.n_max, 2});
    const SwitchingPolicy pol = cfg.policy.value_or(search.best_policy);
    const std::size_t n = std::max(search.truncation, pol.max_threshold() + 1);

    // closed form vs linear solve on S_N
    const auto orc = oracle::solve(m, pol, n);
    add("stationary_masses", truncated_stationary(m, pol, n).max_abs_diff(orc.distribution), opt.tol.stationary);
    add("objective_vs_oracle",
        std::abs(truncated_metrics(m, pol, n).objective - orc.metrics.objective), opt.tol.cost);

    // L - L_N = sigma at several truncation sizes, including ones where sigma is not negligible
    double worst = 0.0;
    const double full = switching_metrics(m, pol).objective;
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{10}}) {
        const std::size_t nn = pol.max_threshold() + k;
        if (nn < 2) continue;
        const double lhs = full - truncated_metrics(m, pol, nn).objective;
        worst = std::max(worst, std::abs(lhs - opt.sigma(m, pol, nn)));
    }
    add("truncation_identity", worst, opt.tol.truncation);

    // search vs relative value iteration on the same truncation
    const auto rvi = rvi_solve(build_truncated_mdp(m, search.truncation));
    const double solver_tol = opt.tol.solver + search.sigma_bound;
    add("search_vs_rvi", std::abs(search.best_metrics.objective - rvi.value.rho), solver_tol,
        "rho=" + fmt_double(rvi.value.rho));
    const auto structure = check_switching_structure(rvi.policy);
    if (m.switching_structure_guaranteed()) {
        const auto sw = structure.as_switching(search.truncation);
        const bool same = sw && *sw == search.best_policy;
        add("rvi_thresholds", same ? 0.0 : 1.0, 0.0,
            "search=" + search.best_policy.to_string() + " rvi=" + (sw ? sw->to_string() : "non-switching"));
    }

    if (opt.simulate) {
        const auto sim = simulate(m, pol, cfg.sim);
        const double se = sim.standard_errors.objective;
        const double dev = std::abs(sim.metrics.objective - full);
        // a zero standard error (deterministic path) demands exact agreement up to rounding
        add("simulation", se > 0.0 ? dev / se : (dev < 1e-9 ? 0.0 : std::numeric_limits<double>::infinity()), opt.tol.sim_standard_errors,
            "empirical=" + fmt_double(sim.metrics.objective) + " se=" + fmt_double(se));
    }
    return rep;
}

inline Table crosscheck_table(const CrosscheckReport& r) {
    Table t;
    t.header = {"check", "passed", "deviation", "tolerance", "detail"};
    for (const auto& c : r.checks)
        t.rows.push_back({c.name, c.passed ? "1" : "0", fmt_double(c.deviation), fmt_double(c.tolerance), c.detail});
    return t;
}

} // namespace aoma
