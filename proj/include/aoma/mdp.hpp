#pragma once

// Finite-state approximation of the transmission MDP (ages clamped at N) and
// its average-cost solution by relative value iteration.

#include "aoma/model.hpp"
#include "aoma/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoma {

/// Indexing of S_N = {Synced(0), Synced(1)} u {MA(d), FA(d) : 1 <= d <= N}.
/// Layout: 0 -> Synced(0), 1 -> Synced(1), 2..N+1 -> MA(1..N), N+2..2N+1 -> FA(1..N).
class TruncatedStateSpace {
public:
    explicit TruncatedStateSpace(std::size_t n) : n_(n) {
        if (n < 1) throw std::invalid_argument("truncation size must be positive");
    }

    std::size_t truncation() const { return n_; }
    std::size_t size() const { return 2 * n_ + 2; }

    /// Index of s; ages beyond N are clamped to N.
    std::size_t index(const SystemState& s) const {
        const std::size_t age = std::min(s.age(), n_);
        switch (s.kind()) {
        case StateKind::Synced: return static_cast<std::size_t>(s.source());
        case StateKind::MissedAlarm: return 1 + age;
        default: return 1 + n_ + age;
        }
    }

    SystemState state(std::size_t i) const {
        if (i == 0 || i == 1) return SystemState::synced(static_cast<int>(i));
        if (i <= n_ + 1) return SystemState::missed_alarm(i - 1);
        if (i < size()) return SystemState::false_alarm(i - 1 - n_);
        throw std::out_of_range("state index out of range");
    }

private:
    std::size_t n_;
};

struct Edge {
    std::size_t to;
    double probability;
};

/// Transitions and expected stage cost of one (state, action) pair.
struct KernelRow {
    std::vector<Edge> edges;
    double cost = 0.0;
};

struct TruncatedMdp {
    ModelParams params;
    TruncatedStateSpace space{2};
    std::vector<SystemState> states;
    /// rows[a][i] for action a in {Idle, Transmit} and state index i
    std::array<std::vector<KernelRow>, 2> rows;

    std::size_t size() const { return states.size(); }
    std::size_t truncation() const { return space.truncation(); }
    const KernelRow& row(std::size_t i, Action a) const { return rows[static_cast<int>(a)][i]; }
};

/// Clamp every age of the untruncated kernel at N. The expected stage cost is
/// priced on S_N, so a persistent error at the boundary costs beta * N.
inline TruncatedMdp build_truncated_mdp(const ModelParams& m, std::size_t n) {
    m.validate();
    if (n < 2) throw std::invalid_argument("truncation size must be at least 2");
    TruncatedMdp mdp;
    mdp.params = m;
    mdp.space = TruncatedStateSpace(n);
    mdp.states.reserve(mdp.space.size());
    for (std::size_t i = 0; i < mdp.space.size(); ++i) mdp.states.push_back(mdp.space.state(i));

    for (Action a : {Action::Idle, Action::Transmit}) {
        auto& rows = mdp.rows[static_cast<int>(a)];
        rows.resize(mdp.size());
        for (std::size_t i = 0; i < mdp.size(); ++i) {
            KernelRow& row = rows[i];
            for (const auto& e : transition_kernel(m, mdp.states[i], a)) {
                const std::size_t j = mdp.space.index(e.next_state);
                row.cost += e.probability * stage_cost(m, mdp.space.state(j));
                auto it = std::find_if(row.edges.begin(), row.edges.end(),
                                       [j](const Edge& x) { return x.to == j; });
                if (it != row.edges.end())
                    it->probability += e.probability;
                else
                    row.edges.push_back({j, e.probability});
            }
            if (transmits(a)) row.cost += m.lambda;
        }
    }
    return mdp;
}

/// Deterministic stationary policy over S_N; ages beyond N use the action at N.
struct PolicyTable {
    TruncatedStateSpace space{2};
    std::vector<Action> actions;

    PolicyTable() = default;
    PolicyTable(std::size_t n, std::vector<Action> a) : space(n), actions(std::move(a)) {
        if (actions.size() != space.size()) throw std::invalid_argument("policy table is not total over S_N");
    }

    static PolicyTable from_switching(const SwitchingPolicy& pol, std::size_t n) {
        TruncatedStateSpace sp(n);
        std::vector<Action> a(sp.size());
        for (std::size_t i = 0; i < sp.size(); ++i) a[i] = pol.decide(sp.state(i));
        return PolicyTable(n, std::move(a));
    }

    static PolicyTable constant(std::size_t n, Action a) {
        return PolicyTable(n, std::vector<Action>(TruncatedStateSpace(n).size(), a));
    }

    std::size_t truncation() const { return space.truncation(); }
    Action decide(const SystemState& s) const { return actions.at(space.index(s)); }
    Action& at(const SystemState& s) { return actions.at(space.index(s)); }
};

struct ValueFunction {
    std::vector<double> h; ///< relative values, h[reference] == 0
    double rho = 0.0;      ///< average-cost estimate
};

struct RviOptions {
    double tol = 1e-10;
    std::size_t max_iter = 1000000;
    SystemState reference = SystemState::synced(0);
};

struct RviSolution {
    ValueFunction value;
    PolicyTable policy;
    std::size_t iterations = 0;
    double span = 0.0; ///< span of the last one-step update
};

/// Thrown when relative value iteration exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::size_t iterations, double last_span)
        : std::runtime_error("relative value iteration did not converge after " +
                             std::to_string(iterations) + " iterations (span " +
                             std::to_string(last_span) + ")"),
          iterations_(iterations), last_span_(last_span) {}

    std::size_t iterations() const { return iterations_; }
    double last_span() const { return last_span_; }

private:
    std::size_t iterations_;
    double last_span_;
};

inline double q_value(const TruncatedMdp& mdp, const std::vector<double>& h, std::size_t i, Action a) {
    const auto& row = mdp.row(i, a);
    double v = row.cost;
    for (const auto& e : row.edges) v += e.probability * h[e.to];
    return v;
}

/// Greedy action for h; ties go to Idle.
inline Action greedy_action(const TruncatedMdp& mdp, const std::vector<double>& h, std::size_t i) {
    return q_value(mdp, h, i, Action::Transmit) < q_value(mdp, h, i, Action::Idle) ? Action::Transmit
                                                                                   : Action::Idle;
}

/// Relative value iteration with synchronous sweeps. Stops once the span of
/// (T h - h) drops below tol and returns the greedy policy for the final h.
inline RviSolution rvi_solve(const TruncatedMdp& mdp, const RviOptions& opt = {}) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const std::size_t n = mdp.size();
    const std::size_t ref = mdp.space.index(opt.reference);
    std::vector<double> h(n, 0.0), next(n, 0.0);

    double span = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = std::min(q_value(mdp, h, i, Action::Idle), q_value(mdp, h, i, Action::Transmit));
            const double d = next[i] - h[i];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        span = hi - lo;
        const double rho = next[ref] - h[ref];
        const double shift = next[ref];
        for (std::size_t i = 0; i < n; ++i) h[i] = next[i] - shift;

        if (span < opt.tol) {
            RviSolution sol;
            sol.value.rho = rho;
            sol.iterations = it;
            sol.span = span;
            std::vector<Action> acts(n);
            for (std::size_t i = 0; i < n; ++i) acts[i] = greedy_action(mdp, h, i);
            sol.value.h = h;
            sol.policy = PolicyTable(mdp.truncation(), std::move(acts));
            return sol;
        }
    }
    throw ConvergenceError(opt.max_iter, span);
}

inline RviSolution rvi_solve(const TruncatedMdp& mdp, double tol, std::size_t max_iter) {
    RviOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    return rvi_solve(mdp, opt);
}

/// Shape of the transmit set along one error branch, with the synced state as age 0.
struct BranchStructure {
    bool monotone = true;                 ///< transmit at age d implies transmit at d + 1
    std::optional<std::size_t> threshold; ///< smallest transmitting age, if any
};

struct StructureReport {
    BranchStructure missed;
    BranchStructure falsed;
    Action synced0_action = Action::Idle;
    Action synced1_action = Action::Idle;

    bool is_switching() const { return missed.monotone && falsed.monotone; }

    /// The switching policy equivalent to the table; thresholds default to
    /// N + 1 for a branch that never transmits.
    std::optional<SwitchingPolicy> as_switching(std::size_t n) const {
        if (!is_switching()) return std::nullopt;
        return SwitchingPolicy{missed.threshold.value_or(n + 1), falsed.threshold.value_or(n + 1)};
    }
};

inline StructureReport check_switching_structure(const PolicyTable& table) {
    const std::size_t n = table.truncation();
    auto branch = [&](int synced_source, auto make_error) {
        BranchStructure b;
        auto act = [&](std::size_t age) {
            return transmits(table.decide(age == 0 ? SystemState::synced(synced_source) : make_error(age)));
        };
        for (std::size_t age = 0; age <= n; ++age) {
            if (act(age)) {
                if (!b.threshold) b.threshold = age;
            } else if (b.threshold) {
                b.monotone = false;
            }
        }
        return b;
    };
    StructureReport r;
    r.missed = branch(0, [](std::size_t d) { return SystemState::missed_alarm(d); });
    r.falsed = branch(1, [](std::size_t d) { return SystemState::false_alarm(d); });
    r.synced0_action = table.decide(SystemState::synced(0));
    r.synced1_action = table.decide(SystemState::synced(1));
    return r;
}

} // namespace aoma
