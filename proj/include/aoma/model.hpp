#pragma once

// Two-state (normal/alarm) Markov source observed over an erasure channel.
// States, parameters, the controlled transition kernel and the stage costs.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoma {

/// Source, channel and cost parameters of the remote estimation problem.
struct ModelParams {
    double p = 0.2;      ///< Pr[normal -> alarm]
    double q = 0.3;      ///< Pr[alarm -> normal]
    double p_s = 0.9;    ///< channel success probability
    double beta = 0.8;   ///< significance of a missed alarm
    double lambda = 8.0; ///< cost per transmission

    /// Throws std::invalid_argument when any field is outside its domain.
    void validate() const {
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("p must lie in (0, 1)");
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("q must lie in (0, 1)");
        if (!(p_s > 0.0 && p_s <= 1.0))
            throw std::invalid_argument("p_s must lie in (0, 1]");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("beta must lie in [0, 1]");
        if (!(lambda >= 0.0))
            throw std::invalid_argument("lambda must be nonnegative");
    }

    static ModelParams make(double p, double q, double p_s, double beta, double lambda) {
        ModelParams m{p, q, p_s, beta, lambda};
        m.validate();
        return m;
    }

    double p_bar() const { return 1.0 - p; }
    double q_bar() const { return 1.0 - q; }
    double p_f() const { return 1.0 - p_s; }

    /// Stationary mass of the source in the normal state.
    double nu0() const { return q / (p + q); }
    /// Stationary mass of the source in the alarm state.
    double nu1() const { return p / (p + q); }

    bool positively_correlated() const { return p < 1.0 - q; }
    /// The pure two-threshold structure is guaranteed when p <= 1 - q.
    bool switching_structure_guaranteed() const { return p <= 1.0 - q; }
    bool symmetric() const { return p == q; }
};

enum class StateKind : std::uint8_t { Synced, MissedAlarm, FalseAlarm };

/// System state (X, X_hat, age). Exactly one of three shapes:
/// Synced(x) with age 0, MissedAlarm(age) = (1, 0, age), FalseAlarm(age) = (0, 1, age).
class SystemState {
public:
    static constexpr SystemState synced(int source) {
        if (source != 0 && source != 1)
            throw std::invalid_argument("synced state needs a source bit");
        return SystemState(StateKind::Synced, source, 0);
    }
    static constexpr SystemState missed_alarm(std::size_t age) {
        if (age < 1) throw std::invalid_argument("missed-alarm age must be >= 1");
        return SystemState(StateKind::MissedAlarm, 1, age);
    }
    static constexpr SystemState false_alarm(std::size_t age) {
        if (age < 1) throw std::invalid_argument("false-alarm age must be >= 1");
        return SystemState(StateKind::FalseAlarm, 0, age);
    }

    constexpr StateKind kind() const { return kind_; }
    constexpr int source() const { return source_; }
    constexpr int estimate() const {
        return kind_ == StateKind::Synced ? source_ : 1 - source_;
    }
    constexpr std::size_t age() const { return age_; }
    constexpr bool is_synced() const { return kind_ == StateKind::Synced; }

    constexpr std::size_t missed_age() const {
        return kind_ == StateKind::MissedAlarm ? age_ : 0;
    }
    constexpr std::size_t false_age() const {
        return kind_ == StateKind::FalseAlarm ? age_ : 0;
    }

    /// Same error class with a different age; Synced states are returned unchanged.
    constexpr SystemState with_age(std::size_t age) const {
        switch (kind_) {
        case StateKind::MissedAlarm: return missed_alarm(age);
        case StateKind::FalseAlarm: return false_alarm(age);
        default: return *this;
        }
    }

    constexpr auto operator<=>(const SystemState&) const = default;

    std::string to_string() const {
        switch (kind_) {
        case StateKind::Synced: return "Synced(" + std::to_string(source_) + ")";
        case StateKind::MissedAlarm: return "MA(" + std::to_string(age_) + ")";
        default: return "FA(" + std::to_string(age_) + ")";
        }
    }

private:
    constexpr SystemState(StateKind k, int x, std::size_t age) : kind_(k), source_(x), age_(age) {}

    StateKind kind_;
    int source_;
    std::size_t age_;
};

/// true = sample and transmit; the sample X_{t+1} is delivered in the next slot.
enum class Action : std::uint8_t { Idle = 0, Transmit = 1 };

constexpr bool transmits(Action a) { return a == Action::Transmit; }

struct TransitionEntry {
    SystemState next_state;
    double probability;
};

namespace detail {

inline double source_step(const ModelParams& m, int from, int to) {
    if (from == 0) return to == 0 ? m.p_bar() : m.p;
    return to == 1 ? m.q_bar() : m.q;
}

} // namespace detail

/// Exact support of P_{s,s'}(a). A transmission samples X_{t+1} and reaches
/// the receiver with probability p_s; a persistent mismatch ages by one,
/// agreement resets the age. Zero-probability branches (p_s = 1) are kept so
/// the support shape depends only on (s, a).
inline std::vector<TransitionEntry> transition_kernel(const ModelParams& m, const SystemState& s,
                                                      Action a) {
    std::vector<TransitionEntry> out;
    out.reserve(3);
    const int estimate = s.estimate();
    for (int next = 0; next <= 1; ++next) {
        const double pr = detail::source_step(m, s.source(), next);
        if (next == estimate) {
            out.push_back({SystemState::synced(next), pr});
            continue;
        }
        const std::size_t next_age = s.age() + 1;
        const SystemState error = next == 1 ? SystemState::missed_alarm(next_age)
                                            : SystemState::false_alarm(next_age);
        if (transmits(a)) {
            out.push_back({SystemState::synced(next), pr * m.p_s});
            out.push_back({error, pr * m.p_f()});
        } else {
            out.push_back({error, pr});
        }
    }
    return out;
}

/// beta * AoMA + (1 - beta) * AoFA.
inline double stage_cost(const ModelParams& m, const SystemState& s) {
    return m.beta * static_cast<double>(s.missed_age()) +
           (1.0 - m.beta) * static_cast<double>(s.false_age());
}

/// E[c(S_{t+1}) | s, a] + lambda * 1{a = 1}.
inline double expected_stage_cost(const ModelParams& m, const SystemState& s, Action a) {
    double c = 0.0;
    for (const auto& e : transition_kernel(m, s, a)) c += e.probability * stage_cost(m, e.next_state);
    return c + (transmits(a) ? m.lambda : 0.0);
}

} // namespace aoma
