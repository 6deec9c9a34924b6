#pragma once

#include "aoma/model.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace aoma {

enum class ErrorClass { MissedAlarm, FalseAlarm };

/// Geometric continuation of an error branch beyond the enumerated horizon:
/// mass(horizon + 1 + j) = next_mass * ratio^j.
struct GeometricTail {
    double ratio = 0.0;
    double next_mass = 0.0;

    double mass() const { return next_mass == 0.0 ? 0.0 : next_mass / (1.0 - ratio); }
    /// sum over the tail of (age - horizon) * mass
    double excess_age_moment() const {
        return next_mass == 0.0 ? 0.0 : next_mass / ((1.0 - ratio) * (1.0 - ratio));
    }
};

/// Probability mass over {Synced(0), Synced(1)} and error ages 1..horizon of
/// both branches, plus the analytic tails beyond the horizon. Finite chains
/// (truncated problems, empirical histograms) carry empty tails.
struct StationaryDistribution {
    double synced0 = 0.0;
    double synced1 = 0.0;
    std::vector<double> missed; ///< missed[k - 1] = mass of MissedAlarm(k)
    std::vector<double> falsed; ///< falsed[k - 1] = mass of FalseAlarm(k)
    GeometricTail missed_tail;
    GeometricTail false_tail;

    static StationaryDistribution with_horizon(std::size_t horizon) {
        StationaryDistribution d;
        d.missed.assign(horizon, 0.0);
        d.falsed.assign(horizon, 0.0);
        return d;
    }

    std::size_t horizon() const { return missed.size(); }

    /// Copy with each geometric tail absorbed into the last enumerated age,
    /// i.e. the distribution of the chain with ages clamped at the horizon.
    StationaryDistribution folded() const {
        if (horizon() == 0) throw std::logic_error("cannot fold into an empty horizon");
        StationaryDistribution d = *this;
        d.missed.back() += missed_tail.mass();
        d.falsed.back() += false_tail.mass();
        d.missed_tail = {};
        d.false_tail = {};
        return d;
    }

    /// Mass of s; ages past the horizon are read from the geometric tail.
    double mass(const SystemState& s) const {
        if (s.is_synced()) return s.source() == 0 ? synced0 : synced1;
        const auto& branch = s.kind() == StateKind::MissedAlarm ? missed : falsed;
        const auto& tail = s.kind() == StateKind::MissedAlarm ? missed_tail : false_tail;
        if (s.age() <= branch.size()) return branch[s.age() - 1];
        return tail.next_mass * std::pow(tail.ratio, static_cast<double>(s.age() - branch.size() - 1));
    }

    double& at(const SystemState& s) {
        if (s.is_synced()) return s.source() == 0 ? synced0 : synced1;
        auto& branch = s.kind() == StateKind::MissedAlarm ? missed : falsed;
        if (s.age() > branch.size()) throw std::out_of_range("age beyond enumerated horizon");
        return branch[s.age() - 1];
    }

    double enumerated_mass() const {
        return synced0 + synced1 + std::accumulate(missed.begin(), missed.end(), 0.0) +
               std::accumulate(falsed.begin(), falsed.end(), 0.0);
    }
    double tail_mass() const { return missed_tail.mass() + false_tail.mass(); }
    double total_mass() const { return enumerated_mass() + tail_mass(); }

    /// Total mass of one error class, tail included.
    double branch_mass(ErrorClass c) const {
        const auto& branch = c == ErrorClass::MissedAlarm ? missed : falsed;
        const auto& tail = c == ErrorClass::MissedAlarm ? missed_tail : false_tail;
        return std::accumulate(branch.begin(), branch.end(), 0.0) + tail.mass();
    }

    /// sum_k k * mass(k) over one error branch, tail included.
    double branch_age_moment(ErrorClass c) const {
        const auto& branch = c == ErrorClass::MissedAlarm ? missed : falsed;
        const auto& tail = c == ErrorClass::MissedAlarm ? missed_tail : false_tail;
        double s = 0.0;
        for (std::size_t k = 0; k < branch.size(); ++k) s += static_cast<double>(k + 1) * branch[k];
        return s + static_cast<double>(branch.size()) * tail.mass() + tail.excess_age_moment();
    }

    /// Expected stage cost beta * E[AoMA] + (1 - beta) * E[AoFA].
    double expected_stage_cost(const ModelParams& m) const {
        return m.beta * branch_age_moment(ErrorClass::MissedAlarm) +
               (1.0 - m.beta) * branch_age_moment(ErrorClass::FalseAlarm);
    }

    /// Largest absolute difference over the enumerated states; horizons must match.
    double max_abs_diff(const StationaryDistribution& o) const {
        if (o.horizon() != horizon()) throw std::invalid_argument("horizon mismatch");
        double d = std::max(std::abs(synced0 - o.synced0), std::abs(synced1 - o.synced1));
        for (std::size_t k = 0; k < horizon(); ++k) {
            d = std::max(d, std::abs(missed[k] - o.missed[k]));
            d = std::max(d, std::abs(falsed[k] - o.falsed[k]));
        }
        return d;
    }
};

/// Average estimation cost C, transmission frequency F and objective L = C + lambda F.
struct PolicyMetrics {
    double avg_cost = 0.0;
    double frequency = 0.0;
    double objective = 0.0;

    static PolicyMetrics from(double cost, double frequency, double lambda) {
        return {cost, frequency, cost + lambda * frequency};
    }
};

/// Stationary fraction of time spent in the given error class.
inline double occupancy_rate(const StationaryDistribution& d, ErrorClass c) {
    return d.branch_mass(c);
}

} // namespace aoma
