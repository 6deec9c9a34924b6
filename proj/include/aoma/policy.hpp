#pragma once

#include "aoma/model.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <ostream>
#include <string>

namespace aoma {

/// Two-threshold switching policy.
///
/// Transmit in MissedAlarm(d) iff d >= ma_threshold and in FalseAlarm(d) iff
/// d >= fa_threshold. A threshold of 0 additionally transmits in the matching
/// synced state: ma_threshold = 0 covers Synced(0), fa_threshold = 0 covers Synced(1).
struct SwitchingPolicy {
    std::size_t ma_threshold = 1;
    std::size_t fa_threshold = 1;

    Action decide(const SystemState& s) const {
        switch (s.kind()) {
        case StateKind::Synced:
            return (s.source() == 0 ? ma_threshold : fa_threshold) == 0 ? Action::Transmit
                                                                        : Action::Idle;
        case StateKind::MissedAlarm:
            return s.age() >= ma_threshold ? Action::Transmit : Action::Idle;
        default:
            return s.age() >= fa_threshold ? Action::Transmit : Action::Idle;
        }
    }

    std::size_t max_threshold() const { return std::max(ma_threshold, fa_threshold); }

    auto operator<=>(const SwitchingPolicy&) const = default;

    std::string to_string() const {
        return "(" + std::to_string(ma_threshold) + "," + std::to_string(fa_threshold) + ")";
    }
};

/// Age-agnostic randomized policy: transmit with probability f0 (f1) while the
/// source is in state 0 (1).
struct RandomizedPolicy {
    double f0 = 1.0;
    double f1 = 1.0;

    /// Both rates must be in (0, 1] for the closed forms to apply.
    void validate() const {
        if (!(f0 > 0.0 && f0 <= 1.0)) throw std::invalid_argument("f0 must lie in (0, 1]");
        if (!(f1 > 0.0 && f1 <= 1.0)) throw std::invalid_argument("f1 must lie in (0, 1]");
    }

    double rate(int source) const { return source == 0 ? f0 : f1; }

    std::string to_string() const {
        return "(" + std::to_string(f0) + "," + std::to_string(f1) + ")";
    }
};

inline std::ostream& operator<<(std::ostream& os, const SwitchingPolicy& p) { return os << p.to_string(); }
inline std::ostream& operator<<(std::ostream& os, const RandomizedPolicy& p) { return os << p.to_string(); }

} // namespace aoma
