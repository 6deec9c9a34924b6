#pragma once

// Closed-form stationary distributions and average costs of age-agnostic
// randomized policies and of switching policies, plus the exact effect of
// truncating the age processes at N.

#include "aoma/distribution.hpp"
#include "aoma/model.hpp"
#include "aoma/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

namespace aoma {

/// Enumeration horizons never extend more than this many ages past the largest threshold.
inline constexpr std::size_t kMaxHorizonExtension = 100000;

/// Mass budget left in the geometric tails by the default horizon.
inline constexpr double kDefaultTailMass = 1e-12;

/// Tail sums of the error branches relative to their synced anchor:
/// a(n) = sum_{k>=n} nu(1,0,k) / nu(0,0,0), b(n) = sum_{k>=n} nu(0,1,k) / nu(1,1,0),
/// evaluated at n = 1 and n = threshold, together with the synced masses.
/// For a zero threshold, a(threshold) is the value that keeps the synced
/// balance equations in the same form as the positive-threshold case.
struct SwitchingCoefficients {
    double a_first = 0.0;     ///< a(1)
    double a_threshold = 0.0; ///< a(ma_threshold)
    double b_first = 0.0;     ///< b(1)
    double b_threshold = 0.0; ///< b(fa_threshold)
    double synced0 = 0.0;     ///< nu(0,0,0)
    double synced1 = 0.0;     ///< nu(1,1,0)
};

namespace detail {

struct BranchSums {
    double first;
    double at_threshold;
};

// One error branch. `enter` is the probability of leaving the synced anchor
// into the branch (p for MA, q for FA), `stay` the persistence probability
// (q_bar for MA, p_bar for FA).
inline BranchSums branch_sums(double enter, double stay, double p_f, std::size_t threshold) {
    const double r = stay * p_f;
    if (threshold == 0) {
        const double first = enter * p_f / (1.0 - r);
        return {first, enter / (stay * (1.0 - r))};
    }
    const double pre = std::pow(stay, static_cast<double>(threshold - 1));
    const double at = enter * pre / (1.0 - r);
    return {enter * (1.0 - pre) / (1.0 - stay) + at, at};
}

// Mass of age 1 relative to the synced anchor.
inline double branch_entry(double enter, double p_f, std::size_t threshold) {
    return threshold == 0 ? enter * p_f : enter;
}

// Fill ages 1..horizon of one branch and return the tail beyond it.
inline GeometricTail fill_switching_branch(std::vector<double>& out, double anchor, double enter,
                                           double stay, double p_f, std::size_t threshold) {
    const double post = stay * p_f;
    double m = branch_entry(enter, p_f, threshold) * anchor;
    for (std::size_t k = 1; k <= out.size(); ++k) {
        out[k - 1] = m;
        m *= (k >= threshold) ? post : stay;
    }
    return {post, m};
}

inline std::size_t horizon_for_ratio(std::size_t base, double ratio) {
    if (ratio <= 0.0) return base + 1;
    const double extra = std::ceil(std::log(kDefaultTailMass) / std::log(ratio));
    const auto ext = static_cast<std::size_t>(std::min(extra, static_cast<double>(kMaxHorizonExtension)));
    return base + std::max<std::size_t>(ext, 1);
}

} // namespace detail

/// psi(x, y) with the channel failure probability p_f as the implicit third argument.
/// beta * p * psi(q_bar, y) * nu(0,0,0) is the missed-alarm cost of threshold y >= 1.
inline double psi(double x, double y, double p_f) {
    const double xp = std::pow(x, y - 1.0);
    const double xf = x * p_f;
    return (1.0 - (x + (1.0 - x) * y) * xp) / ((1.0 - x) * (1.0 - x)) +
           (xf + (1.0 - xf) * y) * xp / ((1.0 - xf) * (1.0 - xf));
}

inline SwitchingCoefficients switching_coefficients(const ModelParams& m, const SwitchingPolicy& pol) {
    const auto a = detail::branch_sums(m.p, m.q_bar(), m.p_f(), pol.ma_threshold);
    const auto b = detail::branch_sums(m.q, m.p_bar(), m.p_f(), pol.fa_threshold);
    const double x0 = m.p_bar() * b.at_threshold;
    const double x1 = m.q_bar() * a.at_threshold;
    const double denom = (1.0 + a.first) * x0 + (1.0 + b.first) * x1;
    return {a.first, a.at_threshold, b.first, b.at_threshold, x0 / denom, x1 / denom};
}

/// Default enumeration horizon: largest threshold plus enough ages for the
/// post-threshold geometric tails to drop below kDefaultTailMass.
inline std::size_t default_horizon(const ModelParams& m, const SwitchingPolicy& pol) {
    const double r = std::max(m.q_bar(), m.p_bar()) * m.p_f();
    return detail::horizon_for_ratio(pol.max_threshold(), r);
}

inline std::size_t default_horizon(const ModelParams& m, const RandomizedPolicy& pol) {
    const double r = std::max(m.q_bar() * (1.0 - m.p_s * pol.f1), m.p_bar() * (1.0 - m.p_s * pol.f0));
    return detail::horizon_for_ratio(0, r);
}

/// Exact stationary distribution of the chain induced by a switching policy,
/// for all four threshold regimes. `horizon` must be >= the largest threshold.
inline StationaryDistribution switching_stationary(const ModelParams& m, const SwitchingPolicy& pol,
                                                   std::optional<std::size_t> horizon = std::nullopt) {
    m.validate();
    const std::size_t h = horizon.value_or(default_horizon(m, pol));
    if (h < pol.max_threshold())
        throw std::invalid_argument("horizon must cover both thresholds");
    const auto c = switching_coefficients(m, pol);
    auto d = StationaryDistribution::with_horizon(h);
    d.synced0 = c.synced0;
    d.synced1 = c.synced1;
    d.missed_tail = detail::fill_switching_branch(d.missed, c.synced0, m.p, m.q_bar(), m.p_f(), pol.ma_threshold);
    d.false_tail = detail::fill_switching_branch(d.falsed, c.synced1, m.q, m.p_bar(), m.p_f(), pol.fa_threshold);
    return d;
}

/// Cost split of a policy: missed-alarm part and false-alarm part of C.
struct CostBreakdown {
    double missed = 0.0;
    double falsed = 0.0;
    PolicyMetrics metrics;
};

inline CostBreakdown switching_breakdown(const ModelParams& m, const SwitchingPolicy& pol) {
    m.validate();
    const auto c = switching_coefficients(m, pol);
    const double pf = m.p_f();
    const double qb = m.q_bar();
    const double pb = m.p_bar();

    CostBreakdown out;
    double freq = 0.0;
    if (pol.ma_threshold >= 1) {
        out.missed = m.beta * m.p * psi(qb, static_cast<double>(pol.ma_threshold), pf) * c.synced0;
        freq += c.a_threshold * c.synced0;
    } else {
        out.missed = m.beta * m.p * pf * c.synced0 / ((1.0 - qb * pf) * (1.0 - qb * pf));
        freq += (1.0 + c.a_first) * c.synced0;
    }
    if (pol.fa_threshold >= 1) {
        out.falsed = (1.0 - m.beta) * m.q * psi(pb, static_cast<double>(pol.fa_threshold), pf) * c.synced1;
        freq += c.b_threshold * c.synced1;
    } else {
        out.falsed = (1.0 - m.beta) * m.q * pf * c.synced1 / ((1.0 - pb * pf) * (1.0 - pb * pf));
        freq += (1.0 + c.b_first) * c.synced1;
    }
    out.metrics = PolicyMetrics::from(out.missed + out.falsed, freq, m.lambda);
    return out;
}

/// Average cost C, frequency F and objective L of a switching policy.
inline PolicyMetrics switching_metrics(const ModelParams& m, const SwitchingPolicy& pol) {
    return switching_breakdown(m, pol).metrics;
}

/// Stationary masses of the synced/error chain (X, X_hat) under an age-agnostic policy.
struct PairMasses {
    double n00 = 0.0, n01 = 0.0, n10 = 0.0, n11 = 0.0;
};

inline PairMasses randomized_pair_masses(const ModelParams& m, const RandomizedPolicy& pol) {
    m.validate();
    pol.validate();
    const double p = m.p, q = m.q, pb = m.p_bar(), qb = m.q_bar();
    const double fa0 = m.p_s * pol.f0, fa1 = m.p_s * pol.f1;
    const double fb0 = 1.0 - fa0, fb1 = 1.0 - fa1;
    const double zeta = (p + q) * (q * fa0 + p * fa1 + (1.0 - p - q) * fa0 * fa1);
    return {q * (pb * fa0 + p * fa1) * (q + qb * fa1) / zeta,
            p * q * fb1 * (q * fa0 + qb * fa1) / zeta,
            p * q * fb0 * (pb * fa0 + p * fa1) / zeta,
            p * (q * fa0 + qb * fa1) * (p + pb * fa0) / zeta};
}

inline StationaryDistribution randomized_stationary(const ModelParams& m, const RandomizedPolicy& pol,
                                                    std::optional<std::size_t> horizon = std::nullopt) {
    const auto pm = randomized_pair_masses(m, pol);
    const double fb0 = 1.0 - m.p_s * pol.f0, fb1 = 1.0 - m.p_s * pol.f1;
    auto d = StationaryDistribution::with_horizon(horizon.value_or(default_horizon(m, pol)));
    d.synced0 = pm.n00;
    d.synced1 = pm.n11;

    auto fill = [](std::vector<double>& out, double first, double ratio) {
        double v = first;
        for (auto& x : out) {
            x = v;
            v *= ratio;
        }
        return GeometricTail{ratio, v};
    };
    d.missed_tail = fill(d.missed, m.p * fb0 * pm.n00, m.q_bar() * fb1);
    d.false_tail = fill(d.falsed, m.q * fb1 * pm.n11, m.p_bar() * fb0);
    return d;
}

inline CostBreakdown randomized_breakdown(const ModelParams& m, const RandomizedPolicy& pol) {
    const auto pm = randomized_pair_masses(m, pol);
    const double fb0 = 1.0 - m.p_s * pol.f0, fb1 = 1.0 - m.p_s * pol.f1;
    const double rm = 1.0 - m.q_bar() * fb1;
    const double rf = 1.0 - m.p_bar() * fb0;
    CostBreakdown out;
    out.missed = m.beta * m.p * fb0 * pm.n00 / (rm * rm);
    out.falsed = (1.0 - m.beta) * m.q * fb1 * pm.n11 / (rf * rf);
    const double freq = (m.q * pol.f0 + m.p * pol.f1) / (m.p + m.q);
    out.metrics = PolicyMetrics::from(out.missed + out.falsed, freq, m.lambda);
    return out;
}

inline PolicyMetrics randomized_metrics(const ModelParams& m, const RandomizedPolicy& pol) {
    return randomized_breakdown(m, pol).metrics;
}

namespace detail {

inline void check_truncation(const SwitchingPolicy& pol, std::size_t n) {
    if (n <= pol.max_threshold())
        throw std::invalid_argument("truncation size must exceed both thresholds");
}

} // namespace detail

/// Stationary distribution of the chain truncated at age N, where the
/// boundary ages absorb every discarded state. Interior masses coincide with
/// the untruncated ones.
inline StationaryDistribution truncated_stationary(const ModelParams& m, const SwitchingPolicy& pol,
                                                   std::size_t n) {
    detail::check_truncation(pol, n);
    return switching_stationary(m, pol, n).folded();
}

/// Stationary mass of the states in which the policy transmits, tails included.
inline double transmit_mass(const StationaryDistribution& d, const SwitchingPolicy& pol) {
    double f = 0.0;
    if (pol.ma_threshold == 0) f += d.synced0;
    if (pol.fa_threshold == 0) f += d.synced1;
    auto branch = [&](const std::vector<double>& v, const GeometricTail& tail, std::size_t thr) {
        double s = 0.0;
        for (std::size_t k = std::max<std::size_t>(thr, 1); k <= v.size(); ++k) s += v[k - 1];
        return thr <= v.size() + 1 ? s + tail.mass() : s;
    };
    return f + branch(d.missed, d.missed_tail, pol.ma_threshold) +
           branch(d.falsed, d.false_tail, pol.fa_threshold);
}

/// Metrics of the truncated problem, computed from the truncated distribution.
inline PolicyMetrics truncated_metrics(const ModelParams& m, const SwitchingPolicy& pol, std::size_t n) {
    const auto d = truncated_stationary(m, pol, n);
    return PolicyMetrics::from(d.expected_stage_cost(m), transmit_mass(d, pol), m.lambda);
}

/// sigma(pi, N) = L(pi) - L(pi, N): the cost hidden by truncating the ages at N.
inline double truncation_gap(const ModelParams& m, const SwitchingPolicy& pol, std::size_t n) {
    detail::check_truncation(pol, n);
    const auto c = switching_coefficients(m, pol);
    const double pf = m.p_f(), qb = m.q_bar(), pb = m.p_bar();
    const double nn = static_cast<double>(n);
    const double rm = 1.0 - qb * pf;
    const double rf = 1.0 - pb * pf;
    const double ma = m.beta * c.synced0 * m.p * std::pow(qb, nn) *
                      std::pow(pf, nn - static_cast<double>(pol.ma_threshold) + 1.0) / (rm * rm);
    const double fa = (1.0 - m.beta) * c.synced1 * m.q * std::pow(pb, nn) *
                      std::pow(pf, nn - static_cast<double>(pol.fa_threshold) + 1.0) / (rf * rf);
    return ma + fa;
}

} // namespace aoma
