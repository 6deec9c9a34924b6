#pragma once

// Monte Carlo trajectories of the source/estimator system and the
// policy-comparison metrics (performance gap, KL policy distance).

#include "aoma/distribution.hpp"
#include "aoma/mdp.hpp"
#include "aoma/model.hpp"
#include "aoma/policy.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

namespace aoma {

struct SimConfig {
    std::uint64_t horizon = 1000000; ///< total slots T, burn-in included
    std::uint64_t seed = 1;
    std::uint64_t burn_in = 10000;
    std::size_t batches = 100; ///< batch count for the batch-means standard errors

    void validate() const {
        if (horizon == 0) throw std::invalid_argument("simulation horizon must be positive");
        if (burn_in >= horizon) throw std::invalid_argument("burn-in must be shorter than the horizon");
        if (batches < 2) throw std::invalid_argument("need at least two batches");
        if (horizon - burn_in < batches) throw std::invalid_argument("fewer measured slots than batches");
    }
};

using SimPolicy = std::variant<SwitchingPolicy, RandomizedPolicy, PolicyTable>;

struct EmpiricalReport {
    PolicyMetrics metrics;
    PolicyMetrics standard_errors;          ///< batch-means standard error of each metric
    StationaryDistribution histogram;       ///< visit frequencies, no tails
    StationaryDistribution histogram_error; ///< batch-means standard error per state
    std::uint64_t transmissions = 0;
    std::uint64_t slots = 0; ///< measured slots, T - burn_in
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform in [0, 1) with 53 random bits; identical on every platform, unlike
// std::uniform_real_distribution.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) : eng_(seed) {}
    double operator()() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

// Histogram slot: 0, 1 synced; 2d missed alarm; 2d + 1 false alarm.
inline std::size_t hist_slot(const SystemState& s) {
    if (s.is_synced()) return static_cast<std::size_t>(s.source());
    return 2 * s.age() + (s.kind() == StateKind::FalseAlarm ? 1 : 0);
}

inline double batch_se(const std::vector<double>& means) {
    const double n = static_cast<double>(means.size());
    double mu = 0.0;
    for (double v : means) mu += v;
    mu /= n;
    double ss = 0.0;
    for (double v : means) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / (n - 1.0) / n);
}

} // namespace detail

/// Run T slots from Synced(0). Source, channel and randomized-policy draws
/// come from three separately seeded streams; the channel is sampled every
/// slot so sample paths stay aligned across policies.
inline EmpiricalReport simulate(const ModelParams& m, const SimPolicy& policy, const SimConfig& cfg) {
    m.validate();
    cfg.validate();
    if (const auto* rp = std::get_if<RandomizedPolicy>(&policy)) rp->validate();

    std::uint64_t sm = cfg.seed;
    detail::UniformStream src(detail::splitmix64(sm));
    detail::UniformStream chan(detail::splitmix64(sm));
    detail::UniformStream pol(detail::splitmix64(sm));

    auto decide = [&](const SystemState& s) -> bool {
        return std::visit(
            [&](const auto& p) -> bool {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, RandomizedPolicy>)
                    return pol() < p.rate(s.source());
                else
                    return transmits(p.decide(s));
            },
            policy);
    };

    const std::uint64_t measured = cfg.horizon - cfg.burn_in;
    const std::uint64_t bsize = measured / cfg.batches;
    std::vector<double> bcost(cfg.batches, 0.0), btx(cfg.batches, 0.0), bslots(cfg.batches, 0.0);
    std::vector<std::vector<std::uint64_t>> bhist(cfg.batches);

    int x = 0, xhat = 0;
    std::size_t age = 0;
    std::uint64_t missed_sum = 0, false_sum = 0, tx_count = 0; // integer age sums

    for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
        const SystemState s = x == xhat ? SystemState::synced(x)
                              : x == 1  ? SystemState::missed_alarm(age)
                                        : SystemState::false_alarm(age);
        // an error state has exactly one positive age and it matches (X, X_hat)
        if (s.is_synced() != (age == 0) || (!s.is_synced() && s.missed_age() * s.false_age() != 0))
            throw std::logic_error("ages violate mutual exclusion");

        const bool a = decide(s);
        if (t >= cfg.burn_in) {
            const std::uint64_t k = t - cfg.burn_in;
            const std::size_t b = std::min<std::size_t>(cfg.batches - 1, static_cast<std::size_t>(k / bsize));
            missed_sum += s.missed_age();
            false_sum += s.false_age();
            tx_count += a ? 1 : 0;
            bcost[b] += m.beta * static_cast<double>(s.missed_age()) +
                        (1.0 - m.beta) * static_cast<double>(s.false_age());
            btx[b] += a ? 1.0 : 0.0;
            bslots[b] += 1.0;
            auto& h = bhist[b];
            const std::size_t slot = detail::hist_slot(s);
            if (slot >= h.size()) h.resize(slot + 1, 0);
            ++h[slot];
        }

        const double us = src();
        const double uc = chan();
        const int x_next = x == 0 ? (us < m.p ? 1 : 0) : (us < m.q ? 0 : 1);
        const int xhat_next = (a && uc < m.p_s) ? x_next : xhat;
        age = x_next == xhat_next ? 0 : age + 1;
        x = x_next;
        xhat = xhat_next;
    }

    const double n = static_cast<double>(measured);
    EmpiricalReport r;
    r.slots = measured;
    r.transmissions = tx_count;
    const double c = (m.beta * static_cast<double>(missed_sum) + (1.0 - m.beta) * static_cast<double>(false_sum)) / n;
    r.metrics = PolicyMetrics::from(c, static_cast<double>(tx_count) / n, m.lambda);

    std::vector<double> mc(cfg.batches), mf(cfg.batches), ml(cfg.batches);
    for (std::size_t b = 0; b < cfg.batches; ++b) {
        mc[b] = bcost[b] / bslots[b];
        mf[b] = btx[b] / bslots[b];
        ml[b] = mc[b] + m.lambda * mf[b];
    }
    r.standard_errors = {detail::batch_se(mc), detail::batch_se(mf), detail::batch_se(ml)};

    std::size_t width = 2;
    for (const auto& h : bhist) width = std::max(width, h.size());
    const std::size_t max_age = width / 2;
    r.histogram = StationaryDistribution::with_horizon(max_age);
    r.histogram_error = StationaryDistribution::with_horizon(max_age);
    std::vector<double> per(cfg.batches);
    for (std::size_t slot = 0; slot < width; ++slot) {
        if (slot >= 2 && slot / 2 > max_age) continue;
        const SystemState s = slot < 2            ? SystemState::synced(static_cast<int>(slot))
                              : (slot % 2 == 0)   ? SystemState::missed_alarm(slot / 2)
                                                  : SystemState::false_alarm(slot / 2);
        std::uint64_t total = 0;
        for (std::size_t b = 0; b < cfg.batches; ++b) {
            const std::uint64_t cnt = slot < bhist[b].size() ? bhist[b][slot] : 0;
            total += cnt;
            per[b] = static_cast<double>(cnt) / bslots[b];
        }
        r.histogram.at(s) = static_cast<double>(total) / n;
        r.histogram_error.at(s) = detail::batch_se(per);
    }
    return r;
}

/// L(pi) - L*.
inline double performance_gap(const PolicyMetrics& pi, const PolicyMetrics& opt) {
    return pi.objective - opt.objective;
}

namespace detail {

inline double kl_term(double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return a * std::log(a / b);
}

// Sum over j >= 0 of m r^j log(m r^j / (n s^j)).
inline double kl_tail(const GeometricTail& pi, const GeometricTail& opt) {
    if (pi.next_mass == 0.0) return 0.0;
    if (opt.next_mass == 0.0) return std::numeric_limits<double>::infinity();
    if (pi.ratio == 0.0) return kl_term(pi.next_mass, opt.next_mass);
    if (opt.ratio == 0.0) return std::numeric_limits<double>::infinity();
    const double r = pi.ratio;
    return pi.next_mass / (1.0 - r) * std::log(pi.next_mass / opt.next_mass) +
           pi.next_mass * r / ((1.0 - r) * (1.0 - r)) * std::log(r / opt.ratio);
}

} // namespace detail

/// KL divergence sum_s nu_pi(s) log(nu_pi(s) / nu_opt(s)), geometric tails
/// included in closed form. Infinite when nu_pi puts mass where nu_opt has none.
inline double kl_policy_distance(const StationaryDistribution& pi, const StationaryDistribution& opt) {
    if (pi.horizon() != opt.horizon()) throw std::invalid_argument("distributions use different horizons");
    double d = detail::kl_term(pi.synced0, opt.synced0) + detail::kl_term(pi.synced1, opt.synced1);
    for (std::size_t k = 0; k < pi.horizon(); ++k) {
        d += detail::kl_term(pi.missed[k], opt.missed[k]);
        d += detail::kl_term(pi.falsed[k], opt.falsed[k]);
    }
    d += detail::kl_tail(pi.missed_tail, opt.missed_tail);
    d += detail::kl_tail(pi.false_tail, opt.false_tail);
    return d;
}

} // namespace aoma
