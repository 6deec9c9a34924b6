#pragma once

// Policy search over the switching family: slice-pruned scan, exhaustive and
// diagonal references, and the best age-agnostic randomized policy.

#include "aoma/analytic.hpp"
#include "aoma/model.hpp"
#include "aoma/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>

namespace aoma {

/// Which threshold is held fixed along a slice.
enum class SliceAxis { MissedAlarm, FalseAlarm };

/// Monotonicity point of a one-dimensional slice of L.
///
/// Along the slice L = g / h with g' = (alpha0 + alpha1 t) r^(t-1) and
/// h' = alpha2 r^(t-1), where t is the free threshold and r its persistence
/// probability. Since g, h > 0 and alpha2 < 0, L increases wherever
/// alpha0 + alpha1 t >= 0, i.e. for every t >= turn_point.
struct SliceBound {
    std::size_t fixed_threshold = 1;
    double turn_point = 1.0;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;

    /// Largest free threshold a pruned scan has to visit.
    std::size_t scan_limit(std::size_t cap) const {
        if (!std::isfinite(turn_point) || turn_point >= static_cast<double>(cap)) return cap;
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(turn_point)));
    }
};

namespace detail {

// Oriented view of the model for a slice: `own` is the branch whose threshold
// varies, `other` the fixed one. Varying the missed-alarm threshold uses the
// model as is; varying the false-alarm threshold swaps p <-> q and beta <-> 1 - beta.
struct SliceFrame {
    double enter, stay;             // varying branch: p, q_bar
    double other_enter, other_stay; // fixed branch: q, p_bar
    double weight, other_weight;    // beta, 1 - beta
    double p_s, p_f, lambda;
};

inline SliceFrame slice_frame(const ModelParams& m, SliceAxis fixed) {
    if (fixed == SliceAxis::FalseAlarm)
        return {m.p, m.q_bar(), m.q, m.p_bar(), m.beta, 1.0 - m.beta, m.p_s, m.p_f(), m.lambda};
    return {m.q, m.p_bar(), m.p, m.q_bar(), 1.0 - m.beta, m.beta, m.p_s, m.p_f(), m.lambda};
}

struct SliceConstants {
    double b_first, b_fixed; // tail sums of the fixed branch
    double k;                // coefficient of a(t) in g
};

inline SliceConstants slice_constants(const SliceFrame& f, std::size_t value) {
    const auto b = branch_sums(f.other_enter, f.other_stay, f.p_f, value);
    const double psi_fixed = psi(f.other_stay, static_cast<double>(value), f.p_f);
    // lambda (p_bar + q_bar) b(fixed) + (1 - beta) q q_bar psi(fixed), in the oriented frame
    const double k = f.lambda * (f.other_stay + f.stay) * b.at_threshold +
                     f.other_weight * f.other_enter * f.stay * psi_fixed;
    return {b.first, b.at_threshold, k};
}

} // namespace detail

/// Numerator g(t) and denominator h(t) of the slice L(t) = g(t) / h(t).
inline std::pair<double, double> slice_ratio(const ModelParams& m, SliceAxis fixed, std::size_t value,
                                             double t) {
    const auto f = detail::slice_frame(m, fixed);
    const auto c = detail::slice_constants(f, value);
    const double r = f.stay;
    const double rp = 1.0 - r * f.p_f;
    const double a = f.enter * std::pow(r, t - 1.0) / rp;
    const double zeta = f.enter * (1.0 - std::pow(r, t - 1.0)) / (1.0 - r);
    const double g = f.weight * f.enter * f.other_stay * c.b_fixed * psi(r, t, f.p_f) + c.k * a;
    const double h = f.other_stay * c.b_fixed * (1.0 + zeta) + (r * (1.0 + c.b_first) + f.other_stay * c.b_fixed) * a;
    return {g, h};
}

/// Turn point of the slice with one threshold fixed at `value` >= 1.
inline SliceBound slice_turn_point(const ModelParams& m, SliceAxis fixed, std::size_t value) {
    m.validate();
    if (value < 1) throw std::invalid_argument("slice threshold must be >= 1");
    const auto f = detail::slice_frame(m, fixed);
    const auto c = detail::slice_constants(f, value);
    const double r = f.stay;
    const double lr = std::log(r);
    const double rp = 1.0 - r * f.p_f;
    const double base = f.weight * f.enter * f.other_stay * c.b_fixed;

    SliceBound sb;
    sb.fixed_threshold = value;
    sb.alpha0 = c.k * f.enter * lr / rp +
                base * (-r * f.p_s / ((1.0 - r) * rp) + r * f.p_f * lr / (rp * rp) - r * lr / ((1.0 - r) * (1.0 - r)));
    sb.alpha1 = -base * r * f.p_s * lr / ((1.0 - r) * rp);
    sb.alpha2 = f.enter * r * lr *
                ((1.0 + c.b_first) / rp - f.other_stay * f.p_s * c.b_fixed / ((1.0 - r) * rp));

    if (sb.alpha0 >= 0.0)
        sb.turn_point = 1.0;
    else if (sb.alpha1 > 0.0)
        sb.turn_point = -sb.alpha0 / sb.alpha1;
    else
        sb.turn_point = std::numeric_limits<double>::infinity();
    return sb;
}

/// Upper bound on sigma(pi, N) over every switching policy with thresholds <= N + 1.
inline double truncation_bound(const ModelParams& m, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double rm = 1.0 - m.q_bar() * m.p_f();
    const double rf = 1.0 - m.p_bar() * m.p_f();
    return m.beta * m.p * std::pow(m.q_bar(), nn) / (rm * rm) +
           (1.0 - m.beta) * m.q * std::pow(m.p_bar(), nn) / (rf * rf);
}

/// Smallest N in [n_min, n_max] whose truncation bound is below epsilon.
inline std::size_t select_truncation(const ModelParams& m, double epsilon, std::size_t n_max,
                                     std::size_t n_min = 2) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    for (std::size_t n = std::max<std::size_t>(n_min, 2); n <= n_max; ++n)
        if (truncation_bound(m, n) < epsilon) return n;
    throw std::invalid_argument("no truncation size up to n_max meets the epsilon bound");
}

struct SearchResult {
    SwitchingPolicy best_policy;
    PolicyMetrics best_metrics;
    std::size_t evaluations = 0;
    std::size_t candidate_set_size = 0;
    std::size_t truncation = 0;
    double sigma_bound = 0.0;
    /// p > 1 - q: the switching family may not contain the optimum.
    bool family_restricted = false;
};

namespace detail {

struct Incumbent {
    SwitchingPolicy policy{};
    PolicyMetrics metrics{std::numeric_limits<double>::infinity(), 0.0,
                          std::numeric_limits<double>::infinity()};

    // lexicographically smallest (ma, fa) among exact ties
    bool offer(const SwitchingPolicy& pol, const PolicyMetrics& mt) {
        if (mt.objective < metrics.objective ||
            (mt.objective == metrics.objective && pol < policy)) {
            policy = pol;
            metrics = mt;
            return true;
        }
        return false;
    }
};

inline SearchResult finish(const ModelParams& m, const Incumbent& inc, std::size_t evals,
                           std::size_t candidates, std::size_t n) {
    SearchResult r;
    r.best_policy = inc.policy;
    r.best_metrics = inc.metrics;
    r.evaluations = evals;
    r.candidate_set_size = candidates;
    r.truncation = n;
    r.sigma_bound = truncation_bound(m, n);
    r.family_restricted = !m.switching_structure_guaranteed();
    return r;
}

} // namespace detail

struct SearchOptions {
    double epsilon = 1e-10;
    std::size_t n_max = 100000;
    std::size_t n_min = 2;
};

/// Slice-pruned search over thresholds {0..N}^2. Each false-alarm slice is
/// scanned in the missed-alarm threshold only up to its turn point; the
/// zero-threshold slice, which the turn point does not cover, is scanned in full.
inline SearchResult algorithm1(const ModelParams& m, const SearchOptions& opt = {}) {
    m.validate();
    const std::size_t n = select_truncation(m, opt.epsilon, opt.n_max, opt.n_min);
    detail::Incumbent best;
    std::size_t evals = 0;
    for (std::size_t fa = 0; fa <= n; ++fa) {
        const std::size_t limit = fa == 0 ? n : slice_turn_point(m, SliceAxis::FalseAlarm, fa).scan_limit(n);
        for (std::size_t ma = 0; ma <= limit; ++ma) {
            const SwitchingPolicy pol{ma, fa};
            best.offer(pol, switching_metrics(m, pol));
            ++evals;
        }
    }
    return detail::finish(m, best, evals, n + 1, n);
}

inline SearchResult algorithm1(const ModelParams& m, double epsilon, std::size_t n_max, std::size_t n_min = 2) {
    return algorithm1(m, SearchOptions{epsilon, n_max, n_min});
}

/// Every pair in {0..N}^2.
inline SearchResult exhaustive_search(const ModelParams& m, std::size_t n) {
    m.validate();
    detail::Incumbent best;
    for (std::size_t fa = 0; fa <= n; ++fa)
        for (std::size_t ma = 0; ma <= n; ++ma) best.offer({ma, fa}, switching_metrics(m, {ma, fa}));
    return detail::finish(m, best, (n + 1) * (n + 1), (n + 1) * (n + 1), n);
}

/// Best threshold policy (identical thresholds) in {0..N}.
inline SearchResult diagonal_search(const ModelParams& m, std::size_t n) {
    m.validate();
    detail::Incumbent best;
    for (std::size_t x = 0; x <= n; ++x) best.offer({x, x}, switching_metrics(m, {x, x}));
    return detail::finish(m, best, n + 1, n + 1, n);
}

/// Diagonal-only search for symmetric, non-prioritized sources (p = q, beta = 0.5),
/// where identical thresholds are optimal.
inline SearchResult symmetric_search(const ModelParams& m, const SearchOptions& opt = {}) {
    m.validate();
    if (std::abs(m.p - m.q) > 1e-12 || std::abs(m.beta - 0.5) > 1e-12)
        throw std::invalid_argument("symmetric search needs p = q and beta = 0.5");
    return diagonal_search(m, select_truncation(m, opt.epsilon, opt.n_max, opt.n_min));
}

inline SearchResult symmetric_search(const ModelParams& m, double epsilon, std::size_t n_max) {
    return symmetric_search(m, SearchOptions{epsilon, n_max, 2});
}

struct RandomizedSearchResult {
    RandomizedPolicy policy;
    PolicyMetrics metrics;
    std::size_t evaluations = 0;
};

/// Best age-agnostic policy over (0, 1]^2: a 0.01 grid followed by three
/// local refinements, each ten times finer.
inline RandomizedSearchResult best_randomized(const ModelParams& m) {
    m.validate();
    RandomizedSearchResult best;
    best.metrics.objective = std::numeric_limits<double>::infinity();
    auto consider = [&](double f0, double f1) {
        const RandomizedPolicy pol{f0, f1};
        const auto mt = randomized_metrics(m, pol);
        ++best.evaluations;
        if (mt.objective < best.metrics.objective) {
            best.policy = pol;
            best.metrics = mt;
        }
    };
    double step = 0.01;
    for (int i = 1; i <= 100; ++i)
        for (int j = 1; j <= 100; ++j) consider(i * step, j * step);
    for (int round = 0; round < 3; ++round) {
        const double c0 = best.policy.f0, c1 = best.policy.f1;
        const double fine = step / 10.0;
        for (int i = -10; i <= 10; ++i)
            for (int j = -10; j <= 10; ++j) {
                const double f0 = c0 + i * fine, f1 = c1 + j * fine;
                if (f0 > 0.0 && f0 <= 1.0 && f1 > 0.0 && f1 <= 1.0) consider(f0, f1);
            }
        step = fine;
    }
    return best;
}

} // namespace aoma
