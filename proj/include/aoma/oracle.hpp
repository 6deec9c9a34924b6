#pragma once

// Reference stationary analysis by direct linear solve of the policy-induced
// chain on S_N. Shares nothing with the closed forms except the kernel.

#include "aoma/distribution.hpp"
#include "aoma/mdp.hpp"
#include "aoma/policy.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <functional>
#include <stdexcept>
#include <vector>

namespace aoma::oracle {

/// Probability of transmitting in a state.
using TransmitRule = std::function<double(const SystemState&)>;

inline TransmitRule rule(const SwitchingPolicy& pol) {
    return [pol](const SystemState& s) { return transmits(pol.decide(s)) ? 1.0 : 0.0; };
}
inline TransmitRule rule(const RandomizedPolicy& pol) {
    return [pol](const SystemState& s) { return pol.rate(s.source()); };
}
inline TransmitRule rule(const PolicyTable& table) {
    return [table](const SystemState& s) { return transmits(table.decide(s)) ? 1.0 : 0.0; };
}

struct OracleResult {
    StationaryDistribution distribution; ///< horizon N, boundary ages hold the absorbed mass
    PolicyMetrics metrics;               ///< priced on S_N
};

/// Solve nu P = nu, sum nu = 1 for the chain on S_N (ages clamped at N).
inline OracleResult solve(const TruncatedMdp& mdp, const TransmitRule& transmit) {
    const auto n = static_cast<Eigen::Index>(mdp.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 8);
    std::vector<double> tx(mdp.size());

    // A = P^T - I, with row 0 replaced by the normalization constraint.
    for (std::size_t i = 0; i < mdp.size(); ++i) {
        tx[i] = transmit(mdp.states[i]);
        if (tx[i] < 0.0 || tx[i] > 1.0) throw std::invalid_argument("transmit probability outside [0, 1]");
        for (Action a : {Action::Idle, Action::Transmit}) {
            const double w = transmits(a) ? tx[i] : 1.0 - tx[i];
            if (w == 0.0) continue;
            for (const auto& e : mdp.row(i, a).edges)
                if (e.to != 0) trip.emplace_back(e.to, i, w * e.probability);
        }
        if (i != 0) trip.emplace_back(i, i, -1.0);
        trip.emplace_back(0, i, 1.0);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("stationary system is singular");
    const Eigen::VectorXd nu = lu.solve(rhs);

    const std::size_t nn = mdp.truncation();
    OracleResult out;
    auto& d = out.distribution;
    d = StationaryDistribution::with_horizon(nn);
    double cost = 0.0, freq = 0.0;
    for (std::size_t i = 0; i < mdp.size(); ++i) {
        const double v = nu(static_cast<Eigen::Index>(i));
        d.at(mdp.states[i]) = v;
        cost += v * stage_cost(mdp.params, mdp.states[i]);
        freq += v * tx[i];
    }
    out.metrics = PolicyMetrics::from(cost, freq, mdp.params.lambda);
    return out;
}

template <typename Policy>
OracleResult solve(const ModelParams& m, const Policy& pol, std::size_t n) {
    return solve(build_truncated_mdp(m, n), rule(pol));
}

} // namespace aoma::oracle
