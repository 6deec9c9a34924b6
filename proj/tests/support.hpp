#pragma once

// Seeded parameter generators shared by the property tests.

#include "aoma/model.hpp"
#include "aoma/policy.hpp"

#include <cstdint>
#include <random>

namespace aoma::prop {

class Draws {
public:
    explicit Draws(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    std::size_t integer(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
    }

    /// p, q in [0.05, 0.5] (so p <= 1 - q), p_s in [0.5, 1].
    ModelParams params(double beta_lo = 0.0, double beta_hi = 1.0, double lambda_lo = 0.0, double lambda_hi = 10.0) {
        return ModelParams::make(uniform(0.05, 0.5), uniform(0.05, 0.5), uniform(0.5, 1.0),
                                 uniform(beta_lo, beta_hi), uniform(lambda_lo, lambda_hi));
    }

    SwitchingPolicy switching(std::size_t max_threshold) {
        return {integer(0, max_threshold), integer(0, max_threshold)};
    }

    RandomizedPolicy randomized() { return {uniform(0.1, 1.0), uniform(0.1, 1.0)}; }

private:
    std::mt19937_64 eng_;
};

} // namespace aoma::prop
