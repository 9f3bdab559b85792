#pragma once

#include "sinai/geometry.hpp"
#include "sinai/observables.hpp"

#include <cstdint>
#include <vector>

namespace sinai {

/// Connected component of phase space: a scatterer together with a
/// homogeneity strip. Strip 0 is the central band |phi| <= pi/2 - 1/k0^2;
/// strip +-k (k >= k0) is the band between pi/2 - 1/k^2 and
/// pi/2 - 1/(k+1)^2 on the corresponding side. The k^-2 boundary family
/// realizes the standard O(k^-3) strip-width law.
struct ComponentId {
    int scatterer = 0;
    int strip = 0;

    friend bool operator==(const ComponentId& a, const ComponentId& b) {
        return a.scatterer == b.scatterer && a.strip == b.strip;
    }
    friend bool operator!=(const ComponentId& a, const ComponentId& b) {
        return !(a == b);
    }
};

constexpr int kDefaultK0 = 10;

ComponentId component_of(const PhasePoint& p, int k0 = kDefaultK0);

/// First step at which two trajectories visit different components, or
/// censored at n_max if they stay together through the whole window.
struct SeparationResult {
    bool censored = false;
    long n = 0;

    static SeparationResult finite(long n) { return {false, n}; }
    static SeparationResult censored_at(long n_max) { return {true, n_max}; }

    friend bool operator==(const SeparationResult& a, const SeparationResult& b) {
        return a.censored == b.censored && a.n == b.n;
    }
};

SeparationResult future_separation(const BilliardTable& table, PhasePoint x,
                                   PhasePoint y, long n_max, int k0 = kDefaultK0);

SeparationResult past_separation(const BilliardTable& table, PhasePoint x,
                                 PhasePoint y, long n_max, int k0 = kDefaultK0);

/// Empirical dynamical-Hölder envelope: close pairs are sampled (one
/// coordinate of the base point perturbed by a log-uniform offset), their
/// future separation time is measured, and max |f(x) - f(y)| is recorded
/// per separation-time bin. The (c, theta) annotation is the log-linear
/// fit over bins with at least min_bin_count pairs.
struct HolderEnvelope {
    HolderAnnotation params;
    std::vector<long> sep;       ///< separation-time bin values
    std::vector<double> max_diff;///< envelope per bin
    std::vector<long> counts;    ///< pairs per bin
    std::int64_t censored = 0;   ///< pairs that never separated in-window
    std::int64_t discarded = 0;  ///< pairs lost to grazing collisions
};

HolderEnvelope empirical_holder(const BilliardTable& table, const Observable& f,
                                std::int64_t pair_budget, long n_max,
                                std::uint64_t seed, int k0 = kDefaultK0,
                                long min_bin_count = 10);

} // namespace sinai
