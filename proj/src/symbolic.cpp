#include "sinai/symbolic.hpp"

#include "sinai/measure.hpp"
#include "sinai/rng.hpp"
#include "sinai/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace sinai {

ComponentId component_of(const PhasePoint& p, int k0) {
    const double abs_phi = std::fabs(p.phi);
    const double central_edge = kHalfPi - 1.0 / (double(k0) * double(k0));
    ComponentId id;
    id.scatterer = p.scatterer;
    if (abs_phi <= central_edge) {
        id.strip = 0;
        return id;
    }
    const double gap = kHalfPi - abs_phi; // in (0, 1/k0^2)
    int k;
    if (gap <= 0.0) {
        k = 1 << 20; // phi = +-pi/2 exactly: deepest representable strip
    } else {
        k = static_cast<int>(std::ceil(1.0 / std::sqrt(gap))) - 1;
        k = std::min(std::max(k, k0), 1 << 20);
    }
    id.strip = p.phi > 0.0 ? k : -k;
    return id;
}

namespace {

SeparationResult separation(const BilliardTable& table, PhasePoint x, PhasePoint y,
                            long n_max, int k0, bool forward) {
    for (long n = 0;; ++n) {
        if (!(component_of(x, k0) == component_of(y, k0))) {
            return SeparationResult::finite(n);
        }
        if (n == n_max) return SeparationResult::censored_at(n_max);
        try {
            x = forward ? collision_map(table, x).to : inverse_collision_map(table, x).to;
            y = forward ? collision_map(table, y).to : inverse_collision_map(table, y).to;
        } catch (GrazingCollision& g) {
            g.step = forward ? n : -n - 1;
            throw;
        }
    }
}

} // namespace

SeparationResult future_separation(const BilliardTable& table, PhasePoint x,
                                   PhasePoint y, long n_max, int k0) {
    return separation(table, x, y, n_max, k0, true);
}

SeparationResult past_separation(const BilliardTable& table, PhasePoint x,
                                 PhasePoint y, long n_max, int k0) {
    return separation(table, x, y, n_max, k0, false);
}

HolderEnvelope empirical_holder(const BilliardTable& table, const Observable& f,
                                std::int64_t pair_budget, long n_max,
                                std::uint64_t seed, int k0, long min_bin_count) {
    MuSampler sampler(table, seed, /*stream=*/0x401de5);
    RngStream& rng = sampler.rng();
    std::map<long, std::pair<double, long>> bins; // s -> (max diff, count)
    HolderEnvelope env;

    for (std::int64_t i = 0; i < pair_budget; ++i) {
        const PhasePoint x = sampler.sample();
        // Log-uniform perturbation size: separation times then spread over
        // many bins instead of piling up at a single depth.
        const double delta = std::pow(10.0, rng.uniform(-12.0, -3.0));
        const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        PhasePoint y = x;
        if (rng.uniform01() < 0.5) {
            const double perim = table.scatterer(x.scatterer).perimeter();
            y.r = std::fmod(x.r + sign * delta + perim, perim);
        } else {
            y.phi = std::clamp(x.phi + sign * delta, -kHalfPi + 1e-9, kHalfPi - 1e-9);
        }

        double diff = 0.0;
        double fx[Observable::kMaxDim], fy[Observable::kMaxDim];
        f.eval(x, fx);
        f.eval(y, fy);
        for (int c = 0; c < f.dim(); ++c) {
            diff = std::max(diff, std::fabs(fx[c] - fy[c]));
        }

        try {
            const SeparationResult s = future_separation(table, x, y, n_max, k0);
            sampler.note_collisions(2 * (s.n + 1));
            if (s.censored) {
                ++env.censored;
            } else {
                auto& [mx, cnt] = bins[s.n];
                mx = std::max(mx, diff);
                ++cnt;
            }
        } catch (const GrazingCollision&) {
            ++env.discarded;
            sampler.note_grazing();
        }
    }

    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [s, mc] : bins) {
        env.sep.push_back(s);
        env.max_diff.push_back(mc.first);
        env.counts.push_back(mc.second);
        if (mc.second >= min_bin_count && mc.first > 0.0) {
            xs.push_back(double(s));
            ys.push_back(mc.first);
        }
    }

    // A constant observable produces an all-zero envelope: c = 0 by
    // definition, no fit needed.
    double max_env = 0.0;
    for (double d : env.max_diff) max_env = std::max(max_env, d);
    if (max_env == 0.0) {
        env.params = {0.0, 0.5};
        return env;
    }

    if (xs.size() < 3) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "empirical_holder: only %zu bins with >= %ld pairs",
                      xs.size(), min_bin_count);
        throw InsufficientPairs(buf);
    }
    const auto [c_hat, theta_hat] = fit_log_linear(xs, ys);
    env.params.c = c_hat;
    // Clamp into (0,1): the annotation feeds reports, and a flat or rising
    // envelope (theta >= 1) means the budget was too small to resolve
    // decay, not that the observable fails to be dynamically Hölder.
    env.params.theta = std::clamp(theta_hat, 0.01, 0.99);
    return env;
}

} // namespace sinai
