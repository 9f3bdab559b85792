#pragma once

#include "sinai/geometry.hpp"
#include "sinai/observables.hpp"
#include "sinai/rng.hpp"
#include "sinai/stats.hpp"

#include <cstdint>
#include <utility>

namespace sinai {

/// Inverse CDF of the phi-marginal of mu: u in [0,1] -> arcsin(2u - 1).
double phi_from_uniform(double u);

/// Sampler for the invariant measure d mu = cos(phi) dr dphi / (2L):
/// scatterer chosen proportionally to perimeter, arc position uniform,
/// angle by inverse-CDF. Also owns the grazing-resample accounting shared
/// by every estimator that iterates trajectories: tangential collisions
/// are resampled, counted, and the run aborts if their rate among all
/// collision evaluations exceeds 1e-6 (with a floor of 10 events), since
/// that points at a geometry defect rather than bad luck.
class MuSampler {
  public:
    MuSampler(const BilliardTable& table, std::uint64_t seed, std::uint64_t stream = 0);

    PhasePoint sample();

    const BilliardTable& table() const { return *table_; }
    RngStream& rng() { return rng_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    double normalization() const { return 1.0 / (2.0 * table_->perimeter_total()); }

    /// Bookkeeping hooks for trajectory-sampling loops.
    void note_collisions(std::int64_t n) { collision_evals_ += n; }
    void note_grazing();
    std::int64_t grazing_resamples() const { return grazing_resamples_; }
    std::int64_t collision_evals() const { return collision_evals_; }

  private:
    const BilliardTable* table_;
    RngStream rng_;
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::int64_t grazing_resamples_ = 0;
    std::int64_t collision_evals_ = 0;
};

/// Free-function spelling of MuSampler::sample().
PhasePoint sample_mu(MuSampler& sampler);

/// Monte Carlo means of g(x) and g(Tx) for x ~ mu, one coordinate of g at
/// a time. Invariance of mu under T means the two reports should agree
/// within combined standard errors; the caller asserts that.
std::pair<EstimateReport, EstimateReport>
invariance_test(MuSampler& sampler, const Observable& g, std::int64_t n_samples,
                int coord = 0, bool inverse = false);

} // namespace sinai
