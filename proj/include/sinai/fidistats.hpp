#pragma once

#include "sinai/blocks.hpp"
#include "sinai/measure.hpp"
#include "sinai/observables.hpp"
#include "sinai/parallel.hpp"
#include "sinai/stats.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sinai {

/// Tuple of phase points distributed per the joint law P_I (one base
/// point swept along its trajectory) or the product law over blocks
/// (independent base points, one per block).
struct JointSample {
    std::vector<PhasePoint> points;
};

/// Budget and seed lineage for one sharded Monte Carlo estimate. Work is
/// split over kShards logical shards; shard i draws from RNG stream
/// stream_base + i. Estimates that need several independent passes use
/// consecutive stream windows of width kShards.
struct SampleBudget {
    std::int64_t n_samples = 100000;
    std::uint64_t seed = 1;
    std::uint64_t stream_base = 0;
    int workers = 0; ///< 0 = resolve via SINAI_WORKERS / hardware

    SampleBudget with_stream_base(std::uint64_t base) const {
        SampleBudget b = *this;
        b.stream_base = base;
        return b;
    }
};

/// Retries a sampling body whenever it hits a tangential collision,
/// with the sampler counting (and rate-limiting) the resamples.
template <class Body>
void retry_grazing(MuSampler& sampler, Body&& body) {
    for (;;) {
        try {
            body();
            return;
        } catch (const GrazingCollision&) {
            sampler.note_grazing();
        }
    }
}

/// Fills `out` with (T^{i_1}x, ..., T^{i_p}x) for a single x ~ mu, one
/// trajectory sweep. Collision errors propagate; use retry_grazing.
void fill_joint(MuSampler& sampler, const IndexBlocks& blocks,
                std::vector<PhasePoint>& out);

/// Fills `out` block by block from independent base points, each block
/// shifted to start at iteration 0 (same law as P_{I_k} by stationarity).
void fill_product(MuSampler& sampler, const IndexBlocks& blocks,
                  std::vector<PhasePoint>& out);

/// Resampling wrappers around the fillers, with grazing-draw retry.
JointSample sample_joint(MuSampler& sampler, const IndexBlocks& blocks);
JointSample sample_product(MuSampler& sampler, const IndexBlocks& blocks);

/// One Monte Carlo draw writing `m` statistics into out. Called
/// concurrently with per-shard samplers and scratch buffers; the callable
/// itself must be stateless.
using DrawFn =
    std::function<void(MuSampler&, std::vector<PhasePoint>& scratch, double* out)>;

/// Sharded mean of an m-dimensional draw: shard i runs on stream
/// stream_base + i, accumulators merge in shard order, so the result is
/// bit-identical for any worker count.
std::vector<EstimateReport> sharded_estimate(const BilliardTable& table,
                                             const DrawFn& draw, int m,
                                             const SampleBudget& budget);

/// Means of several functionals sharing one block structure, evaluated on
/// common draws from the joint (or product) law.
std::vector<EstimateReport> estimate_functionals(const BilliardTable& table,
                                                 const std::vector<FunctionalSpec>& fs,
                                                 bool product_mode,
                                                 const SampleBudget& budget);

/// The central estimand: int F dP_I minus int F d(P_{I_1} x ... x P_{I_K}),
/// estimated with independent equal budgets for the two integrals (streams
/// [base, base+kShards) and [base+kShards, base+2 kShards)).
EstimateReport correlation_gap(const BilliardTable& table, const FunctionalSpec& F,
                               const SampleBudget& budget);

/// Componentwise version for vector-valued functionals represented as a
/// list sharing one block structure (e.g. real/imaginary pairs).
std::vector<EstimateReport> correlation_gap_multi(const BilliardTable& table,
                                                  const std::vector<FunctionalSpec>& fs,
                                                  const SampleBudget& budget);

/// Decay curve over a gap schedule plus the fitted rate.
struct CurveResult {
    std::string x_name;
    std::vector<double> x;
    std::vector<EstimateReport> points;

    std::vector<DecayPoint> decay_points() const;
};

struct GapCurve {
    CurveResult curve;
    DecayFit fit;
};

/// Rebuilds the block layout with every inter-block gap equal to `gap`,
/// preserving intra-block index patterns and the first block's start.
IndexBlocks with_equal_gaps(const IndexBlocks& base, long gap);

/// correlation_gap of F re-laid out at each gap in the schedule.
/// Uses stream windows [base + 2 kShards j, ...) for schedule entry j.
CurveResult gap_decay_points(const BilliardTable& table, const FunctionalSpec& F,
                             const std::vector<long>& gap_schedule,
                             const SampleBudget& per_gap);

/// Fit of a computed curve (throws FitFailed per the noise-floor rules).
DecayFit fit_curve(const CurveResult& curve, double noise_mult = 3.0,
                   int min_points = 3);

/// Points plus fit; throws FitFailed when the fit cannot be made.
GapCurve gap_decay_curve(const BilliardTable& table, const FunctionalSpec& F,
                         const std::vector<long>& gap_schedule,
                         const SampleBudget& per_gap);

/// Interlaced-sums experiment: odd blocks feed A1, even blocks feed A2;
/// returns Cov(A1, A2) under the joint law minus the same covariance under
/// the product law (zero in expectation), with combined standard error.
EstimateReport interlaced_sums_gap(const BilliardTable& table,
                                   const LipschitzOuter& a1, const LipschitzOuter& a2,
                                   const std::vector<Observable>& per_index,
                                   const IndexBlocks& blocks,
                                   const SampleBudget& budget);

} // namespace sinai
