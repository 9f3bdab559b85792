#include "sinai/fidistats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sinai {

void fill_joint(MuSampler& sampler, const IndexBlocks& blocks,
                std::vector<PhasePoint>& out) {
    out.clear();
    PhasePoint cur = sampler.sample();
    long t = 0;
    for (long idx : blocks.flat()) {
        for (; t < idx; ++t) {
            sampler.note_collisions(1);
            cur = collision_map(sampler.table(), cur).to;
        }
        out.push_back(cur);
    }
}

void fill_product(MuSampler& sampler, const IndexBlocks& blocks,
                  std::vector<PhasePoint>& out) {
    out.clear();
    for (const auto& blk : blocks.blocks()) {
        PhasePoint cur = sampler.sample();
        long t = blk.front();
        for (long idx : blk) {
            for (; t < idx; ++t) {
                sampler.note_collisions(1);
                cur = collision_map(sampler.table(), cur).to;
            }
            out.push_back(cur);
        }
    }
}

JointSample sample_joint(MuSampler& sampler, const IndexBlocks& blocks) {
    JointSample js;
    retry_grazing(sampler, [&] { fill_joint(sampler, blocks, js.points); });
    return js;
}

JointSample sample_product(MuSampler& sampler, const IndexBlocks& blocks) {
    JointSample js;
    retry_grazing(sampler, [&] { fill_product(sampler, blocks, js.points); });
    return js;
}

std::vector<EstimateReport> sharded_estimate(const BilliardTable& table,
                                             const DrawFn& draw, int m,
                                             const SampleBudget& budget) {
    struct ShardResult {
        std::vector<MomentAccumulator> acc;
        std::int64_t resamples = 0;
    };
    const std::int64_t per_shard = budget.n_samples / kShards;
    const std::int64_t extra = budget.n_samples % kShards;
    const int workers = resolve_workers(budget.workers);

    std::vector<ShardResult> results(kShards);
    run_sharded(kShards, workers, [&](int shard) {
        MuSampler sampler(table, budget.seed, budget.stream_base + shard);
        std::vector<PhasePoint> scratch;
        std::vector<double> out(m);
        ShardResult res;
        res.acc.resize(m);
        const std::int64_t n = per_shard + (shard < extra ? 1 : 0);
        for (std::int64_t i = 0; i < n; ++i) {
            retry_grazing(sampler, [&] { draw(sampler, scratch, out.data()); });
            for (int c = 0; c < m; ++c) res.acc[c].add(out[c]);
        }
        res.resamples = sampler.grazing_resamples();
        results[shard] = std::move(res);
    });

    std::vector<MomentAccumulator> merged(m);
    std::int64_t resamples = 0;
    for (const ShardResult& res : results) {
        for (int c = 0; c < m; ++c) merged[c].merge(res.acc[c]);
        resamples += res.resamples;
    }
    std::vector<EstimateReport> reports(m);
    for (int c = 0; c < m; ++c) {
        reports[c].value = merged[c].mean;
        reports[c].std_error = merged[c].std_error();
        reports[c].n_samples = merged[c].n;
        reports[c].seeds = {budget.seed, budget.stream_base,
                            budget.stream_base + kShards - 1};
        reports[c].resample_count = resamples;
    }
    return reports;
}

std::vector<EstimateReport> estimate_functionals(const BilliardTable& table,
                                                 const std::vector<FunctionalSpec>& fs,
                                                 bool product_mode,
                                                 const SampleBudget& budget) {
    if (fs.empty()) throw Error("estimate_functionals: no functionals");
    const IndexBlocks& blocks = fs.front().blocks();
    for (const FunctionalSpec& f : fs) {
        if (f.blocks().flat() != blocks.flat()) {
            throw ShapeMismatch("functionals must share one block structure");
        }
    }
    DrawFn draw = [&fs, &blocks, product_mode](MuSampler& sampler,
                                               std::vector<PhasePoint>& scratch,
                                               double* out) {
        if (product_mode) {
            fill_product(sampler, blocks, scratch);
        } else {
            fill_joint(sampler, blocks, scratch);
        }
        for (std::size_t i = 0; i < fs.size(); ++i) out[i] = fs[i].eval(scratch);
    };
    return sharded_estimate(table, draw, static_cast<int>(fs.size()), budget);
}

std::vector<EstimateReport> correlation_gap_multi(const BilliardTable& table,
                                                  const std::vector<FunctionalSpec>& fs,
                                                  const SampleBudget& budget) {
    const auto joint = estimate_functionals(table, fs, false, budget);
    const auto prod = estimate_functionals(
        table, fs, true, budget.with_stream_base(budget.stream_base + kShards));
    std::vector<EstimateReport> gaps(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
        gaps[i].value = joint[i].value - prod[i].value;
        gaps[i].std_error = joint[i].combined_std_error(prod[i]);
        gaps[i].n_samples = joint[i].n_samples + prod[i].n_samples;
        gaps[i].seeds = {budget.seed, budget.stream_base,
                         budget.stream_base + 2 * kShards - 1};
        gaps[i].resample_count = joint[i].resample_count + prod[i].resample_count;
    }
    return gaps;
}

EstimateReport correlation_gap(const BilliardTable& table, const FunctionalSpec& F,
                               const SampleBudget& budget) {
    return correlation_gap_multi(table, {F}, budget).front();
}

std::vector<DecayPoint> CurveResult::decay_points() const {
    std::vector<DecayPoint> pts(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        pts[i] = {x[i], points[i].value, points[i].std_error};
    }
    return pts;
}

IndexBlocks with_equal_gaps(const IndexBlocks& base, long gap) {
    std::vector<std::vector<long>> blocks;
    blocks.reserve(base.K());
    long prev_last = 0;
    for (int k = 0; k < base.K(); ++k) {
        const auto& blk = base.blocks()[k];
        const long start = k == 0 ? blk.front() : prev_last + gap;
        std::vector<long> nb;
        nb.reserve(blk.size());
        for (long idx : blk) nb.push_back(start + (idx - blk.front()));
        prev_last = nb.back();
        blocks.push_back(std::move(nb));
    }
    return IndexBlocks(std::move(blocks));
}

CurveResult gap_decay_points(const BilliardTable& table, const FunctionalSpec& F,
                             const std::vector<long>& gap_schedule,
                             const SampleBudget& per_gap) {
    if (gap_schedule.empty()) throw Error("gap schedule must be non-empty");
    for (std::size_t i = 1; i < gap_schedule.size(); ++i) {
        if (gap_schedule[i] <= gap_schedule[i - 1]) {
            throw Error("gap schedule must be strictly increasing");
        }
    }
    CurveResult curve;
    curve.x_name = "gap";
    for (std::size_t j = 0; j < gap_schedule.size(); ++j) {
        const FunctionalSpec laid =
            F.with_blocks(with_equal_gaps(F.blocks(), gap_schedule[j]));
        const SampleBudget budget = per_gap.with_stream_base(
            per_gap.stream_base + 2 * std::uint64_t(kShards) * j);
        curve.x.push_back(double(gap_schedule[j]));
        curve.points.push_back(correlation_gap(table, laid, budget));
    }
    return curve;
}

DecayFit fit_curve(const CurveResult& curve, double noise_mult, int min_points) {
    return fit_exponential_decay(curve.decay_points(), noise_mult, min_points);
}

GapCurve gap_decay_curve(const BilliardTable& table, const FunctionalSpec& F,
                         const std::vector<long>& gap_schedule,
                         const SampleBudget& per_gap) {
    GapCurve out;
    out.curve = gap_decay_points(table, F, gap_schedule, per_gap);
    out.fit = fit_curve(out.curve);
    return out;
}

EstimateReport interlaced_sums_gap(const BilliardTable& table,
                                   const LipschitzOuter& a1, const LipschitzOuter& a2,
                                   const std::vector<Observable>& per_index,
                                   const IndexBlocks& blocks,
                                   const SampleBudget& budget) {
    if (blocks.K() % 2 != 0) {
        throw ShapeMismatch("interlaced sums need an even number of blocks");
    }
    if (per_index.size() != blocks.total_size()) {
        throw ShapeMismatch("per-index observables must match the block size");
    }
    const auto& bd = blocks.boundaries();
    // Split the tuple's block sums between the two outers.
    auto split_eval = [&bd, &per_index](const PhasePoint* pts, int parity,
                                        const LipschitzOuter& outer) {
        std::vector<double> sums;
        for (std::size_t k = parity; k + 1 < bd.size(); k += 2) {
            double s = 0.0;
            for (std::size_t r = bd[k]; r < bd[k + 1]; ++r) {
                s += per_index[r].eval1(pts[r]);
            }
            sums.push_back(s);
        }
        return outer.fn(sums);
    };

    // Cov(A1, A2) under a law P is E_P[A1 A2] - E_P[A1] E_P[A2], with the
    // three expectations taken over independent sample sets so the product
    // of means is unbiased. The experiment reports the joint-law
    // covariance minus the product-law covariance (zero in expectation).
    DrawFn draw3 = [&](MuSampler& sampler, std::vector<PhasePoint>& scratch,
                       double* out) {
        fill_joint(sampler, blocks, scratch);
        const double v1 = split_eval(scratch.data(), 0, a1);
        const double v2 = split_eval(scratch.data(), 1, a2);
        out[0] = v1 * v2;
        out[1] = v1;
        out[2] = v2;
    };
    DrawFn draw3p = [&](MuSampler& sampler, std::vector<PhasePoint>& scratch,
                        double* out) {
        fill_product(sampler, blocks, scratch);
        const double v1 = split_eval(scratch.data(), 0, a1);
        const double v2 = split_eval(scratch.data(), 1, a2);
        out[0] = v1 * v2;
        out[1] = v1;
        out[2] = v2;
    };

    auto cov_of = [&](const DrawFn& draw, std::uint64_t base,
                      std::int64_t& resamples) {
        // Pass 1 estimates E[A1 A2]; passes 2 and 3 estimate the means.
        const auto prod_pass =
            sharded_estimate(table, draw, 3, budget.with_stream_base(base));
        const auto mean_pass =
            sharded_estimate(table, draw, 3, budget.with_stream_base(base + kShards));
        const double cov = prod_pass[0].value - mean_pass[1].value * mean_pass[2].value;
        const double se = std::sqrt(
            prod_pass[0].std_error * prod_pass[0].std_error +
            std::pow(mean_pass[1].value * mean_pass[2].std_error, 2) +
            std::pow(mean_pass[2].value * mean_pass[1].std_error, 2));
        resamples += prod_pass[0].resample_count + mean_pass[0].resample_count;
        return std::pair<double, double>(cov, se);
    };

    std::int64_t resamples = 0;
    const auto [cov_joint, se_joint] = cov_of(draw3, budget.stream_base, resamples);
    const auto [cov_prod, se_prod] =
        cov_of(draw3p, budget.stream_base + 2 * kShards, resamples);

    EstimateReport rep;
    rep.value = cov_joint - cov_prod;
    rep.std_error = std::sqrt(se_joint * se_joint + se_prod * se_prod);
    rep.n_samples = 4 * budget.n_samples;
    rep.seeds = {budget.seed, budget.stream_base, budget.stream_base + 4 * kShards - 1};
    rep.resample_count = resamples;
    return rep;
}

} // namespace sinai
