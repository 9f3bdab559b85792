#include "sinai/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sinai {

double phi_from_uniform(double u) {
    return std::asin(2.0 * std::clamp(u, 0.0, 1.0) - 1.0);
}

MuSampler::MuSampler(const BilliardTable& table, std::uint64_t seed, std::uint64_t stream)
    : table_(&table), rng_(seed, stream), seed_(seed), stream_(stream) {}

PhasePoint MuSampler::sample() {
    const auto& cum = table_->perimeter_cumulative();
    const double u = rng_.uniform(0.0, table_->perimeter_total());
    const int sc = std::min<int>(
        static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin()),
        static_cast<int>(cum.size()) - 1);
    PhasePoint p;
    p.scatterer = sc;
    p.r = rng_.uniform(0.0, table_->scatterer(sc).perimeter());
    p.phi = phi_from_uniform(rng_.uniform01());
    return p;
}

void MuSampler::note_grazing() {
    ++grazing_resamples_;
    if (grazing_resamples_ > 10 &&
        double(grazing_resamples_) > 1e-6 * double(std::max<std::int64_t>(collision_evals_, 1))) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "grazing resample rate %lld/%lld exceeds 1e-6",
                      static_cast<long long>(grazing_resamples_),
                      static_cast<long long>(collision_evals_));
        throw ExcessiveGrazing(buf);
    }
}

PhasePoint sample_mu(MuSampler& sampler) { return sampler.sample(); }

std::pair<EstimateReport, EstimateReport>
invariance_test(MuSampler& sampler, const Observable& g, std::int64_t n_samples,
                int coord, bool inverse) {
    MomentAccumulator acc_x;
    MomentAccumulator acc_tx;
    const std::int64_t before = sampler.grazing_resamples();
    for (std::int64_t i = 0; i < n_samples; ++i) {
        for (;;) {
            const PhasePoint x = sampler.sample();
            try {
                sampler.note_collisions(1);
                const PhasePoint tx = inverse
                                          ? inverse_collision_map(sampler.table(), x).to
                                          : collision_map(sampler.table(), x).to;
                acc_x.add(g.eval1(x, coord));
                acc_tx.add(g.eval1(tx, coord));
                break;
            } catch (const GrazingCollision&) {
                sampler.note_grazing();
            }
        }
    }
    const std::int64_t resamples = sampler.grazing_resamples() - before;
    EstimateReport rep_x;
    rep_x.value = acc_x.mean;
    rep_x.std_error = acc_x.std_error();
    rep_x.n_samples = acc_x.n;
    rep_x.seeds = {sampler.seed(), sampler.stream(), sampler.stream()};
    rep_x.resample_count = resamples;
    EstimateReport rep_tx = rep_x;
    rep_tx.value = acc_tx.mean;
    rep_tx.std_error = acc_tx.std_error();
    return {rep_x, rep_tx};
}

} // namespace sinai
