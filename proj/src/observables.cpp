#include "sinai/observables.hpp"

#include "sinai/measure.hpp"
#include "sinai/stats.hpp"
#include "sinai/symbolic.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace sinai {

namespace {

[[noreturn]] void bound_violation(const std::string& name, double value, double bound) {
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "'%s' evaluated to %.9g, beyond its declared sup bound %.9g",
                  name.c_str(), value, bound);
    throw BoundViolation(buf);
}

double slack(double bound) { return 1e-9 * (1.0 + std::fabs(bound)); }

} // namespace

// ---------------------------------------------------------------------------
// Observable
// ---------------------------------------------------------------------------

Observable::Observable(std::string name, int dim, EvalFn eval, double bound,
                       HolderAnnotation holder, bool mean_subtracted)
    : name_(std::move(name)), dim_(dim), eval_(std::move(eval)), bound_(bound),
      holder_(holder), mean_subtracted_(mean_subtracted) {
    if (dim_ < 1 || dim_ > kMaxDim) {
        throw Error("observable dimension out of range");
    }
}

void Observable::eval(const PhasePoint& p, double* out) const {
    eval_(p, out);
    for (int c = 0; c < dim_; ++c) {
        if (std::fabs(out[c]) > bound_ + slack(bound_)) {
            bound_violation(name_, out[c], bound_);
        }
    }
}

double Observable::eval1(const PhasePoint& p, int coord) const {
    double out[kMaxDim];
    eval(p, out);
    return out[coord];
}

Observable Observable::with_holder(HolderAnnotation h) const {
    Observable copy = *this;
    copy.holder_ = h;
    return copy;
}

Observable Observable::centered(double mean_shift, const std::string& suffix) const {
    Observable copy = *this;
    const EvalFn inner = eval_;
    const int d = dim_;
    copy.eval_ = [inner, mean_shift, d](const PhasePoint& p, double* out) {
        inner(p, out);
        for (int c = 0; c < d; ++c) out[c] -= mean_shift;
    };
    copy.bound_ = bound_ + std::fabs(mean_shift);
    copy.mean_subtracted_ = true;
    if (!suffix.empty()) copy.name_ += suffix;
    return copy;
}

// ---------------------------------------------------------------------------
// Outer functions and C3 test functions
// ---------------------------------------------------------------------------

LipschitzOuter make_outer(const std::string& name, int n_blocks, double domain_bound) {
    LipschitzOuter out;
    out.name = name;
    const double b = domain_bound;
    if (name == "first") {
        out.fn = [](const std::vector<double>& s) { return s[0]; };
        out.lipschitz = 1.0;
    } else if (name == "sum") {
        out.fn = [](const std::vector<double>& s) {
            double t = 0.0;
            for (double v : s) t += v;
            return t;
        };
        out.lipschitz = 1.0;
    } else if (name == "product") {
        out.fn = [](const std::vector<double>& s) {
            double t = 1.0;
            for (double v : s) t *= v;
            return t;
        };
        out.lipschitz = std::pow(b, std::max(n_blocks - 1, 0));
    } else if (name == "pairsum") {
        out.fn = [](const std::vector<double>& s) {
            double t = 0.0;
            for (std::size_t k = 0; k + 1 < s.size(); ++k) t += s[k] * s[k + 1];
            return t;
        };
        out.lipschitz = 2.0 * b;
    } else if (name == "tanh_sum") {
        out.fn = [](const std::vector<double>& s) {
            double t = 0.0;
            for (double v : s) t += v;
            return std::tanh(t);
        };
        out.lipschitz = 1.0;
    } else {
        throw UnknownObservable("unknown outer function '" + name + "'");
    }
    return out;
}

TestFunctionC3 make_test_function(const std::string& name, int dim) {
    TestFunctionC3 h;
    h.name = name;
    h.dim = dim;
    if (name == "sum_tanh") {
        h.eval = [](const std::vector<double>& w) {
            double t = 0.0;
            for (double v : w) t += std::tanh(v);
            return t;
        };
        h.gradient = [](const std::vector<double>& w) {
            std::vector<double> g(w.size());
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double t = std::tanh(w[i]);
                g[i] = 1.0 - t * t;
            }
            return g;
        };
        h.d1_bound = 1.0;
        h.d2_bound = 4.0 / (3.0 * std::sqrt(3.0)); // max |2 tanh sech^2|
        h.d3_bound = 2.0;                          // max |sech^2 (6 tanh^2 - 2)|
    } else if (name == "linear") {
        h.eval = [](const std::vector<double>& w) {
            double t = 0.0;
            for (double v : w) t += v;
            return t;
        };
        h.gradient = [](const std::vector<double>& w) {
            return std::vector<double>(w.size(), 1.0);
        };
        h.d1_bound = 1.0;
        h.d2_bound = 0.0;
        h.d3_bound = 0.0;
    } else {
        throw UnknownObservable("unknown test function '" + name + "'");
    }
    return h;
}

// ---------------------------------------------------------------------------
// FunctionalSpec
// ---------------------------------------------------------------------------

FunctionalSpec FunctionalSpec::outer_of_sums(std::string name, IndexBlocks blocks,
                                             std::vector<Observable> per_index,
                                             LipschitzOuter outer, double bound,
                                             HolderAnnotation admissibility) {
    if (per_index.size() != blocks.total_size()) {
        throw ShapeMismatch("per-index observable list does not match block size");
    }
    for (const Observable& f : per_index) {
        if (f.dim() != 1) {
            throw ShapeMismatch("block-sum functionals need scalar observables");
        }
    }
    FunctionalSpec spec;
    spec.name_ = std::move(name);
    spec.blocks_ = std::move(blocks);
    spec.per_index_ = std::move(per_index);
    spec.outer_ = std::move(outer);
    spec.bound_ = bound;
    spec.admissibility_ = admissibility;
    return spec;
}

FunctionalSpec FunctionalSpec::explicit_fn(std::string name, IndexBlocks blocks,
                                           TupleFn fn, double bound,
                                           HolderAnnotation admissibility) {
    FunctionalSpec spec;
    spec.name_ = std::move(name);
    spec.blocks_ = std::move(blocks);
    spec.tuple_fn_ = std::move(fn);
    spec.bound_ = bound;
    spec.admissibility_ = admissibility;
    return spec;
}

std::vector<double> FunctionalSpec::block_sums(const std::vector<PhasePoint>& tuple) const {
    if (!has_outer()) {
        throw ShapeMismatch("block_sums is only defined for outer-of-sums functionals");
    }
    if (tuple.size() != blocks_.total_size()) {
        throw ShapeMismatch("tuple length does not match block size");
    }
    const auto& bd = blocks_.boundaries();
    std::vector<double> sums(blocks_.K(), 0.0);
    for (int k = 0; k < blocks_.K(); ++k) {
        for (std::size_t r = bd[k]; r < bd[k + 1]; ++r) {
            sums[k] += per_index_[r].eval1(tuple[r]);
        }
    }
    return sums;
}

double FunctionalSpec::eval(const std::vector<PhasePoint>& tuple) const {
    double value;
    if (has_outer()) {
        value = outer_.fn(block_sums(tuple));
    } else {
        if (tuple.size() != blocks_.total_size()) {
            throw ShapeMismatch("tuple length does not match block size");
        }
        value = tuple_fn_(tuple.data(), tuple.size());
    }
    if (std::fabs(value) > bound_ + slack(bound_)) {
        bound_violation(name_, value, bound_);
    }
    return value;
}

FunctionalSpec FunctionalSpec::with_blocks(IndexBlocks blocks) const {
    if (blocks.total_size() != blocks_.total_size() || blocks.K() != blocks_.K()) {
        throw ShapeMismatch("replacement blocks must preserve the block shape");
    }
    FunctionalSpec copy = *this;
    copy.blocks_ = std::move(blocks);
    return copy;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

ObservableCatalog::ObservableCatalog(const BilliardTable& table, std::uint64_t seed,
                                     std::int64_t center_samples,
                                     std::int64_t holder_pairs, long holder_n_max)
    : table_(&table) {
    const BilliardTable* tab = table_;

    entries_.push_back(Observable(
        "one", 1, [](const PhasePoint&, double* out) { out[0] = 1.0; }, 1.0,
        HolderAnnotation{0.0, 0.5}, false));

    std::vector<Observable> raw;
    raw.push_back(Observable(
        "phi", 1, [](const PhasePoint& p, double* out) { out[0] = p.phi; },
        kHalfPi, {}, true)); // mean 0 by the phi -> -phi symmetry of mu
    raw.push_back(Observable(
        "sin_phi", 1,
        [](const PhasePoint& p, double* out) { out[0] = std::sin(p.phi); }, 1.0,
        {}, true)); // odd in phi
    raw.push_back(Observable(
        "cos_r", 1,
        [tab](const PhasePoint& p, double* out) {
            out[0] = std::cos(p.r / tab->scatterer(p.scatterer).radius);
        },
        1.0, {}, true)); // r-marginal is uniform over each full circle
    raw.push_back(Observable(
        "free_path", 1,
        [tab](const PhasePoint& p, double* out) {
            out[0] = collision_map(*tab, p).flight_length;
        },
        table.horizon_bound(), {}, false));
    raw.push_back(Observable(
        "vec2", 2,
        [tab](const PhasePoint& p, double* out) {
            out[0] = std::sin(p.phi);
            out[1] = std::cos(kTwoPi * p.r / tab->scatterer(p.scatterer).perimeter());
        },
        1.0, {}, true)); // both coordinates have analytic mean 0

    for (std::size_t i = 0; i < raw.size(); ++i) {
        Observable obs = raw[i];
        if (!obs.mean_subtracted()) {
            // Monte Carlo centering for observables without an analytic
            // mean; the estimate is deterministic given (seed, stream).
            MuSampler sampler(table, seed, /*stream=*/100 + i);
            MomentAccumulator acc;
            for (std::int64_t s = 0; s < center_samples; ++s) {
                for (;;) {
                    try {
                        sampler.note_collisions(1);
                        acc.add(obs.eval1(sampler.sample()));
                        break;
                    } catch (const GrazingCollision&) {
                        sampler.note_grazing();
                    }
                }
            }
            obs = obs.centered(acc.mean);
        }
        const HolderEnvelope env =
            empirical_holder(table, obs, holder_pairs, holder_n_max,
                             RngStream::mix64(seed ^ (0xC0DE + i)));
        entries_.push_back(obs.with_holder(env.params));
    }

    // Shifted variant with exact mean one, useful as a strictly positive
    // factor in product-type correlation experiments. Adding a constant
    // leaves the oscillation envelope of cos_r unchanged.
    const HolderAnnotation cr_holder = builtin("cos_r").holder();
    entries_.push_back(Observable(
        "one_plus_cos_r", 1,
        [tab](const PhasePoint& p, double* out) {
            out[0] = 1.0 + std::cos(p.r / tab->scatterer(p.scatterer).radius);
        },
        2.0, cr_holder, false));
}

const Observable& ObservableCatalog::builtin(const std::string& name) const {
    for (const Observable& obs : entries_) {
        if (obs.name() == name) return obs;
    }
    throw UnknownObservable("no builtin observable named '" + name + "'");
}

std::vector<std::string> ObservableCatalog::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const Observable& obs : entries_) out.push_back(obs.name());
    return out;
}

} // namespace sinai
