#include "sinai/limits.hpp"

#include "sinai/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sinai {
namespace {

/// Scalar view of one coordinate of a vector observable (metadata kept).
Observable coordinate_observable(const Observable& f, int coord) {
    if (coord < 0 || coord >= f.dim()) {
        throw ShapeMismatch("coordinate " + std::to_string(coord) +
                            " out of range for observable '" + f.name() + "' of dim " +
                            std::to_string(f.dim()));
    }
    if (f.dim() == 1) return f;
    Observable base = f;
    return Observable(
        f.name() + "[" + std::to_string(coord) + "]", 1,
        [base, coord](const PhasePoint& p, double* out) {
            double buf[Observable::kMaxDim];
            base.eval(p, buf);
            out[0] = buf[coord];
        },
        f.bound(), f.holder(), f.mean_subtracted());
}

void check_schedule(const std::vector<long>& s, long min_first, const char* what) {
    if (s.empty()) throw ShapeMismatch(std::string(what) + ": empty schedule");
    if (s.front() < min_first) {
        throw ShapeMismatch(std::string(what) + ": schedule must start at " +
                            std::to_string(min_first) + " or later");
    }
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] <= s[i - 1]) {
            throw ShapeMismatch(std::string(what) + ": schedule must be strictly increasing");
        }
    }
}

double series_tail(double prefactor, double rate, int i_max) {
    if (!(rate < 1.0)) return std::numeric_limits<double>::quiet_NaN();
    return 2.0 * prefactor * std::pow(rate, i_max + 1) / (1.0 - rate);
}

} // namespace

FunctionalSpec product_all_functional(std::string name, IndexBlocks blocks,
                                      std::vector<Observable> per_index) {
    if (per_index.size() != blocks.total_size()) {
        throw ShapeMismatch("product_all_functional '" + name + "': " +
                            std::to_string(per_index.size()) + " observables for " +
                            std::to_string(blocks.total_size()) + " indices");
    }
    double bound = 1.0;
    for (const Observable& f : per_index) {
        if (f.dim() != 1) {
            throw ShapeMismatch("product_all_functional '" + name +
                                "': per-index observables must be scalar");
        }
        bound *= f.bound();
    }
    // Leibniz-style envelope: sum_r c_r prod_{s != r} bound_s, worst theta.
    double c = 0.0;
    double theta = 0.5;
    for (std::size_t r = 0; r < per_index.size(); ++r) {
        double prod = 1.0;
        for (std::size_t s = 0; s < per_index.size(); ++s) {
            if (s != r) prod *= per_index[s].bound();
        }
        c += per_index[r].holder().c * prod;
        theta = std::max(theta, per_index[r].holder().theta);
    }
    FunctionalSpec::TupleFn fn = [fs = std::move(per_index)](const PhasePoint* pts,
                                                            std::size_t len) {
        double v = 1.0;
        for (std::size_t r = 0; r < len; ++r) v *= fs[r].eval1(pts[r]);
        return v;
    };
    return FunctionalSpec::explicit_fn(std::move(name), std::move(blocks), std::move(fn),
                                       bound, HolderAnnotation{c, theta});
}

CurveResult multiple_correlation_points(const BilliardTable& table,
                                        const std::vector<Observable>& f_list,
                                        const std::vector<Observable>& g_list,
                                        const std::vector<long>& n_schedule,
                                        const SampleBudget& per_n) {
    if (f_list.empty() || g_list.empty()) {
        throw ShapeMismatch("multiple_correlation: observable lists must be nonempty");
    }
    check_schedule(n_schedule, 1, "multiple_correlation");
    const long r = static_cast<long>(f_list.size()) - 1;
    const long k = static_cast<long>(g_list.size()) - 1;

    CurveResult curve;
    curve.x_name = "n";
    for (std::size_t j = 0; j < n_schedule.size(); ++j) {
        const long n = n_schedule[j];
        std::vector<long> b1, b2;
        std::vector<Observable> per_index;
        for (long m = 0; m <= r; ++m) {
            b1.push_back(m);
            per_index.push_back(f_list[static_cast<std::size_t>(r - m)]);
        }
        for (long i = 0; i <= k; ++i) {
            b2.push_back(n + r + i);
            per_index.push_back(g_list[static_cast<std::size_t>(i)]);
        }
        FunctionalSpec F = product_all_functional(
            "multicorr_r" + std::to_string(r) + "_k" + std::to_string(k),
            IndexBlocks({b1, b2}), std::move(per_index));
        curve.x.push_back(static_cast<double>(n));
        curve.points.push_back(correlation_gap(
            table, F, per_n.with_stream_base(per_n.stream_base + 2 * kShards * j)));
    }
    return curve;
}

GapCurve multiple_correlation(const BilliardTable& table,
                              const std::vector<Observable>& f_list,
                              const std::vector<Observable>& g_list,
                              const std::vector<long>& n_schedule,
                              const SampleBudget& per_n) {
    CurveResult curve =
        multiple_correlation_points(table, f_list, g_list, n_schedule, per_n);
    return GapCurve{curve, fit_curve(curve)};
}

// ---------------------------------------------------------------------------
// Green-Kubo / CLT
// ---------------------------------------------------------------------------

Sigma2Report green_kubo_sigma2(const BilliardTable& table, const Observable& f,
                               int i_max, const SampleBudget& budget) {
    if (f.dim() != 1) {
        throw ShapeMismatch("green_kubo_sigma2: observable '" + f.name() +
                            "' must be scalar");
    }
    if (!f.mean_subtracted()) {
        throw ShapeMismatch("green_kubo_sigma2: observable '" + f.name() +
                            "' must be centered");
    }
    if (i_max < 1) throw ShapeMismatch("green_kubo_sigma2: i_max must be >= 1");

    DrawFn draw = [&f, i_max](MuSampler& s, std::vector<PhasePoint>&, double* out) {
        PhasePoint cur = s.sample();
        const double f0 = f.eval1(cur);
        out[0] = f0 * f0;
        for (int i = 1; i <= i_max; ++i) {
            cur = collision_map(s.table(), cur).to;
            s.note_collisions(1);
            out[i] = f0 * f.eval1(cur);
        }
    };
    std::vector<EstimateReport> lags = sharded_estimate(table, draw, i_max + 1, budget);

    Sigma2Report rep;
    rep.i_max = i_max;
    rep.autocov.x_name = "lag";
    double sum = lags[0].value;
    double se_sum = lags[0].std_error;
    for (int i = 0; i <= i_max; ++i) {
        rep.autocov.x.push_back(static_cast<double>(i));
        rep.autocov.points.push_back(lags[i]);
        if (i >= 1) {
            sum += 2.0 * lags[i].value;
            se_sum += 2.0 * lags[i].std_error;
        }
    }
    rep.sigma2 = sum;
    rep.sigma2_std_error = se_sum;

    std::vector<DecayPoint> pts;
    for (int i = 1; i <= i_max; ++i) {
        pts.push_back({static_cast<double>(i), lags[i].value, lags[i].std_error});
    }
    try {
        DecayFit fit = fit_exponential_decay(pts);
        if (fit.rate >= 1.0) {
            throw NonSummableWarning(
                "green_kubo_sigma2: fitted autocovariance decay rate " +
                std::to_string(fit.rate) + " is >= 1, so the truncation tail of the "
                "series for sigma^2 cannot be bounded");
        }
        rep.pair_fit = fit;
        rep.tail_bound = series_tail(fit.prefactor, fit.rate, i_max);
    } catch (const FitFailed&) {
        // every lag beyond 0 sits below its noise floor: tail unresolved
        // but bounded by the noise level, reported as zero
        rep.pair_fit = std::nullopt;
        rep.tail_bound = 0.0;
    }
    return rep;
}

EstimateReport direct_variance(const BilliardTable& table, const Observable& f,
                               long window, const SampleBudget& budget) {
    if (f.dim() != 1) {
        throw ShapeMismatch("direct_variance: observable '" + f.name() + "' must be scalar");
    }
    if (window < 1) throw ShapeMismatch("direct_variance: window must be >= 1");
    const double root_n = std::sqrt(static_cast<double>(window));
    DrawFn draw = [&f, window, root_n](MuSampler& s, std::vector<PhasePoint>&, double* out) {
        PhasePoint cur = s.sample();
        double sum = f.eval1(cur);
        for (long t = 1; t < window; ++t) {
            cur = collision_map(s.table(), cur).to;
            s.note_collisions(1);
            sum += f.eval1(cur);
        }
        const double w = sum / root_n;
        out[0] = w;
        out[1] = w * w;
    };
    std::vector<EstimateReport> est = sharded_estimate(table, draw, 2, budget);
    EstimateReport rep = est[1];
    rep.value = est[1].value - est[0].value * est[0].value;
    const double se_mean_term = 2.0 * std::abs(est[0].value) * est[0].std_error;
    rep.std_error = std::sqrt(est[1].std_error * est[1].std_error +
                              se_mean_term * se_mean_term);
    return rep;
}

CltReport clt_experiment(const BilliardTable& table, const Observable& f,
                         const CltConfig& cfg, const SampleBudget& budget) {
    if (f.dim() != 1 || !f.mean_subtracted()) {
        throw ShapeMismatch("clt_experiment: observable '" + f.name() +
                            "' must be a centered scalar");
    }
    if (cfg.window < 1) throw ShapeMismatch("clt_experiment: window must be >= 1");
    if (cfg.sigma2_samples < 1) {
        throw ShapeMismatch("clt_experiment: sigma2_samples must be >= 1");
    }

    // sigma^2 gets its own (typically larger) budget: a relative error eps
    // in sigma biases the KS statistic by about 0.24 eps, so the scale
    // estimate must be much tighter than the KS resolution itself.
    SampleBudget gk_budget = budget;
    gk_budget.n_samples = cfg.sigma2_samples;
    gk_budget.stream_base = budget.stream_base + kShards;
    Sigma2Report gk = green_kubo_sigma2(table, f, cfg.i_max, gk_budget);
    if (gk.sigma2 < 1e-4) {
        throw DegenerateVariance("clt_experiment: Green-Kubo sigma^2 = " +
                                 std::to_string(gk.sigma2) +
                                 " below 1e-4 (likely coboundary)");
    }
    const double sigma = std::sqrt(gk.sigma2);
    const double root_n = std::sqrt(static_cast<double>(cfg.window));

    const std::int64_t per_shard = budget.n_samples / kShards;
    const std::int64_t extra = budget.n_samples % kShards;
    std::vector<std::vector<double>> shard_z(kShards);
    run_sharded(kShards, resolve_workers(budget.workers), [&](int shard) {
        MuSampler sampler(table, budget.seed, budget.stream_base + shard);
        const std::int64_t n = per_shard + (shard < extra ? 1 : 0);
        std::vector<double>& zs = shard_z[static_cast<std::size_t>(shard)];
        zs.reserve(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
            retry_grazing(sampler, [&] {
                PhasePoint cur = sampler.sample();
                double sum = f.eval1(cur);
                for (long t = 1; t < cfg.window; ++t) {
                    cur = collision_map(sampler.table(), cur).to;
                    sampler.note_collisions(1);
                    sum += f.eval1(cur);
                }
                zs.push_back(sum / (sigma * root_n));
            });
        }
    });
    std::vector<double> z;
    z.reserve(static_cast<std::size_t>(budget.n_samples));
    for (const std::vector<double>& v : shard_z) z.insert(z.end(), v.begin(), v.end());

    CltReport rep;
    rep.sigma2_used = gk.sigma2;
    rep.n_windows = static_cast<std::int64_t>(z.size());
    rep.ks = ks_statistic(z, normal_cdf);
    RngStream boot(budget.seed, budget.stream_base + 2 * kShards);
    std::pair<double, double> ci = bootstrap_ks_ci(z, normal_cdf, 500, boot);
    rep.ks_ci_lo = ci.first;
    rep.ks_ci_hi = ci.second;
    return rep;
}

// ---------------------------------------------------------------------------
// Covariance matrices
// ---------------------------------------------------------------------------

SigmaMatrix sigma_matrix(const BilliardTable& table, const Observable& f, int i_max,
                         const SampleBudget& budget) {
    const int d = f.dim();
    if (!f.mean_subtracted()) {
        throw ShapeMismatch("sigma_matrix: observable '" + f.name() + "' must be centered");
    }
    if (i_max < 1) throw ShapeMismatch("sigma_matrix: i_max must be >= 1");

    const int dd = d * d;
    DrawFn draw = [&f, d, dd, i_max](MuSampler& s, std::vector<PhasePoint>&, double* out) {
        double f0[Observable::kMaxDim];
        double fn[Observable::kMaxDim];
        PhasePoint cur = s.sample();
        f.eval(cur, f0);
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) out[a * d + b] = f0[a] * f0[b];
        }
        for (int n = 1; n <= i_max; ++n) {
            cur = collision_map(s.table(), cur).to;
            s.note_collisions(1);
            f.eval(cur, fn);
            double* o = out + n * dd;
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) o[a * d + b] = f0[a] * fn[b];
            }
        }
    };
    std::vector<EstimateReport> est =
        sharded_estimate(table, draw, (i_max + 1) * dd, budget);

    SigmaMatrix rep;
    rep.d = d;
    rep.i_max = i_max;
    rep.m.assign(static_cast<std::size_t>(dd), 0.0);
    for (int e = 0; e < dd; ++e) rep.m[static_cast<std::size_t>(e)] = est[e].value;
    for (int n = 1; n <= i_max; ++n) {
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                const double c = est[n * dd + a * d + b].value;
                rep.m[static_cast<std::size_t>(a * d + b)] += c;
                rep.m[static_cast<std::size_t>(b * d + a)] += c;
            }
        }
    }
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < a; ++b) {
            rep.max_asymmetry = std::max(
                rep.max_asymmetry, std::abs(rep.m[a * d + b] - rep.m[b * d + a]));
            const double v = 0.5 * (rep.m[a * d + b] + rep.m[b * d + a]);
            rep.m[static_cast<std::size_t>(a * d + b)] = v;
            rep.m[static_cast<std::size_t>(b * d + a)] = v;
        }
    }
    rep.eigenvalues = sym_eigenvalues(rep.m, d);

    std::vector<DecayPoint> pts;
    for (int n = 1; n <= i_max; ++n) {
        double vmax = 0.0;
        double semax = 0.0;
        for (int e = 0; e < dd; ++e) {
            vmax = std::max(vmax, std::abs(est[n * dd + e].value));
            semax = std::max(semax, est[n * dd + e].std_error);
        }
        pts.push_back({static_cast<double>(n), vmax, semax});
    }
    try {
        DecayFit fit = fit_exponential_decay(pts);
        rep.tail_bound = series_tail(fit.prefactor, fit.rate, i_max);
    } catch (const FitFailed&) {
        rep.tail_bound = 0.0;
    }
    return rep;
}

CovMatrixReport empirical_cov_WN(const BilliardTable& table, const Observable& f,
                                 long window, const SampleBudget& budget) {
    const int d = f.dim();
    if (window < 1) throw ShapeMismatch("empirical_cov_WN: window must be >= 1");
    const double root_n = std::sqrt(static_cast<double>(window));
    DrawFn draw = [&f, d, window, root_n](MuSampler& s, std::vector<PhasePoint>&,
                                          double* out) {
        double acc[Observable::kMaxDim] = {0.0, 0.0, 0.0, 0.0};
        double buf[Observable::kMaxDim];
        PhasePoint cur = s.sample();
        f.eval(cur, buf);
        for (int a = 0; a < d; ++a) acc[a] = buf[a];
        for (long t = 1; t < window; ++t) {
            cur = collision_map(s.table(), cur).to;
            s.note_collisions(1);
            f.eval(cur, buf);
            for (int a = 0; a < d; ++a) acc[a] += buf[a];
        }
        for (int a = 0; a < d; ++a) out[a] = acc[a] / root_n;
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                out[d + a * d + b] = (acc[a] / root_n) * (acc[b] / root_n);
            }
        }
    };
    std::vector<EstimateReport> est = sharded_estimate(table, draw, d + d * d, budget);

    CovMatrixReport rep;
    rep.d = d;
    rep.m.assign(static_cast<std::size_t>(d * d), 0.0);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            rep.m[static_cast<std::size_t>(a * d + b)] =
                est[d + a * d + b].value - est[a].value * est[b].value;
            rep.entries.push_back(est[d + a * d + b]);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Stein conditions
// ---------------------------------------------------------------------------

SteinA1Report stein_A1_check(const BilliardTable& table, const Observable& f,
                             int alpha, int beta, int gamma, int delta,
                             const std::vector<long>& schedule,
                             const SampleBudget& per_quantity) {
    check_schedule(schedule, 0, "stein_A1_check");
    const Observable fa = coordinate_observable(f, alpha);
    const Observable fb = coordinate_observable(f, beta);
    const Observable fc = coordinate_observable(f, gamma);
    const Observable fd = coordinate_observable(f, delta);
    const int M = static_cast<int>(schedule.size());
    SteinA1Report rep;

    // Q1: pair moments mu(f_a f^k_b), every k from one sweep per draw.
    const long kmax = schedule.back();
    DrawFn draw1 = [fa, fb, &schedule, kmax](MuSampler& s, std::vector<PhasePoint>&,
                                             double* out) {
        PhasePoint cur = s.sample();
        const double v0 = fa.eval1(cur);
        std::size_t j = 0;
        if (!schedule.empty() && schedule[0] == 0) {
            out[0] = v0 * fb.eval1(cur);
            j = 1;
        }
        for (long t = 1; t <= kmax; ++t) {
            cur = collision_map(s.table(), cur).to;
            s.note_collisions(1);
            if (j < schedule.size() && schedule[j] == t) {
                out[j] = v0 * fb.eval1(cur);
                ++j;
            }
        }
    };
    std::vector<EstimateReport> est1 = sharded_estimate(table, draw1, M, per_quantity);
    rep.pair.x_name = "k";
    for (int j = 0; j < M; ++j) {
        rep.pair.x.push_back(static_cast<double>(schedule[j]));
        rep.pair.points.push_back(est1[j]);
    }
    {
        // the fit covers the decaying part: lags k >= 1
        CurveResult tail;
        tail.x_name = rep.pair.x_name;
        for (int j = 0; j < M; ++j) {
            if (schedule[j] >= 1) {
                tail.x.push_back(rep.pair.x[static_cast<std::size_t>(j)]);
                tail.points.push_back(rep.pair.points[static_cast<std::size_t>(j)]);
            }
        }
        try {
            rep.pair_fit = fit_curve(tail);
        } catch (const FitFailed&) {
            rep.pair_fit = std::nullopt;
        }
    }

    // Q2: fourth moments mu(f_a f^s_b f^{s+2}_c f^{2s+2}_d) with min gap s.
    const long tmax = 2 * schedule.back() + 2;
    DrawFn draw2 = [fa, fb, fc, fd, &schedule, tmax](
                       MuSampler& s, std::vector<PhasePoint>& scratch, double* out) {
        scratch.clear();
        PhasePoint cur = s.sample();
        scratch.push_back(cur);
        for (long t = 1; t <= tmax; ++t) {
            cur = collision_map(s.table(), cur).to;
            s.note_collisions(1);
            scratch.push_back(cur);
        }
        const double v0 = fa.eval1(scratch[0]);
        for (std::size_t j = 0; j < schedule.size(); ++j) {
            const std::size_t sj = static_cast<std::size_t>(schedule[j]);
            out[j] = v0 * fb.eval1(scratch[sj]) * fc.eval1(scratch[sj + 2]) *
                     fd.eval1(scratch[2 * sj + 2]);
        }
    };
    std::vector<EstimateReport> est2 = sharded_estimate(
        table, draw2, M, per_quantity.with_stream_base(per_quantity.stream_base + kShards));
    rep.fourth.x_name = "s";
    for (int j = 0; j < M; ++j) {
        rep.fourth.x.push_back(static_cast<double>(schedule[j]));
        rep.fourth.points.push_back(est2[j]);
    }
    try {
        rep.fourth_fit = fit_curve(rep.fourth);
    } catch (const FitFailed&) {
        rep.fourth_fit = std::nullopt; // all points below noise: consistent with decay
    }

    // Q3: fourth-order decoupling gap, blocks (0, 1) and (1+p, 2+p); only
    // the schedule entries p >= 1 apply (p = 0 would overlap the blocks).
    rep.decoupling.x_name = "p";
    std::size_t jq = 0;
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const long p = schedule[j];
        if (p < 1) continue;
        FunctionalSpec F =
            product_all_functional("stein_decoupling", IndexBlocks({{0, 1}, {1 + p, 2 + p}}),
                                   {fa, fb, fc, fd});
        rep.decoupling.x.push_back(static_cast<double>(p));
        rep.decoupling.points.push_back(correlation_gap(
            table, F,
            per_quantity.with_stream_base(per_quantity.stream_base +
                                          (2 + 2 * jq) * kShards)));
        ++jq;
    }
    if (rep.decoupling.points.empty()) {
        throw ShapeMismatch("stein_A1_check: schedule needs at least one entry >= 1 "
                            "for the decoupling quantity");
    }
    try {
        rep.decoupling_fit = fit_curve(rep.decoupling);
    } catch (const FitFailed&) {
        rep.decoupling_fit = std::nullopt;
    }
    return rep;
}

EstimateReport stein_decoupling_direct(const BilliardTable& table, const Observable& f,
                                       int alpha, int beta, int gamma, int delta,
                                       long l, long m, long n,
                                       const SampleBudget& budget) {
    if (!(0 <= l && l <= m && m <= n)) {
        throw ShapeMismatch("stein_decoupling_direct: need 0 <= l <= m <= n");
    }
    const Observable fa = coordinate_observable(f, alpha);
    const Observable fb = coordinate_observable(f, beta);
    const Observable fc = coordinate_observable(f, gamma);
    const Observable fd = coordinate_observable(f, delta);

    // mu(f_a f^l_b f^m_c f^n_d): one sweep, picking up factors whose time
    // matches (repeated times multiply in several factors at one point).
    DrawFn draw4 = [fa, fb, fc, fd, l, m, n](MuSampler& s, std::vector<PhasePoint>&,
                                             double* out) {
        PhasePoint cur = s.sample();
        double prod = fa.eval1(cur);
        if (l == 0) prod *= fb.eval1(cur);
        if (m == 0) prod *= fc.eval1(cur);
        if (n == 0) prod *= fd.eval1(cur);
        for (long t = 1; t <= n; ++t) {
            cur = collision_map(s.table(), cur).to;
            s.note_collisions(1);
            if (t == l) prod *= fb.eval1(cur);
            if (t == m) prod *= fc.eval1(cur);
            if (t == n) prod *= fd.eval1(cur);
        }
        out[0] = prod;
    };
    auto pair_draw = [](const Observable& g0, const Observable& g1, long lag) {
        return DrawFn([g0, g1, lag](MuSampler& s, std::vector<PhasePoint>&, double* out) {
            PhasePoint cur = s.sample();
            const double v0 = g0.eval1(cur);
            for (long t = 1; t <= lag; ++t) {
                cur = collision_map(s.table(), cur).to;
                s.note_collisions(1);
            }
            out[0] = v0 * g1.eval1(cur);
        });
    };

    EstimateReport e4 = sharded_estimate(table, draw4, 1, budget)[0];
    EstimateReport e2f = sharded_estimate(
        table, pair_draw(fa, fb, l), 1,
        budget.with_stream_base(budget.stream_base + kShards))[0];
    // by stationarity mu(f^m_c f^n_d) = mu(f_c f^{n-m}_d)
    EstimateReport e2b = sharded_estimate(
        table, pair_draw(fc, fd, n - m), 1,
        budget.with_stream_base(budget.stream_base + 2 * kShards))[0];

    EstimateReport rep = e4;
    rep.value = e4.value - e2f.value * e2b.value;
    const double t1 = e2b.value * e2f.std_error;
    const double t2 = e2f.value * e2b.std_error;
    rep.std_error = std::sqrt(e4.std_error * e4.std_error + t1 * t1 + t2 * t2);
    return rep;
}

CurveResult stein_A2_points(const BilliardTable& table, const Observable& f,
                            const SteinWindowSpec& spec,
                            const std::vector<long>& k_schedule,
                            const SampleBudget& per_k) {
    const int d = f.dim();
    if (!f.mean_subtracted()) {
        throw ShapeMismatch("stein_A2: observable '" + f.name() + "' must be centered");
    }
    SteinWindowSpec sp = spec;
    if (sp.v.empty()) sp.v.assign(static_cast<std::size_t>(d), 0.3);
    if (sp.h.name.empty()) sp.h = make_test_function("sum_tanh", d);
    if (static_cast<int>(sp.v.size()) != d || sp.h.dim != d) {
        throw ShapeMismatch("stein_A2: v and h must match the observable dimension");
    }
    if (sp.n < 0 || sp.n >= sp.window) {
        throw ShapeMismatch("stein_A2: need 0 <= n < window");
    }
    check_schedule(k_schedule, 0, "stein_A2");
    if (k_schedule.back() >= sp.window) {
        throw ShapeMismatch("stein_A2: half-widths must stay below the window");
    }

    const double root_n = std::sqrt(static_cast<double>(sp.window));
    CurveResult curve;
    curve.x_name = "K";
    for (std::size_t j = 0; j < k_schedule.size(); ++j) {
        const long K = k_schedule[j];
        DrawFn draw = [&f, &sp, d, K, root_n](MuSampler& s, std::vector<PhasePoint>&,
                                              double* out) {
            double full[Observable::kMaxDim] = {0.0, 0.0, 0.0, 0.0};
            double win[Observable::kMaxDim] = {0.0, 0.0, 0.0, 0.0};
            double fn[Observable::kMaxDim] = {0.0, 0.0, 0.0, 0.0};
            double buf[Observable::kMaxDim];
            PhasePoint cur = s.sample();
            for (long t = 0; t < sp.window; ++t) {
                if (t > 0) {
                    cur = collision_map(s.table(), cur).to;
                    s.note_collisions(1);
                }
                f.eval(cur, buf);
                for (int a = 0; a < d; ++a) full[a] += buf[a];
                const long dist = t > sp.n ? t - sp.n : sp.n - t;
                if (dist <= K) {
                    for (int a = 0; a < d; ++a) win[a] += buf[a];
                }
                if (t == sp.n) {
                    for (int a = 0; a < d; ++a) fn[a] = buf[a];
                }
            }
            std::vector<double> arg(static_cast<std::size_t>(d));
            for (int a = 0; a < d; ++a) {
                arg[static_cast<std::size_t>(a)] =
                    sp.v[static_cast<std::size_t>(a)] + sp.t * (full[a] - win[a]) / root_n;
            }
            const std::vector<double> grad = sp.h.gradient(arg);
            double v = 0.0;
            for (int a = 0; a < d; ++a) v += fn[a] * grad[static_cast<std::size_t>(a)];
            out[0] = v;
        };
        std::vector<EstimateReport> est = sharded_estimate(
            table, draw, 1, per_k.with_stream_base(per_k.stream_base + j * kShards));
        curve.x.push_back(static_cast<double>(K));
        curve.points.push_back(est[0]);
    }
    return curve;
}

GapCurve stein_A2_curve(const BilliardTable& table, const Observable& f,
                        const SteinWindowSpec& spec,
                        const std::vector<long>& k_schedule, const SampleBudget& per_k) {
    CurveResult curve = stein_A2_points(table, f, spec, k_schedule, per_k);
    return GapCurve{curve, fit_curve(curve)};
}

// ---------------------------------------------------------------------------
// Pene condition (B2)
// ---------------------------------------------------------------------------

CurveResult pene_B2_points(const BilliardTable& table, const Observable& f,
                           const PeneSpec& spec, const std::vector<long>& p_schedule,
                           const SampleBudget& per_p) {
    const int d = f.dim();
    if (!(0 <= spec.i && spec.i <= spec.j && spec.j <= spec.k)) {
        throw ShapeMismatch("pene_B2: need 0 <= i <= j <= k");
    }
    if (!(0 < spec.q && spec.q < spec.l)) {
        throw ShapeMismatch("pene_B2: need 0 < q < l");
    }
    const int power_sum = spec.a + spec.b + spec.c;
    if (spec.a < 0 || spec.b < 0 || spec.c < 0 || power_sum < 1 || power_sum > 3) {
        throw ShapeMismatch("pene_B2: powers must be >= 0 with 1 <= a+b+c <= 3");
    }
    for (int coord : {spec.alpha, spec.beta, spec.gamma}) {
        if (coord < 0 || coord >= d) {
            throw ShapeMismatch("pene_B2: coordinate out of range");
        }
    }
    // G catalog: 0 = tanh of the mean of the four arguments, 1 = first
    // coordinate of the f^i argument, 2 = constant one.
    int g_kind = -1;
    if (spec.g_name == "tanh_mean") g_kind = 0;
    else if (spec.g_name == "coordinate") g_kind = 1;
    else if (spec.g_name == "const") g_kind = 2;
    else {
        throw UnknownObservable("pene_B2: unknown G '" + spec.g_name +
                                "' (catalog: tanh_mean, coordinate, const)");
    }
    check_schedule(p_schedule, 1, "pene_B2");

    // Block 1: indices feeding S_i = f^0 + ... + f^{i-1}, plus times i, j, k.
    std::vector<long> b1;
    for (long u = 0; u < spec.i; ++u) b1.push_back(u);
    for (long u : {static_cast<long>(spec.i), static_cast<long>(spec.j),
                   static_cast<long>(spec.k)}) {
        if (b1.empty() || b1.back() != u) b1.push_back(u);
    }
    auto pos1 = [&b1](long t) {
        return static_cast<std::size_t>(std::lower_bound(b1.begin(), b1.end(), t) -
                                        b1.begin());
    };
    const std::size_t pi = pos1(spec.i);
    const std::size_t pj = pos1(spec.j);
    const std::size_t pk = pos1(spec.k);
    const std::size_t n1 = b1.size();
    const double g_bound = g_kind == 1 ? f.bound() : 1.0;
    const double bound = g_bound * std::pow(f.bound(), power_sum);
    const HolderAnnotation adm{f.holder().c * static_cast<double>(spec.i + 3 + power_sum),
                               f.holder().theta};

    CurveResult curve;
    curve.x_name = "p";
    for (std::size_t jdx = 0; jdx < p_schedule.size(); ++jdx) {
        const long p = p_schedule[jdx];
        std::vector<long> b2;
        if (spec.a > 0) b2.push_back(spec.k + p);
        if (spec.b > 0) b2.push_back(spec.k + p + spec.q);
        if (spec.c > 0) b2.push_back(spec.k + p + spec.l);
        IndexBlocks blocks({b1, b2});

        const PeneSpec sp = spec;
        const int i_len = spec.i;
        FunctionalSpec::TupleFn fn = [f, sp, d, n1, pi, pj, pk, i_len, g_kind](
                                         const PhasePoint* pts, std::size_t) {
            double buf[Observable::kMaxDim];
            double G = 1.0;
            if (g_kind == 0) {
                double total = 0.0;
                for (int u = 0; u < i_len; ++u) {
                    f.eval(pts[u], buf);
                    for (int a = 0; a < d; ++a) total += buf[a];
                }
                for (std::size_t pos : {pi, pj, pk}) {
                    f.eval(pts[pos], buf);
                    for (int a = 0; a < d; ++a) total += buf[a];
                }
                G = std::tanh(total / 4.0);
            } else if (g_kind == 1) {
                f.eval(pts[pi], buf);
                G = buf[0];
            }
            double B = 1.0;
            std::size_t pos = n1;
            auto ipow = [](double x, int e) {
                double r = 1.0;
                for (int t = 0; t < e; ++t) r *= x;
                return r;
            };
            if (sp.a > 0) {
                f.eval(pts[pos++], buf);
                B *= ipow(buf[sp.alpha], sp.a);
            }
            if (sp.b > 0) {
                f.eval(pts[pos++], buf);
                B *= ipow(buf[sp.beta], sp.b);
            }
            if (sp.c > 0) {
                f.eval(pts[pos++], buf);
                B *= ipow(buf[sp.gamma], sp.c);
            }
            return G * B;
        };
        FunctionalSpec F =
            FunctionalSpec::explicit_fn("pene_b2", blocks, std::move(fn), bound, adm);
        curve.x.push_back(static_cast<double>(p));
        curve.points.push_back(correlation_gap(
            table, F, per_p.with_stream_base(per_p.stream_base + 2 * kShards * jdx)));
    }
    return curve;
}

GapCurve pene_B2_curve(const BilliardTable& table, const Observable& f,
                       const PeneSpec& spec, const std::vector<long>& p_schedule,
                       const SampleBudget& per_p) {
    CurveResult curve = pene_B2_points(table, f, spec, p_schedule, per_p);
    return GapCurve{curve, fit_curve(curve)};
}

// ---------------------------------------------------------------------------
// Gouezel characteristic-function condition
// ---------------------------------------------------------------------------

CurveResult gouezel_charfn_points(const BilliardTable& table, const Observable& f,
                                  const GouezelBlockSpec& spec,
                                  const std::vector<long>& k_schedule,
                                  const SampleBudget& per_k) {
    const int d = f.dim();
    const int n = spec.n;
    const int m = spec.m;
    if (n < 1 || m < 1) throw ShapeMismatch("gouezel_charfn: need n >= 1 and m >= 1");
    if (spec.boundaries.size() != static_cast<std::size_t>(n + m + 1)) {
        throw ShapeMismatch("gouezel_charfn: boundaries must have n + m + 1 entries");
    }
    if (spec.boundaries.front() < 0) {
        throw ShapeMismatch("gouezel_charfn: boundaries must be non-negative");
    }
    for (std::size_t i = 1; i < spec.boundaries.size(); ++i) {
        if (spec.boundaries[i] <= spec.boundaries[i - 1]) {
            throw ShapeMismatch("gouezel_charfn: boundaries must be strictly increasing");
        }
    }
    if (spec.t.size() != static_cast<std::size_t>(n + m)) {
        throw ShapeMismatch("gouezel_charfn: need one frequency vector per sub-block");
    }
    for (const std::vector<double>& tv : spec.t) {
        if (tv.size() != static_cast<std::size_t>(d)) {
            throw ShapeMismatch(
                "gouezel_charfn: frequency vectors must match the observable dimension");
        }
        for (double w : tv) {
            if (!(std::abs(w) < spec.t_bound)) {
                throw ConfigError("gouezel_charfn: frequency component " +
                                  std::to_string(w) + " exceeds the bound " +
                                  std::to_string(spec.t_bound));
            }
        }
    }
    check_schedule(k_schedule, 0, "gouezel_charfn");

    std::vector<long> b1;
    std::vector<long> b2base;
    std::vector<int> group; // sub-block id of each flat tuple position
    for (int g = 0; g < n; ++g) {
        for (long t = spec.boundaries[static_cast<std::size_t>(g)];
             t < spec.boundaries[static_cast<std::size_t>(g + 1)]; ++t) {
            b1.push_back(t);
            group.push_back(g);
        }
    }
    for (int g = n; g < n + m; ++g) {
        for (long t = spec.boundaries[static_cast<std::size_t>(g)];
             t < spec.boundaries[static_cast<std::size_t>(g + 1)]; ++t) {
            b2base.push_back(t);
            group.push_back(g);
        }
    }
    double weight = 0.0;
    for (int gid : group) {
        for (double w : spec.t[static_cast<std::size_t>(gid)]) weight += std::abs(w);
    }
    const HolderAnnotation adm{f.holder().c * weight, f.holder().theta};

    GouezelBlockSpec sp = spec;
    auto phase_fn = [f, sp, group, d](const PhasePoint* pts, std::size_t len) {
        double buf[Observable::kMaxDim];
        double phase = 0.0;
        for (std::size_t pos = 0; pos < len; ++pos) {
            f.eval(pts[pos], buf);
            const std::vector<double>& tv = sp.t[static_cast<std::size_t>(group[pos])];
            for (int a = 0; a < d; ++a) phase += tv[static_cast<std::size_t>(a)] * buf[a];
        }
        return phase;
    };

    CurveResult curve;
    curve.x_name = "k";
    for (std::size_t j = 0; j < k_schedule.size(); ++j) {
        const long k = k_schedule[j];
        std::vector<long> b2 = b2base;
        for (long& v : b2) v += k;
        IndexBlocks blocks({b1, b2});
        FunctionalSpec re = FunctionalSpec::explicit_fn(
            "gouezel_re", blocks,
            [phase_fn](const PhasePoint* p, std::size_t len) {
                return std::cos(phase_fn(p, len));
            },
            1.0, adm);
        FunctionalSpec im = FunctionalSpec::explicit_fn(
            "gouezel_im", blocks,
            [phase_fn](const PhasePoint* p, std::size_t len) {
                return std::sin(phase_fn(p, len));
            },
            1.0, adm);
        std::vector<EstimateReport> est = correlation_gap_multi(
            table, {re, im}, per_k.with_stream_base(per_k.stream_base + 2 * kShards * j));
        EstimateReport rep = est[0];
        rep.value = std::hypot(est[0].value, est[1].value);
        rep.std_error = std::hypot(est[0].std_error, est[1].std_error);
        curve.x.push_back(static_cast<double>(k));
        curve.points.push_back(rep);
    }
    return curve;
}

GapCurve gouezel_charfn_gap(const BilliardTable& table, const Observable& f,
                            const GouezelBlockSpec& spec,
                            const std::vector<long>& k_schedule,
                            const SampleBudget& per_k) {
    CurveResult curve = gouezel_charfn_points(table, f, spec, k_schedule, per_k);
    return GapCurve{curve, fit_curve(curve)};
}

} // namespace sinai
