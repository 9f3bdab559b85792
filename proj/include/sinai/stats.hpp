#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sinai {

/// Streaming mean/variance (Welford), mergeable across shards with Chan's
/// update. Merging is associative, so reductions over a fixed shard order
/// give bit-identical results for any worker count.
struct MomentAccumulator {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const MomentAccumulator& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        double d = o.mean - mean;
        std::int64_t nt = n + o.n;
        mean += d * static_cast<double>(o.n) / static_cast<double>(nt);
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) /
                         static_cast<double>(nt);
        n = nt;
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const;
};

/// Universal Monte Carlo result record: estimate, its standard error
/// (sample sd / sqrt(n)), the sample count, the seed lineage
/// {base_seed, stream_lo, stream_hi}, and the number of grazing resamples.
struct EstimateReport {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::vector<std::uint64_t> seeds;
    std::int64_t resample_count = 0;

    /// sqrt(se^2 + other.se^2), for difference-of-estimates assertions.
    double combined_std_error(const EstimateReport& o) const;
};

// ---------------------------------------------------------------------------
// Exponential decay fitting
// ---------------------------------------------------------------------------

struct DecayPoint {
    double x = 0.0;         ///< gap / lag / window half-width
    double value = 0.0;     ///< signed estimate; |value| is fitted
    double std_error = 0.0; ///< 0 disables the noise floor for this point
};

/// Result of a log-linear fit |value| ~ prefactor * rate^x over the points
/// that sit above their noise floor.
struct DecayFit {
    double rate = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
    double rate_ci_lo = 0.0; ///< 95% CI from the slope standard error
    double rate_ci_hi = 0.0;
    std::vector<double> fit_range; ///< x values that entered the fit
};

/// Fits log|value| vs x by least squares, keeping only points with
/// |value| > noise_mult * std_error. Throws FitFailed when fewer than
/// min_points survive truncation or the fit degenerates.
DecayFit fit_exponential_decay(const std::vector<DecayPoint>& pts,
                               double noise_mult = 3.0, int min_points = 3);

/// Plain log-linear fit d(x) = c * theta^x with no truncation; exact data is
/// recovered exactly. Zero/negative values are dropped; all-zero input
/// returns (0, 0).
std::pair<double, double> fit_log_linear(const std::vector<double>& xs,
                                         const std::vector<double>& ys);

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

/// Two-sided Kolmogorov-Smirnov statistic against a continuous CDF.
/// The sample is copied and sorted internally.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

class RngStream;

/// Percentile bootstrap CI for the KS statistic of `sample` against `cdf`.
std::pair<double, double> bootstrap_ks_ci(const std::vector<double>& sample,
                                          const std::function<double(double)>& cdf,
                                          int n_boot, RngStream& rng,
                                          double level = 0.95);

/// Pearson chi-square statistic for observed counts vs expected counts.
double chi2_statistic(const std::vector<std::int64_t>& observed,
                      const std::vector<double>& expected);

double normal_cdf(double x);
double normal_quantile(double p);          ///< Acklam's inverse-CDF approximation
double chi2_quantile(double p, double dof); ///< Wilson-Hilferty approximation

// ---------------------------------------------------------------------------
// Small dense symmetric eigenvalues (Jacobi sweeps), for PSD checks
// ---------------------------------------------------------------------------

/// Eigenvalues of a d x d symmetric matrix in row-major storage, ascending.
std::vector<double> sym_eigenvalues(std::vector<double> a, int d);

/// Max absolute entry of a row-major matrix.
double max_abs_entry(const std::vector<double>& a);

} // namespace sinai
