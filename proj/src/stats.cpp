#include "sinai/stats.hpp"

#include "sinai/common.hpp"
#include "sinai/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sinai {

double MomentAccumulator::std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(variance() / static_cast<double>(n));
}

double EstimateReport::combined_std_error(const EstimateReport& o) const {
    return std::sqrt(std_error * std_error + o.std_error * o.std_error);
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
    double slope_se = 0.0;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    size_t n = xs.size();
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LineFit f;
    if (sxx <= 0.0) throw FitFailed("degenerate abscissae in least squares");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < n; ++i) {
        double pred = f.intercept + f.slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - my) * (ys[i] - my);
    }
    f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (n > 2) f.slope_se = std::sqrt(ss_res / (static_cast<double>(n) - 2.0) / sxx);
    return f;
}

} // namespace

DecayFit fit_exponential_decay(const std::vector<DecayPoint>& pts, double noise_mult,
                               int min_points) {
    std::vector<double> xs, ys, kept;
    for (const auto& p : pts) {
        double mag = std::fabs(p.value);
        if (mag <= 0.0) continue;
        if (p.std_error > 0.0 && mag <= noise_mult * p.std_error) continue;
        xs.push_back(p.x);
        ys.push_back(std::log(mag));
        kept.push_back(p.x);
    }
    if (static_cast<int>(xs.size()) < min_points)
        throw FitFailed("only " + std::to_string(xs.size()) +
                        " points above the noise floor (need " +
                        std::to_string(min_points) + ")");
    LineFit lf = least_squares(xs, ys);
    DecayFit fit;
    fit.rate = std::exp(lf.slope);
    fit.prefactor = std::exp(lf.intercept);
    fit.r_squared = lf.r_squared;
    fit.rate_ci_lo = std::exp(lf.slope - 1.959963984540054 * lf.slope_se);
    fit.rate_ci_hi = std::exp(lf.slope + 1.959963984540054 * lf.slope_se);
    fit.fit_range = std::move(kept);
    return fit;
}

std::pair<double, double> fit_log_linear(const std::vector<double>& xs,
                                         const std::vector<double>& ys) {
    std::vector<double> fx, fy;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (ys[i] > 0.0) {
            fx.push_back(xs[i]);
            fy.push_back(std::log(ys[i]));
        }
    }
    if (fx.size() < 2) return {0.0, 0.0};
    LineFit lf = least_squares(fx, fy);
    return {std::exp(lf.intercept), std::exp(lf.slope)};
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw Error("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        double lo = f - static_cast<double>(i) / n;
        double hi = static_cast<double>(i + 1) / n - f;
        d = std::max(d, std::max(lo, hi));
    }
    return d;
}

std::pair<double, double> bootstrap_ks_ci(const std::vector<double>& sample,
                                          const std::function<double(double)>& cdf,
                                          int n_boot, RngStream& rng, double level) {
    std::vector<double> stats(n_boot);
    std::vector<double> resample(sample.size());
    for (int b = 0; b < n_boot; ++b) {
        for (size_t i = 0; i < sample.size(); ++i)
            resample[i] = sample[rng.uniform_index(sample.size())];
        stats[b] = ks_statistic(resample, cdf);
    }
    std::sort(stats.begin(), stats.end());
    double alpha = (1.0 - level) / 2.0;
    auto pick = [&](double q) {
        double idx = q * (n_boot - 1);
        return stats[static_cast<size_t>(idx + 0.5)];
    };
    return {pick(alpha), pick(1.0 - alpha)};
}

double chi2_statistic(const std::vector<std::int64_t>& observed,
                      const std::vector<double>& expected) {
    if (observed.size() != expected.size())
        throw Error("chi2_statistic: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw Error("chi2_statistic: nonpositive expected count");
        double d = static_cast<double>(observed[i]) - expected[i];
        s += d * d / expected[i];
    }
    return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw Error("normal_quantile: p out of (0,1)");
    // Acklam's rational approximation, |rel err| < 1.15e-9.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double chi2_quantile(double p, double dof) {
    // Wilson-Hilferty cube approximation.
    double z = normal_quantile(p);
    double t = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
    return dof * t * t * t;
}

std::vector<double> sym_eigenvalues(std::vector<double> a, int d) {
    if (static_cast<int>(a.size()) != d * d) throw Error("sym_eigenvalues: bad size");
    auto at = [&](int i, int j) -> double& { return a[i * d + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                if (std::fabs(at(p, q)) < 1e-300) continue;
                double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < d; ++k) {
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(d);
    for (int i = 0; i < d; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double max_abs_entry(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

} // namespace sinai
