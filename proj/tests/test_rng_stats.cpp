#include "sinai/common.hpp"
#include "sinai/rng.hpp"
#include "sinai/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace sinai;

TEST_CASE("rng streams are pure functions of (seed, stream, counter)") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(42, 8);
    RngStream d(43, 7);
    RngStream e(42, 7);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t v = e.next_u64();
        same_c += (c.next_u64() == v);
        same_d += (d.next_u64() == v);
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
}

TEST_CASE("uniform01 lands strictly inside the unit interval with the right moments") {
    RngStream r(1, 0);
    const int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sq += u * u;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("uniform_index stays in range and covers all cells") {
    RngStream r(2, 0);
    std::vector<int> hits(13, 0);
    for (int i = 0; i < 13000; ++i) {
        const std::uint64_t k = r.uniform_index(13);
        REQUIRE(k < 13);
        ++hits[static_cast<std::size_t>(k)];
    }
    for (int h : hits) CHECK(h > 0);
}

TEST_CASE("ks statistic separates matching from shifted laws") {
    RngStream r(3, 0);
    std::vector<double> sample(20000);
    for (double& v : sample) v = r.uniform01();
    auto uniform_cdf = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
    const double ks_good = ks_statistic(sample, uniform_cdf);
    CHECK(ks_good < 1.63 / std::sqrt(20000.0)); // 1% KS band
    auto shifted_cdf = [&uniform_cdf](double x) { return uniform_cdf(x - 0.1); };
    CHECK(ks_statistic(sample, shifted_cdf) > 0.05);
}

TEST_CASE("bootstrap ks interval brackets the point estimate") {
    RngStream r(4, 0);
    std::vector<double> sample(2000);
    for (double& v : sample) v = r.uniform01();
    auto uniform_cdf = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
    const double ks = ks_statistic(sample, uniform_cdf);
    RngStream boot(5, 0);
    auto ci = bootstrap_ks_ci(sample, uniform_cdf, 300, boot);
    CHECK(ci.first <= ci.second);
    CHECK(ci.first <= ks * 1.5);
    CHECK(ci.second >= ks * 0.7);
    CHECK(ci.second < 0.1);
}

TEST_CASE("normal cdf hits the standard table values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
    CHECK(normal_cdf(-1.959963985) == doctest::Approx(0.025).epsilon(1e-6));
}

TEST_CASE("chi2 statistic and quantile behave") {
    std::vector<std::int64_t> obs = {10, 10, 10};
    std::vector<double> expect = {10.0, 10.0, 10.0};
    CHECK(chi2_statistic(obs, expect) == doctest::Approx(0.0));
    CHECK_THROWS_AS(chi2_statistic(obs, {10.0, 10.0}), Error);
    CHECK(chi2_quantile(0.99, 10.0) == doctest::Approx(23.209).epsilon(0.02));
}

TEST_CASE("exponential decay fit recovers an exact curve") {
    std::vector<DecayPoint> pts;
    for (int i = 1; i <= 6; ++i) {
        pts.push_back({static_cast<double>(i), 2.0 * std::pow(0.5, i), 1e-6});
    }
    DecayFit fit = fit_exponential_decay(pts);
    CHECK(fit.rate == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(fit.prefactor == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.rate_ci_lo <= 0.5);
    CHECK(fit.rate_ci_hi >= 0.5);
    CHECK(fit.fit_range.size() == 6);
}

TEST_CASE("decay fit works on alternating signs through absolute values") {
    std::vector<DecayPoint> pts;
    double sign = -1.0;
    for (int i = 1; i <= 5; ++i) {
        pts.push_back({static_cast<double>(i), sign * 3.0 * std::pow(0.4, i), 1e-8});
        sign = -sign;
    }
    DecayFit fit = fit_exponential_decay(pts);
    CHECK(fit.rate == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("decay fit truncates at the noise floor") {
    // three clean points, then two buried in noise: the fit must use
    // exactly the clean prefix
    std::vector<DecayPoint> pts = {
        {1.0, 0.4, 1e-4}, {2.0, 0.16, 1e-4}, {3.0, 0.064, 1e-4},
        {4.0, 1e-5, 1e-4}, {5.0, -2e-5, 1e-4},
    };
    DecayFit fit = fit_exponential_decay(pts);
    CHECK(fit.fit_range.size() == 3);
    CHECK(fit.rate == doctest::Approx(0.4).epsilon(0.01));

    std::vector<DecayPoint> noise = {
        {1.0, 1e-5, 1e-4}, {2.0, -1e-5, 1e-4}, {3.0, 2e-5, 1e-4}};
    CHECK_THROWS_AS(fit_exponential_decay(noise), FitFailed);
}

TEST_CASE("estimate report combines standard errors conservatively") {
    EstimateReport a;
    a.value = 1.0;
    a.std_error = 0.3;
    EstimateReport b;
    b.value = 2.0;
    b.std_error = 0.4;
    CHECK(a.combined_std_error(b) == doctest::Approx(0.5));
}
