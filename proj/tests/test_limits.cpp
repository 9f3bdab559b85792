#include "sinai/common.hpp"
#include "sinai/limits.hpp"
#include "sinai/measure.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

using namespace sinai;

namespace {

SampleBudget budget(std::int64_t n, std::uint64_t base) {
    SampleBudget b;
    b.n_samples = n;
    b.seed = 1;
    b.stream_base = base;
    b.workers = 0;
    return b;
}

const ObservableCatalog& catalog() {
    static ObservableCatalog cat(reference_table(), 1);
    return cat;
}

double combined_se(const EstimateReport& a, const EstimateReport& b) {
    return a.combined_std_error(b);
}

} // namespace

TEST_CASE("four estimators of the centered pair correlation agree") {
    // Cov(cos_r, cos_r o T^p) for p in {1,2,3} reached through four
    // different code paths; pairwise agreement within 3 combined SE.
    const BilliardTable& table = reference_table();
    const Observable& cosr = catalog().builtin("cos_r");

    LipschitzOuter outer = make_outer("pairsum", 2, 1.0);
    FunctionalSpec F = FunctionalSpec::outer_of_sums(
        "paircorr", IndexBlocks({{0}, {1}}), {cosr, cosr}, outer, 1.0,
        HolderAnnotation{2.0 * cosr.holder().c, cosr.holder().theta});
    CurveResult e1 = gap_decay_points(table, F, {1, 2, 3}, budget(200000, 30000));
    CurveResult e2 = multiple_correlation_points(table, {cosr}, {cosr}, {1, 2, 3},
                                                 budget(200000, 31000));
    SteinA1Report a1 =
        stein_A1_check(table, cosr, 0, 0, 0, 0, {1, 2, 3}, budget(200000, 32000));
    PeneSpec psp;
    psp.i = psp.j = psp.k = 0;
    psp.a = 1;
    psp.b = psp.c = 0;
    psp.alpha = psp.beta = psp.gamma = 0;
    psp.g_name = "coordinate";
    CurveResult e4 =
        pene_B2_points(table, cosr, psp, {1, 2, 3}, budget(200000, 33000));

    const CurveResult* legs[4] = {&e1, &e2, &a1.pair, &e4};
    for (int a = 0; a < 4; ++a) {
        REQUIRE(legs[a]->points.size() == 3);
        // shared sign structure of the cos_r autocorrelation
        CHECK(legs[a]->points[0].value < 0.0);
        CHECK(legs[a]->points[1].value > 0.0);
        for (int b = a + 1; b < 4; ++b) {
            for (std::size_t i = 0; i < 3; ++i) {
                const double d =
                    std::abs(legs[a]->points[i].value - legs[b]->points[i].value);
                const double se =
                    combined_se(legs[a]->points[i], legs[b]->points[i]);
                INFO("legs ", a, " vs ", b, " at p=", i + 1, ": ", d / se, " sigma");
                CHECK(d <= 3.0 * se);
            }
        }
    }

    // side products of the same run: the pair decay fit is clean, the
    // fourth-moment curve decays faster (two gaps widen at once), and at
    // this budget the decoupling tail is inside the noise floor, which
    // must surface as an absent fit rather than a bogus one.
    REQUIRE(a1.pair_fit.has_value());
    CHECK(a1.pair_fit->rate > 0.0);
    CHECK(a1.pair_fit->rate < 1.0);
    CHECK(a1.pair_fit->r_squared >= 0.98);
    REQUIRE(a1.fourth_fit.has_value());
    CHECK(a1.fourth_fit->rate < a1.pair_fit->rate);
    CHECK_FALSE(a1.decoupling_fit.has_value());
    // the p=1 decoupling itself is sharply resolved and negative
    CHECK(a1.decoupling.points[0].value < 0.0);
    CHECK(std::abs(a1.decoupling.points[0].value) >
          5.0 * a1.decoupling.points[0].std_error);
}

TEST_CASE("direct quadruple decoupling matches the correlation-gap path") {
    const BilliardTable& table = reference_table();
    const Observable& cosr = catalog().builtin("cos_r");
    const Observable& vec2 = catalog().builtin("vec2");

    // coordinate 1 of the 2-vector is cos_r, so the two formulations
    // estimate the same mu(f f^1 f^2 f^3) - mu(f f^1) mu(f^2 f^3)
    EstimateReport direct = stein_decoupling_direct(table, vec2, 1, 1, 1, 1, 1, 2, 3,
                                                    budget(400000, 26000));
    FunctionalSpec F = product_all_functional("q3p1", IndexBlocks({{0, 1}, {2, 3}}),
                                              {cosr, cosr, cosr, cosr});
    EstimateReport gap = correlation_gap(table, F, budget(400000, 27000));
    const double diff = std::abs(direct.value - gap.value);
    CHECK(diff <= 3.0 * combined_se(direct, gap));
    CHECK(direct.value < 0.0); // the quadruple decoupling here is negative

    // repeated times are allowed (m = l) and the estimate is reproducible
    EstimateReport rep1 = stein_decoupling_direct(table, cosr, 0, 0, 0, 0, 1, 1, 2,
                                                  budget(50000, 50000));
    EstimateReport rep2 = stein_decoupling_direct(table, cosr, 0, 0, 0, 0, 1, 1, 2,
                                                  budget(50000, 50000));
    CHECK(rep1.value == rep2.value);
    CHECK(std::isfinite(rep1.value));
    CHECK(rep1.std_error > 0.0);
}

TEST_CASE("one-dimensional sigma matrix reproduces the Green-Kubo variance") {
    const BilliardTable& table = reference_table();
    const Observable& sphi = catalog().builtin("sin_phi");

    Sigma2Report gk = green_kubo_sigma2(table, sphi, 12, budget(200000, 34000));
    SigmaMatrix sm = sigma_matrix(table, sphi, 12, budget(200000, 34000));
    REQUIRE(sm.d == 1);
    CHECK(std::abs(gk.sigma2 - sm.m[0]) <= 1e-12);
    CHECK(sm.eigenvalues[0] == doctest::Approx(sm.m[0]));

    // the diffusion coefficient of sin(phi) on the reference table
    CHECK(gk.sigma2 > 0.25);
    CHECK(gk.sigma2 < 0.30);
    REQUIRE(gk.autocov.points.size() == 13);
    CHECK(gk.autocov.points[0].value > 0.0);  // C_0 = Var(f)
    CHECK(gk.autocov.points[1].value < 0.0);  // one-step anticorrelation
    REQUIRE(gk.pair_fit.has_value());
    CHECK(gk.pair_fit->rate > 0.0);
    CHECK(gk.pair_fit->rate < 1.0);
    CHECK(gk.tail_bound >= 0.0);
}

TEST_CASE("duplicated coordinates give an exactly singular limit covariance") {
    const BilliardTable& table = reference_table();
    const Observable& cosr = catalog().builtin("cos_r");
    Observable dup("dup_cos_r", 2,
                   [&cosr](const PhasePoint& p, double* out) {
                       out[0] = cosr.eval1(p);
                       out[1] = out[0];
                   },
                   1.0, cosr.holder(), /*mean_subtracted=*/true);

    SigmaMatrix sm = sigma_matrix(table, dup, 6, budget(50000, 50100));
    REQUIRE(sm.d == 2);
    CHECK(sm.m[0] == sm.m[3]);
    CHECK(sm.m[1] == sm.m[2]);
    CHECK(sm.m[0] == sm.m[1]);
    CHECK(sm.max_asymmetry == 0.0);
    REQUIRE(sm.eigenvalues.size() == 2);
    CHECK(std::abs(sm.eigenvalues[0]) <= 1e-12);
    CHECK(sm.eigenvalues[1] == doctest::Approx(2.0 * sm.m[0]));
}

TEST_CASE("zero observable: zero variance, degenerate CLT refusal") {
    const BilliardTable& table = reference_table();
    Observable zero("zero", 1, [](const PhasePoint&, double* out) { out[0] = 0.0; },
                    1.0, HolderAnnotation{0.0, 0.5}, /*mean_subtracted=*/true);
    Sigma2Report gk = green_kubo_sigma2(table, zero, 3, budget(2000, 50200));
    CHECK(gk.sigma2 == 0.0);
    CHECK_FALSE(gk.pair_fit.has_value());

    CltConfig cfg;
    cfg.window = 10;
    cfg.i_max = 3;
    cfg.sigma2_samples = 2000;
    CHECK_THROWS_AS(clt_experiment(table, zero, cfg, budget(500, 50200)),
                    DegenerateVariance);
}

TEST_CASE("window-one direct variance matches the analytic Var(sin phi) = 1/3") {
    const BilliardTable& table = reference_table();
    const Observable& sphi = catalog().builtin("sin_phi");
    EstimateReport dv = direct_variance(table, sphi, 1, budget(100000, 50300));
    CHECK(std::abs(dv.value - 1.0 / 3.0) <= 3.0 * dv.std_error);
    CHECK(dv.std_error > 0.0);
    CHECK(dv.n_samples == 100000);
}

TEST_CASE("padding multiple correlations with ones reduces to the pair") {
    const BilliardTable& table = reference_table();
    const Observable& cosr = catalog().builtin("cos_r");
    const Observable& one = catalog().builtin("one");
    CurveResult pair = multiple_correlation_points(table, {cosr}, {cosr}, {2},
                                                   budget(50000, 50400));
    CurveResult padded = multiple_correlation_points(table, {cosr, one}, {cosr, one},
                                                     {2}, budget(50000, 50500));
    REQUIRE(pair.points.size() == 1);
    REQUIRE(padded.points.size() == 1);
    const double d = std::abs(pair.points[0].value - padded.points[0].value);
    CHECK(d <= 3.0 * combined_se(pair.points[0], padded.points[0]));
    // both see the positive lag-2 correlation
    CHECK(pair.points[0].value > 0.0);
    CHECK(padded.points[0].value > 0.0);
}

TEST_CASE("normalized window sums approach the normal law as N grows") {
    const BilliardTable& table = reference_table();
    const Observable& sphi = catalog().builtin("sin_phi");
    CltConfig cfg;
    cfg.i_max = 12;
    cfg.sigma2_samples = 1000000;
    const long windows[3] = {10, 100, 1000};
    const std::uint64_t bases[3] = {36000, 37000, 38000};
    CltReport reports[3];
    for (int i = 0; i < 3; ++i) {
        cfg.window = windows[i];
        reports[i] = clt_experiment(table, sphi, cfg, budget(10000, bases[i]));
        INFO("window ", windows[i], " ks ", reports[i].ks);
        CHECK(reports[i].ks <= 0.02);
        CHECK(reports[i].ks_ci_lo <= reports[i].ks);
        CHECK(reports[i].ks_ci_hi >= reports[i].ks);
        CHECK(reports[i].sigma2_used > 0.25);
        CHECK(reports[i].sigma2_used < 0.30);
        CHECK(reports[i].n_windows == 10000);
    }
    // no certified increase along the chain, and the far end beats the start
    for (int i = 1; i < 3; ++i) {
        CHECK_FALSE(reports[i].ks_ci_lo > reports[i - 1].ks_ci_hi);
    }
    CHECK(reports[2].ks < reports[0].ks);
}

TEST_CASE("gradient coupling in the window sum is resolvable and decays") {
    const BilliardTable& table = reference_table();
    const Observable& sphi = catalog().builtin("sin_phi");
    SteinWindowSpec sp;
    sp.n = 30;
    sp.window = 60;
    CurveResult c = stein_A2_points(table, sphi, sp, {0, 2}, budget(1000000, 35000));
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[0].value > 0.0);
    CHECK(c.points[0].value > 3.5 * c.points[0].std_error);
    CHECK(std::abs(c.points[1].value) < std::abs(c.points[0].value));
}

TEST_CASE("characteristic-function gap with all-zero frequencies is exactly zero") {
    const BilliardTable& table = reference_table();
    const Observable& cosr = catalog().builtin("cos_r");
    GouezelBlockSpec sp;
    sp.boundaries = {0, 1, 2};
    sp.n = 1;
    sp.m = 1;
    sp.t = {{0.0}, {0.0}};
    CurveResult c = gouezel_charfn_points(table, cosr, sp, {0, 3}, budget(2000, 50600));
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[0].value == 0.0);
    CHECK(c.points[0].std_error == 0.0);
    CHECK(c.points[1].value == 0.0);
}

TEST_CASE("limit-theorem entry points validate their inputs") {
    const BilliardTable& table = reference_table();
    const ObservableCatalog& cat = catalog();
    const Observable& sphi = cat.builtin("sin_phi");
    const Observable& vec2 = cat.builtin("vec2");
    const Observable& opc = cat.builtin("one_plus_cos_r");
    SampleBudget b = budget(100, 50700);

    CHECK_THROWS_AS(green_kubo_sigma2(table, vec2, 4, b), ShapeMismatch);
    CHECK_THROWS_AS(green_kubo_sigma2(table, opc, 4, b), ShapeMismatch);
    CHECK_THROWS_AS(green_kubo_sigma2(table, sphi, 0, b), ShapeMismatch);
    CHECK_THROWS_AS(direct_variance(table, vec2, 5, b), ShapeMismatch);
    CHECK_THROWS_AS(direct_variance(table, sphi, 0, b), ShapeMismatch);
    CHECK_THROWS_AS(sigma_matrix(table, opc, 4, b), ShapeMismatch);
    CHECK_THROWS_AS(sigma_matrix(table, sphi, 0, b), ShapeMismatch);

    CltConfig cfg;
    cfg.window = 0;
    CHECK_THROWS_AS(clt_experiment(table, sphi, cfg, b), ShapeMismatch);

    CHECK_THROWS_AS(
        multiple_correlation_points(table, {}, {sphi}, {1}, b), ShapeMismatch);
    CHECK_THROWS_AS(
        multiple_correlation_points(table, {sphi}, {sphi}, {}, b), ShapeMismatch);
    CHECK_THROWS_AS(
        multiple_correlation_points(table, {sphi}, {sphi}, {2, 2}, b), ShapeMismatch);

    // a schedule with no entry >= 1 leaves the decoupling curve empty
    CHECK_THROWS_AS(stein_A1_check(table, sphi, 0, 0, 0, 0, {0}, b), ShapeMismatch);
    CHECK_THROWS_AS(stein_decoupling_direct(table, sphi, 0, 0, 0, 0, 2, 1, 3, b),
                    ShapeMismatch);

    SteinWindowSpec sw;
    sw.n = 70;
    sw.window = 60;
    CHECK_THROWS_AS(stein_A2_points(table, sphi, sw, {0}, b), ShapeMismatch);
    sw.n = 30;
    sw.v = {0.1, 0.2};
    CHECK_THROWS_AS(stein_A2_points(table, sphi, sw, {0}, b), ShapeMismatch);
    sw.v.clear();
    CHECK_THROWS_AS(stein_A2_points(table, sphi, sw, {0, 60}, b), ShapeMismatch);
    CHECK_THROWS_AS(stein_A2_points(table, opc, sw, {0}, b), ShapeMismatch);

    PeneSpec ps;
    ps.i = 3;
    ps.j = 2;
    CHECK_THROWS_AS(pene_B2_points(table, sphi, ps, {1}, b), ShapeMismatch);
    ps = PeneSpec{};
    ps.q = 0;
    CHECK_THROWS_AS(pene_B2_points(table, sphi, ps, {1}, b), ShapeMismatch);
    ps = PeneSpec{};
    ps.a = ps.b = ps.c = 0;
    CHECK_THROWS_AS(pene_B2_points(table, sphi, ps, {1}, b), ShapeMismatch);
    ps = PeneSpec{};
    ps.alpha = ps.beta = ps.gamma = 0;
    ps.g_name = "mystery";
    CHECK_THROWS_AS(pene_B2_points(table, sphi, ps, {1}, b), UnknownObservable);
    ps.g_name = "tanh_mean";
    ps.alpha = 1; // out of range for a scalar observable
    CHECK_THROWS_AS(pene_B2_points(table, sphi, ps, {1}, b), ShapeMismatch);

    GouezelBlockSpec gz;
    gz.boundaries = {0, 1, 2};
    gz.n = 0;
    gz.m = 2;
    gz.t = {{0.1}, {0.1}};
    CHECK_THROWS_AS(gouezel_charfn_points(table, sphi, gz, {0}, b), ShapeMismatch);
    gz.n = 1;
    gz.m = 1;
    gz.boundaries = {0, 1};
    CHECK_THROWS_AS(gouezel_charfn_points(table, sphi, gz, {0}, b), ShapeMismatch);
    gz.boundaries = {0, 1, 2};
    gz.t = {{0.1}};
    CHECK_THROWS_AS(gouezel_charfn_points(table, sphi, gz, {0}, b), ShapeMismatch);
    gz.t = {{0.1}, {1.5}};
    gz.t_bound = 1.0;
    CHECK_THROWS_AS(gouezel_charfn_points(table, sphi, gz, {0}, b), ConfigError);
}
