#include "sinai/common.hpp"
#include "sinai/geometry.hpp"
#include "sinai/measure.hpp"
#include "sinai/observables.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace sinai;

TEST_CASE("catalog exposes the documented names in order") {
    const BilliardTable& t = reference_table();
    ObservableCatalog cat(t, 11, 20000, 500);
    const std::vector<std::string> expected = {
        "one", "phi", "sin_phi", "cos_r", "free_path", "vec2", "one_plus_cos_r"};
    CHECK(cat.names() == expected);
    CHECK_THROWS_AS(cat.builtin("no_such"), UnknownObservable);
}

TEST_CASE("catalog observables are centered and annotated") {
    const BilliardTable& t = reference_table();
    ObservableCatalog cat(t, 12, 50000, 1000);
    MuSampler s(t, 12, 30);
    const int n = 50000;

    for (const std::string name : {"phi", "sin_phi", "cos_r", "free_path"}) {
        const Observable& f = cat.builtin(name);
        CHECK(f.mean_subtracted());
        CHECK(f.holder().c > 0.0);
        CHECK(f.holder().theta > 0.0);
        CHECK(f.holder().theta < 1.0);
        MomentAccumulator acc;
        for (int i = 0; i < n; ++i) acc.add(f.eval1(s.sample()));
        INFO("observable ", name);
        CHECK(std::abs(acc.mean) <= 3.0 * acc.std_error());
    }

    // the shifted variant is deliberately uncentered with exact mean 1
    const Observable& opc = cat.builtin("one_plus_cos_r");
    CHECK_FALSE(opc.mean_subtracted());
    MomentAccumulator acc;
    for (int i = 0; i < n; ++i) acc.add(opc.eval1(s.sample()));
    CHECK(std::abs(acc.mean - 1.0) <= 3.0 * acc.std_error());
}

TEST_CASE("vector observable coordinates and eval1 selection") {
    const BilliardTable& t = reference_table();
    ObservableCatalog cat(t, 13, 2000, 200);
    const Observable& v = cat.builtin("vec2");
    CHECK(v.dim() == 2);
    PhasePoint p{0, 0.7, 0.3};
    double out[2];
    v.eval(p, out);
    CHECK(out[0] == doctest::Approx(std::sin(0.3)));
    CHECK(v.eval1(p, 0) == doctest::Approx(out[0]));
    CHECK(v.eval1(p, 1) == doctest::Approx(out[1]));
}

TEST_CASE("declared sup bounds are enforced at evaluation time") {
    Observable lying("lying", 1,
                     [](const PhasePoint& p, double* out) { out[0] = 2.0 + p.phi; },
                     /*bound=*/1.0);
    PhasePoint p{0, 0.1, 0.0};
    double out[1];
    CHECK_THROWS_AS(lying.eval(p, out), BoundViolation);

    Observable honest("honest", 1,
                      [](const PhasePoint& p, double* out) { out[0] = std::sin(p.phi); },
                      1.0);
    honest.eval(p, out);
    CHECK(out[0] == doctest::Approx(0.0));
}

TEST_CASE("outer function catalog evaluates the documented formulas") {
    const std::vector<double> s = {2.0, 3.0, 4.0};
    CHECK(make_outer("first", 3, 10.0).fn(s) == doctest::Approx(2.0));
    CHECK(make_outer("sum", 3, 10.0).fn(s) == doctest::Approx(9.0));
    CHECK(make_outer("pairsum", 3, 10.0).fn(s) == doctest::Approx(2.0 * 3 + 3.0 * 4));
    CHECK(make_outer("product", 3, 10.0).fn(s) == doctest::Approx(24.0));
    CHECK(make_outer("tanh_sum", 3, 10.0).fn(s) == doctest::Approx(std::tanh(9.0)));
    CHECK_THROWS_AS(make_outer("cube", 3, 10.0), UnknownObservable);

    // Lipschitz metadata scales with the declared domain bound
    CHECK(make_outer("sum", 3, 5.0).lipschitz == doctest::Approx(1.0));
    CHECK(make_outer("pairsum", 2, 5.0).lipschitz >= 5.0);
    CHECK(make_outer("tanh_sum", 3, 100.0).lipschitz == doctest::Approx(1.0));
}

TEST_CASE("C3 test functions: values, gradients, derivative bounds") {
    TestFunctionC3 h = make_test_function("sum_tanh", 2);
    const std::vector<double> w = {0.4, -1.1};
    CHECK(h.eval(w) == doctest::Approx(std::tanh(0.4) + std::tanh(-1.1)));

    // gradient against central differences
    std::vector<double> g = h.gradient(w);
    REQUIRE(g.size() == 2);
    const double eps = 1e-6;
    for (int a = 0; a < 2; ++a) {
        std::vector<double> wp = w, wm = w;
        wp[static_cast<std::size_t>(a)] += eps;
        wm[static_cast<std::size_t>(a)] -= eps;
        const double fd = (h.eval(wp) - h.eval(wm)) / (2 * eps);
        CHECK(g[static_cast<std::size_t>(a)] == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(h.d1_bound > 0.0);
    CHECK(h.d2_bound > 0.0);
    CHECK(h.d3_bound > 0.0);

    TestFunctionC3 lin = make_test_function("linear", 3);
    CHECK(lin.eval({1.0, 2.0, 3.0}) == doctest::Approx(6.0));
    CHECK(lin.d2_bound == 0.0);
    CHECK(lin.d3_bound == 0.0);
    CHECK_THROWS_AS(make_test_function("quartic", 2), UnknownObservable);
}

TEST_CASE("functional specs: block sums, evaluation, shape checks") {
    const BilliardTable& t = reference_table();
    ObservableCatalog cat(t, 14, 2000, 200);
    const Observable f = cat.builtin("sin_phi");

    IndexBlocks blocks({{0, 1}, {2}});
    FunctionalSpec spec = FunctionalSpec::outer_of_sums(
        "demo", blocks, {f, f, f}, make_outer("pairsum", 2, 2.0), 2.0,
        HolderAnnotation{2.0 * f.holder().c, f.holder().theta});

    std::vector<PhasePoint> tuple = {{0, 0.1, 0.2}, {0, 0.4, -0.3}, {1, 0.2, 0.5}};
    std::vector<double> sums = spec.block_sums(tuple);
    REQUIRE(sums.size() == 2);
    const double s0 = std::sin(0.2) + std::sin(-0.3);
    const double s1 = std::sin(0.5);
    CHECK(sums[0] == doctest::Approx(s0));
    CHECK(sums[1] == doctest::Approx(s1));
    CHECK(spec.eval(tuple) == doctest::Approx(s0 * s1));

    std::vector<PhasePoint> wrong = {{0, 0.1, 0.2}};
    CHECK_THROWS_AS(spec.eval(wrong), ShapeMismatch);
    CHECK_THROWS_AS(spec.block_sums(wrong), ShapeMismatch);

    // translation preserves values because the functional only reads the tuple
    FunctionalSpec shifted = spec.with_blocks(blocks.translated(7));
    CHECK(shifted.eval(tuple) == doctest::Approx(spec.eval(tuple)));
    CHECK(shifted.blocks().flat() == std::vector<long>{7, 8, 9});

    // explicit-form specs refuse block_sums
    FunctionalSpec expl = FunctionalSpec::explicit_fn(
        "raw", IndexBlocks(std::vector<std::vector<long>>{{0}}),
        [](const PhasePoint* pts, std::size_t) { return std::sin(pts[0].phi); }, 1.0,
        HolderAnnotation{1.0, 0.5});
    CHECK(expl.eval({{0, 0.3, 0.7}}) == doctest::Approx(std::sin(0.7)));
    CHECK_THROWS_AS(expl.block_sums({{0, 0.3, 0.7}}), ShapeMismatch);
}

TEST_CASE("per-index observable count must match the block structure") {
    const BilliardTable& t = reference_table();
    ObservableCatalog cat(t, 15, 2000, 200);
    const Observable f = cat.builtin("sin_phi");
    CHECK_THROWS_AS(FunctionalSpec::outer_of_sums(
                        "bad", IndexBlocks({{0, 1}, {2}}), {f, f},
                        make_outer("sum", 2, 2.0), 2.0, HolderAnnotation{1.0, 0.5}),
                    ShapeMismatch);
}
