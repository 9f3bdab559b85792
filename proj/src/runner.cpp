#include "sinai/runner.hpp"

#include "sinai/limits.hpp"
#include "sinai/measure.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

namespace sinai {

namespace {

using nlohmann::json;

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json est_json(const EstimateReport& e) {
    return json{{"value", e.value},
                {"std_error", e.std_error},
                {"n_samples", e.n_samples}};
}

json fit_json(const DecayFit& f) {
    return json{{"rate", f.rate},
                {"rate_ci_lo", f.rate_ci_lo},
                {"rate_ci_hi", f.rate_ci_hi},
                {"prefactor", f.prefactor},
                {"r_squared", f.r_squared},
                {"n_points", f.fit_range.size()},
                {"fit_range", f.fit_range}};
}

json curve_json(const CurveResult& c) {
    json rows = json::array();
    for (std::size_t i = 0; i < c.x.size(); ++i) {
        rows.push_back(json{{c.x_name, c.x[i]},
                            {"value", c.points[i].value},
                            {"std_error", c.points[i].std_error}});
    }
    return rows;
}

std::string csv_from_curve(const CurveResult& c) {
    std::string s = c.x_name + ",value,std_error,n_samples\n";
    for (std::size_t i = 0; i < c.x.size(); ++i) {
        s += g17(c.x[i]) + "," + g17(c.points[i].value) + "," +
             g17(c.points[i].std_error) + "," +
             std::to_string(c.points[i].n_samples) + "\n";
    }
    return s;
}

/// Named pass/fail assertions collected into the summary record.
struct CheckList {
    json arr = json::array();
    bool all = true;

    void add(const std::string& name, bool pass, json detail = json()) {
        json c{{"name", name}, {"pass", pass}};
        if (!detail.is_null()) c["detail"] = std::move(detail);
        arr.push_back(std::move(c));
        all = all && pass;
    }
};

/// How a decay curve is judged: as an exponential-decay fit (the default)
/// or, for the analytically-zero configurations, as a noise-level check.
struct FitPolicy {
    bool zero_check = false;
    bool allow_fit_failure = false;
    double min_r2 = 0.9;
};

FitPolicy fit_policy(const ConfigView& p, double default_r2) {
    FitPolicy fp;
    fp.zero_check = p.boolean("zero_check", false);
    fp.allow_fit_failure = p.boolean("allow_fit_failure", false);
    fp.min_r2 = p.num("min_r2", default_r2);
    return fp;
}

void judge_curve(const CurveResult& curve, const FitPolicy& fp, CheckList& checks,
                 json& results) {
    if (fp.zero_check) {
        double worst = 0.0;
        for (const EstimateReport& e : curve.points) {
            if (e.std_error > 0.0) {
                worst = std::max(worst, std::abs(e.value) / e.std_error);
            } else if (e.value != 0.0) {
                worst = std::numeric_limits<double>::infinity();
            }
        }
        results["worst_sigma"] = worst;
        checks.add("all_points_within_3se_of_zero", worst <= 3.0,
                   json{{"worst_sigma", worst}});
        return;
    }
    try {
        DecayFit fit = fit_curve(curve);
        results["fit"] = fit_json(fit);
        checks.add("fit_rate_in_unit_interval", fit.rate > 0.0 && fit.rate < 1.0,
                   json{{"rate", fit.rate}});
        checks.add("fit_r_squared", fit.r_squared >= fp.min_r2,
                   json{{"r_squared", fit.r_squared}, {"min", fp.min_r2}});
    } catch (const FitFailed& e) {
        results["fit"] = nullptr;
        checks.add("fit_available", fp.allow_fit_failure, json{{"error", e.what()}});
    }
}

SampleBudget budget_of(const ExperimentConfig& cfg) {
    SampleBudget b;
    b.n_samples = cfg.samples;
    b.seed = cfg.seed;
    b.stream_base = cfg.stream_base;
    b.workers = cfg.workers;
    return b;
}

/// Outer-of-sums functional over K equal blocks of `width` consecutive
/// indices, with the sup bound appropriate to the named outer.
FunctionalSpec equal_block_functional(const Observable& f, const std::string& outer_name,
                                      int K, int width) {
    LipschitzOuter outer = make_outer(outer_name, K, width * f.bound());
    const double s = width * f.bound();
    double bound = s;
    if (outer_name == "pairsum") bound = (K - 1) * s * s;
    else if (outer_name == "sum") bound = K * s;
    else if (outer_name == "product") bound = std::pow(s, K);
    else if (outer_name == "tanh_sum") bound = 1.0;
    IndexBlocks blocks = IndexBlocks::equal_gap(K, width, 1);
    std::vector<Observable> per(static_cast<std::size_t>(K) * width, f);
    HolderAnnotation adm{K * width * f.holder().c, f.holder().theta};
    return FunctionalSpec::outer_of_sums("gap_" + outer_name, std::move(blocks),
                                         std::move(per), std::move(outer), bound, adm);
}

using Files = std::vector<std::pair<std::string, std::string>>;

struct ExperimentContext {
    const ExperimentConfig& cfg;
    const BilliardTable& table;
    ObservableCatalog& catalog;
    ConfigView params;
    CheckList& checks;
    json& results;
    Files& files;
    std::ostream& diag;
};

// ---------------------------------------------------------------------------
// Experiment bodies
// ---------------------------------------------------------------------------

void run_paircorr(ExperimentContext& c) {
    c.params.allow_only({"f", "g", "schedule", "min_r2", "zero_check",
                         "allow_fit_failure"});
    const std::string fname = c.params.str("f", "sin_phi");
    const Observable& f = c.catalog.builtin(fname);
    const Observable& g = c.catalog.builtin(c.params.str("g", fname));
    if (f.dim() != 1 || g.dim() != 1) {
        c.params.fail("pair correlation needs scalar observables");
    }
    std::vector<long> schedule = c.params.longs("schedule", {1, 2, 3, 4});
    LipschitzOuter outer = make_outer("pairsum", 2, std::max(f.bound(), g.bound()));
    FunctionalSpec F = FunctionalSpec::outer_of_sums(
        "paircorr", IndexBlocks({{0}, {1}}), {f, g}, std::move(outer),
        f.bound() * g.bound(),
        HolderAnnotation{f.holder().c + g.holder().c,
                         std::max(f.holder().theta, g.holder().theta)});
    CurveResult curve = gap_decay_points(c.table, F, schedule, budget_of(c.cfg));
    c.results["points"] = curve_json(curve);
    c.files.emplace_back("curve.csv", csv_from_curve(curve));
    judge_curve(curve, fit_policy(c.params, 0.9), c.checks, c.results);
}

void run_multicorr(ExperimentContext& c) {
    c.params.allow_only({"f", "g", "r", "k", "schedule", "min_r2", "zero_check",
                         "allow_fit_failure"});
    const std::string fname = c.params.str("f", "sin_phi");
    const Observable& f = c.catalog.builtin(fname);
    const Observable& g = c.catalog.builtin(c.params.str("g", fname));
    const auto r = c.params.integer("r", 2);
    const auto k = c.params.integer("k", 2);
    if (r < 0 || k < 0) c.params.fail("r and k must be >= 0");
    std::vector<long> schedule = c.params.longs("schedule", {1, 2, 3, 4, 5});
    std::vector<Observable> f_list(static_cast<std::size_t>(r) + 1, f);
    std::vector<Observable> g_list(static_cast<std::size_t>(k) + 1, g);
    CurveResult curve =
        multiple_correlation_points(c.table, f_list, g_list, schedule, budget_of(c.cfg));
    c.results["points"] = curve_json(curve);
    c.files.emplace_back("curve.csv", csv_from_curve(curve));
    judge_curve(curve, fit_policy(c.params, 0.9), c.checks, c.results);
}

void run_gap(ExperimentContext& c) {
    c.params.allow_only({"f", "outer", "K", "width", "schedule", "min_r2",
                         "zero_check", "allow_fit_failure", "final_below_noise"});
    const Observable& f = c.catalog.builtin(c.params.str("f", "cos_r"));
    if (f.dim() != 1) c.params.fail("gap experiment needs a scalar observable");
    const int K = static_cast<int>(c.params.integer("K", 2));
    const int width = static_cast<int>(c.params.integer("width", 1));
    if (K < 2 || width < 1) c.params.fail("need K >= 2 and width >= 1");
    const std::string outer = c.params.str("outer", "pairsum");
    std::vector<long> schedule = c.params.longs("schedule", {1, 2, 3, 4, 5, 20});
    FunctionalSpec F = equal_block_functional(f, outer, K, width);
    CurveResult curve = gap_decay_points(c.table, F, schedule, budget_of(c.cfg));
    c.results["points"] = curve_json(curve);
    c.files.emplace_back("curve.csv", csv_from_curve(curve));
    judge_curve(curve, fit_policy(c.params, 0.9), c.checks, c.results);
    if (c.params.boolean("final_below_noise", true) && !curve.points.empty()) {
        const EstimateReport& last = curve.points.back();
        c.checks.add("final_gap_below_noise",
                     std::abs(last.value) <= 3.0 * last.std_error,
                     json{{"gap", curve.x.back()},
                          {"value", last.value},
                          {"std_error", last.std_error}});
    }
}

void run_interlaced(ExperimentContext& c) {
    c.params.allow_only({"f", "outer", "K", "width", "gap", "zero_check"});
    const Observable& f = c.catalog.builtin(c.params.str("f", "sin_phi"));
    if (f.dim() != 1) c.params.fail("interlaced experiment needs a scalar observable");
    const int K = static_cast<int>(c.params.integer("K", 4));
    const int width = static_cast<int>(c.params.integer("width", 1));
    const long gap = c.params.integer("gap", 5);
    if (K < 2 || K % 2 != 0) c.params.fail("K must be even and >= 2");
    if (width < 1 || gap < 1) c.params.fail("need width >= 1 and gap >= 1");
    const std::string outer_name = c.params.str("outer", "sum");
    LipschitzOuter a1 = make_outer(outer_name, K / 2, width * f.bound());
    LipschitzOuter a2 = make_outer(outer_name, K / 2, width * f.bound());
    IndexBlocks blocks = IndexBlocks::equal_gap(K, width, gap);
    std::vector<Observable> per(static_cast<std::size_t>(K) * width, f);
    EstimateReport e = interlaced_sums_gap(c.table, a1, a2, per, blocks, budget_of(c.cfg));
    c.results["estimate"] = est_json(e);
    std::string csv = "K,width,gap,value,std_error,n_samples\n";
    csv += std::to_string(K) + "," + std::to_string(width) + "," + std::to_string(gap) +
           "," + g17(e.value) + "," + g17(e.std_error) + "," +
           std::to_string(e.n_samples) + "\n";
    c.files.emplace_back("gap.csv", std::move(csv));
    if (c.params.boolean("zero_check", false)) {
        const double sig = e.std_error > 0.0
                               ? std::abs(e.value) / e.std_error
                               : (e.value == 0.0 ? 0.0
                                                 : std::numeric_limits<double>::infinity());
        c.checks.add("estimate_within_3se_of_zero", sig <= 3.0, json{{"sigma", sig}});
    }
}

void run_clt(ExperimentContext& c) {
    c.params.allow_only({"f", "windows", "i_max", "sigma2_samples", "max_ks",
                         "check_monotone"});
    const Observable& f = c.catalog.builtin(c.params.str("f", "sin_phi"));
    std::vector<long> windows = c.params.longs("windows", {1000});
    for (std::size_t i = 1; i < windows.size(); ++i) {
        if (windows[i] <= windows[i - 1]) {
            c.params.fail("windows must be strictly increasing");
        }
    }
    CltConfig cc;
    cc.i_max = static_cast<int>(c.params.integer("i_max", 12));
    cc.sigma2_samples = c.params.integer("sigma2_samples", 1000000);
    const double max_ks = c.params.num("max_ks", 0.02);

    std::string csv = "window,ks,ks_ci_lo,ks_ci_hi,sigma2_used,n_windows\n";
    json rows = json::array();
    std::vector<CltReport> reports;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        cc.window = windows[i];
        SampleBudget b = budget_of(c.cfg);
        b.stream_base = c.cfg.stream_base + 1000 * i;
        CltReport r = clt_experiment(c.table, f, cc, b);
        reports.push_back(r);
        c.diag << "clt N=" << windows[i] << " ks=" << r.ks << " ci=[" << r.ks_ci_lo
               << "," << r.ks_ci_hi << "]\n";
        csv += std::to_string(windows[i]) + "," + g17(r.ks) + "," + g17(r.ks_ci_lo) +
               "," + g17(r.ks_ci_hi) + "," + g17(r.sigma2_used) + "," +
               std::to_string(r.n_windows) + "\n";
        rows.push_back(json{{"window", windows[i]},
                            {"ks", r.ks},
                            {"ks_ci_lo", r.ks_ci_lo},
                            {"ks_ci_hi", r.ks_ci_hi},
                            {"sigma2_used", r.sigma2_used},
                            {"n_windows", r.n_windows}});
    }
    c.results["rows"] = rows;
    c.files.emplace_back("clt.csv", std::move(csv));
    const CltReport& last = reports.back();
    c.checks.add("ks_at_largest_window", last.ks <= max_ks,
                 json{{"ks", last.ks}, {"max", max_ks}});
    if (reports.size() > 1 && c.params.boolean("check_monotone", true)) {
        // Theory says KS shrinks with N; at finite budgets we demand that
        // no step shows a bootstrap-certified increase.
        bool ok = true;
        for (std::size_t i = 1; i < reports.size(); ++i) {
            if (reports[i].ks_ci_lo > reports[i - 1].ks_ci_hi) ok = false;
        }
        c.checks.add("ks_nonincreasing_within_ci", ok);
    }
}

void run_sigma(ExperimentContext& c) {
    c.params.allow_only({"f", "i_max", "window", "cov_samples", "max_rel"});
    const Observable& f = c.catalog.builtin(c.params.str("f", "vec2"));
    const int i_max = static_cast<int>(c.params.integer("i_max", 12));
    const long window = c.params.integer("window", 1000);
    const std::int64_t cov_samples =
        c.params.integer("cov_samples", std::max<std::int64_t>(1000, c.cfg.samples / 10));
    const double max_rel = c.params.num("max_rel", 0.10);

    SigmaMatrix sm = sigma_matrix(c.table, f, i_max, budget_of(c.cfg));
    SampleBudget bc = budget_of(c.cfg);
    bc.n_samples = cov_samples;
    bc.stream_base = c.cfg.stream_base + 1000;
    CovMatrixReport cv = empirical_cov_WN(c.table, f, window, bc);

    const int d = sm.d;
    std::string csv = "i,j,sigma,cov_wn\n";
    double dmax = 0.0;
    double smax = 0.0;
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            const double sv = sm.m[static_cast<std::size_t>(a * d + b)];
            const double cvv = cv.m[static_cast<std::size_t>(a * d + b)];
            csv += std::to_string(a) + "," + std::to_string(b) + "," + g17(sv) + "," +
                   g17(cvv) + "\n";
            dmax = std::max(dmax, std::abs(sv - cvv));
            smax = std::max(smax, std::abs(sv));
        }
    }
    c.files.emplace_back("matrix.csv", std::move(csv));
    const double rel = smax > 0.0 ? dmax / smax : 0.0;
    c.results["sigma"] = sm.m;
    c.results["cov_wn"] = cv.m;
    c.results["eigenvalues"] = sm.eigenvalues;
    c.results["max_asymmetry"] = sm.max_asymmetry;
    c.results["tail_bound"] = sm.tail_bound;
    c.results["max_rel_diff"] = rel;
    double eig_min = sm.eigenvalues.empty() ? 0.0 : sm.eigenvalues.front();
    for (double e : sm.eigenvalues) eig_min = std::min(eig_min, e);
    c.checks.add("symmetric", sm.max_asymmetry <= 1e-12,
                 json{{"max_asymmetry", sm.max_asymmetry}});
    c.checks.add("positive_semidefinite", eig_min >= -1e-8,
                 json{{"eig_min", eig_min}});
    c.checks.add("matches_empirical_cov", rel <= max_rel,
                 json{{"max_rel_diff", rel}, {"max", max_rel}});
}

void run_stein_a1(ExperimentContext& c) {
    c.params.allow_only({"f", "coords", "schedule", "min_r2",
                         "assert_decoupling_fit"});
    const Observable& f = c.catalog.builtin(c.params.str("f", "cos_r"));
    std::vector<long> coords = c.params.longs("coords", {0, 0, 0, 0});
    if (coords.size() != 4) c.params.fail("coords needs exactly 4 entries");
    for (long v : coords) {
        if (v < 0 || v >= f.dim()) c.params.fail("coords entry out of range");
    }
    std::vector<long> schedule = c.params.longs("schedule", {1, 2, 3});
    SteinA1Report rep = stein_A1_check(
        c.table, f, static_cast<int>(coords[0]), static_cast<int>(coords[1]),
        static_cast<int>(coords[2]), static_cast<int>(coords[3]), schedule,
        budget_of(c.cfg));
    c.files.emplace_back("pair.csv", csv_from_curve(rep.pair));
    c.files.emplace_back("fourth.csv", csv_from_curve(rep.fourth));
    c.files.emplace_back("decoupling.csv", csv_from_curve(rep.decoupling));
    c.results["pair"] = curve_json(rep.pair);
    c.results["fourth"] = curve_json(rep.fourth);
    c.results["decoupling"] = curve_json(rep.decoupling);
    c.results["pair_fit"] = rep.pair_fit ? fit_json(*rep.pair_fit) : json();
    c.results["fourth_fit"] = rep.fourth_fit ? fit_json(*rep.fourth_fit) : json();
    c.results["decoupling_fit"] =
        rep.decoupling_fit ? fit_json(*rep.decoupling_fit) : json();
    if (c.params.boolean("assert_decoupling_fit", false)) {
        const double min_r2 = c.params.num("min_r2", 0.85);
        const bool ok = rep.decoupling_fit && rep.decoupling_fit->rate > 0.0 &&
                        rep.decoupling_fit->rate < 1.0 &&
                        rep.decoupling_fit->r_squared >= min_r2;
        c.checks.add("decoupling_fit", ok,
                     rep.decoupling_fit ? fit_json(*rep.decoupling_fit) : json());
    }
}

void run_stein_a2(ExperimentContext& c) {
    c.params.allow_only({"f", "n", "window", "t", "v", "h", "schedule", "min_r2",
                         "zero_check", "allow_fit_failure"});
    const Observable& f = c.catalog.builtin(c.params.str("f", "cos_r"));
    SteinWindowSpec sp;
    sp.n = c.params.integer("n", 30);
    sp.window = c.params.integer("window", 60);
    sp.t = c.params.num("t", 0.7);
    if (c.params.has("v")) sp.v = c.params.doubles("v");
    sp.h = make_test_function(c.params.str("h", "sum_tanh"), f.dim());
    std::vector<long> schedule = c.params.longs("schedule", {0, 1, 2, 3});
    CurveResult curve = stein_A2_points(c.table, f, sp, schedule, budget_of(c.cfg));
    c.results["points"] = curve_json(curve);
    c.files.emplace_back("curve.csv", csv_from_curve(curve));
    judge_curve(curve, fit_policy(c.params, 0.85), c.checks, c.results);
}

void run_pene(ExperimentContext& c) {
    c.params.allow_only({"f", "i", "j", "k", "q", "l", "a", "b", "c", "alpha", "beta",
                         "gamma", "G", "schedule", "min_r2", "zero_check",
                         "allow_fit_failure"});
    const Observable& f = c.catalog.builtin(c.params.str("f", "vec2"));
    PeneSpec sp;
    sp.i = static_cast<int>(c.params.integer("i", sp.i));
    sp.j = static_cast<int>(c.params.integer("j", sp.j));
    sp.k = static_cast<int>(c.params.integer("k", sp.k));
    sp.q = c.params.integer("q", sp.q);
    sp.l = c.params.integer("l", sp.l);
    sp.a = static_cast<int>(c.params.integer("a", sp.a));
    sp.b = static_cast<int>(c.params.integer("b", sp.b));
    sp.c = static_cast<int>(c.params.integer("c", sp.c));
    sp.alpha = static_cast<int>(c.params.integer("alpha", sp.alpha));
    sp.beta = static_cast<int>(c.params.integer("beta", sp.beta));
    sp.gamma = static_cast<int>(c.params.integer("gamma", sp.gamma));
    sp.g_name = c.params.str("G", sp.g_name);
    std::vector<long> schedule = c.params.longs("schedule", {1, 2, 3, 4, 5, 6});
    CurveResult curve = pene_B2_points(c.table, f, sp, schedule, budget_of(c.cfg));
    c.results["points"] = curve_json(curve);
    c.files.emplace_back("curve.csv", csv_from_curve(curve));
    judge_curve(curve, fit_policy(c.params, 0.85), c.checks, c.results);
}

void run_gouezel(ExperimentContext& c) {
    c.params.allow_only({"f", "boundaries", "n", "m", "t", "t_bound", "schedule",
                         "min_r2", "zero_check", "allow_fit_failure"});
    const Observable& f = c.catalog.builtin(c.params.str("f", "cos_r"));
    GouezelBlockSpec sp;
    if (c.params.has("boundaries")) sp.boundaries = c.params.longs("boundaries");
    else sp.boundaries = {0, 1, 2};
    sp.n = static_cast<int>(c.params.integer("n", 1));
    sp.m = static_cast<int>(c.params.integer("m", 1));
    if (c.params.has("t")) {
        sp.t = c.params.vector_list("t");
    } else {
        sp.t.assign(static_cast<std::size_t>(sp.n + sp.m),
                    std::vector<double>(static_cast<std::size_t>(f.dim()), 0.5));
    }
    sp.t_bound = c.params.num("t_bound", 1.0);
    std::vector<long> schedule = c.params.longs("schedule", {0, 1, 2, 3, 4, 5});
    CurveResult curve = gouezel_charfn_points(c.table, f, sp, schedule, budget_of(c.cfg));
    c.results["points"] = curve_json(curve);
    c.files.emplace_back("curve.csv", csv_from_curve(curve));
    judge_curve(curve, fit_policy(c.params, 0.85), c.checks, c.results);
}

void run_sample(ExperimentContext& c) {
    c.params.allow_only({"n_steps"});
    const long n_steps = c.params.integer("n_steps", 1000);
    if (n_steps < 1) c.params.fail("n_steps must be >= 1");
    MuSampler sampler(c.table, c.cfg.seed, c.cfg.stream_base);
    PhasePoint p = sampler.sample();
    std::string csv = "step,scatterer,r,phi,flight_length\n";
    csv += "0," + std::to_string(p.scatterer) + "," + g17(p.r) + "," + g17(p.phi) +
           ",0\n";
    for (long s = 1; s <= n_steps; ++s) {
        CollisionRecord rec = collision_map(c.table, p);
        p = rec.to;
        csv += std::to_string(s) + "," + std::to_string(p.scatterer) + "," + g17(p.r) +
               "," + g17(p.phi) + "," + g17(rec.flight_length) + "\n";
    }
    c.files.emplace_back("trajectory.csv", std::move(csv));
    c.results["n_steps"] = n_steps;
}

// ---------------------------------------------------------------------------
// Dispatch and artifact writing
// ---------------------------------------------------------------------------

using Body = void (*)(ExperimentContext&);

struct ExperimentEntry {
    std::string description;
    Body body = nullptr; ///< null = handled specially (validate)
};

const std::map<std::string, ExperimentEntry>& registry() {
    static const std::map<std::string, ExperimentEntry> reg = {
        {"paircorr",
         {"pair-correlation decay curve with exponential fit", run_paircorr}},
        {"multicorr",
         {"multiple-correlation decay between index blocks", run_multicorr}},
        {"gap", {"functional correlation gap over an equal-gap schedule", run_gap}},
        {"interlaced",
         {"interlaced-sums covariance gap at a fixed block layout", run_interlaced}},
        {"clt", {"normalized Birkhoff sums vs the standard normal", run_clt}},
        {"sigma", {"Green-Kubo covariance matrix vs empirical cov(W_N)", run_sigma}},
        {"stein-a1",
         {"pair / fourth-moment / decoupling quantities with fits", run_stein_a1}},
        {"stein-a2",
         {"windowed gradient coupling decay in the half-width K", run_stein_a2}},
        {"pene", {"later-time product covariance decay curve", run_pene}},
        {"gouezel",
         {"characteristic-function factorization gap decay", run_gouezel}},
        {"validate", {"finite-horizon validation report for a table", nullptr}},
        {"sample", {"dump a raw trajectory for debugging", run_sample}},
    };
    return reg;
}

void run_validate(const ExperimentConfig& cfg, ConfigView& params, CheckList& checks,
                  json& results, std::ostream& diag) {
    params.allow_only({"p_max", "n_rays"});
    const int p_max = static_cast<int>(params.integer("p_max", 5));
    const std::int64_t n_rays = params.integer("n_rays", 200000);
    if (p_max < 1 || n_rays < 1) params.fail("need p_max >= 1 and n_rays >= 1");
    // Provisional free-path cap for the probe table; the report's tau_max
    // is the certified bound when the horizon turns out finite.
    BilliardTable table = build_raw_table(cfg.table, 1e3);
    HorizonReport rep = validate_table(table, p_max, n_rays, cfg.seed);
    results["finite"] = rep.finite;
    results["tau_max"] = rep.tau_max;
    results["max_free_path"] = rep.max_free_path;
    results["p_max"] = rep.p_max;
    results["n_rays"] = rep.n_rays;
    results["worst_corridor"] = json{{"p", rep.worst_corridor.p},
                                     {"q", rep.worst_corridor.q},
                                     {"clear_width", rep.worst_corridor.clear_width}};
    if (!rep.finite) {
        diag << "InfiniteHorizonDetected: open corridor in direction ("
             << rep.worst_corridor.p << ", " << rep.worst_corridor.q
             << "), clear width " << rep.worst_corridor.clear_width << "\n";
    }
    checks.add("finite_horizon", rep.finite, results["worst_corridor"]);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file " + path.string());
    out << content;
    if (!out) throw Error("failed writing output file " + path.string());
}

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, e] : registry()) v.push_back(k);
        return v;
    }();
    return names;
}

std::string experiment_description(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end()) throw ConfigError("unknown experiment " + name);
    return it->second.description;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& diag) {
    auto it = registry().find(cfg.experiment);
    if (it == registry().end()) {
        throw ConfigError("unknown experiment " + cfg.experiment);
    }
    ConfigView params(cfg.params, "params");

    CheckList checks;
    json results = json::object();
    Files files;

    if (cfg.experiment == "validate") {
        run_validate(cfg, params, checks, results, diag);
    } else {
        BilliardTable table = build_table(cfg.table);
        ObservableCatalog catalog(table, cfg.seed);
        ExperimentContext ctx{cfg,    table,   catalog, std::move(params),
                              checks, results, files,   diag};
        it->second.body(ctx);
    }

    json summary{{"experiment", cfg.experiment},
                 {"code_version", kCodeVersion},
                 {"config", cfg.canonical()},
                 {"config_hash", cfg.hash()},
                 {"results", results},
                 {"checks", checks.arr},
                 {"pass", checks.all}};

    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> names;
    for (const auto& [name, content] : files) {
        write_file(dir / name, content);
        names.push_back(name);
    }
    names.push_back("summary.json");
    write_file(dir / "summary.json", summary.dump(2) + "\n");

    json manifest{{"code_version", kCodeVersion},
                  {"config", cfg.canonical()},
                  {"config_hash", cfg.hash()},
                  {"outputs", names}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    RunOutcome out;
    out.exit_code = checks.all ? 0 : 1;
    out.summary = std::move(summary);
    return out;
}

} // namespace sinai
