#pragma once

#include "sinai/fidistats.hpp"

#include <optional>

namespace sinai {

/// Explicit product functional F = prod_r f_r(x_r) over the flattened
/// tuple; under the product law its mean factors into per-block product
/// means, so correlation_gap on it estimates multiple-correlation
/// covariances.
FunctionalSpec product_all_functional(std::string name, IndexBlocks blocks,
                                      std::vector<Observable> per_index);

/// Multiple correlation decay: Cov(prod of f's along (0..r),
/// prod of g's along (n+r..n+r+k)) as a function of n. Reduces to
/// correlation_gap with the two blocks above; f_list/g_list are scalar
/// observables, innermost first (f_list[j] sits at index r - j).
CurveResult multiple_correlation_points(const BilliardTable& table,
                                        const std::vector<Observable>& f_list,
                                        const std::vector<Observable>& g_list,
                                        const std::vector<long>& n_schedule,
                                        const SampleBudget& per_n);
GapCurve multiple_correlation(const BilliardTable& table,
                              const std::vector<Observable>& f_list,
                              const std::vector<Observable>& g_list,
                              const std::vector<long>& n_schedule,
                              const SampleBudget& per_n);

// ---------------------------------------------------------------------------
// Green-Kubo / CLT
// ---------------------------------------------------------------------------

struct Sigma2Report {
    double sigma2 = 0.0;
    double sigma2_std_error = 0.0;    ///< conservative (sum of per-lag SEs)
    double tail_bound = 0.0;          ///< 2 c theta^(i_max+1) / (1-theta); 0 = below noise
    int i_max = 0;
    CurveResult autocov;              ///< lags 0..i_max
    std::optional<DecayFit> pair_fit; ///< decay of |C_i| over i >= 1
};

/// sigma^2 = C_0 + 2 sum_{i>=1} C_i truncated at i_max, all lags estimated
/// from shared trajectory sweeps. Requires a centered scalar observable.
/// Throws NonSummableWarning when the fitted lag decay rate is >= 1.
Sigma2Report green_kubo_sigma2(const BilliardTable& table, const Observable& f,
                               int i_max, const SampleBudget& budget);

/// Var(S_N)/N over independent length-N windows.
EstimateReport direct_variance(const BilliardTable& table, const Observable& f,
                               long window, const SampleBudget& budget);

struct CltConfig {
    long window = 1000;                    ///< N
    int i_max = 40;                        ///< Green-Kubo truncation for sigma^2
    std::int64_t sigma2_samples = 1000000; ///< dedicated Green-Kubo budget
};

struct CltReport {
    double ks = 0.0;
    double ks_ci_lo = 0.0;
    double ks_ci_hi = 0.0;
    double sigma2_used = 0.0;
    std::int64_t n_windows = 0;
};

/// KS distance of S_N/(sigma sqrt(N)) to the standard normal over
/// n_samples independent windows. Throws DegenerateVariance when the
/// Green-Kubo sigma^2 falls below 1e-4 (operational coboundary guard).
CltReport clt_experiment(const BilliardTable& table, const Observable& f,
                         const CltConfig& cfg, const SampleBudget& budget);

// ---------------------------------------------------------------------------
// Covariance matrix of vector observables
// ---------------------------------------------------------------------------

struct SigmaMatrix {
    int d = 0;
    std::vector<double> m; ///< row-major d x d, symmetrized
    int i_max = 0;
    double tail_bound = 0.0;
    std::vector<double> eigenvalues; ///< ascending
    double max_asymmetry = 0.0;      ///< before symmetrization
};

/// Sigma = mu(f (x) f) + sum_n (mu(f^n (x) f) + mu(f (x) f^n)) truncated
/// at i_max; f must be a centered vector observable.
SigmaMatrix sigma_matrix(const BilliardTable& table, const Observable& f,
                         int i_max, const SampleBudget& budget);

struct CovMatrixReport {
    int d = 0;
    std::vector<double> m;               ///< row-major covariance of W_N
    std::vector<EstimateReport> entries; ///< raw second-moment estimates
};

/// Empirical covariance of W_N = S_N / sqrt(N) over independent windows.
CovMatrixReport empirical_cov_WN(const BilliardTable& table, const Observable& f,
                                 long window, const SampleBudget& budget);

// ---------------------------------------------------------------------------
// Stein conditions
// ---------------------------------------------------------------------------

struct SteinA1Report {
    CurveResult pair;        ///< mu(f_a f^k_b) over the schedule (k >= 0)
    std::optional<DecayFit> pair_fit;  ///< fitted over entries with k >= 1
    CurveResult fourth;      ///< mu(f_a f^s_b f^{s+2}_c f^{2s+2}_d) over s
    std::optional<DecayFit> fourth_fit;
    CurveResult decoupling;  ///< 4th-order decoupling gap over p = m - l >= 1
    std::optional<DecayFit> decoupling_fit;
};

/// The three (A1) quantities with their decay fits. `schedule` (entries
/// >= 0, strictly increasing) drives the pair lag k and the min-gap
/// parameter s directly; the decoupling quantity, a correlation_gap with
/// blocks (0,1) and (1+p, 2+p), uses the entries >= 1 as p.
SteinA1Report stein_A1_check(const BilliardTable& table, const Observable& f,
                             int alpha, int beta, int gamma, int delta,
                             const std::vector<long>& schedule,
                             const SampleBudget& per_quantity);

/// Direct estimate of the fourth-order decoupling difference
/// mu(f_a f^l_b f^m_c f^n_d) - mu(f_a f^l_b) mu(f^m_c f^n_d) for one
/// (l, m, n) with 0 <= l <= m <= n, from three independent estimates
/// (repeated times allowed, e.g. m = l). First-order-propagated SE.
EstimateReport stein_decoupling_direct(const BilliardTable& table,
                                       const Observable& f, int alpha, int beta,
                                       int gamma, int delta, long l, long m, long n,
                                       const SampleBudget& budget);

struct SteinWindowSpec {
    long n = 30;           ///< window center
    long window = 60;      ///< N
    double t = 0.7;        ///< scalar multiplier of W in the gradient argument
    std::vector<double> v; ///< offset, dim d (empty = 0.3 in each coordinate)
    TestFunctionC3 h;      ///< empty name = sum_tanh of dim d
};

/// (A2) quantity mu(f^n . grad h(v + W^n_{N,K} t)) over the half-width
/// schedule, one trajectory sweep per draw. The curve form fits the
/// decay of the absolute value.
CurveResult stein_A2_points(const BilliardTable& table, const Observable& f,
                            const SteinWindowSpec& spec,
                            const std::vector<long>& k_schedule,
                            const SampleBudget& per_k);
GapCurve stein_A2_curve(const BilliardTable& table, const Observable& f,
                        const SteinWindowSpec& spec,
                        const std::vector<long>& k_schedule,
                        const SampleBudget& per_k);

// ---------------------------------------------------------------------------
// Pene condition (B2)
// ---------------------------------------------------------------------------

struct PeneSpec {
    int i = 2, j = 3, k = 4;          ///< 0 <= i <= j <= k
    long q = 1, l = 2;                ///< later-time offsets, 0 < q < l
    int a = 1, b = 1, c = 1;          ///< powers, >= 0 with 1 <= a+b+c <= 3
    int alpha = 1, beta = 1, gamma = 1;
    std::string g_name = "tanh_mean"; ///< tanh_mean | coordinate | const
};

/// Cov[G(S_i, f^i, f^j, f^k), (f^{k+p}_a)^a (f^{k+p+q}_b)^b (f^{k+p+l}_c)^c]
/// over the p schedule. G catalog: "tanh_mean" = tanh of the mean of the
/// four (coordinate-summed) arguments; "coordinate" = first coordinate of
/// the f^i argument (the pair-covariance reduction when i = j = k = 0,
/// a = 1); "const" = 1 (zero covariance). Estimated as a correlation_gap
/// (the product law factors the covariance exactly).
CurveResult pene_B2_points(const BilliardTable& table, const Observable& f,
                           const PeneSpec& spec, const std::vector<long>& p_schedule,
                           const SampleBudget& per_p);
GapCurve pene_B2_curve(const BilliardTable& table, const Observable& f,
                       const PeneSpec& spec, const std::vector<long>& p_schedule,
                       const SampleBudget& per_p);

// ---------------------------------------------------------------------------
// Gouezel characteristic-function condition
// ---------------------------------------------------------------------------

struct GouezelBlockSpec {
    std::vector<long> boundaries;       ///< b_1 < ... < b_{n+m+1}, b_1 >= 0
    int n = 1;                          ///< leading group size
    int m = 1;                          ///< trailing group size
    std::vector<std::vector<double>> t; ///< n+m frequency vectors, each dim d
    double t_bound = 1.0;               ///< requires max_j |t_j|_inf < t_bound
};

/// |mu(e^{i(X1 + X2^{(k)})}) - mu(e^{iX1}) mu(e^{iX2^{(k)}})| over the
/// shift schedule, complex arithmetic as (cos, sin) real pairs. The
/// reported value is the modulus of the complex gap with a conservative
/// combined standard error.
CurveResult gouezel_charfn_points(const BilliardTable& table, const Observable& f,
                                  const GouezelBlockSpec& spec,
                                  const std::vector<long>& k_schedule,
                                  const SampleBudget& per_k);
GapCurve gouezel_charfn_gap(const BilliardTable& table, const Observable& f,
                            const GouezelBlockSpec& spec,
                            const std::vector<long>& k_schedule,
                            const SampleBudget& per_k);

} // namespace sinai
