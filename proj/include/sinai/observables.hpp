#pragma once

#include "sinai/blocks.hpp"
#include "sinai/common.hpp"
#include "sinai/geometry.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sinai {

/// Empirical dynamical-Hölder envelope parameters: oscillation over close
/// trajectory pairs is bounded by c * theta^(separation time).
struct HolderAnnotation {
    double c = 0.0;
    double theta = 0.5;
};

/// Scalar or small-vector function of a phase point with sup-norm and
/// Hölder metadata. Evaluation is pure; the declared bound is enforced
/// (with a tiny slack for float drift) so stale metadata fails loudly.
class Observable {
  public:
    static constexpr int kMaxDim = 4;
    using EvalFn = std::function<void(const PhasePoint&, double* out)>;

    Observable() = default;
    Observable(std::string name, int dim, EvalFn eval, double bound,
               HolderAnnotation holder = {}, bool mean_subtracted = false);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    double bound() const { return bound_; }
    const HolderAnnotation& holder() const { return holder_; }
    bool mean_subtracted() const { return mean_subtracted_; }

    /// Writes dim() values into out. Throws BoundViolation if any
    /// coordinate exceeds the declared bound beyond slack.
    void eval(const PhasePoint& p, double* out) const;
    /// Convenience for scalar observables (coordinate `coord` otherwise).
    double eval1(const PhasePoint& p, int coord = 0) const;

    /// Copy with metadata replaced (used by catalog annotation).
    Observable with_holder(HolderAnnotation h) const;
    Observable centered(double mean_shift, const std::string& suffix = "") const;

  private:
    std::string name_;
    int dim_ = 1;
    EvalFn eval_;
    double bound_ = 0.0;
    HolderAnnotation holder_;
    bool mean_subtracted_ = false;
};

/// Named Lipschitz outer function A applied to block sums, with its
/// per-variable Lipschitz constant on the relevant bounded domain.
struct LipschitzOuter {
    std::string name;
    std::function<double(const std::vector<double>&)> fn;
    double lipschitz = 1.0;
};

/// Outer-function catalog: "first" (s_1), "sum", "pairsum"
/// (s_1 s_2 + s_2 s_3 + ...), "product", "tanh_sum" (tanh of the total).
/// `domain_bound` is the sup-norm of the block sums it will be applied
/// to, used to compute Lipschitz constants of the polynomial outers.
LipschitzOuter make_outer(const std::string& name, int n_blocks, double domain_bound);

/// Test function h: R^d -> R with three bounded derivatives in closed
/// form, for the normal-approximation experiments.
struct TestFunctionC3 {
    std::string name;
    int dim = 1;
    std::function<double(const std::vector<double>&)> eval;
    std::function<std::vector<double>(const std::vector<double>&)> gradient;
    double d1_bound = 0.0;
    double d2_bound = 0.0;
    double d3_bound = 0.0;
};

/// Catalog: "sum_tanh" (h(w) = sum tanh(w_a)) and "linear" (h(w) = sum w_a).
TestFunctionC3 make_test_function(const std::string& name, int dim);

/// Test functional F on tuples of phase points, structured by index
/// blocks. Two forms: an outer Lipschitz function of per-block sums of
/// per-index scalar observables, or an explicit function of the whole
/// tuple. Both carry a declared sup bound and admissibility metadata.
class FunctionalSpec {
  public:
    static FunctionalSpec outer_of_sums(std::string name, IndexBlocks blocks,
                                        std::vector<Observable> per_index,
                                        LipschitzOuter outer, double bound,
                                        HolderAnnotation admissibility);

    using TupleFn = std::function<double(const PhasePoint*, std::size_t)>;
    static FunctionalSpec explicit_fn(std::string name, IndexBlocks blocks,
                                      TupleFn fn, double bound,
                                      HolderAnnotation admissibility);

    const std::string& name() const { return name_; }
    const IndexBlocks& blocks() const { return blocks_; }
    double bound() const { return bound_; }
    const HolderAnnotation& admissibility() const { return admissibility_; }
    bool has_outer() const { return outer_.fn != nullptr; }
    const LipschitzOuter& outer() const { return outer_; }

    /// Per-block sums S^(k) = sum over the k-th block of f_r(x_r).
    /// Only valid in outer-of-sums form (ShapeMismatch otherwise).
    std::vector<double> block_sums(const std::vector<PhasePoint>& tuple) const;

    /// F evaluated on a tuple of length total_size(). Throws
    /// ShapeMismatch on length mismatch and BoundViolation if the result
    /// exceeds the declared bound.
    double eval(const std::vector<PhasePoint>& tuple) const;

    /// Same spec with the blocks translated by a common shift.
    FunctionalSpec with_blocks(IndexBlocks blocks) const;

  private:
    std::string name_;
    IndexBlocks blocks_{{{0}}};
    std::vector<Observable> per_index_;
    LipschitzOuter outer_;
    TupleFn tuple_fn_;
    double bound_ = 0.0;
    HolderAnnotation admissibility_;
};

class MuSampler; // defined in measure.hpp

/// Catalog of centered, annotated observables on a fixed table. Centering
/// offsets are analytic where symmetry gives them (phi, sin_phi, cos_r,
/// the 2-vector) and Monte Carlo estimates otherwise (free_path); Hölder
/// annotations come from the empirical envelope fit. Construction is
/// deterministic given (table, seed).
class ObservableCatalog {
  public:
    ObservableCatalog(const BilliardTable& table, std::uint64_t seed,
                      std::int64_t center_samples = 100000,
                      std::int64_t holder_pairs = 2000, long holder_n_max = 40);

    /// Names: one, phi, sin_phi, cos_r, free_path, vec2, one_plus_cos_r.
    const Observable& builtin(const std::string& name) const;
    std::vector<std::string> names() const;
    const BilliardTable& table() const { return *table_; }

  private:
    const BilliardTable* table_;
    std::vector<Observable> entries_;
};

} // namespace sinai
