#pragma once

#include "sinai/common.hpp"

#include <cstddef>
#include <vector>

namespace sinai {

/// Ordered disjoint index sets I_1 <= ... <= I_K over non-negative
/// trajectory times. The gap ell_k is the distance from the last index of
/// block k to the first index of block k+1; validity requires every gap
/// to be at least 1.
class IndexBlocks {
  public:
    explicit IndexBlocks(std::vector<std::vector<long>> blocks);

    /// K blocks of `width` consecutive indices separated by `gap`,
    /// starting at `start`: e.g. K=2, width=1, gap=5 -> (0), (5).
    static IndexBlocks equal_gap(int k, int width, long gap, long start = 0);

    const std::vector<std::vector<long>>& blocks() const { return blocks_; }
    int K() const { return static_cast<int>(blocks_.size()); }
    std::size_t total_size() const { return flat_.size(); }
    /// All indices in ascending order (concatenation of the blocks).
    const std::vector<long>& flat() const { return flat_; }
    /// Positions p_0 = 0 < p_1 < ... < p_K delimiting blocks inside flat().
    const std::vector<std::size_t>& boundaries() const { return boundaries_; }
    /// Gaps ell_k = first(I_{k+1}) - last(I_k), length K-1.
    const std::vector<long>& gaps() const { return gaps_; }

    IndexBlocks translated(long shift) const;

  private:
    std::vector<std::vector<long>> blocks_;
    std::vector<long> flat_;
    std::vector<std::size_t> boundaries_;
    std::vector<long> gaps_;
};

} // namespace sinai
