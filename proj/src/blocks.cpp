#include "sinai/blocks.hpp"

#include <cstdio>
#include <string>

namespace sinai {

namespace {

[[noreturn]] void invalid(const char* what, long a, long b) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "invalid index blocks: %s (%ld, %ld)", what, a, b);
    throw Error(buf);
}

} // namespace

IndexBlocks::IndexBlocks(std::vector<std::vector<long>> blocks)
    : blocks_(std::move(blocks)) {
    if (blocks_.empty()) invalid("no blocks", 0, 0);
    boundaries_.push_back(0);
    long prev = -1;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
        const auto& blk = blocks_[k];
        if (blk.empty()) invalid("empty block", long(k), 0);
        for (long idx : blk) {
            if (idx < 0) invalid("negative index", idx, 0);
            if (idx <= prev) invalid("indices not strictly increasing", prev, idx);
            if (k > 0 && flat_.size() == boundaries_.back()) {
                gaps_.push_back(idx - prev); // first index of block k
            }
            flat_.push_back(idx);
            prev = idx;
        }
        boundaries_.push_back(flat_.size());
    }
}

IndexBlocks IndexBlocks::equal_gap(int k, int width, long gap, long start) {
    if (k < 1 || width < 1 || gap < 1) {
        invalid("equal_gap needs k, width, gap >= 1", k, gap);
    }
    std::vector<std::vector<long>> blocks(k);
    long idx = start;
    for (int b = 0; b < k; ++b) {
        for (int w = 0; w < width; ++w) blocks[b].push_back(idx++);
        idx += gap - 1; // next block starts `gap` after the last index
    }
    return IndexBlocks(std::move(blocks));
}

IndexBlocks IndexBlocks::translated(long shift) const {
    std::vector<std::vector<long>> shifted = blocks_;
    for (auto& blk : shifted) {
        for (long& idx : blk) idx += shift;
    }
    return IndexBlocks(std::move(shifted));
}

} // namespace sinai
