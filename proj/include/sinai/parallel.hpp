#pragma once

#include <exception>
#include <functional>
#include <vector>

namespace sinai {

/// Fixed shard count for every sharded Monte Carlo estimate. Work is
/// always split into exactly this many logical shards, each on its own
/// RNG stream, and merged in shard order — so results are bit-identical
/// for any worker count ("worker i" in reports means logical shard i).
constexpr int kShards = 64;

/// Worker-count resolution: explicit request if positive, else the
/// SINAI_WORKERS environment variable, else the hardware concurrency.
int resolve_workers(int requested = 0);

/// Runs fn(shard) for shard = 0..n_shards-1 on a pool of `workers`
/// threads. The caller merges the returned slots in shard order. The
/// first exception (by shard index) is rethrown after all threads join.
void run_sharded(int n_shards, int workers, const std::function<void(int)>& fn);

/// Convenience: produce one result per shard, in order.
template <class T, class Fn>
std::vector<T> sharded_map(int n_shards, int workers, Fn fn) {
    std::vector<T> out(n_shards);
    run_sharded(n_shards, workers, [&](int shard) { out[shard] = fn(shard); });
    return out;
}

} // namespace sinai
