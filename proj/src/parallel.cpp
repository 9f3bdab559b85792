#include "sinai/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace sinai {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SINAI_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
            // fall through to hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void run_sharded(int n_shards, int workers, const std::function<void(int)>& fn) {
    workers = std::min(std::max(workers, 1), n_shards);
    if (workers == 1) {
        for (int shard = 0; shard < n_shards; ++shard) fn(shard);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n_shards);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int shard = next.fetch_add(1);
                if (shard >= n_shards) return;
                try {
                    fn(shard);
                } catch (...) {
                    errors[shard] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

} // namespace sinai
