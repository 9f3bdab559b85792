#pragma once

#include <cstdint>

namespace sinai {

/// Counter-based pseudorandom stream in the splitmix64 family.
///
/// Output n of stream s under seed is mix64(key(seed, s) + n * gamma), so a
/// stream is a pure function of (seed, stream, counter). Streams are cheap
/// to construct and independent for distinct (seed, stream) pairs, which is
/// what the sharded Monte Carlo drivers rely on: shard i of an estimate runs
/// on stream base+i regardless of which worker thread executes it.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(seed ^ (stream * 0xA24BAED4963EE407ull)) | 1ull), n_(0) {}

    std::uint64_t next_u64() { return mix64(key_ + (++n_) * kGamma); }

    /// Uniform double in the open interval (0,1).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    std::uint64_t key() const { return key_; }

    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    std::uint64_t key_;
    std::uint64_t n_;
};

} // namespace sinai
