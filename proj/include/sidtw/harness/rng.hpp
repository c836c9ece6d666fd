#pragma once

#include <cstdint>
#include <limits>

namespace sidtw::harness {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based generator: the k-th output is a pure function of
// (seed, trial, stream, k), so trials can run in any order or in parallel and
// still draw identical numbers. Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    enum Stream : std::uint64_t {
        noise_x = 0,
        noise_y = 1,
        permutation = 2,
    };

    CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) noexcept
        : key_(mix64(mix64(mix64(seed) ^ trial) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ ^ mix64(counter_++)); }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace sidtw::harness
