#pragma once

// Counter-based uniform generator: the i-th draw is a pure function of
// (seed, i), so any range of a stream can be produced independently and in
// any order with identical results. The word function is splitmix64
// evaluated at counter i (state = seed + (i+1) * golden gamma, then the
// splitmix64 finalizer), which matches the sequential splitmix64 output
// stream exactly. Generator id reported in metadata: "splitmix64".

#include <cstdint>

namespace evtc {

class CounterRng {
public:
    static constexpr const char* kAlgorithm = "splitmix64";

    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // i-th 64-bit word of the stream, i >= 0
    std::uint64_t word(std::uint64_t i) const {
        std::uint64_t z = seed_ + (i + 1) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // i-th uniform in [0, 1), 53 random bits
    double uniform(std::uint64_t i) const { return static_cast<double>(word(i) >> 11) * 0x1.0p-53; }

private:
    std::uint64_t seed_;
};

}  // namespace evtc
