#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dcleo {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Sub-seed for a named stream ("oracle", "scenarios", "exploration").
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

/// Sub-seed for the index-th member of a stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// std::mt19937_64 is fully specified by the standard, the library
// distributions are not; the transforms below keep streams identical
// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller, pairs cached).
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dcleo
