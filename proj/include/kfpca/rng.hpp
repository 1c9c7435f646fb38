#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kfpca {

// Deterministic seeded generator. All variate transforms are implemented here
// (not via std:: distributions, whose output is implementation-defined) so
// that a given seed reproduces the same stream on any platform.
//
// Substreams are derived by mixing the root seed with an index or a name;
// parallel workers each own a substream and never share engine state.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    Rng substream(std::uint64_t index) const;
    Rng substream(std::string_view name) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1).
    double uniform();

    // Uniform on (0, 1]; safe under log().
    double uniform_open();

    // Standard normal, Box-Muller.
    double normal();

    // Uniform integer in [0, bound), rejection sampled.
    std::uint64_t uniform_index(std::uint64_t bound);

    // Uniform integer in [lo, hi] inclusive.
    long uniform_int(long lo, long hi);

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace kfpca
