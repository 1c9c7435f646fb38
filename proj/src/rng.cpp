#include "kfpca/rng.hpp"

#include <cmath>
#include <numbers>

namespace kfpca {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t Rng::mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

Rng Rng::substream(std::uint64_t index) const { return Rng(mix(seed_, index)); }

Rng Rng::substream(std::string_view name) const { return Rng(mix(seed_, fnv1a(name))); }

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

long Rng::uniform_int(long lo, long hi) {
    return lo + static_cast<long>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
}

} // namespace kfpca
