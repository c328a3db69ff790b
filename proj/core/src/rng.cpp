#include "judgecal/rng.hpp"

#include <cmath>
#include <numbers>

namespace judgecal {

double RngStream::normal() {
    // u1 in (0, 1] so log() is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::initializer_list<std::string_view> parts) {
    std::uint64_t h = splitmix64(master_seed);
    for (std::string_view part : parts) {
        for (unsigned char c : part) {
            h = (h ^ c) * 0x100000001B3ULL; // FNV-1a step
        }
        h = splitmix64(h ^ 0x5851F42D4C957F2DULL);
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h = (h ^ c) * 0x100000001B3ULL;
    }
    return h;
}

} // namespace judgecal
