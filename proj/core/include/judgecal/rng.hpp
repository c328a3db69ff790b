#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace judgecal {

// Seeded random stream used everywhere randomness is needed. Gaussian draws
// use Box-Muller without caching so the stream state is exactly the mt19937_64
// engine state; this keeps resumed runs bit-reproducible.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal();

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n), rejection-sampled so every value is
    // equally likely.
    std::uint64_t uniform_below(std::uint64_t n);

    // Fisher-Yates shuffle, deterministic for a fixed stream state.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Stable seed derivation: mixes the master seed with a list of labels
// (dataset id, noise kind, level/rep indices, stream role). The same tuple
// always yields the same seed, independent of platform or call order.
std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::initializer_list<std::string_view> parts);

// FNV-1a over the bytes of `data`; stable across platforms, used for
// config fingerprints.
std::uint64_t fnv1a64(std::string_view data);

} // namespace judgecal
