#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace curate::rng {

// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so seeded results would differ between standard libraries. These helpers
// only rely on the exactly specified mt19937_64 sequence.
using Engine = std::mt19937_64;

/// Uniform integer in [0, n) by rejection sampling. n must be > 0.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % n;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_real(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_index(eng, i));
        std::swap(v[i - 1], v[j]);
    }
}

/// Draws `count` distinct elements of v uniformly (partial Fisher-Yates);
/// they end up in v[0, count).
template <typename T>
void sample_prefix(std::vector<T>& v, std::size_t count, Engine& eng) {
    if (count > v.size()) count = v.size();
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_index(eng, v.size() - i));
        std::swap(v[i], v[j]);
    }
}

}  // namespace curate::rng
