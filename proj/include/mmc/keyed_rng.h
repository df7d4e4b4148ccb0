/// @file keyed_rng.h
/// @brief Counter-based random streams keyed on (seed, metric, date, repeat)

#pragma once

#include <cstdint>
#include <string_view>

namespace mmc {

/// 64-bit FNV-1a.
std::uint64_t HashString(std::string_view text);

/// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Folds the parts into a single stream key. Order matters.
std::uint64_t DeriveKey(std::uint64_t seed, std::string_view tag, std::int64_t a,
                        std::int64_t b);

/// Stateless-per-draw generator: the i-th output is Mix64(key + i * gamma),
/// so a stream is fully determined by its key.
class KeyedStream {
public:
    explicit KeyedStream(std::uint64_t key) : key_(key) {}

    std::uint64_t Next() {
        return Mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform integer in [0, n), unbiased (Lemire's multiply-shift with rejection).
    std::uint64_t Below(std::uint64_t n);

    /// Uniform double in [0, 1).
    double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (two uniforms per draw, no caching).
    double Normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mmc
