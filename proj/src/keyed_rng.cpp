/// @file keyed_rng.cpp

#include "mmc/keyed_rng.h"

#include <cmath>
#include <numbers>

namespace mmc {

std::uint64_t HashString(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t DeriveKey(std::uint64_t seed, std::string_view tag, std::int64_t a,
                        std::int64_t b) {
    std::uint64_t k = Mix64(seed);
    k = Mix64(k ^ HashString(tag));
    k = Mix64(k ^ static_cast<std::uint64_t>(a));
    k = Mix64(k ^ static_cast<std::uint64_t>(b));
    return k;
}

std::uint64_t KeyedStream::Below(std::uint64_t n) {
    if (n <= 1) {
        return 0;
    }
    unsigned __int128 m = static_cast<unsigned __int128>(Next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(Next()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double KeyedStream::Normal() {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mmc
