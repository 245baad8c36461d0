#pragma once
// Deterministic random streams.  Every (trial, player, purpose) triple gets
// its own stream derived from the root seed, so reward noise and policy
// tie-breaking never share state and reruns are bit-identical.

#include <cstdint>
#include <cmath>

namespace lipband {

enum class StreamPurpose : std::uint64_t { Reward = 0, Policy = 1 };

// splitmix64 step; the usual finalizer constants.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller.  Stateless per call: both uniforms are always consumed and
    // the second output discarded, so the draw count per call is fixed.
    double gaussian() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();  // unreachable in practice; guards log(0)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Uniform integer in [0, n).  n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the small n used in tie-breaks.
        unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(wide >> 64);
    }

private:
    std::uint64_t state_;
};

// Root -> stream derivation.  Chained mixing keeps distinct triples apart.
inline RngStream derive_stream(std::uint64_t root, std::uint64_t trial,
                               std::uint64_t player, StreamPurpose purpose) {
    std::uint64_t h = mix64(root);
    h = mix64(h ^ (trial + 0x6a09e667f3bcc909ull));
    h = mix64(h ^ (player + 0xbb67ae8584caa73bull));
    h = mix64(h ^ (static_cast<std::uint64_t>(purpose) + 0x3c6ef372fe94f82bull));
    return RngStream(h);
}

} // namespace lipband
