#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace batchrisk::rng {

// Algorithm identifier embedded in every report that carries sampled values.
// Integer-only generators keep results bit-identical across platforms, which
// std::uniform_* distributions do not guarantee.
inline constexpr std::string_view kAlgorithmId = "splitmix64+xoshiro256**/v1";

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a over a label; used to key substreams by operation name.
inline constexpr std::uint64_t stream_tag(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Xoshiro256ss {
public:
    explicit constexpr Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    constexpr std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound); unbiased via rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform sign in {-1.0, +1.0}.
    double rademacher() { return (next() >> 63) ? 1.0 : -1.0; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int s) {
        return (x << s) | (x >> (64 - s));
    }

    std::array<std::uint64_t, 4> state_{};
};

// Derived seed keyed by (seed, label, index); basis for substreams and for
// recording per-repetition seeds in reports.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                           std::uint64_t index = 0) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64_next(s);
    s = mixed ^ stream_tag(label);
    mixed = splitmix64_next(s);
    s = mixed ^ (index * 0x9e3779b97f4a7c15ULL + 0x85ebca77c2b2ae63ULL);
    return splitmix64_next(s);
}

// Independent substream keyed by (seed, operation label, index). Two calls
// with the same triple yield identical generators.
inline Xoshiro256ss substream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    return Xoshiro256ss(derive_seed(seed, label, index));
}

} // namespace batchrisk::rng
