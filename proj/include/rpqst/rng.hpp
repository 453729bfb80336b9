#pragma once

#include <cstdint>
#include <random>

namespace rpqst {

// splitmix64 step (Steele, Lea, Vigna). Used both as a standalone mixer and
// to derive independent substream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic seed derivation: hash the master seed together with up to
// three stream coordinates (e.g. state index, repetition, channel/axis tag).
// Distinct coordinates give statistically independent mt19937_64 streams.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::uint64_t a,
                                 std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t h = master;
    splitmix64(h);
    h ^= a;
    splitmix64(h);
    h ^= b;
    splitmix64(h);
    h ^= c;
    std::uint64_t s = h;
    return splitmix64(s);
}

// Stream tags for trace synthesis. Values are arbitrary but frozen: changing
// them changes every seeded output.
namespace stream {
inline constexpr std::uint64_t kChannelPl = 0x504c;  // "PL"
inline constexpr std::uint64_t kChannelPc = 0x5043;  // "PC"
inline constexpr std::uint64_t kAxisX = 0x58;        // "X"
inline constexpr std::uint64_t kAxisY = 0x59;        // "Y"
}  // namespace stream

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace rpqst
