#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rwtq {

// All randomness in a run flows from one root seed. Substreams are derived
// by name so that adding a draw to one consumer (e.g. the agent) does not
// perturb another (e.g. environment generation).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
    // FNV-1a, 64-bit.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
    return splitmix64(root ^ hash_name(stream));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                                 std::uint64_t index) {
    return splitmix64(derive_seed(root, stream) ^ splitmix64(index));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace rwtq
