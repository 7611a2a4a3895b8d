#pragma once

#include <cstdint>
#include <cstddef>

namespace mpc {

// Small deterministic hashes used for commitments, output digests and the
// public-coin expansion of the MAC check. Not cryptographically hardened;
// the protocol layer documents this.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 1469598103934665603ull) {
    const auto* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace mpc
