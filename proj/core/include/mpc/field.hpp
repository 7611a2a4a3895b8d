#pragma once

#include <cstdint>
#include <cassert>

namespace mpc {

// Arithmetic in the prime field F_p with p = 2^32 - 5. All values are kept
// reduced into [0, p). Products go through a 64-bit intermediate.
inline constexpr uint64_t kPrime = 4294967291ull;

namespace fp {

inline uint32_t reduce(uint64_t v) { return static_cast<uint32_t>(v % kPrime); }

inline uint32_t add(uint32_t a, uint32_t b) {
    uint64_t s = uint64_t(a) + b;
    if (s >= kPrime) s -= kPrime;
    return static_cast<uint32_t>(s);
}

inline uint32_t sub(uint32_t a, uint32_t b) {
    return a >= b ? a - b : static_cast<uint32_t>(uint64_t(a) + kPrime - b);
}

inline uint32_t neg(uint32_t a) { return a == 0 ? 0 : static_cast<uint32_t>(kPrime - a); }

inline uint32_t mul(uint32_t a, uint32_t b) {
    return static_cast<uint32_t>((uint64_t(a) * b) % kPrime);
}

inline uint32_t pow(uint32_t base, uint64_t exp) {
    uint32_t acc = 1;
    uint32_t b = base;
    while (exp) {
        if (exp & 1) acc = mul(acc, b);
        b = mul(b, b);
        exp >>= 1;
    }
    return acc;
}

inline uint32_t inv(uint32_t a) {
    assert(a != 0);
    return pow(a, kPrime - 2);
}

} // namespace fp
} // namespace mpc
