#ifndef PQCBENCH_PRF_HPP
#define PQCBENCH_PRF_HPP

// Deterministic mixing, byte-stream expansion and the simulator's uniform
// stream. The model crypto provider and every seed derivation in the harness
// go through these helpers, so results are reproducible bit-for-bit across
// runs and platforms. Nothing here is cryptographically secure; stability is
// the only goal.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pqcbench {

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 output function (Steele/Lea/Flood constants).
constexpr uint64_t splitmix64(uint64_t x) {
    uint64_t z = x + kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h = (h ^ static_cast<uint8_t>(c)) * 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(std::span<const uint8_t> bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (uint8_t b : bytes) {
        h = (h ^ b) * 0x100000001b3ull;
    }
    return h;
}

// Chain a previous digest with another byte run; used for transcript hashing.
inline uint64_t fnv1a64_chain(uint64_t h, std::span<const uint8_t> bytes) {
    for (uint8_t b : bytes) {
        h = (h ^ b) * 0x100000001b3ull;
    }
    return h;
}

constexpr uint64_t mix64(uint64_t a, uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// Counter-mode splitmix64 stream. Used for loss draws in the simulator: the
// standard library distributions are implementation-defined, this is not.
class RandomStream {
public:
    explicit RandomStream(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_++); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    uint64_t state_;
};

// Expand (seed, label) into n deterministic bytes: words splitmix64(s + i)
// emitted little-endian, where s = splitmix64(seed ^ fnv1a64(label)).
inline std::vector<uint8_t> expand_bytes(uint64_t seed, std::string_view label, size_t n) {
    std::vector<uint8_t> out;
    out.reserve(n);
    const uint64_t s = splitmix64(seed ^ fnv1a64(label));
    for (uint64_t i = 0; out.size() < n; ++i) {
        uint64_t w = splitmix64(s + i);
        for (int k = 0; k < 8 && out.size() < n; ++k) {
            out.push_back(static_cast<uint8_t>(w >> (8 * k)));
        }
    }
    return out;
}

} // namespace pqcbench

#endif
