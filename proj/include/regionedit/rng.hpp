#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace regionedit {

/// SplitMix64 stream. Used everywhere randomness or seed derivation is
/// needed so that results are bit-stable across platforms; the standard
/// library distributions are implementation-defined and are avoided.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of mantissa.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (lo, hi) symmetric helpers.
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Multiply-shift; bias is < 2^-64 * n, irrelevant at our scales.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    SplitMix64 s(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
    return s.next();
}

inline std::uint64_t hash_str(std::uint64_t h, std::string_view text) {
    for (unsigned char c : text) h = hash_mix(h, c);
    return hash_mix(h, 0x5F4A7C15ULL ^ text.size());
}

/// Deterministic seed derivation: one master seed fans out into disjoint
/// streams keyed by a purpose tag and integer coordinates (anchor, step, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::initializer_list<std::uint64_t> coords = {}) {
    std::uint64_t h = hash_str(master, tag);
    for (std::uint64_t c : coords) h = hash_mix(h, c);
    return h;
}

}  // namespace regionedit
