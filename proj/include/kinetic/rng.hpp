#pragma once

// Keyed counter-style random streams. Every consumer derives its own stream
// from (seed, key words), so results never depend on evaluation order or
// thread schedule. Gaussians via Box-Muller; no libc distribution objects,
// keeping byte-reproducibility in our own hands.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace kinetic {

namespace rng_tag {
// Stream namespaces. Values are arbitrary but fixed forever.
inline constexpr std::uint64_t path_init = 0xB10F001ull;
inline constexpr std::uint64_t bridge_refine = 0xB10F002ull;
inline constexpr std::uint64_t lambda_point = 0xB10F003ull;
inline constexpr std::uint64_t ensemble_path = 0xB10F004ull;
inline constexpr std::uint64_t x0_sample = 0xB10F005ull;
inline constexpr std::uint64_t property_test = 0xB10F006ull;
} // namespace rng_tag

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
        std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc908ull);
        for (std::uint64_t w : key) h = mix64(h ^ mix64(w));
        state_ = h;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1].
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal (Box-Muller, second value cached).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_ = 0;
    double spare_ = 0;
    bool have_spare_ = false;
};

} // namespace kinetic
