#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cbo {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// Every random scalar in the library is addressed, not drawn: the value is a
// pure function of (seed, stream domain, three 32-bit indices). Replays are
// exact for any thread count or evaluation order.

enum class Stream : std::uint32_t {
    init_positions = 1,
    step_noise = 2,
    mc_sampling = 3,
    ball_sampling = 4,
    flow_sampling = 5,
    coupling_noise = 6,
    euler_fine = 7,
    scratch = 8,
};

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMulA = 0xD2511F53u;
    constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    constexpr std::uint32_t kWeylB = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

inline std::uint64_t join64(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// 53-bit mantissa draws; (0,1] for the log argument, [0,1) for the phase.
inline double unit_open_at_zero(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double unit_half_open(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline std::array<std::uint32_t, 4> rng_block(std::uint64_t seed, Stream domain,
                                              std::uint32_t a, std::uint32_t b,
                                              std::uint32_t c) {
    const std::array<std::uint32_t, 4> ctr = {a, b, c, static_cast<std::uint32_t>(domain)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                             static_cast<std::uint32_t>(seed >> 32)};
    return detail::philox4x32(ctr, key);
}

// One standard normal per address (Box-Muller, cosine branch).
inline double gaussian_at(std::uint64_t seed, Stream domain, std::uint32_t a,
                          std::uint32_t b, std::uint32_t c) {
    const auto r = rng_block(seed, domain, a, b, c);
    const double u1 = detail::unit_open_at_zero(detail::join64(r[0], r[1]));
    const double u2 = detail::unit_half_open(detail::join64(r[2], r[3]));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform_at(std::uint64_t seed, Stream domain, std::uint32_t a,
                         std::uint32_t b, std::uint32_t c) {
    const auto r = rng_block(seed, domain, a, b, c);
    return detail::unit_half_open(detail::join64(r[0], r[1]));
}

}  // namespace cbo
