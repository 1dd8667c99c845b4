/*
   Copyright 2026 The switchavg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace switchavg {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Philox4x32-10 (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{M0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{M1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

} // namespace detail

/// Purpose tags used to key independent sub-streams.
namespace stream_tag {
inline constexpr std::uint64_t chain = 0x636861696eull;     // "chain"
inline constexpr std::uint64_t brownian = 0x62726f776eull;  // "brown"
inline constexpr std::uint64_t ensemble = 0x656e73626cull;  // "ensbl"
inline constexpr std::uint64_t initial = 0x696e6974ull;     // "init"
} // namespace stream_tag

/// Counter-based random stream. The key is derived from
/// (seed, replicate, purpose); draws walk a 64-bit block counter through
/// Philox4x32-10. A Stream is a plain value: copies replay the same draws,
/// and split() derives an independent child without touching the parent.
///
/// Distributions are implemented here rather than through <random> so that
/// draws are bit-reproducible across standard library implementations.
class Stream {
public:
    Stream() : Stream(0) {}

    explicit Stream(std::uint64_t seed, std::uint64_t replicate = 0, std::uint64_t purpose = 0)
        : key_(derive(seed, replicate, purpose)) {}

    Stream split(std::uint64_t tag) const {
        Stream child;
        child.key_ = detail::splitmix64(key_ ^ detail::splitmix64(tag + 0x5bd1e995ull));
        return child;
    }

    Stream split(std::string_view tag) const { return split(detail::fnv1a(tag)); }

    std::uint64_t key() const noexcept { return key_; }

    std::uint64_t next_u64() noexcept {
        if (lane_ >= 4) refill();
        const std::uint64_t hi = block_[lane_++];
        const std::uint64_t lo = block_[lane_++];
        return (hi << 32) | lo;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t replicate, std::uint64_t purpose) {
        std::uint64_t k = detail::splitmix64(seed);
        k = detail::splitmix64(k ^ replicate);
        return detail::splitmix64(k ^ purpose);
    }

    void refill() noexcept {
        const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                               static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
        const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(key_),
                                               static_cast<std::uint32_t>(key_ >> 32)};
        block_ = detail::philox4x32(ctr, key);
        ++counter_;
        lane_ = 0;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int lane_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace switchavg
