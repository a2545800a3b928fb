// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>

namespace brwre {

//---------------------------------------------------------------------------//
/*!
 * Splittable counter-based random stream.
 *
 * The n-th output of a stream is mix(seed + n * gamma), so a stream is fully
 * identified by its (seed, gamma) pair and its position. Child streams are a
 * pure function of the parent identity and the child index, never of how
 * many numbers the parent has already produced; any replica can therefore be
 * regenerated independently of thread scheduling.
 *
 * Satisfies UniformRandomBitGenerator, so it plugs into <random> and
 * Boost.Random distributions.
 */
class RandomStream
{
  public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed) noexcept
        : seed_(mix64(seed)), gamma_(mix_gamma(seed + kGolden)), base_(seed_)
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept
    {
        seed_ += gamma_;
        return mix64(seed_);
    }

    //! Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    //! Independent child stream number `index`. Does not advance this stream.
    [[nodiscard]] RandomStream split(std::uint64_t index) const noexcept
    {
        std::uint64_t const key = mix64(base_ ^ mix64(index * kGolden + gamma_));
        return RandomStream(key, mix_gamma(key + index + 1), tag{});
    }

    static constexpr std::uint64_t mix64(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    struct tag {};
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    RandomStream(std::uint64_t key, std::uint64_t gamma, tag) noexcept
        : seed_(key), gamma_(gamma), base_(key)
    {
    }

    // Odd increment with enough bit transitions (SplittableRandom rule).
    static constexpr std::uint64_t mix_gamma(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
        z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ULL;
        z = (z ^ (z >> 33)) | 1ULL;
        int const flips = __builtin_popcountll(z ^ (z >> 1));
        return flips < 24 ? z ^ 0xAAAAAAAAAAAAAAAAULL : z;
    }

    std::uint64_t seed_;
    std::uint64_t gamma_;
    std::uint64_t base_;
};

//! Named child-stream slots so modules never collide on indices.
namespace stream_slot {
inline constexpr std::uint64_t environment = 0;
inline constexpr std::uint64_t particles = 1;
inline constexpr std::uint64_t walk = 2;
inline constexpr std::uint64_t replicas = 3;
inline constexpr std::uint64_t reference_sample = 4;
}  // namespace stream_slot

}  // namespace brwre
