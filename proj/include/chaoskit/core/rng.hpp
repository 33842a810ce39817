// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace chaoskit
{

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 block function (Salmon et al., SC'11).
 *
 * Maps a 128-bit counter and a 64-bit key to 128 random bits.
 */
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

//! SplitMix64 finalizer; used for key derivation only.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

//! Purpose tags appended as the last path label of a stream.
namespace purpose
{
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t clock = 3;
inline constexpr std::uint64_t theta = 4;
inline constexpr std::uint64_t pair = 5;
inline constexpr std::uint64_t bootstrap = 6;
inline constexpr std::uint64_t reference = 7;
inline constexpr std::uint64_t collateral = 8;
inline constexpr std::uint64_t sampling = 9;
inline constexpr std::uint64_t replica = 10;
}  // namespace purpose

//---------------------------------------------------------------------------//
/*!
 * Counter-based splittable random stream.
 *
 * A stream is identified by a seed and an ordered path of 64-bit labels.
 * The path is hashed into a Philox key and the upper half of the counter;
 * the lower 64 bits of the counter index the output block. Identical
 * (seed, path) pairs reproduce identical sequences regardless of which
 * thread draws them or in which order streams are created.
 */
class RngStream
{
  public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed = 0,
                       std::vector<std::uint64_t> path = {});

    //! Child stream with `label` appended to the path.
    [[nodiscard]] RngStream split(std::uint64_t label) const;

    std::uint64_t seed() const { return seed_; }
    std::span<const std::uint64_t> path() const { return path_; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()();

    //! Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform();
    //! Standard normal (Box-Muller; the second variate is cached).
    double normal();
    //! Exponential with the given rate; rate must be positive.
    double exponential(double rate);
    //! Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    //! Number of 64-bit words consumed so far.
    std::uint64_t position() const { return 2 * block_ - (pending_ ? 1 : 0); }

  private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t upper_{0};
    std::uint64_t block_{0};
    std::uint64_t spare_word_{0};
    bool pending_{false};
    double spare_normal_{0};
    bool has_spare_normal_{false};

    void rekey();
};

//! Child stream: parent path extended by `label`.
inline RngStream split_stream(const RngStream& parent, std::uint64_t label)
{
    return parent.split(label);
}

//! Bitwise digest of a parameter vector, printed in event logs.
std::uint64_t digest(std::span<const double> values);

}  // namespace chaoskit
