// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/core/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "chaoskit/core/error.hpp"

namespace chaoskit
{
namespace
{
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi)
{
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}
}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key)
{
    for (int round = 0; round < 10; ++round)
    {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMulA, ctr[0], lo0, hi0);
        mulhilo(kMulB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::vector<std::uint64_t> path)
    : seed_(seed), path_(std::move(path))
{
    rekey();
}

void RngStream::rekey()
{
    // Two independent 64-bit hashes of (seed, path): one keys Philox, the
    // other fills the upper counter words.
    std::uint64_t h1 = mix64(seed_ ^ 0x243f6a8885a308d3ull);
    std::uint64_t h2 = mix64(seed_ + 0x13198a2e03707344ull);
    for (std::uint64_t label : path_)
    {
        h1 = mix64(h1 ^ mix64(label + 0xa4093822299f31d0ull));
        h2 = mix64(h2 + mix64(label ^ 0x082efa98ec4e6c89ull));
    }
    key_ = {static_cast<std::uint32_t>(h1), static_cast<std::uint32_t>(h1 >> 32)};
    upper_ = h2;
    block_ = 0;
    pending_ = false;
    has_spare_normal_ = false;
}

RngStream RngStream::split(std::uint64_t label) const
{
    std::vector<std::uint64_t> child = path_;
    child.push_back(label);
    return RngStream(seed_, std::move(child));
}

RngStream::result_type RngStream::operator()()
{
    if (pending_)
    {
        pending_ = false;
        return spare_word_;
    }
    std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(upper_), static_cast<std::uint32_t>(upper_ >> 32)};
    auto out = philox4x32(ctr, key_);
    ++block_;
    spare_word_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    pending_ = true;
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

double RngStream::uniform()
{
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal()
{
    if (has_spare_normal_)
    {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(a);
    has_spare_normal_ = true;
    return r * std::cos(a);
}

double RngStream::exponential(double rate)
{
    require(rate > 0, "exponential: rate must be positive");
    return -std::log(uniform()) / rate;
}

std::uint64_t RngStream::below(std::uint64_t n)
{
    require(n > 0, "below: empty range");
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n)
    {
        std::uint64_t threshold = (0 - n) % n;
        while (low < threshold)
        {
            x = (*this)();
            m = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t digest(std::span<const double> values)
{
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (double v : values)
        h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
    return h;
}

}  // namespace chaoskit
