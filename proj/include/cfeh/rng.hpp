// SPDX-License-Identifier: Apache-2.0
//
// cfeh - energy harvesting analysis for cell-free massive MIMO
// Copyright (C) 2026 The cfeh authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CFEH_RNG_HPP
#define CFEH_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace cfeh {

// Random streams are addressed by (master seed, domain, index). The 64-bit
// seed of a stream is
//
//     splitmix64(splitmix64(master ^ splitmix64(domain)) ^ splitmix64(index + 1))
//
// and seeds a std::mt19937_64. No stream depends on how many values another
// stream consumed, so interval i of a run draws the same channels regardless
// of the worker that executes it.

enum class Domain : std::uint64_t {
    topology = 0x746f706f,
    shadowing = 0x73686164,
    pilots = 0x70696c6f,
    interval = 0x696e7476,
    oracle = 0x6f72636c,
    trajectory = 0x7472616a,
    instance = 0x696e7374,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Domain domain, std::uint64_t index) noexcept
{
    const auto d = splitmix64(static_cast<std::uint64_t>(domain));
    return splitmix64(splitmix64(master ^ d) ^ splitmix64(index + 1));
}

/// A random stream with the Gaussian helpers the channel models need.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t master, Domain domain, std::uint64_t index)
        : engine_(derive_seed(master, domain, index)) {}

    double normal() { return normal_(engine_); }

    /// Circularly-symmetric CN(0, 1): real and imaginary parts N(0, 1/2).
    std::complex<double> complex_normal()
    {
        constexpr double s = 0.70710678118654752440;
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

} // namespace cfeh

#endif
