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

#ifndef CFEH_GAUSSIAN_PRODUCT_HPP
#define CFEH_GAUSSIAN_PRODUCT_HPP

#include <array>
#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cfeh {

// Exact moments of products of affine forms in jointly Gaussian variables.
//
// Each factor is X_r = mean_r + w_r with zero-mean Gaussian w_r. Given the
// pairing matrix P_rs = E[w_r w_s], the expectation of any sub-product obeys
//
//     E[prod_{r in S} X_r] = mean_f E[prod_{S\f} X] + sum_{s in S\f} P_fs E[prod_{S\{f,s}} X]
//
// (f the lowest member of S), which is Isserlis' theorem applied one factor
// at a time. All 2^n sub-products are filled bottom-up in one pass.
template <std::size_t Factors>
class GaussianProduct {
    static_assert(Factors <= 16);

public:
    using value_type = std::complex<double>;
    static constexpr std::size_t subsets = std::size_t{1} << Factors;

    void set_mean(std::size_t r, value_type m) noexcept { mean_[r] = m; }

    /// Declares E[w_r w_s] = E[w_s w_r] = p. Pairs never declared are zero.
    void set_pairing(std::size_t r, std::size_t s, value_type p)
    {
        partners_[r].push_back({s, p});
        partners_[s].push_back({r, p});
    }

    void clear_pairings()
    {
        for (auto& v : partners_)
            v.clear();
    }

    /// Fills moment(mask) for every mask.
    void evaluate() noexcept
    {
        moment_[0] = 1.0;
        for (std::size_t mask = 1; mask < subsets; ++mask) {
            const auto f = static_cast<std::size_t>(std::countr_zero(mask));
            const std::size_t rest = mask & (mask - 1);
            value_type acc = mean_[f] * moment_[rest];
            for (const auto& [s, p] : partners_[f])
                if (rest & (std::size_t{1} << s))
                    acc += p * moment_[rest & ~(std::size_t{1} << s)];
            moment_[mask] = acc;
        }
    }

    value_type moment(std::size_t mask) const noexcept { return moment_[mask]; }

private:
    struct Partner {
        std::size_t index;
        value_type pairing;
    };
    std::array<value_type, Factors> mean_{};
    std::array<std::vector<Partner>, Factors> partners_{};
    std::array<value_type, subsets> moment_{};
};

/// Set partitions of every subset of {0, 1, 2, 3}, as lists of block masks,
/// for moment/cumulant conversion of up to four variables.
class PartitionTable {
public:
    static const PartitionTable& instance()
    {
        static const PartitionTable table;
        return table;
    }

    const std::vector<std::vector<unsigned>>& of(unsigned mask) const { return parts_[mask]; }

private:
    PartitionTable()
    {
        for (unsigned mask = 1; mask < 16; ++mask) {
            std::vector<unsigned> blocks;
            build(mask, blocks, parts_[mask]);
        }
    }

    static void build(unsigned remaining, std::vector<unsigned>& blocks, std::vector<std::vector<unsigned>>& out)
    {
        if (remaining == 0) {
            out.push_back(blocks);
            return;
        }
        // The lowest remaining element opens a block; choose its companions.
        const unsigned low = remaining & (~remaining + 1u);
        const unsigned others = remaining & ~low;
        for (unsigned sub = others;; sub = (sub - 1) & others) {
            blocks.push_back(low | sub);
            build(others & ~sub, blocks, out);
            blocks.pop_back();
            if (sub == 0)
                break;
        }
    }

    std::array<std::vector<std::vector<unsigned>>, 16> parts_{};
};

/// Joint cumulants of every subset of four variables from their joint moments.
inline std::array<std::complex<double>, 16> cumulants_from_moments(const std::array<std::complex<double>, 16>& m)
{
    static constexpr std::array<double, 5> weight = {0.0, 1.0, -1.0, 2.0, -6.0}; // (-1)^(b-1) (b-1)!
    const auto& table = PartitionTable::instance();
    std::array<std::complex<double>, 16> k{};
    for (unsigned mask = 1; mask < 16; ++mask) {
        std::complex<double> acc = 0.0;
        for (const auto& blocks : table.of(mask)) {
            std::complex<double> prod = weight[blocks.size()];
            for (unsigned b : blocks)
                prod *= m[b];
            acc += prod;
        }
        k[mask] = acc;
    }
    return k;
}

} // namespace cfeh

#endif
