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

#ifndef CFEH_GRID_HPP
#define CFEH_GRID_HPP

#include <cassert>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cfeh {

/// Dense row-major matrix indexed (row, col). Rows are UEs and columns APs
/// throughout the library.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t r, std::size_t c) noexcept
    {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    const T& operator()(std::size_t r, std::size_t c) const noexcept
    {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<T> flat() noexcept { return data_; }
    std::span<const T> flat() const noexcept { return data_; }

    bool operator==(const Grid&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// One complex N-vector per (UE, AP) pair, stored contiguously.
class PairVectors {
public:
    using value_type = std::complex<double>;

    PairVectors() = default;
    PairVectors(std::size_t ues, std::size_t aps, std::size_t len)
        : ues_(ues), aps_(aps), len_(len), data_(ues * aps * len) {}

    std::size_t ues() const noexcept { return ues_; }
    std::size_t aps() const noexcept { return aps_; }
    std::size_t length() const noexcept { return len_; }

    std::span<value_type> operator()(std::size_t k, std::size_t l) noexcept
    {
        return {data_.data() + (k * aps_ + l) * len_, len_};
    }
    std::span<const value_type> operator()(std::size_t k, std::size_t l) const noexcept
    {
        return {data_.data() + (k * aps_ + l) * len_, len_};
    }

    std::span<const value_type> flat() const noexcept { return data_; }

    bool operator==(const PairVectors&) const = default;

private:
    std::size_t ues_ = 0;
    std::size_t aps_ = 0;
    std::size_t len_ = 0;
    std::vector<value_type> data_;
};

} // namespace cfeh

#endif
