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

#ifndef CFEH_STATS_HPP
#define CFEH_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace cfeh {

/// Streaming central moments up to fourth order.
///
/// Updates and merges follow the one-pass pairwise formulas of Pebay (2008),
/// so any partition of the data merged in any order gives the same moments up
/// to rounding.
class RunningMoments {
public:
    void push(double x) noexcept
    {
        RunningMoments one;
        one.n_ = 1;
        one.mean_ = x;
        merge(one);
    }

    void merge(const RunningMoments& o) noexcept
    {
        if (o.n_ == 0)
            return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
        const double n = na + nb;
        const double d = o.mean_ - mean_;
        const double d2 = d * d, d3 = d2 * d, d4 = d3 * d;

        const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                          6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                          4.0 * d * (na * o.m3_ - nb * m3_) / n;
        const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * o.m2_ - nb * m2_) / n;
        const double m2 = m2_ + o.m2_ + d2 * na * nb / n;

        mean_ += d * nb / n;
        m2_ = m2;
        m3_ = m3;
        m4_ = m4;
        n_ += o.n_;
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    /// Unbiased sample variance (0 for fewer than two samples).
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    /// Biased central moments m_r = (1/n) sum (x - mean)^r.
    double central2() const noexcept { return n_ ? m2_ / static_cast<double>(n_) : 0.0; }
    double central4() const noexcept { return n_ ? m4_ / static_cast<double>(n_) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

struct McEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double standard_error_of_mean = 0.0;
    /// Delta-method standard error of the sample variance,
    /// sqrt((m4 - s^4 (n-3)/(n-1)) / n).
    double standard_error_of_variance = 0.0;
    std::size_t count = 0;
};

inline McEstimate estimate(const RunningMoments& m)
{
    McEstimate e;
    e.count = m.count();
    e.mean = m.mean();
    e.variance = m.variance();
    if (e.count > 0) {
        const double n = static_cast<double>(e.count);
        e.standard_error_of_mean = std::sqrt(e.variance / n);
        if (e.count > 3) {
            const double s4 = e.variance * e.variance;
            e.standard_error_of_variance = std::sqrt(std::max(0.0, (m.central4() - s4 * (n - 3.0) / (n - 1.0)) / n));
        }
    }
    return e;
}

inline McEstimate estimate(std::span<const double> samples)
{
    RunningMoments m;
    for (double x : samples)
        m.push(x);
    return estimate(m);
}

/// Right-continuous empirical CDF.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> samples) : support_(std::move(samples))
    {
        if (support_.empty())
            throw std::invalid_argument("EmpiricalCdf: no samples");
        std::sort(support_.begin(), support_.end());
    }

    /// Fraction of samples <= x.
    double operator()(double x) const
    {
        const auto it = std::upper_bound(support_.begin(), support_.end(), x);
        return static_cast<double>(it - support_.begin()) / static_cast<double>(support_.size());
    }

    const std::vector<double>& support() const noexcept { return support_; }
    std::size_t size() const noexcept { return support_.size(); }

private:
    std::vector<double> support_;
};

inline EmpiricalCdf empirical_cdf(std::span<const double> samples)
{
    return EmpiricalCdf(std::vector<double>(samples.begin(), samples.end()));
}

/// sup_x |F_n(x) - F(x)| for a continuous reference F, checked on both sides of
/// every jump.
inline double ks_distance(const EmpiricalCdf& emp, const std::function<double(double)>& cdf)
{
    const auto& s = emp.support();
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t r = 0; r < s.size(); ++r) {
        const double f = cdf(s[r]);
        d = std::max({d, std::abs(static_cast<double>(r + 1) / n - f), std::abs(f - static_cast<double>(r) / n)});
    }
    return d;
}

} // namespace cfeh

#endif
