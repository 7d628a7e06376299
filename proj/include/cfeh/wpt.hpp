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

#ifndef CFEH_WPT_HPP
#define CFEH_WPT_HPP

#include <cfeh/channel.hpp>
#include <cfeh/config.hpp>
#include <cfeh/grid.hpp>
#include <cfeh/topology.hpp>

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace cfeh {

/// Power-control coefficients eta_kl (W) and the set of UEs that receive an
/// energy beam. With unit-average-norm precoders the mean transmit power of
/// AP l is the sum of eta_kl over served k.
struct PowerControl {
    Grid<double> eta;
    std::vector<std::size_t> served;
};

inline std::vector<std::size_t> all_ues(std::size_t k)
{
    std::vector<std::size_t> v(k);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

/// eta_kl = P_d / K for every pair.
inline PowerControl equal_power_control(const SystemConfig& cfg)
{
    const double share = cfg.per_ap_power() / static_cast<double>(cfg.num_ues);
    return {Grid<double>(cfg.num_ues, cfg.num_aps, share), all_ues(cfg.num_ues)};
}

/// kappa_kl = 1 / sqrt(N (varsigma_kl + gamma_kl)), the inverse RMS norm of
/// the estimate. It depends on statistics only, never on a realisation.
inline Grid<double> mrt_scale(const LargeScaleModel& ls)
{
    Grid<double> kappa(ls.ues(), ls.aps());
    const auto n = static_cast<double>(ls.antennas);
    for (std::size_t k = 0; k < ls.ues(); ++k)
        for (std::size_t l = 0; l < ls.aps(); ++l) {
            const double p = ls.varsigma(k, l) + ls.gamma(k, l);
            if (!(p > 0.0))
                throw std::domain_error("mrt_scale: degenerate channel (varsigma + gamma = 0) for UE " +
                                        std::to_string(k) + ", AP " + std::to_string(l));
            kappa(k, l) = 1.0 / std::sqrt(n * p);
        }
    return kappa;
}

inline PairVectors mrt_precoders(const ChannelState& state, const LargeScaleModel& ls)
{
    const auto kappa = mrt_scale(ls);
    PairVectors w(ls.ues(), ls.aps(), ls.antennas);
    for (std::size_t k = 0; k < ls.ues(); ++k)
        for (std::size_t l = 0; l < ls.aps(); ++l) {
            const auto src = state.g_hat(k, l);
            auto dst = w(k, l);
            for (std::size_t t = 0; t < src.size(); ++t)
                dst[t] = kappa(k, l) * src[t];
        }
    return w;
}

/// Beam amplitude kappa_il * sqrt(eta_il) for every pair (zero when unserved).
inline Grid<double> beam_amplitudes(const LargeScaleModel& ls, const PowerControl& pc)
{
    const auto kappa = mrt_scale(ls);
    Grid<double> a(ls.ues(), ls.aps());
    for (std::size_t i : pc.served)
        for (std::size_t l = 0; l < ls.aps(); ++l)
            a(i, l) = kappa(i, l) * std::sqrt(pc.eta(i, l));
    return a;
}

/// Received RF power at every UE in one interval, averaged over the energy
/// symbols: I_k = sum_i | sum_l a_il g_kl^T conj(ghat_il) |^2. Receiver noise
/// is not included.
inline std::vector<double> received_rf_energy(const ChannelState& state, const Grid<double>& amplitude,
                                              const std::vector<std::size_t>& served)
{
    const std::size_t K = state.g.ues(), L = state.g.aps(), N = state.g.length();
    std::vector<double> out(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        double acc = 0.0;
        for (std::size_t i : served) {
            std::complex<double> y = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                const double a = amplitude(i, l);
                if (a == 0.0)
                    continue;
                const auto g = state.g(k, l);
                const auto gh = state.g_hat(i, l);
                std::complex<double> z = 0.0;
                for (std::size_t t = 0; t < N; ++t)
                    z += g[t] * std::conj(gh[t]);
                y += a * z;
            }
            acc += std::norm(y);
        }
        out[k] = acc;
    }
    return out;
}

inline std::vector<double> received_rf_energy(const ChannelState& state, const LargeScaleModel& ls,
                                              const PowerControl& pc)
{
    return received_rf_energy(state, beam_amplitudes(ls, pc), pc.served);
}

/// Lambda(x) = 1 / (1 + exp(-a (x - b))), evaluated without overflow.
inline double logistic(double x, const EhCircuit& c)
{
    const double t = c.a * (x - c.b);
    if (t >= 0.0)
        return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

/// Harvested energy in J for input RF power `rf_power` over `seconds`.
///
/// tau psi (Lambda(I) - varphi) is evaluated as tau I_max Lambda(I) (1 - e^{-aI}),
/// an identical expression without the cancellation between Lambda(I) and
/// varphi at small inputs.
inline double harvest(double rf_power, const EhCircuit& c, double seconds)
{
    if (rf_power < 0.0 || std::isnan(rf_power))
        throw std::invalid_argument("harvest: input power must be >= 0");
    return seconds * c.i_max * logistic(rf_power, c) * -std::expm1(-c.a * rf_power);
}

} // namespace cfeh

#endif
