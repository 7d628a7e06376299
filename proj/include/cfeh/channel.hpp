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

#ifndef CFEH_CHANNEL_HPP
#define CFEH_CHANNEL_HPP

#include <cfeh/config.hpp>
#include <cfeh/grid.hpp>
#include <cfeh/pilots.hpp>
#include <cfeh/rng.hpp>
#include <cfeh/topology.hpp>

#include <cmath>
#include <complex>

namespace cfeh {

/// Small-scale realisation of one coherence interval.
struct TrueChannels {
    PairVectors nlos; // tilde g_kl ~ CN(0, I)
    PairVectors g;    // bar g_kl + sqrt(beta_kl) tilde g_kl
};

struct ChannelState {
    PairVectors g;     // true channels
    PairVectors g_hat; // MMSE estimates
    PairVectors nlos;  // tilde g_kl draws
    PairVectors noise; // projected pilot noise n_pl, rows are pilots

    bool operator==(const ChannelState&) const = default;
};

/// bar g_kl = sqrt(varsigma_kl) h(phi_kl) for every pair.
inline PairVectors los_means(const LargeScaleModel& ls)
{
    PairVectors m(ls.ues(), ls.aps(), ls.antennas);
    for (std::size_t k = 0; k < ls.ues(); ++k)
        for (std::size_t l = 0; l < ls.aps(); ++l) {
            const auto h = steering_vector(ls.phi(k, l), ls.antennas);
            const double s = std::sqrt(ls.varsigma(k, l));
            auto out = m(k, l);
            for (std::size_t t = 0; t < h.size(); ++t)
                out[t] = s * h[t];
        }
    return m;
}

/// Draws channels and estimates for one large-scale model, reusing buffers.
///
/// Estimation uses the projected-pilot form: z_kl = sqrt(tau_p P_p) sum over
/// the sharing set of g_il plus one noise vector per (pilot, AP), which every
/// UE on that pilot sees. The estimate is bar g_kl plus c_kl times the
/// zero-mean part of z_kl.
class ChannelSampler {
public:
    ChannelSampler(const LargeScaleModel& ls, const SystemConfig& cfg)
        : ls_(&ls), los_(los_means(ls)), root_pilot_energy_(std::sqrt(static_cast<double>(cfg.tau_p) * cfg.pilot_power)),
          noise_std_(std::sqrt(cfg.noise_power))
    {
        const std::size_t K = ls.ues(), L = ls.aps();
        root_beta_ = Grid<double>(K, L);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < L; ++l)
                root_beta_(k, l) = std::sqrt(ls.beta(k, l));
    }

    const PairVectors& los() const noexcept { return los_; }

    void draw(RandomStream& rng, TrueChannels& out) const
    {
        const auto& ls = *ls_;
        const std::size_t K = ls.ues(), L = ls.aps(), N = ls.antennas;
        resize(out.nlos, K, L, N);
        resize(out.g, K, L, N);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < L; ++l) {
                auto x = out.nlos(k, l);
                auto g = out.g(k, l);
                const auto m = los_(k, l);
                const double rb = root_beta_(k, l);
                for (std::size_t t = 0; t < N; ++t) {
                    x[t] = rng.complex_normal();
                    g[t] = m[t] + rb * x[t];
                }
            }
    }

    void estimate(const TrueChannels& truth, RandomStream& rng, ChannelState& out) const
    {
        const auto& ls = *ls_;
        const std::size_t K = ls.ues(), L = ls.aps(), N = ls.antennas, P = ls.pilots.num_pilots;
        resize(out.noise, P, L, N);
        resize(out.g_hat, K, L, N);
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t l = 0; l < L; ++l)
                for (auto& v : out.noise(p, l))
                    v = noise_std_ * rng.complex_normal();

        // Zero-mean part of the projection per (pilot, AP), shared by the sharing set.
        projection_.resize(P * L * N);
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t l = 0; l < L; ++l) {
                auto* acc = projection_.data() + (p * L + l) * N;
                const auto n = out.noise(p, l);
                for (std::size_t t = 0; t < N; ++t)
                    acc[t] = n[t];
            }
        for (std::size_t i = 0; i < K; ++i) {
            const std::size_t p = ls.pilots.pilot_of[i];
            for (std::size_t l = 0; l < L; ++l) {
                auto* acc = projection_.data() + (p * L + l) * N;
                const auto x = truth.nlos(i, l);
                const double w = root_pilot_energy_ * root_beta_(i, l);
                for (std::size_t t = 0; t < N; ++t)
                    acc[t] += w * x[t];
            }
        }
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t p = ls.pilots.pilot_of[k];
            for (std::size_t l = 0; l < L; ++l) {
                const auto* acc = projection_.data() + (p * L + l) * N;
                const auto m = los_(k, l);
                auto gh = out.g_hat(k, l);
                const double ckl = ls.c(k, l);
                for (std::size_t t = 0; t < N; ++t)
                    gh[t] = m[t] + ckl * acc[t];
            }
        }
        out.g = truth.g;
        out.nlos = truth.nlos;
    }

    /// Draws a full interval: true channels, then estimates.
    void sample(RandomStream& rng, ChannelState& out) const
    {
        draw(rng, scratch_);
        estimate(scratch_, rng, out);
    }

private:
    static void resize(PairVectors& v, std::size_t a, std::size_t b, std::size_t n)
    {
        if (v.ues() != a || v.aps() != b || v.length() != n)
            v = PairVectors(a, b, n);
    }

    const LargeScaleModel* ls_;
    PairVectors los_;
    Grid<double> root_beta_;
    double root_pilot_energy_;
    double noise_std_;
    mutable std::vector<std::complex<double>> projection_;
    mutable TrueChannels scratch_;
};

inline TrueChannels draw_channels(const LargeScaleModel& ls, const SystemConfig& cfg, RandomStream& rng)
{
    TrueChannels out;
    ChannelSampler(ls, cfg).draw(rng, out);
    return out;
}

inline ChannelState estimate_channels(const TrueChannels& truth, const LargeScaleModel& ls, const SystemConfig& cfg,
                                      RandomStream& rng)
{
    ChannelState out;
    ChannelSampler(ls, cfg).estimate(truth, rng, out);
    return out;
}

} // namespace cfeh

#endif
