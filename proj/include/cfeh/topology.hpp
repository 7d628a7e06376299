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

#ifndef CFEH_TOPOLOGY_HPP
#define CFEH_TOPOLOGY_HPP

#include <cfeh/config.hpp>
#include <cfeh/grid.hpp>
#include <cfeh/pilots.hpp>
#include <cfeh/rng.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cfeh {

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

enum class ApLayout { grid, random };

struct Topology {
    ApLayout layout = ApLayout::grid;
    std::vector<Point> aps;
    std::vector<Point> ues;
    Grid<double> distance; // K x L, 3-D, m

    bool operator==(const Topology&) const = default;
};

/// Per (UE, AP) large-scale quantities and the MMSE coefficients that follow
/// from them and the pilot assignment. All K x L grids are row-major by UE.
struct LargeScaleModel {
    std::size_t antennas = 0;
    PilotAssignment pilots;

    Grid<double> zeta;     // large-scale fading
    Grid<double> k_factor; // Rician K
    Grid<double> beta;     // NLoS variance, zeta / (K + 1)
    Grid<double> varsigma; // LoS power, beta * K
    Grid<double> phi;      // LoS angle, rad
    Grid<double> gamma;    // per-element variance of the estimate
    Grid<double> upsilon;  // per-element variance of the estimation error
    Grid<double> c;        // MMSE scalar

    std::size_t ues() const noexcept { return zeta.rows(); }
    std::size_t aps() const noexcept { return zeta.cols(); }

    /// Ratio between the zero-mean estimate parts of pilot-sharing UEs,
    /// ghat~_il = alpha(i, k, l) * ghat~_kl. Zero when i and k use different pilots.
    /// A pure-LoS link (beta_kl = 0) has no such part; alpha_kk stays 1.
    double alpha(std::size_t i, std::size_t k, std::size_t l) const
    {
        if (!pilots.shares(i, k))
            return 0.0;
        if (i == k)
            return 1.0;
        return beta(k, l) > 0.0 ? beta(i, l) / beta(k, l) : 0.0;
    }

    bool operator==(const LargeScaleModel&) const = default;
};

/// Frequency/height dependent constant of the three-slope model, dB.
inline double three_slope_constant_db(const SystemConfig& cfg)
{
    const double lf = std::log10(cfg.carrier_mhz);
    return 46.3 + 33.9 * lf - 13.82 * std::log10(cfg.ap_height) - (1.1 * lf - 0.7) * cfg.ue_height + (1.56 * lf - 0.8);
}

/// Three-slope path loss in dB (a positive attenuation) at 3-D distance d in m.
/// Breakpoints d0/d1 are in m; the logarithmic terms take distances in km,
/// which is the unit the constant term is calibrated for.
inline double path_loss_db(double d, const SystemConfig& cfg)
{
    if (!(d > 0.0) || !std::isfinite(d))
        throw std::invalid_argument("path_loss_db: distance must be finite and > 0");
    const double c = three_slope_constant_db(cfg);
    const double km = 1e-3;
    if (d > cfg.d1)
        return c + 35.0 * std::log10(d * km);
    if (d > cfg.d0)
        return c + 15.0 * std::log10(cfg.d1 * km) + 20.0 * std::log10(d * km);
    return c + 15.0 * std::log10(cfg.d1 * km) + 20.0 * std::log10(cfg.d0 * km);
}

/// Half-wavelength ULA response: element t is exp(j pi t sin(phi)).
inline std::vector<std::complex<double>> steering_vector(double phi, std::size_t n)
{
    std::vector<std::complex<double>> h(n);
    const double step = std::numbers::pi * std::sin(phi);
    for (std::size_t t = 0; t < n; ++t)
        h[t] = std::polar(1.0, step * static_cast<double>(t));
    return h;
}

/// rho = h(phi_k)^T conj(h(phi_i)) / N.
inline std::complex<double> los_correlation(double phi_k, double phi_i, std::size_t n)
{
    const double step = std::numbers::pi * (std::sin(phi_k) - std::sin(phi_i));
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        acc += std::polar(1.0, step * static_cast<double>(t));
    return acc / static_cast<double>(n);
}

inline bool is_perfect_square(std::size_t n, std::size_t* root = nullptr)
{
    auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (r * r != n)
        return false;
    if (root)
        *root = r;
    return true;
}

/// UEs uniform in the square; APs on a centred grid when L is a perfect
/// square, otherwise uniform. UEs are drawn first, so the UE layout for a
/// given stream does not depend on L.
inline Topology generate_topology(const SystemConfig& cfg, RandomStream& rng)
{
    Topology topo;
    const double side = cfg.area_side;
    topo.ues.resize(cfg.num_ues);
    for (auto& p : topo.ues)
        p = {rng.uniform(0.0, side), rng.uniform(0.0, side)};

    std::size_t root = 0;
    topo.aps.resize(cfg.num_aps);
    if (is_perfect_square(cfg.num_aps, &root)) {
        topo.layout = ApLayout::grid;
        const double pitch = side / static_cast<double>(root);
        for (std::size_t r = 0; r < root; ++r)
            for (std::size_t c = 0; c < root; ++c)
                topo.aps[r * root + c] = {(static_cast<double>(r) + 0.5) * pitch, (static_cast<double>(c) + 0.5) * pitch};
    } else {
        topo.layout = ApLayout::random;
        for (auto& p : topo.aps)
            p = {rng.uniform(0.0, side), rng.uniform(0.0, side)};
    }

    const double dh = cfg.ap_height - cfg.ue_height;
    topo.distance = Grid<double>(cfg.num_ues, cfg.num_aps);
    for (std::size_t k = 0; k < cfg.num_ues; ++k)
        for (std::size_t l = 0; l < cfg.num_aps; ++l) {
            const double dx = topo.ues[k].x - topo.aps[l].x;
            const double dy = topo.ues[k].y - topo.aps[l].y;
            topo.distance(k, l) = std::sqrt(dx * dx + dy * dy + dh * dh);
        }
    return topo;
}

/// Fills beta/varsigma from zeta and K, then the MMSE coefficients from the
/// pilot assignment. Used by large_scale() and when reloading saved models.
inline void derive_estimation_coefficients(LargeScaleModel& ls, const SystemConfig& cfg)
{
    const std::size_t K = ls.ues(), L = ls.aps();
    ls.beta = Grid<double>(K, L);
    ls.varsigma = Grid<double>(K, L);
    ls.gamma = Grid<double>(K, L);
    ls.upsilon = Grid<double>(K, L);
    ls.c = Grid<double>(K, L);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            ls.beta(k, l) = ls.zeta(k, l) / (ls.k_factor(k, l) + 1.0);
            ls.varsigma(k, l) = ls.beta(k, l) * ls.k_factor(k, l);
        }

    const double pilot_energy = static_cast<double>(cfg.tau_p) * cfg.pilot_power;
    const double root_pe = std::sqrt(pilot_energy);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t k = 0; k < K; ++k) {
            double shared = 0.0;
            for (std::size_t i : ls.pilots.sharing_set(k))
                shared += ls.beta(i, l);
            const double denom = pilot_energy * shared + cfg.noise_power;
            ls.c(k, l) = root_pe * ls.beta(k, l) / denom;
            ls.gamma(k, l) = root_pe * ls.beta(k, l) * ls.c(k, l);
            ls.upsilon(k, l) = ls.beta(k, l) - ls.gamma(k, l);
        }
}

/// Large-scale fading with log-normal shadowing, distance-dependent Rician
/// factors, geometric LoS angles and the MMSE statistics for `pilots`.
inline LargeScaleModel large_scale(const Topology& topo, const SystemConfig& cfg, const PilotAssignment& pilots,
                                   RandomStream& rng)
{
    const std::size_t K = topo.ues.size(), L = topo.aps.size();
    if (pilots.pilot_of.size() != K)
        throw std::invalid_argument("large_scale: pilot assignment does not match the UE count");

    LargeScaleModel ls;
    ls.antennas = cfg.antennas;
    ls.pilots = pilots;
    ls.zeta = Grid<double>(K, L);
    ls.k_factor = Grid<double>(K, L);
    ls.phi = Grid<double>(K, L);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            const double d = topo.distance(k, l);
            const double shadow = cfg.shadow_std_db > 0.0 ? cfg.shadow_std_db * rng.normal() : 0.0;
            ls.zeta(k, l) = std::pow(10.0, -(path_loss_db(d, cfg) + shadow) / 10.0);
            ls.k_factor(k, l) = cfg.rician.k_factor(d);
            ls.phi(k, l) = std::atan2(topo.ues[k].y - topo.aps[l].y, topo.ues[k].x - topo.aps[l].x);
        }
    derive_estimation_coefficients(ls, cfg);
    return ls;
}

} // namespace cfeh

#endif
