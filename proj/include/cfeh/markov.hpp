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

#ifndef CFEH_MARKOV_HPP
#define CFEH_MARKOV_HPP

#include <cfeh/config.hpp>
#include <cfeh/rng.hpp>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cfeh {

struct GammaFit {
    double shape = 0.0;
    double scale = 0.0;
};

/// Moment-matched Gamma law: shape = mean^2 / var, scale = var / mean.
inline GammaFit gamma_fit(double mean, double var)
{
    if (!(mean > 0.0) || !(var > 0.0) || !std::isfinite(mean) || !std::isfinite(var))
        throw std::domain_error("gamma_fit: degenerate fit, mean and variance must be positive");
    return {mean * mean / var, var / mean};
}

/// P(E_harv <= e) = P(shape, e / scale), the regularized lower incomplete gamma.
inline double harvest_cdf(double e, const GammaFit& fit)
{
    if (e < 0.0 || std::isnan(e))
        throw std::invalid_argument("harvest_cdf: energy must be >= 0");
    if (e == 0.0)
        return 0.0;
    if (std::isinf(e))
        return 1.0;
    return boost::math::gamma_p(fit.shape, e / fit.scale);
}

/// Energy spent on pilots and uplink data in one interval (J).
inline double consumption_energy(const SystemConfig& cfg)
{
    return cfg.seconds(cfg.tau_p) * cfg.pilot_power + cfg.seconds(cfg.tau_u) * cfg.uplink_power;
}

/// P(Delta E <= 0) = P(E_harv <= E_C).
inline double negative_transition_prob(const GammaFit& fit, double consumed)
{
    return harvest_cdf(consumed, fit);
}

struct TransitionTriple {
    double down = 0.0;
    double stay = 1.0;
    double up = 0.0;
    /// M |E{Delta E}| / E_f before capping at 1.
    double departure_ratio = 0.0;

    bool capped() const noexcept { return departure_ratio > 1.0; }
    /// The single-step truncation assumes |E{Delta E}| << E_f / M.
    bool coarse() const noexcept { return departure_ratio > 0.1; }
};

/// One-step probabilities of moving down, staying, or moving up one state.
///
/// The departure mass q = min(1, M |E{Delta E}| / E_f) is split by the
/// probability of a net loss: down = q F(E_C), up = q (1 - F(E_C)).
inline TransitionTriple transition_triple(const GammaFit& fit, double consumed, double mean_delta,
                                          std::size_t states, double capacity)
{
    if (states < 2)
        throw std::invalid_argument("transition_triple: need at least two energy states");
    if (!(capacity > 0.0))
        throw std::invalid_argument("transition_triple: battery capacity must be positive");
    TransitionTriple t;
    t.departure_ratio = static_cast<double>(states) * std::abs(mean_delta) / capacity;
    const double q = std::min(1.0, t.departure_ratio);
    t.down = q * negative_transition_prob(fit, consumed);
    t.up = q - t.down;
    t.stay = 1.0 - q;
    return t;
}

/// Battery chain of one UE over M equal energy slices, states numbered 1..M.
struct EnergyChain {
    std::size_t states = 2;
    double capacity = 0.0;
    TransitionTriple triple;
    double consumed = 0.0;
    double mean_delta = 0.0;

    /// Row of the tridiagonal matrix for state j: (to j-1, to j, to j+1).
    /// The boundaries reflect: blocked mass stays put.
    TransitionTriple row(std::size_t j) const
    {
        if (j < 1 || j > states)
            throw std::out_of_range("EnergyChain::row: state out of range");
        TransitionTriple r = triple;
        if (j == 1) {
            r.stay += r.down;
            r.down = 0.0;
        }
        if (j == states) {
            r.stay += r.up;
            r.up = 0.0;
        }
        return r;
    }

    /// Dense M x M matrix, row-major, for small chains.
    std::vector<double> dense() const
    {
        std::vector<double> m(states * states, 0.0);
        for (std::size_t j = 1; j <= states; ++j) {
            const auto r = row(j);
            const std::size_t at = (j - 1) * states + (j - 1);
            m[at] = r.stay;
            if (j > 1)
                m[at - 1] = r.down;
            if (j < states)
                m[at + 1] = r.up;
        }
        return m;
    }
};

struct StateDistribution {
    std::vector<double> pi; // pi[j-1] = P(state j)
    long long step = 0;

    static StateDistribution uniform(std::size_t states)
    {
        return {std::vector<double>(states, 1.0 / static_cast<double>(states)), 0};
    }
    static StateDistribution point(std::size_t states, std::size_t state)
    {
        if (state < 1 || state > states)
            throw std::out_of_range("StateDistribution::point: state out of range");
        StateDistribution d{std::vector<double>(states, 0.0), 0};
        d.pi[state - 1] = 1.0;
        return d;
    }
};

/// pi_n = pi_0 P^n by repeated tridiagonal products.
inline StateDistribution n_step_distribution(const EnergyChain& chain, const StateDistribution& start, long long n)
{
    if (n < 0)
        throw std::invalid_argument("n_step_distribution: n must be >= 0");
    const std::size_t M = chain.states;
    if (start.pi.size() != M)
        throw std::invalid_argument("n_step_distribution: start distribution has the wrong length");

    std::vector<TransitionTriple> rows(M);
    for (std::size_t j = 0; j < M; ++j)
        rows[j] = chain.row(j + 1);

    StateDistribution cur = start;
    std::vector<double> next(M);
    for (long long s = 0; s < n; ++s) {
        for (std::size_t j = 0; j < M; ++j) {
            double v = cur.pi[j] * rows[j].stay;
            if (j > 0)
                v += cur.pi[j - 1] * rows[j - 1].up;
            if (j + 1 < M)
                v += cur.pi[j + 1] * rows[j + 1].down;
            next[j] = v;
        }
        cur.pi.swap(next);
    }
    cur.step = start.step + n;
    return cur;
}

/// State index of stored energy e: ceil(e M / E_f), and 1 for e = 0.
inline std::size_t energy_state(double e, double capacity, std::size_t states)
{
    if (e <= 0.0)
        return 1;
    const auto j = static_cast<std::size_t>(std::ceil(e * static_cast<double>(states) / capacity));
    return std::min(std::max<std::size_t>(j, 1), states);
}

enum class BatteryBoundary {
    /// Stored energy is clamped to [0, E_f] after each step.
    clamp,
    /// A differential that would leave [0, E_f] is not applied. Starting from a
    /// slice centre with differentials in {-E_f/M, 0, E_f/M}, this walk is
    /// exactly the reflecting chain.
    hold,
};

/// Battery walk driven by differentials resampled uniformly from `deltas`.
/// Returns the state after each of the n steps, preceded by the start state.
inline std::vector<std::size_t> simulate_energy_trajectory(std::span<const double> deltas, double start,
                                                           double capacity, std::size_t states, std::size_t n,
                                                           RandomStream& rng,
                                                           BatteryBoundary boundary = BatteryBoundary::clamp)
{
    if (n < 1)
        throw std::invalid_argument("simulate_energy_trajectory: need at least one step");
    if (deltas.empty())
        throw std::invalid_argument("simulate_energy_trajectory: no differential samples");
    std::vector<std::size_t> out;
    out.reserve(n + 1);
    double e = std::min(std::max(start, 0.0), capacity);
    out.push_back(energy_state(e, capacity, states));
    for (std::size_t s = 0; s < n; ++s) {
        const double d = deltas[rng.index(deltas.size())];
        const double next = e + d;
        if (boundary == BatteryBoundary::clamp)
            e = std::min(std::max(next, 0.0), capacity);
        else if (next >= 0.0 && next <= capacity)
            e = next;
        out.push_back(energy_state(e, capacity, states));
    }
    return out;
}

} // namespace cfeh

#endif
