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

#ifndef CFEH_MONTECARLO_HPP
#define CFEH_MONTECARLO_HPP

#include <cfeh/channel.hpp>
#include <cfeh/config.hpp>
#include <cfeh/markov.hpp>
#include <cfeh/rng.hpp>
#include <cfeh/stats.hpp>
#include <cfeh/topology.hpp>
#include <cfeh/wpt.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cfeh {

/// Per-interval samples, row-major by interval: value(t, k) = v[t * K + k].
struct RunResult {
    std::size_t ues = 0;
    std::size_t intervals = 0;
    std::vector<double> rf;     // I_k (W)
    std::vector<double> energy; // harvested energy (J)
    std::vector<double> delta;  // harvested minus consumed (J)

    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    double consumed = 0.0;

    double rf_at(std::size_t t, std::size_t k) const { return rf[t * ues + k]; }
    double energy_at(std::size_t t, std::size_t k) const { return energy[t * ues + k]; }
    double delta_at(std::size_t t, std::size_t k) const { return delta[t * ues + k]; }

    /// Column of one UE across intervals.
    std::vector<double> column(const std::vector<double>& v, std::size_t k) const
    {
        std::vector<double> out(intervals);
        for (std::size_t t = 0; t < intervals; ++t)
            out[t] = v[t * ues + k];
        return out;
    }

    bool same_samples(const RunResult& o) const
    {
        return ues == o.ues && intervals == o.intervals && rf == o.rf && energy == o.energy && delta == o.delta;
    }
};

namespace detail {

// Splits [0, count) into contiguous chunks, one per worker, and rethrows the
// first worker failure. body(worker, begin, end).
template <typename Body>
void parallel_chunks(std::size_t count, std::size_t workers, Body&& body)
{
    workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(count, 1)));
    if (workers == 1) {
        body(std::size_t{0}, std::size_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers, end = count * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
            try {
                body(w, begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace detail

/// Simulates `intervals` coherence intervals on a fixed large-scale model.
/// Interval t draws from the stream (cfg.seed, interval, t), so the samples do
/// not depend on the worker count.
inline RunResult run(const SystemConfig& cfg, const LargeScaleModel& ls, const PowerControl& pc,
                     std::size_t intervals, std::size_t workers = 1)
{
    const std::size_t K = ls.ues();
    RunResult res;
    res.ues = K;
    res.intervals = intervals;
    res.seed = cfg.seed;
    res.config_hash = config_hash(cfg);
    res.consumed = consumption_energy(cfg);
    res.rf.assign(intervals * K, 0.0);
    res.energy.assign(intervals * K, 0.0);
    res.delta.assign(intervals * K, 0.0);

    const auto amplitude = beam_amplitudes(ls, pc);
    const ChannelSampler sampler(ls, cfg);
    const double seconds = cfg.harvest_seconds();

    detail::parallel_chunks(intervals, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        ChannelSampler local = sampler;
        ChannelState state;
        for (std::size_t t = begin; t < end; ++t) {
            try {
                RandomStream rng(cfg.seed, Domain::interval, t);
                local.sample(rng, state);
                const auto rf = received_rf_energy(state, amplitude, pc.served);
                for (std::size_t k = 0; k < K; ++k) {
                    const double e = harvest(rf[k], cfg.circuit_for(k), seconds);
                    res.rf[t * K + k] = rf[k];
                    res.energy[t * K + k] = e;
                    res.delta[t * K + k] = e - res.consumed;
                }
            } catch (const std::exception& ex) {
                throw std::runtime_error("interval " + std::to_string(t) + ": " + ex.what());
            }
        }
    });
    return res;
}

/// Sample moments of I_k without storing samples. Draw t uses the stream
/// (seed, oracle, t); partial moments are merged in worker order.
inline std::vector<McEstimate> rf_power_oracle(const SystemConfig& cfg, const LargeScaleModel& ls,
                                               const PowerControl& pc, std::size_t draws, std::uint64_t seed,
                                               std::size_t workers = 1)
{
    const std::size_t K = ls.ues();
    const auto amplitude = beam_amplitudes(ls, pc);
    const ChannelSampler sampler(ls, cfg);
    const std::size_t W = std::max<std::size_t>(1, workers);
    std::vector<std::vector<RunningMoments>> parts(W, std::vector<RunningMoments>(K));

    detail::parallel_chunks(draws, W, [&](std::size_t w, std::size_t begin, std::size_t end) {
        ChannelSampler local = sampler;
        ChannelState state;
        auto& acc = parts[w];
        for (std::size_t t = begin; t < end; ++t) {
            RandomStream rng(seed, Domain::oracle, t);
            local.sample(rng, state);
            const auto rf = received_rf_energy(state, amplitude, pc.served);
            for (std::size_t k = 0; k < K; ++k)
                acc[k].push(rf[k]);
        }
    });
    std::vector<McEstimate> out(K);
    for (std::size_t k = 0; k < K; ++k) {
        RunningMoments m;
        for (const auto& p : parts)
            m.merge(p[k]);
        out[k] = estimate(m);
    }
    return out;
}

/// Per-UE mean harvested energy across intervals.
inline std::vector<double> mean_energy_per_user(const RunResult& r)
{
    std::vector<double> m(r.ues, 0.0);
    for (std::size_t t = 0; t < r.intervals; ++t)
        for (std::size_t k = 0; k < r.ues; ++k)
            m[k] += r.energy_at(t, k);
    for (auto& v : m)
        v /= static_cast<double>(std::max<std::size_t>(r.intervals, 1));
    return m;
}

/// UE whose mean harvested energy is the (lower) median across UEs.
inline std::size_t median_energy_user(const std::vector<double>& means)
{
    if (means.empty())
        throw std::invalid_argument("median_energy_user: no UEs");
    std::vector<std::size_t> order(means.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });
    return order[(means.size() - 1) / 2];
}

inline std::size_t median_energy_user(const RunResult& r)
{
    if (r.intervals == 0)
        throw std::invalid_argument("median_energy_user: result has no intervals");
    return median_energy_user(mean_energy_per_user(r));
}

/// Sampling oracle for the one-beam quadratic forms Z_ikl = g_kl^T conj(ghat_il).
struct QuadformOracle {
    McEstimate first_real; // Re Z_ikl
    McEstimate first_imag; // Im Z_ikl
    /// |Z_ikl|^2 when l == l', otherwise Re(Z_ikl conj Z_ikl').
    McEstimate second;
};

inline QuadformOracle quadform_oracle(const LargeScaleModel& ls, const SystemConfig& cfg, std::size_t k,
                                      std::size_t i, std::size_t l, std::size_t lp, std::size_t draws,
                                      RandomStream& rng)
{
    const ChannelSampler sampler(ls, cfg);
    ChannelState state;
    RunningMoments re, im, sq;
    for (std::size_t t = 0; t < draws; ++t) {
        sampler.sample(rng, state);
        auto z = [&](std::size_t ap) {
            std::complex<double> acc = 0.0;
            const auto g = state.g(k, ap), gh = state.g_hat(i, ap);
            for (std::size_t n = 0; n < g.size(); ++n)
                acc += g[n] * std::conj(gh[n]);
            return acc;
        };
        const auto zl = z(l);
        re.push(zl.real());
        im.push(zl.imag());
        sq.push(l == lp ? std::norm(zl) : (zl * std::conj(z(lp))).real());
    }
    return {estimate(re), estimate(im), estimate(sq)};
}

} // namespace cfeh

#endif
