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

#include <cfeh/channel.hpp>
#include <cfeh/stats.hpp>
#include <cfeh/wpt.hpp>

#include <catch_amalgamated.hpp>

using namespace cfeh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SystemConfig small_config()
{
    SystemConfig cfg;
    cfg.num_ues = 4;
    cfg.num_aps = 3;
    cfg.antennas = 4;
    cfg.tau_p = 2;
    cfg.pilot_power = 1e-3;
    return cfg;
}

LargeScaleModel small_model(const SystemConfig& cfg, std::uint64_t seed)
{
    RandomStream rt(seed, Domain::topology, 0), rs(seed, Domain::shadowing, 0), rp(seed, Domain::pilots, 0);
    const auto topo = generate_topology(cfg, rt);
    return large_scale(topo, cfg, assign_pilots(cfg.num_ues, cfg.tau_p, cfg.pilot_policy, rp), rs);
}

} // namespace

TEST_CASE("MRT normalisation")
{
    LargeScaleModel ls;
    ls.antennas = 4;
    ls.zeta = Grid<double>(1, 1, 1.0);
    ls.varsigma = Grid<double>(1, 1, 0.0);
    ls.gamma = Grid<double>(1, 1, 1.0);
    CHECK(mrt_scale(ls)(0, 0) == 0.5);
    ls.gamma(0, 0) = 0.0;
    CHECK_THROWS_AS(mrt_scale(ls), std::domain_error);
}

TEST_CASE("MRT precoders have unit mean power and scale linearly with the estimate")
{
    const auto cfg = small_config();
    const auto ls = small_model(cfg, 2);
    ChannelSampler sampler(ls, cfg);
    ChannelState st;
    RunningMoments p;
    for (std::size_t t = 0; t < 100000; ++t) {
        RandomStream rng(1, Domain::oracle, t);
        sampler.sample(rng, st);
        const auto w = mrt_precoders(st, ls);
        double s = 0.0;
        for (auto v : w(1, 2))
            s += std::norm(v);
        p.push(s);
    }
    const auto e = estimate(p);
    CHECK(std::abs(e.mean - 1.0) <= 3.0 * e.standard_error_of_mean);

    RandomStream rng(9, Domain::interval, 0);
    sampler.sample(rng, st);
    const auto w = mrt_precoders(st, ls);
    ChannelState scaled = st;
    for (std::size_t k = 0; k < ls.ues(); ++k)
        for (std::size_t l = 0; l < ls.aps(); ++l)
            for (auto& v : scaled.g_hat(k, l))
                v *= 2.5;
    const auto w2 = mrt_precoders(scaled, ls);
    for (std::size_t k = 0; k < ls.ues(); ++k)
        for (std::size_t l = 0; l < ls.aps(); ++l)
            for (std::size_t n = 0; n < ls.antennas; ++n)
                CHECK(std::abs(w2(k, l)[n] - 2.5 * w(k, l)[n]) <= 1e-14 * std::abs(w2(k, l)[n]));
}

TEST_CASE("equal power control")
{
    SystemConfig cfg;
    cfg.total_power = 1.6; // P_d = 0.4 W with 4 APs
    const auto pc = equal_power_control(cfg);
    for (double e : pc.eta.flat())
        CHECK_THAT(e, WithinRel(0.02, 1e-15));
    for (std::size_t l = 0; l < cfg.num_aps; ++l) {
        double s = 0.0;
        for (std::size_t k = 0; k < cfg.num_ues; ++k)
            s += pc.eta(k, l);
        CHECK_THAT(s, WithinRel(cfg.per_ap_power(), 1e-14));
    }
    CHECK(pc.served.size() == cfg.num_ues);
}

TEST_CASE("received RF power matches the explicit precoded sum")
{
    const auto cfg = small_config();
    const auto ls = small_model(cfg, 4);
    const auto pc = equal_power_control(cfg);
    RandomStream rng(2, Domain::interval, 0);
    ChannelState st;
    ChannelSampler(ls, cfg).sample(rng, st);
    const auto w = mrt_precoders(st, ls);
    const auto got = received_rf_energy(st, ls, pc);
    for (std::size_t k = 0; k < ls.ues(); ++k) {
        // sum_l sum_l' sum_i sqrt(eta eta') (g_kl^T w_il*)(w_il'^T g_kl'*)
        double ref = 0.0;
        for (std::size_t i = 0; i < ls.ues(); ++i)
            for (std::size_t l = 0; l < ls.aps(); ++l)
                for (std::size_t lp = 0; lp < ls.aps(); ++lp) {
                    std::complex<double> a = 0.0, b = 0.0;
                    for (std::size_t n = 0; n < ls.antennas; ++n) {
                        a += st.g(k, l)[n] * std::conj(w(i, l)[n]);
                        b += w(i, lp)[n] * std::conj(st.g(k, lp)[n]);
                    }
                    ref += (std::sqrt(pc.eta(i, l) * pc.eta(i, lp)) * a * b).real();
                }
        CHECK_THAT(got[k], WithinRel(ref, 1e-12));
        CHECK(got[k] >= 0.0);
    }

    PowerControl off = pc;
    for (auto& e : off.eta.flat())
        e = 0.0;
    for (double v : received_rf_energy(st, ls, off))
        CHECK(v == 0.0);
}

TEST_CASE("single deterministic scalar link: I = eta * varsigma")
{
    SystemConfig cfg;
    cfg.num_ues = 1;
    cfg.num_aps = 1;
    cfg.antennas = 1;
    cfg.tau_p = 1;
    LargeScaleModel ls;
    ls.antennas = 1;
    RandomStream rp(1, Domain::pilots, 0);
    ls.pilots = assign_pilots(1, 1, PilotPolicy::round_robin, rp);
    ls.zeta = Grid<double>(1, 1, 3.0);
    ls.k_factor = Grid<double>(1, 1, 1.0);
    ls.phi = Grid<double>(1, 1, 0.4);
    derive_estimation_coefficients(ls, cfg);
    ls.beta(0, 0) = 0.0;
    ls.varsigma(0, 0) = 3.0;
    ls.gamma(0, 0) = 0.0;
    ls.upsilon(0, 0) = 0.0;
    ls.c(0, 0) = 0.0;
    PowerControl pc{Grid<double>(1, 1, 0.7), {0}};
    RandomStream rng(1, Domain::interval, 0);
    ChannelState st;
    ChannelSampler(ls, cfg).sample(rng, st);
    CHECK_THAT(received_rf_energy(st, ls, pc)[0], WithinRel(0.7 * 3.0, 1e-14));
}

TEST_CASE("harvesting circuit")
{
    const EhCircuit c;
    CHECK(c.varphi() > 0.0);
    CHECK(c.varphi() < 1.0);
    CHECK(c.psi() > c.i_max);
    CHECK(harvest(0.0, c, 0.1) == 0.0);
    CHECK_THROWS_AS(harvest(-1e-9, c, 0.1), std::invalid_argument);

    // Against the textbook form tau psi (Lambda(I) - Lambda(0)).
    for (double x : {1e-9, 1e-6, 1e-3, 0.01, 0.014, 0.05, 0.2}) {
        const double lam = 1.0 / (1.0 + std::exp(-c.a * (x - c.b)));
        CHECK_THAT(harvest(x, c, 0.1), WithinRel(0.1 * c.psi() * (lam - c.varphi()), 1e-9));
    }
    double prev = 0.0;
    // Strictly increasing until double precision saturates, never above tau I_max.
    for (double x = 1e-6; x < 1.0; x *= 1.5) {
        const double e = harvest(x, c, 0.1);
        if (x < 0.1)
            CHECK(e > prev);
        CHECK(e <= 0.1 * c.i_max);
        prev = e;
    }
    // No overflow far from the turning point.
    CHECK(logistic(1e6, c) == 1.0);
    CHECK(logistic(-1e6, c) == 0.0);
    CHECK(std::isfinite(harvest(1e9, c, 0.1)));
}

TEST_CASE("array gain: more antennas, more received power")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        double prev = 0.0;
        for (std::size_t n : {2, 4, 8, 16}) {
            SystemConfig cfg;
            cfg.num_ues = 1;
            cfg.antennas = n;
            cfg.noise_power = 1e-30;
            cfg.pilot_power = 1e-3;
            const auto ls = small_model(cfg, seed);
            const auto pc = equal_power_control(cfg);
            const auto amp = beam_amplitudes(ls, pc);
            ChannelSampler sampler(ls, cfg);
            ChannelState st;
            RunningMoments m;
            for (std::size_t t = 0; t < 400; ++t) {
                RandomStream rng(seed, Domain::oracle, t);
                sampler.sample(rng, st);
                m.push(received_rf_energy(st, amp, pc.served)[0]);
            }
            CHECK(m.mean() > prev);
            prev = m.mean();
        }
    }
}
