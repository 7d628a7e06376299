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

#include <cfeh/topology.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace cfeh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LargeScaleModel model_for(const SystemConfig& cfg, std::uint64_t seed = 3)
{
    RandomStream rt(seed, Domain::topology, 0), rs(seed, Domain::shadowing, 0), rp(seed, Domain::pilots, 0);
    const auto topo = generate_topology(cfg, rt);
    return large_scale(topo, cfg, assign_pilots(cfg.num_ues, cfg.tau_p, cfg.pilot_policy, rp), rs);
}

} // namespace

TEST_CASE("three-slope constant at 1900 MHz, 15 m / 1.65 m")
{
    // 40-digit evaluation of the constant, frozen.
    SystemConfig cfg;
    CHECK_THAT(three_slope_constant_db(cfg), WithinAbs(140.71508370390841, 1e-9));
}

TEST_CASE("path loss branches")
{
    SystemConfig cfg;
    const double c = three_slope_constant_db(cfg);
    CHECK(path_loss_db(5.0, cfg) == path_loss_db(9.0, cfg));
    CHECK_THAT(path_loss_db(60.0, cfg), WithinAbs(c + 35.0 * std::log10(0.060), 1e-12));
    CHECK_THAT(path_loss_db(30.0, cfg), WithinAbs(c + 15.0 * std::log10(0.050) + 20.0 * std::log10(0.030), 1e-12));
    // Monotone on each branch.
    for (double d = 10.5; d < 200.0; d += 0.5)
        CHECK(path_loss_db(d + 0.5, cfg) >= path_loss_db(d, cfg));
    CHECK_THROWS_AS(path_loss_db(0.0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(path_loss_db(-1.0, cfg), std::invalid_argument);
}

TEST_CASE("AP grid and distance floor")
{
    SystemConfig cfg;
    RandomStream rng(1, Domain::topology, 0);
    const auto topo = generate_topology(cfg, rng);
    REQUIRE(topo.layout == ApLayout::grid);
    const std::vector<Point> expected{{25, 25}, {25, 75}, {75, 25}, {75, 75}};
    CHECK(topo.aps == expected);
    for (double d : topo.distance.flat())
        CHECK(d >= 15.0 - 1.65);
    for (const auto& p : topo.ues) {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= 100.0);
        CHECK(p.y >= 0.0);
        CHECK(p.y <= 100.0);
    }

    cfg.num_aps = 7;
    RandomStream rng2(1, Domain::topology, 0);
    const auto irregular = generate_topology(cfg, rng2);
    CHECK(irregular.layout == ApLayout::random);
    CHECK(irregular.aps.size() == 7);
    CHECK(irregular.ues == topo.ues); // UEs are drawn before APs
}

TEST_CASE("topology and large-scale model are deterministic per stream")
{
    SystemConfig cfg;
    CHECK(model_for(cfg, 9) == model_for(cfg, 9));
    CHECK_FALSE(model_for(cfg, 9) == model_for(cfg, 10));
}

TEST_CASE("shadowing: 10 log10(zeta) + PL has zero mean and the configured spread")
{
    SystemConfig cfg;
    cfg.num_ues = 500;
    RandomStream rt(5, Domain::topology, 0), rp(5, Domain::pilots, 0);
    const auto topo = generate_topology(cfg, rt);
    const auto pilots = assign_pilots(cfg.num_ues, cfg.tau_p, cfg.pilot_policy, rp);
    double s1 = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
        RandomStream rs(5, Domain::shadowing, rep);
        const auto ls = large_scale(topo, cfg, pilots, rs);
        for (std::size_t k = 0; k < cfg.num_ues; ++k)
            for (std::size_t l = 0; l < cfg.num_aps; ++l) {
                const double x = 10.0 * std::log10(ls.zeta(k, l)) + path_loss_db(topo.distance(k, l), cfg);
                s1 += x;
                s2 += x * x;
                ++n;
            }
    }
    const double mean = s1 / n, var = s2 / n - mean * mean;
    const double se_mean = std::sqrt(var / n);
    CHECK(std::abs(mean) < 3.0 * se_mean);
    // Var of a normal sample variance: 2 sigma^4 / n.
    const double sigma2 = cfg.shadow_std_db * cfg.shadow_std_db;
    CHECK(std::abs(var - sigma2) < 3.0 * std::sqrt(2.0 / n) * sigma2);
}

TEST_CASE("zero shadowing gives the deterministic path loss")
{
    SystemConfig cfg;
    cfg.shadow_std_db = 0.0;
    Topology topo;
    topo.aps = {{0, 0}};
    topo.ues = {{0, 0}};
    topo.distance = Grid<double>(1, 1, cfg.d0);
    RandomStream rs(1, Domain::shadowing, 0), rp(1, Domain::pilots, 0);
    const auto ls = large_scale(topo, cfg, assign_pilots(1, 1, PilotPolicy::round_robin, rp), rs);
    CHECK(ls.zeta(0, 0) == std::pow(10.0, -path_loss_db(cfg.d0, cfg) / 10.0));
}

TEST_CASE("large-scale invariants")
{
    SystemConfig cfg;
    cfg.tau_p = 5;
    cfg.pilot_power = 1e-3; // noticeable estimation quality and contamination
    const auto ls = model_for(cfg);
    const double pe = cfg.tau_p * cfg.pilot_power;
    for (std::size_t k = 0; k < ls.ues(); ++k)
        for (std::size_t l = 0; l < ls.aps(); ++l) {
            CHECK(ls.zeta(k, l) > 0.0);
            CHECK_THAT(ls.beta(k, l) + ls.varsigma(k, l), WithinRel(ls.zeta(k, l), 1e-12));
            CHECK(ls.gamma(k, l) >= 0.0);
            CHECK(ls.gamma(k, l) <= ls.beta(k, l));
            CHECK_THAT(ls.upsilon(k, l), WithinAbs(ls.beta(k, l) - ls.gamma(k, l), 0.0));
            CHECK(ls.alpha(k, k, l) == 1.0);

            // gamma two ways
            double shared = 0.0;
            for (std::size_t i : ls.pilots.sharing_set(k))
                shared += ls.beta(i, l);
            const double direct = pe * ls.beta(k, l) * ls.beta(k, l) / (pe * shared + cfg.noise_power);
            CHECK_THAT(ls.gamma(k, l), WithinRel(direct, 1e-12));

            for (std::size_t i = 0; i < ls.ues(); ++i) {
                if (ls.pilots.shares(i, k))
                    CHECK_THAT(ls.gamma(i, l), WithinRel(ls.alpha(i, k, l) * ls.alpha(i, k, l) * ls.gamma(k, l), 1e-12));
                else
                    CHECK(ls.alpha(i, k, l) == 0.0);
            }
        }
}

TEST_CASE("pure Rayleigh limit")
{
    SystemConfig cfg;
    cfg.rician.constant = 0.0;
    const auto ls = model_for(cfg);
    for (std::size_t k = 0; k < ls.ues(); ++k)
        for (std::size_t l = 0; l < ls.aps(); ++l) {
            CHECK(ls.varsigma(k, l) == 0.0);
            CHECK(ls.beta(k, l) == ls.zeta(k, l));
        }
}

TEST_CASE("MMSE scalar when pilot energy equals the noise power")
{
    // tau_p P_p beta = sigma^2, single UE on its pilot:
    // c = sqrt(tau_p P_p) beta / (2 sigma^2) and gamma = beta / 2.
    SystemConfig cfg;
    cfg.tau_p = 4;
    cfg.pilot_power = 0.25;
    cfg.noise_power = 2.0;
    LargeScaleModel ls;
    ls.antennas = 1;
    RandomStream rp(1, Domain::pilots, 0);
    ls.pilots = assign_pilots(1, cfg.tau_p, PilotPolicy::round_robin, rp);
    ls.zeta = Grid<double>(1, 1, 2.0);
    ls.k_factor = Grid<double>(1, 1, 0.0);
    ls.phi = Grid<double>(1, 1, 0.0);
    derive_estimation_coefficients(ls, cfg);
    REQUIRE(cfg.tau_p * cfg.pilot_power * ls.beta(0, 0) == cfg.noise_power);
    CHECK_THAT(ls.c(0, 0), WithinRel(std::sqrt(1.0) * 2.0 / (2.0 * 2.0), 1e-15));
    CHECK_THAT(ls.gamma(0, 0), WithinRel(1.0, 1e-15));
}

TEST_CASE("steering vector")
{
    for (auto v : steering_vector(0.0, 4))
        CHECK(v == std::complex<double>(1.0, 0.0));
    const auto one = steering_vector(0.7, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::complex<double>(1.0, 0.0));

    RandomStream rng(2, Domain::oracle, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const double phi = rng.uniform(-3.14, 3.14);
        const std::size_t n = 1 + rng.index(16);
        const auto h = steering_vector(phi, n);
        double norm2 = 0.0;
        for (auto v : h) {
            CHECK_THAT(std::abs(v), WithinAbs(1.0, 1e-14));
            norm2 += std::norm(v);
        }
        CHECK_THAT(norm2, WithinRel(static_cast<double>(n), 1e-13));
        const auto self = los_correlation(phi, phi, n);
        CHECK_THAT(self.real(), WithinAbs(1.0, 1e-14));
        CHECK_THAT(self.imag(), WithinAbs(0.0, 1e-14));
        // rho against the explicit inner product
        const double phi2 = rng.uniform(-3.14, 3.14);
        const auto h2 = steering_vector(phi2, n);
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            acc += h[t] * std::conj(h2[t]);
        const auto rho = los_correlation(phi, phi2, n);
        CHECK_THAT(rho.real(), WithinAbs(acc.real() / n, 1e-13));
        CHECK_THAT(rho.imag(), WithinAbs(acc.imag() / n, 1e-13));
    }
}
