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

#include <cfeh/markov.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

using namespace cfeh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Regularized lower incomplete gamma P(k, x): power series below k + 1,
// modified-Lentz continued fraction for Q above.
double incomplete_gamma_p(double k, double x)
{
    if (x <= 0.0)
        return 0.0;
    const long double K = k, X = x;
    const long double log_prefix = K * std::log(X) - X - std::lgamma(K);
    if (x < k + 1.0) {
        long double term = 1.0L / K, sum = term;
        for (int n = 1; n < 200000; ++n) {
            term *= X / (K + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-19L)
                break;
        }
        return static_cast<double>(sum * std::exp(log_prefix));
    }
    const long double tiny = 1e-4000L;
    long double b = X + 1.0L - K, c = 1.0L / tiny, d = 1.0L / b, h = d;
    for (int n = 1; n < 200000; ++n) {
        const long double an = -n * (n - K);
        b += 2.0L;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0L / d;
        const long double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0L) < 1e-19L)
            break;
    }
    return static_cast<double>(1.0L - std::exp(log_prefix) * h);
}

EnergyChain chain(std::size_t states, double down, double up)
{
    EnergyChain c;
    c.states = states;
    c.capacity = 1.0;
    c.triple.down = down;
    c.triple.up = up;
    c.triple.stay = 1.0 - down - up;
    return c;
}

} // namespace

TEST_CASE("gamma moment fit")
{
    const auto f = gamma_fit(2.0, 1.0);
    CHECK_THAT(f.shape, WithinRel(4.0, 1e-15));
    CHECK_THAT(f.scale, WithinRel(0.5, 1e-15));
    for (auto [m, v] : {std::pair{3.7e-9, 1.2e-20}, std::pair{0.4, 9.0}, std::pair{1e3, 1e-3}}) {
        const auto g = gamma_fit(m, v);
        CHECK_THAT(g.shape * g.scale, WithinRel(m, 1e-12));
        CHECK_THAT(g.shape * g.scale * g.scale, WithinRel(v, 1e-12));
    }
    CHECK_THROWS_AS(gamma_fit(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fit(1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fit(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fit(1.0, std::nan("")), std::domain_error);
}

TEST_CASE("harvest CDF")
{
    const GammaFit exp1{1.0, 1.0};
    CHECK(harvest_cdf(0.0, exp1) == 0.0);
    CHECK(harvest_cdf(INFINITY, exp1) == 1.0);
    CHECK_THAT(harvest_cdf(1.0, exp1), WithinAbs(1.0 - std::exp(-1.0), 1e-15));
    CHECK_THAT(harvest_cdf(1.0, exp1), WithinAbs(0.63212, 1e-5));
    CHECK_THROWS_AS(harvest_cdf(-1e-30, exp1), std::invalid_argument);
}

TEST_CASE("harvest CDF against an independent incomplete-gamma evaluation")
{
    RandomStream rng(11, Domain::oracle, 0);
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
        const double k = std::pow(10.0, rng.uniform(-1.0, 3.5));
        const double x = k * std::pow(10.0, rng.uniform(-0.5, 0.5) * (k > 100.0 ? 0.2 : 1.0));
        const double theta = std::pow(10.0, rng.uniform(-10.0, 2.0));
        worst = std::max(worst, std::abs(harvest_cdf(x * theta, {k, theta}) - incomplete_gamma_p(k, x)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("consumption energy")
{
    SystemConfig cfg;
    cfg.pilot_power = 0.0;
    cfg.uplink_power = 0.0;
    CHECK(consumption_energy(cfg) == 0.0);

    cfg.tau_p = 20;
    cfg.tau_u = 0;
    cfg.symbol_duration = 1e-3;
    cfg.pilot_power = 10e-3;
    CHECK_THAT(consumption_energy(cfg), WithinRel(2e-4, 1e-14));

    cfg.tau_u = 40;
    cfg.uplink_power = 3e-3;
    const double base = consumption_energy(cfg);
    cfg.pilot_power *= 2.0;
    cfg.uplink_power *= 2.0;
    CHECK_THAT(consumption_energy(cfg), WithinRel(2.0 * base, 1e-14));
}

TEST_CASE("negative-transition probability limits")
{
    const GammaFit f{3.0, 2e-9};
    CHECK(negative_transition_prob(f, 0.0) == 0.0);
    CHECK(negative_transition_prob(f, INFINITY) == 1.0);
    CHECK(negative_transition_prob(f, 1e-7) > 0.999999);
}

TEST_CASE("transition triple")
{
    const GammaFit f{50.0, 1e-10};
    const auto still = transition_triple(f, 5e-9, 0.0, 10, 1.5e-3);
    CHECK(still.down == 0.0);
    CHECK(still.stay == 1.0);
    CHECK(still.up == 0.0);

    const auto gain = transition_triple(f, 0.0, 0.001, 4, 1.0);
    CHECK(gain.down == 0.0);
    CHECK_THAT(gain.stay, WithinAbs(0.996, 1e-15));
    CHECK_THAT(gain.up, WithinAbs(0.004, 1e-15));
    CHECK_FALSE(gain.coarse());

    // Loss direction is carried by F(E_C), whatever the sign of the mean.
    const auto loss = transition_triple(f, 1e-8, -5e-9, 10, 1.5e-3);
    CHECK(loss.down > loss.up);
    CHECK_THAT(loss.down + loss.stay + loss.up, WithinAbs(1.0, 1e-15));

    const auto big = transition_triple(f, 5e-9, 1.0, 10, 1.0);
    CHECK(big.capped());
    CHECK(big.coarse());
    CHECK_THAT(big.down + big.up, WithinAbs(1.0, 1e-15));
    CHECK(big.stay == 0.0);

    CHECK_THROWS_AS(transition_triple(f, 0.0, 0.0, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(transition_triple(f, 0.0, 0.0, 4, 0.0), std::invalid_argument);
}

TEST_CASE("triple properties over random inputs")
{
    RandomStream rng(12, Domain::oracle, 0);
    for (int n = 0; n < 2000; ++n) {
        const GammaFit f{std::pow(10.0, rng.uniform(-1.0, 3.0)), std::pow(10.0, rng.uniform(-11.0, -8.0))};
        const double consumed = f.shape * f.scale * rng.uniform(0.0, 2.0);
        const double delta = f.shape * f.scale - consumed;
        const auto t = transition_triple(f, consumed, delta, 2 + rng.index(40), 1.5e-3 * rng.uniform(0.01, 1.0));
        CHECK_THAT(t.down + t.stay + t.up, WithinAbs(1.0, 1e-15));
        CHECK(t.down >= 0.0);
        CHECK(t.up >= 0.0);
        CHECK(t.stay >= 0.0);
        CHECK(t.stay <= 1.0);
    }
}

TEST_CASE("p_up grows with the mean harvested energy above consumption")
{
    const double consumed = 4.2e-9, rel_sd = 0.05;
    double prev = 0.0;
    for (double mean = 4.3e-9; mean < 2e-8; mean *= 1.1) {
        const auto f = gamma_fit(mean, rel_sd * rel_sd * mean * mean);
        const auto t = transition_triple(f, consumed, mean - consumed, 10, 1.5e-3);
        CHECK(t.up >= prev);
        prev = t.up;
    }
}

TEST_CASE("chain rows")
{
    const auto c = chain(6, 0.3, 0.25);
    for (std::size_t j = 1; j <= 6; ++j) {
        const auto r = c.row(j);
        CHECK_THAT(r.down + r.stay + r.up, WithinAbs(1.0, 1e-12));
    }
    CHECK(c.row(1).down == 0.0);
    CHECK_THAT(c.row(1).stay, WithinAbs(0.75, 1e-15));
    CHECK(c.row(6).up == 0.0);
    CHECK_THAT(c.row(6).stay, WithinAbs(0.7, 1e-15));
    CHECK_THROWS_AS(c.row(0), std::out_of_range);
    CHECK_THROWS_AS(c.row(7), std::out_of_range);

    const auto m = c.dense();
    for (std::size_t r = 0; r < 6; ++r)
        CHECK_THAT(std::accumulate(m.begin() + r * 6, m.begin() + (r + 1) * 6, 0.0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("n-step evolution")
{
    const auto c = chain(5, 0.2, 0.3);
    const auto pi0 = StateDistribution::point(5, 3);
    CHECK(n_step_distribution(c, pi0, 0).pi == pi0.pi);
    CHECK_THROWS_AS(n_step_distribution(c, pi0, -1), std::invalid_argument);
    CHECK_THROWS_AS(n_step_distribution(c, StateDistribution::uniform(4), 1), std::invalid_argument);

    const auto still = chain(5, 0.0, 0.0);
    const auto u = StateDistribution::uniform(5);
    CHECK(n_step_distribution(still, u, 37).pi == u.pi);

    const auto climb = chain(6, 0.0, 1.0);
    const auto at4 = n_step_distribution(climb, StateDistribution::point(6, 1), 3);
    CHECK(at4.pi == StateDistribution::point(6, 4).pi);
    CHECK(at4.step == 3);

    // Matches the dense matrix power.
    const auto m = c.dense();
    std::vector<double> ref = pi0.pi;
    for (int s = 0; s < 7; ++s) {
        std::vector<double> next(5, 0.0);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                next[j] += ref[i] * m[i * 5 + j];
        ref = next;
    }
    const auto got = n_step_distribution(c, pi0, 7);
    for (std::size_t j = 0; j < 5; ++j)
        CHECK_THAT(got.pi[j], WithinAbs(ref[j], 1e-15));

    const auto big = chain(40, 1e-3, 4e-3);
    const auto far = n_step_distribution(big, StateDistribution::uniform(40), 10000);
    CHECK_THAT(std::accumulate(far.pi.begin(), far.pi.end(), 0.0), WithinAbs(1.0, 1e-9));
    for (double p : far.pi)
        CHECK(p >= 0.0);
}

TEST_CASE("energy state index")
{
    CHECK(energy_state(0.0, 1.0, 4) == 1);
    CHECK(energy_state(0.25, 1.0, 4) == 1);
    CHECK(energy_state(0.2500001, 1.0, 4) == 2);
    CHECK(energy_state(1.0, 1.0, 4) == 4);
    CHECK(energy_state(2.0, 1.0, 4) == 4);
}

TEST_CASE("battery trajectories")
{
    RandomStream rng(13, Domain::trajectory, 0);
    const std::vector<double> zero(3, 0.0);
    for (auto s : simulate_energy_trajectory(zero, 0.45, 1.0, 4, 50, rng))
        CHECK(s == 2);

    const std::vector<double> step{0.25};
    const auto up = simulate_energy_trajectory(step, 0.125, 1.0, 4, 6, rng);
    CHECK(up == std::vector<std::size_t>{1, 2, 3, 4, 4, 4, 4});

    const std::vector<double> down{-0.25};
    const auto held = simulate_energy_trajectory(down, 0.375, 1.0, 4, 3, rng, BatteryBoundary::hold);
    CHECK(held == std::vector<std::size_t>{2, 1, 1, 1});

    CHECK_THROWS_AS(simulate_energy_trajectory(step, 0.0, 1.0, 4, 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(simulate_energy_trajectory(std::span<const double>{}, 0.0, 1.0, 4, 3, rng), std::invalid_argument);
}

TEST_CASE("trajectory state-change frequencies match the chain triple")
{
    // Pool of differentials with down/stay/up weights 0.2/0.5/0.3.
    const std::size_t M = 5;
    const double slice = 1.0 / M;
    std::vector<double> pool{-slice, -slice, 0, 0, 0, 0, 0, slice, slice, slice};
    const double p_down = 0.2, p_up = 0.3;

    RandomStream rng(14, Domain::trajectory, 0);
    const auto path = simulate_energy_trajectory(pool, 2.5 * slice, 1.0, M, 2000, rng, BatteryBoundary::hold);
    std::size_t interior = 0, downs = 0, ups = 0;
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        if (path[s] == 1 || path[s] == M)
            continue;
        ++interior;
        downs += path[s + 1] + 1 == path[s];
        ups += path[s + 1] == path[s] + 1;
    }
    REQUIRE(interior > 500);
    const double n = static_cast<double>(interior);
    const double fd = downs / n, fu = ups / n;
    CHECK(std::abs(fd - p_down) <= 3.0 * std::sqrt(p_down * (1 - p_down) / n));
    CHECK(std::abs(fu - p_up) <= 3.0 * std::sqrt(p_up * (1 - p_up) / n));
}
