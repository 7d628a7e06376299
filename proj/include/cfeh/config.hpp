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

#ifndef CFEH_CONFIG_HPP
#define CFEH_CONFIG_HPP

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfeh {

// Thrown when a configuration violates one or more constraints. `issues`
// lists every violation, not just the first one found.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> issues)
        : std::invalid_argument(join(issues)), issues_(std::move(issues)) {}

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& v)
    {
        std::string s = "invalid configuration:";
        for (const auto& i : v)
            s += "\n  - " + i;
        return s;
    }
    std::vector<std::string> issues_;
};

/// Logistic energy-harvesting circuit. Output DC power is
/// psi * (Lambda(I) - varphi) with Lambda(I) = 1 / (1 + exp(-a (I - b))).
struct EhCircuit {
    double a = 150.0;     // steepness, 1/W
    double b = 0.014;     // turning point, W
    double i_max = 0.024; // saturation output power, W

    /// Lambda(0); subtracting it pins the zero-input response to zero.
    double varphi() const { return 1.0 / (1.0 + std::exp(a * b)); }
    double psi() const { return i_max / (1.0 - varphi()); }

    void check(std::vector<std::string>& issues, const std::string& where) const
    {
        if (!(a > 0.0))
            issues.push_back(where + ".a must be > 0");
        if (!(b > 0.0))
            issues.push_back(where + ".b must be > 0");
        if (!(i_max > 0.0))
            issues.push_back(where + ".i_max must be > 0");
    }

    bool operator==(const EhCircuit&) const = default;
};

enum class PilotPolicy { round_robin, random };

inline PilotPolicy parse_pilot_policy(std::string_view name)
{
    if (name == "round_robin")
        return PilotPolicy::round_robin;
    if (name == "random")
        return PilotPolicy::random;
    throw std::invalid_argument("unknown pilot policy '" + std::string(name) + "'");
}

inline std::string to_string(PilotPolicy p)
{
    return p == PilotPolicy::round_robin ? "round_robin" : "random";
}

// Rician K-factor: K = 10^(intercept - slope * d[m]) unless `constant` is set.
struct RicianModel {
    double log10_intercept = 1.3;
    double log10_slope_per_m = 0.003;
    std::optional<double> constant;

    double k_factor(double distance_m) const
    {
        if (constant)
            return *constant;
        return std::pow(10.0, log10_intercept - log10_slope_per_m * distance_m);
    }

    bool operator==(const RicianModel&) const = default;
};

/// Thermal noise power in W for a bandwidth and receiver noise figure.
inline double thermal_noise_power(double bandwidth_hz, double noise_figure_db)
{
    const double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

/// All scalar parameters of one experiment.
///
/// Durations are counted in symbols; `symbol_duration` converts them to
/// seconds. Powers are in W, lengths in m, energies in J.
struct SystemConfig {
    std::size_t num_aps = 4;  // L
    std::size_t num_ues = 20; // K
    std::size_t antennas = 72; // N per AP

    std::size_t tau_c = 200;
    std::size_t tau_p = 20;
    std::size_t tau_h = 100;
    std::size_t tau_d = 40;
    std::size_t tau_u = 40;
    double symbol_duration = 1e-3;

    double pilot_power = 7e-8; // W; sets E_C between the L = 4 and L = 9 harvest
    double uplink_power = 7e-8;
    double total_power = 10.0;
    double noise_power = thermal_noise_power(20e6, 9.0);

    double area_side = 100.0;
    double ap_height = 15.0;
    double ue_height = 1.65;
    double carrier_mhz = 1900.0;
    double shadow_std_db = 8.0;
    double d0 = 10.0;
    double d1 = 50.0;
    RicianModel rician;
    PilotPolicy pilot_policy = PilotPolicy::round_robin;

    EhCircuit circuit;
    std::vector<EhCircuit> ue_circuits; // empty: every UE uses `circuit`

    double battery_capacity = 0.3; // E_f
    std::size_t energy_states = 2000; // M

    std::uint64_t seed = 1;

    double per_ap_power() const { return total_power / static_cast<double>(num_aps); }
    double seconds(std::size_t symbols) const { return static_cast<double>(symbols) * symbol_duration; }
    double harvest_seconds() const { return seconds(tau_h); }

    const EhCircuit& circuit_for(std::size_t ue) const
    {
        return ue_circuits.empty() ? circuit : ue_circuits.at(ue);
    }

    /// Every violated constraint, empty when the configuration is usable.
    std::vector<std::string> violations() const
    {
        std::vector<std::string> v;
        if (num_aps < 1)
            v.emplace_back("num_aps must be >= 1");
        if (num_ues < 1)
            v.emplace_back("num_ues must be >= 1");
        if (antennas < 1)
            v.emplace_back("antennas must be >= 1");
        if (tau_c < 1 || tau_p < 1 || tau_h < 1 || tau_d < 1 || tau_u < 1)
            v.emplace_back("all durations (tau_c, tau_p, tau_h, tau_d, tau_u) must be >= 1 symbol");
        if (tau_p + tau_h + tau_d + tau_u > tau_c)
            v.push_back("tau_p + tau_h + tau_d + tau_u = " + std::to_string(tau_p + tau_h + tau_d + tau_u) +
                        " exceeds tau_c = " + std::to_string(tau_c));
        auto positive = [&](double x, const char* name) {
            if (!(x > 0.0) || !std::isfinite(x))
                v.push_back(std::string(name) + " must be finite and > 0");
        };
        positive(symbol_duration, "symbol_duration");
        positive(pilot_power, "pilot_power");
        positive(uplink_power, "uplink_power");
        positive(total_power, "total_power");
        positive(noise_power, "noise_power");
        positive(area_side, "area_side");
        positive(ap_height, "ap_height");
        positive(ue_height, "ue_height");
        positive(carrier_mhz, "carrier_mhz");
        positive(d0, "d0");
        positive(d1, "d1");
        positive(battery_capacity, "battery_capacity");
        if (d0 >= d1)
            v.emplace_back("d0 must be smaller than d1");
        if (!(shadow_std_db >= 0.0))
            v.emplace_back("shadow_std_db must be >= 0");
        if (rician.constant && !(*rician.constant >= 0.0))
            v.emplace_back("rician constant K-factor must be >= 0");
        if (energy_states < 2)
            v.emplace_back("energy_states must be >= 2");
        circuit.check(v, "circuit");
        if (!ue_circuits.empty() && ue_circuits.size() != num_ues)
            v.emplace_back("ue_circuits must be empty or list one circuit per UE");
        for (std::size_t k = 0; k < ue_circuits.size(); ++k)
            ue_circuits[k].check(v, "ue_circuits[" + std::to_string(k) + "]");
        return v;
    }

    void validate() const
    {
        if (auto v = violations(); !v.empty())
            throw ConfigError(std::move(v));
    }

    bool operator==(const SystemConfig&) const = default;
};

/// Canonical one-line-per-field text of a configuration; equal
/// configurations give identical text.
inline std::string describe(const SystemConfig& c)
{
    std::string out;
    char buf[64];
    auto num = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += key;
        out += '=';
        out += buf;
        out += '\n';
    };
    auto count = [&](const char* key, std::size_t v) { num(key, static_cast<double>(v)); };
    count("num_aps", c.num_aps);
    count("num_ues", c.num_ues);
    count("antennas", c.antennas);
    count("tau_c", c.tau_c);
    count("tau_p", c.tau_p);
    count("tau_h", c.tau_h);
    count("tau_d", c.tau_d);
    count("tau_u", c.tau_u);
    num("symbol_duration", c.symbol_duration);
    num("pilot_power", c.pilot_power);
    num("uplink_power", c.uplink_power);
    num("total_power", c.total_power);
    num("noise_power", c.noise_power);
    num("area_side", c.area_side);
    num("ap_height", c.ap_height);
    num("ue_height", c.ue_height);
    num("carrier_mhz", c.carrier_mhz);
    num("shadow_std_db", c.shadow_std_db);
    num("d0", c.d0);
    num("d1", c.d1);
    num("rician.log10_intercept", c.rician.log10_intercept);
    num("rician.log10_slope_per_m", c.rician.log10_slope_per_m);
    if (c.rician.constant)
        num("rician.constant", *c.rician.constant);
    out += "pilot_policy=" + to_string(c.pilot_policy) + "\n";
    num("circuit.a", c.circuit.a);
    num("circuit.b", c.circuit.b);
    num("circuit.i_max", c.circuit.i_max);
    for (std::size_t k = 0; k < c.ue_circuits.size(); ++k) {
        const std::string p = "ue_circuits." + std::to_string(k);
        num((p + ".a").c_str(), c.ue_circuits[k].a);
        num((p + ".b").c_str(), c.ue_circuits[k].b);
        num((p + ".i_max").c_str(), c.ue_circuits[k].i_max);
    }
    num("battery_capacity", c.battery_capacity);
    count("energy_states", c.energy_states);
    out += "seed=" + std::to_string(c.seed) + "\n";
    return out;
}

/// 64-bit FNV-1a of describe(c).
inline std::uint64_t config_hash(const SystemConfig& c)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : describe(c)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace cfeh

#endif
