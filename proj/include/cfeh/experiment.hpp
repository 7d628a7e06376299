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

#ifndef CFEH_EXPERIMENT_HPP
#define CFEH_EXPERIMENT_HPP

#include <cfeh/closedform.hpp>
#include <cfeh/config.hpp>
#include <cfeh/io.hpp>
#include <cfeh/markov.hpp>
#include <cfeh/montecarlo.hpp>
#include <cfeh/stats.hpp>
#include <cfeh/topology.hpp>

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace cfeh {

/// Constant-aperture sweep over the AP count with L * N held at `total_antennas`.
struct SweepSpec {
    std::vector<std::size_t> num_aps{4, 9, 16, 25, 36};
    std::size_t total_antennas = 288;

    bool operator==(const SweepSpec&) const = default;
};

struct ExperimentSpec {
    SystemConfig base;
    std::optional<SweepSpec> sweep = SweepSpec{};
    std::size_t intervals = 2000;
    std::size_t topologies = 1;
    std::size_t workers = 1;
    std::vector<long long> markov_steps{100, 200, 500};
    VarianceExpansion expansion = VarianceExpansion::delta;
    std::size_t validate_instances = 10;
    std::size_t validate_draws = 100000;

    bool operator==(const ExperimentSpec&) const = default;
};

/// Antennas per AP for a sweep point. L must divide the aperture, except that
/// a square grid of APs takes the nearest integer (25 APs -> 12 antennas),
/// reported through `note`.
inline std::size_t antennas_for(std::size_t num_aps, std::size_t total, std::string* note = nullptr)
{
    if (num_aps == 0)
        throw std::invalid_argument("sweep: number of APs must be >= 1");
    if (total % num_aps == 0)
        return total / num_aps;
    if (is_perfect_square(num_aps)) {
        const auto n = static_cast<std::size_t>(
            std::llround(static_cast<double>(total) / static_cast<double>(num_aps)));
        if (n < 1)
            throw std::invalid_argument("sweep: L = " + std::to_string(num_aps) + " leaves no antennas");
        if (note)
            *note = "L = " + std::to_string(num_aps) + " does not divide " + std::to_string(total) +
                    "; using N = " + std::to_string(n) + " (L N = " + std::to_string(n * num_aps) + ")";
        return n;
    }
    throw std::invalid_argument("sweep: L = " + std::to_string(num_aps) + " gives non-integral N = " +
                                std::to_string(total) + "/" + std::to_string(num_aps));
}

inline VarianceExpansion parse_variance_expansion(const std::string& s)
{
    if (s == "delta")
        return VarianceExpansion::delta;
    if (s == "mixed_second_order")
        return VarianceExpansion::mixed_second_order;
    throw std::invalid_argument("unknown variance_expansion '" + s + "' (delta | mixed_second_order)");
}

inline std::string to_string(VarianceExpansion e)
{
    return e == VarianceExpansion::delta ? "delta" : "mixed_second_order";
}

namespace detail {

class YamlReader {
public:
    explicit YamlReader(std::string source) : source_(std::move(source)) {}

    std::vector<std::string>& issues() { return issues_; }

    std::string where(const YAML::Node& n, const std::string& key) const
    {
        const auto m = n.Mark();
        if (m.line < 0)
            return source_ + ": '" + key + "'";
        return source_ + ":" + std::to_string(m.line + 1) + ": '" + key + "'";
    }

    /// Flags keys of `map` that are not in `allowed`. False if `map` is not a mapping.
    bool expect_map(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed)
    {
        if (!map || map.IsNull())
            return false;
        if (!map.IsMap()) {
            issues_.push_back(where(map, path) + " must be a mapping");
            return false;
        }
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key))
                issues_.push_back(where(kv.first, path.empty() ? key : path + "." + key) + " is not a known key");
        }
        return true;
    }

    template <typename T>
    void read(const YAML::Node& map, const std::string& path, const char* key, T& out)
    {
        const auto n = map[key];
        if (!n)
            return;
        const std::string full = path.empty() ? key : path + "." + key;
        try {
            if constexpr (std::is_same_v<T, std::size_t>) {
                const auto v = n.as<long long>();
                if (v < 0)
                    throw YAML::BadConversion(n.Mark());
                out = static_cast<std::size_t>(v);
            } else {
                out = n.as<T>();
            }
        } catch (const YAML::Exception&) {
            issues_.push_back(where(n, full) + " has an invalid value '" + scalar(n) + "'");
        }
    }

private:
    static std::string scalar(const YAML::Node& n) { return n.IsScalar() ? n.Scalar() : std::string("<non-scalar>"); }

    std::string source_;
    std::vector<std::string> issues_;
};

inline void read_circuit(YamlReader& r, const YAML::Node& n, const std::string& path, EhCircuit& c)
{
    if (!r.expect_map(n, path, {"a", "b", "i_max"}))
        return;
    r.read(n, path, "a", c.a);
    r.read(n, path, "b", c.b);
    r.read(n, path, "i_max", c.i_max);
}

} // namespace detail

/// Parses a YAML experiment description. Absent keys keep their defaults, so an
/// empty document yields the default experiment. All problems (syntax, unknown
/// keys, bad values, violated constraints) are reported together.
inline ExperimentSpec parse_config_text(const std::string& text, const std::string& source = "<config>")
{
    ExperimentSpec spec;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError({source + ":" + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg});
    }

    detail::YamlReader r(source);
    if (root && !root.IsNull()) {
        r.expect_map(root, "", {"system", "experiment", "validate"});
        auto& c = spec.base;
        const auto sys = root["system"];
        if (r.expect_map(sys, "system",
                         {"num_aps", "num_ues", "antennas", "tau_c", "tau_p", "tau_h", "tau_d", "tau_u",
                          "symbol_duration", "pilot_power", "uplink_power", "total_power", "noise_power",
                          "bandwidth_hz", "noise_figure_db", "area_side", "ap_height", "ue_height", "carrier_mhz",
                          "shadow_std_db", "d0", "d1", "rician", "pilot_policy", "circuit", "ue_circuits",
                          "battery_capacity", "energy_states", "seed"})) {
            const std::string p = "system";
            r.read(sys, p, "num_aps", c.num_aps);
            r.read(sys, p, "num_ues", c.num_ues);
            r.read(sys, p, "antennas", c.antennas);
            r.read(sys, p, "tau_c", c.tau_c);
            r.read(sys, p, "tau_p", c.tau_p);
            r.read(sys, p, "tau_h", c.tau_h);
            r.read(sys, p, "tau_d", c.tau_d);
            r.read(sys, p, "tau_u", c.tau_u);
            r.read(sys, p, "symbol_duration", c.symbol_duration);
            r.read(sys, p, "pilot_power", c.pilot_power);
            r.read(sys, p, "uplink_power", c.uplink_power);
            r.read(sys, p, "total_power", c.total_power);
            double bandwidth = 20e6, figure = 9.0;
            r.read(sys, p, "bandwidth_hz", bandwidth);
            r.read(sys, p, "noise_figure_db", figure);
            c.noise_power = thermal_noise_power(bandwidth, figure);
            if (sys["noise_power"]) {
                if (sys["bandwidth_hz"] || sys["noise_figure_db"])
                    r.issues().push_back(r.where(sys["noise_power"], "system.noise_power") +
                                         " conflicts with bandwidth_hz/noise_figure_db; give one or the other");
                r.read(sys, p, "noise_power", c.noise_power);
            }
            r.read(sys, p, "area_side", c.area_side);
            r.read(sys, p, "ap_height", c.ap_height);
            r.read(sys, p, "ue_height", c.ue_height);
            r.read(sys, p, "carrier_mhz", c.carrier_mhz);
            r.read(sys, p, "shadow_std_db", c.shadow_std_db);
            r.read(sys, p, "d0", c.d0);
            r.read(sys, p, "d1", c.d1);
            const auto ric = sys["rician"];
            if (r.expect_map(ric, "system.rician", {"log10_intercept", "log10_slope_per_m", "constant"})) {
                r.read(ric, "system.rician", "log10_intercept", c.rician.log10_intercept);
                r.read(ric, "system.rician", "log10_slope_per_m", c.rician.log10_slope_per_m);
                if (ric["constant"]) {
                    double k = 0.0;
                    r.read(ric, "system.rician", "constant", k);
                    c.rician.constant = k;
                }
            }
            if (sys["pilot_policy"]) {
                std::string name;
                r.read(sys, p, "pilot_policy", name);
                try {
                    c.pilot_policy = parse_pilot_policy(name);
                } catch (const std::invalid_argument& e) {
                    r.issues().push_back(r.where(sys["pilot_policy"], "system.pilot_policy") + ": " + e.what());
                }
            }
            detail::read_circuit(r, sys["circuit"], "system.circuit", c.circuit);
            if (const auto list = sys["ue_circuits"]; list) {
                if (!list.IsSequence()) {
                    r.issues().push_back(r.where(list, "system.ue_circuits") + " must be a list");
                } else {
                    for (std::size_t k = 0; k < list.size(); ++k) {
                        EhCircuit ck = c.circuit;
                        detail::read_circuit(r, list[k], "system.ue_circuits[" + std::to_string(k) + "]", ck);
                        c.ue_circuits.push_back(ck);
                    }
                }
            }
            r.read(sys, p, "battery_capacity", c.battery_capacity);
            r.read(sys, p, "energy_states", c.energy_states);
            r.read(sys, p, "seed", c.seed);
        }

        const auto exp = root["experiment"];
        if (r.expect_map(exp, "experiment",
                         {"intervals", "topologies", "workers", "sweep", "markov_steps", "variance_expansion"})) {
            const std::string p = "experiment";
            r.read(exp, p, "intervals", spec.intervals);
            r.read(exp, p, "topologies", spec.topologies);
            r.read(exp, p, "workers", spec.workers);
            if (const auto sw = exp["sweep"]; sw) {
                if (sw.IsNull() || (sw.IsScalar() && (sw.Scalar() == "none" || sw.Scalar() == "false"))) {
                    spec.sweep.reset();
                } else if (r.expect_map(sw, "experiment.sweep", {"num_aps", "total_antennas"})) {
                    SweepSpec s;
                    r.read(sw, "experiment.sweep", "num_aps", s.num_aps);
                    r.read(sw, "experiment.sweep", "total_antennas", s.total_antennas);
                    spec.sweep = s;
                }
            }
            r.read(exp, p, "markov_steps", spec.markov_steps);
            if (exp["variance_expansion"]) {
                std::string name;
                r.read(exp, p, "variance_expansion", name);
                try {
                    spec.expansion = parse_variance_expansion(name);
                } catch (const std::invalid_argument& e) {
                    r.issues().push_back(r.where(exp["variance_expansion"], "experiment.variance_expansion") + ": " +
                                         e.what());
                }
            }
        }

        const auto val = root["validate"];
        if (r.expect_map(val, "validate", {"instances", "draws"})) {
            r.read(val, "validate", "instances", spec.validate_instances);
            r.read(val, "validate", "draws", spec.validate_draws);
        }
    }

    auto issues = std::move(r.issues());
    for (auto& v : spec.base.violations())
        issues.push_back(source + ": " + v);
    if (spec.intervals > 0 && spec.topologies < 1)
        issues.push_back(source + ": experiment.topologies must be >= 1");
    if (spec.workers < 1)
        issues.push_back(source + ": experiment.workers must be >= 1");
    for (long long n : spec.markov_steps)
        if (n < 0)
            issues.push_back(source + ": experiment.markov_steps must be >= 0");
    if (spec.sweep) {
        if (spec.sweep->num_aps.empty())
            issues.push_back(source + ": experiment.sweep.num_aps must not be empty");
        for (std::size_t L : spec.sweep->num_aps) {
            try {
                antennas_for(L, spec.sweep->total_antennas);
            } catch (const std::invalid_argument& e) {
                issues.push_back(source + ": " + e.what());
            }
        }
    }
    if (!issues.empty())
        throw ConfigError(std::move(issues));
    return spec;
}

inline ExperimentSpec parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({"cannot open config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Sweep points

struct PointModel {
    SystemConfig cfg;
    Topology topology;
    LargeScaleModel large_scale;
};

/// Master seed of topology realization `index`; realization 0 uses the
/// configured seed unchanged.
inline std::uint64_t topology_seed(std::uint64_t master, std::size_t index)
{
    return index == 0 ? master : derive_seed(master, Domain::instance, index);
}

/// Places APs/UEs and draws shadowing and pilots for one configuration.
inline PointModel build_point(SystemConfig cfg)
{
    cfg.validate();
    RandomStream topo_rng(cfg.seed, Domain::topology, 0);
    RandomStream shadow_rng(cfg.seed, Domain::shadowing, 0);
    RandomStream pilot_rng(cfg.seed, Domain::pilots, 0);
    PointModel m;
    m.topology = generate_topology(cfg, topo_rng);
    const auto pilots = assign_pilots(cfg.num_ues, cfg.tau_p, cfg.pilot_policy, pilot_rng);
    m.large_scale = large_scale(m.topology, cfg, pilots, shadow_rng);
    m.cfg = std::move(cfg);
    return m;
}

/// P(Delta E <= 0) from the Gamma law; a degenerate (zero-variance) law is a step.
inline double loss_probability(double mean, double var, double consumed)
{
    if (var > 0.0 && mean > 0.0)
        return negative_transition_prob(gamma_fit(mean, var), consumed);
    return mean <= consumed ? 1.0 : 0.0;
}

inline TransitionTriple triple_from_moments(double mean, double var, double consumed, std::size_t states,
                                            double capacity)
{
    if (var > 0.0 && mean > 0.0)
        return transition_triple(gamma_fit(mean, var), consumed, mean - consumed, states, capacity);
    // Step law: the whole departure mass goes one way.
    TransitionTriple t;
    t.departure_ratio = static_cast<double>(states) * std::abs(mean - consumed) / capacity;
    const double q = std::min(1.0, t.departure_ratio);
    t.down = mean <= consumed ? q : 0.0;
    t.up = q - t.down;
    t.stay = 1.0 - q;
    return t;
}

struct PointResult {
    PointModel model;
    std::size_t topology_index = 0;
    RunResult run;
    HarvestStatistics analytical;
    std::vector<McEstimate> empirical_rf;
    std::vector<McEstimate> empirical_energy;
    std::vector<TransitionTriple> triples; // per UE, from the analytical moments
    std::size_t median_ue = 0;
    double consumed = 0.0;
    double pr_loss_analytical = 0.0; // median UE
    double pr_loss_empirical = 0.0;  // median UE
    double ks = 0.0;                 // median UE, Gamma law vs samples
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

inline PointResult evaluate_point(PointModel model, std::size_t intervals, std::size_t workers,
                                  VarianceExpansion expansion, std::size_t topology_index = 0)
{
    const auto t0 = std::chrono::steady_clock::now();
    PointResult r;
    r.topology_index = topology_index;
    r.model = std::move(model);
    const auto& cfg = r.model.cfg;
    const auto& ls = r.model.large_scale;
    const auto pc = equal_power_control(cfg);

    r.run = run(cfg, ls, pc, intervals, workers);
    r.analytical = analytical_statistics(ls, cfg, pc, expansion);
    r.consumed = consumption_energy(cfg);
    const std::size_t K = ls.ues();
    for (std::size_t k = 0; k < K; ++k) {
        r.empirical_rf.push_back(estimate(r.run.column(r.run.rf, k)));
        r.empirical_energy.push_back(estimate(r.run.column(r.run.energy, k)));
        r.triples.push_back(triple_from_moments(r.analytical.mean_energy[k], r.analytical.var_energy[k], r.consumed,
                                                cfg.energy_states, cfg.battery_capacity));
        if (r.analytical.clamped[k])
            r.warnings.push_back("UE " + std::to_string(k) + ": harvested-energy variance expansion clamped to 0");
    }

    if (intervals > 0) {
        const std::size_t m = median_energy_user(r.run);
        r.median_ue = m;
        const double mean = r.analytical.mean_energy[m], var = r.analytical.var_energy[m];
        r.pr_loss_analytical = loss_probability(mean, var, r.consumed);
        const auto deltas = r.run.column(r.run.delta, m);
        r.pr_loss_empirical =
            static_cast<double>(std::count_if(deltas.begin(), deltas.end(), [](double d) { return d <= 0.0; })) /
            static_cast<double>(deltas.size());
        if (var > 0.0 && mean > 0.0) {
            const auto fit = gamma_fit(mean, var);
            r.ks = ks_distance(empirical_cdf(r.run.column(r.run.energy, m)),
                               [&](double e) { return harvest_cdf(std::max(e, 0.0), fit); });
        } else {
            r.ks = 1.0;
        }
        if (r.triples[m].coarse())
            r.warnings.push_back("median UE: M |E{dE}| / E_f = " + format_number(r.triples[m].departure_ratio) +
                                 " exceeds 0.1; one-step transitions are a coarse description");
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Configurations of every sweep point (or the base point alone).
struct PointPlan {
    std::size_t num_aps = 0;
    std::size_t antennas = 0;
    std::string note;
};

inline std::vector<PointPlan> plan_points(const ExperimentSpec& spec)
{
    std::vector<PointPlan> out;
    if (!spec.sweep) {
        out.push_back({spec.base.num_aps, spec.base.antennas, {}});
        return out;
    }
    for (std::size_t L : spec.sweep->num_aps) {
        PointPlan p;
        p.num_aps = L;
        p.antennas = antennas_for(L, spec.sweep->total_antennas, &p.note);
        out.push_back(p);
    }
    return out;
}

inline SystemConfig point_config(const ExperimentSpec& spec, const PointPlan& plan, std::size_t topology_index)
{
    SystemConfig cfg = spec.base;
    cfg.num_aps = plan.num_aps;
    cfg.antennas = plan.antennas;
    cfg.seed = topology_seed(spec.base.seed, topology_index);
    return cfg;
}

// ---------------------------------------------------------------------------
// Output files

inline void write_samples_csv(const std::string& path, const RunResult& r)
{
    CsvWriter w(path, {"interval", "ue", "I_E", "E_E", "dE"});
    for (std::size_t t = 0; t < r.intervals; ++t)
        for (std::size_t k = 0; k < r.ues; ++k)
            w.row(t, k, r.rf_at(t, k), r.energy_at(t, k), r.delta_at(t, k));
}

inline void write_statistics_csv(const std::string& path, const PointResult& r)
{
    CsvWriter w(path, {"ue", "mean_I_analytical", "mean_I_empirical", "mean_I_se", "var_I_analytical",
                       "var_I_empirical", "mean_E_analytical", "mean_E_empirical", "var_E_analytical",
                       "var_E_empirical", "variance_clamped"});
    for (std::size_t k = 0; k < r.analytical.mean_rf.size(); ++k)
        w.row(k, r.analytical.mean_rf[k], r.empirical_rf[k].mean, r.empirical_rf[k].standard_error_of_mean,
              r.analytical.var_rf[k], r.empirical_rf[k].variance, r.analytical.mean_energy[k],
              r.empirical_energy[k].mean, r.analytical.var_energy[k], r.empirical_energy[k].variance,
              std::size_t{r.analytical.clamped[k] ? 1u : 0u});
}

/// Empirical and Gamma CDF of one UE's harvested energy at every sample.
inline void write_cdf_csv(const std::string& path, const std::vector<double>& energy, double mean, double var)
{
    CsvWriter w(path, {"energy_J", "empirical_cdf", "analytical_cdf"});
    if (energy.empty())
        return;
    const auto emp = empirical_cdf(energy);
    const bool fit_ok = mean > 0.0 && var > 0.0;
    const GammaFit fit = fit_ok ? gamma_fit(mean, var) : GammaFit{};
    for (double e : emp.support())
        w.row(e, emp(e), fit_ok ? harvest_cdf(std::max(e, 0.0), fit) : (e >= mean ? 1.0 : 0.0));
}

inline void write_transitions_csv(const std::string& path, std::size_t num_aps,
                                  const std::vector<TransitionTriple>& triples)
{
    CsvWriter w(path, {"L", "ue", "p_down", "p_stay", "p_up"});
    for (std::size_t k = 0; k < triples.size(); ++k)
        w.row(num_aps, k, triples[k].down, triples[k].stay, triples[k].up);
}

inline EnergyChain chain_for(const PointResult& r, std::size_t ue)
{
    EnergyChain ch;
    ch.states = r.model.cfg.energy_states;
    ch.capacity = r.model.cfg.battery_capacity;
    ch.triple = r.triples.at(ue);
    ch.consumed = r.consumed;
    ch.mean_delta = r.analytical.mean_energy.at(ue) - r.consumed;
    return ch;
}

inline void write_markov_csv(const std::string& path, const EnergyChain& chain, const std::vector<long long>& steps)
{
    CsvWriter w(path, {"n", "state", "probability"});
    std::vector<long long> sorted = steps;
    std::sort(sorted.begin(), sorted.end());
    auto dist = StateDistribution::uniform(chain.states);
    for (long long n : sorted) {
        dist = n_step_distribution(chain, dist, n - dist.step);
        for (std::size_t j = 0; j < chain.states; ++j)
            w.row(n, j + 1, dist.pi[j]);
    }
}

inline std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void write_manifest(const std::string& path, const PointResult& r, const ExperimentSpec& spec,
                           const std::string& note)
{
    nlohmann::json j;
    j["seed"] = r.model.cfg.seed;
    j["master_seed"] = spec.base.seed;
    j["topology_index"] = r.topology_index;
    j["config_hash"] = hex64(config_hash(r.model.cfg));
    j["num_aps"] = r.model.cfg.num_aps;
    j["antennas"] = r.model.cfg.antennas;
    j["ap_layout"] = r.model.topology.layout == ApLayout::grid ? "grid" : "random";
    j["intervals"] = r.run.intervals;
    j["variance_expansion"] = to_string(spec.expansion);
    j["median_ue"] = r.median_ue;
    j["consumed_energy_J"] = r.consumed;
    j["wall_time_s"] = r.wall_seconds;
    j["warnings"] = r.warnings;
    if (!note.empty())
        j["note"] = note;
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(1) << '\n';
}

inline void write_point_outputs(const std::filesystem::path& dir, const PointResult& r, const ExperimentSpec& spec,
                                const std::string& note)
{
    std::filesystem::create_directories(dir);
    write_samples_csv((dir / "samples.csv").string(), r.run);
    write_statistics_csv((dir / "statistics.csv").string(), r);
    const std::size_t m = r.median_ue;
    if (r.run.intervals > 0) {
        write_cdf_csv((dir / "cdf.csv").string(), r.run.column(r.run.energy, m), r.analytical.mean_energy[m],
                      r.analytical.var_energy[m]);
        write_markov_csv((dir / "markov_evolution.csv").string(), chain_for(r, m), spec.markov_steps);
    }
    write_transitions_csv((dir / "transitions.csv").string(), r.model.cfg.num_aps, r.triples);
    save_model((dir / "topology.json").string(), r.model.topology, r.model.large_scale);
    write_manifest((dir / "manifest.json").string(), r, spec, note);
}

struct SweepRow {
    std::size_t num_aps = 0;
    std::size_t antennas = 0;
    std::size_t topology = 0;
    std::size_t median_ue = 0;
    double mean_energy_empirical = 0.0;
    double mean_energy_analytical = 0.0;
    double pr_loss_empirical = 0.0;
    double pr_loss_analytical = 0.0;
    double ks = 0.0;
    TransitionTriple triple;
};

inline SweepRow summarize(const PointResult& r)
{
    SweepRow s;
    s.num_aps = r.model.cfg.num_aps;
    s.antennas = r.model.cfg.antennas;
    s.topology = r.topology_index;
    s.median_ue = r.median_ue;
    if (r.run.intervals > 0) {
        s.mean_energy_empirical = r.empirical_energy[r.median_ue].mean;
        s.mean_energy_analytical = r.analytical.mean_energy[r.median_ue];
        s.triple = r.triples[r.median_ue];
    }
    s.pr_loss_empirical = r.pr_loss_empirical;
    s.pr_loss_analytical = r.pr_loss_analytical;
    s.ks = r.ks;
    return s;
}

/// Per-topology rows followed by one pooled row per L ("pooled" averages the
/// median-UE quantities over topologies).
inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows)
{
    CsvWriter w(path, {"L", "N", "topology", "median_ue", "mean_E_empirical", "mean_E_analytical",
                       "pr_loss_empirical", "pr_loss_analytical", "ks_distance", "p_down", "p_stay", "p_up"});
    for (const auto& s : rows)
        w.row(s.num_aps, s.antennas, s.topology, s.median_ue, s.mean_energy_empirical, s.mean_energy_analytical,
              s.pr_loss_empirical, s.pr_loss_analytical, s.ks, s.triple.down, s.triple.stay, s.triple.up);

    std::map<std::size_t, std::vector<const SweepRow*>> by_l;
    std::vector<std::size_t> order;
    for (const auto& s : rows) {
        if (!by_l.count(s.num_aps))
            order.push_back(s.num_aps);
        by_l[s.num_aps].push_back(&s);
    }
    for (std::size_t L : order) {
        const auto& g = by_l[L];
        if (g.size() < 2)
            continue;
        SweepRow p;
        for (const auto* s : g) {
            p.mean_energy_empirical += s->mean_energy_empirical / static_cast<double>(g.size());
            p.mean_energy_analytical += s->mean_energy_analytical / static_cast<double>(g.size());
            p.pr_loss_empirical += s->pr_loss_empirical / static_cast<double>(g.size());
            p.pr_loss_analytical += s->pr_loss_analytical / static_cast<double>(g.size());
        }
        w.row(L, g.front()->antennas, "pooled", "", p.mean_energy_empirical, p.mean_energy_analytical,
              p.pr_loss_empirical, p.pr_loss_analytical, "", "", "", "");
    }
}

// ---------------------------------------------------------------------------
// Oracle suite

struct SmallInstance {
    SystemConfig cfg;
    LargeScaleModel large_scale;
    PowerControl power;
};

/// Random instance with L <= 3, N <= 4, K <= 4, a random pilot reuse pattern
/// and random Rician factors (some pure Rayleigh). Units are arbitrary; only
/// ratios matter to the moment checks.
inline SmallInstance random_small_instance(std::uint64_t seed, std::size_t index)
{
    RandomStream rng(seed, Domain::instance, index);
    SmallInstance s;
    auto& c = s.cfg;
    c.num_aps = 1 + rng.index(3);
    c.num_ues = 1 + rng.index(4);
    c.antennas = 1 + rng.index(4);
    c.tau_p = 1 + rng.index(c.num_ues);
    c.pilot_policy = rng.index(2) ? PilotPolicy::random : PilotPolicy::round_robin;
    c.pilot_power = std::pow(10.0, rng.uniform(-1.0, 1.0));
    c.noise_power = 1.0;
    c.total_power = static_cast<double>(c.num_aps);
    c.seed = derive_seed(seed, Domain::instance, index);

    const std::size_t K = c.num_ues, L = c.num_aps;
    auto& ls = s.large_scale;
    ls.antennas = c.antennas;
    ls.pilots = assign_pilots(K, c.tau_p, c.pilot_policy, rng);
    ls.zeta = Grid<double>(K, L);
    ls.k_factor = Grid<double>(K, L);
    ls.phi = Grid<double>(K, L);
    const bool rayleigh = rng.index(5) == 0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            ls.zeta(k, l) = std::pow(10.0, rng.uniform(-1.0, 1.0));
            ls.k_factor(k, l) = rayleigh ? 0.0 : std::pow(10.0, rng.uniform(-1.0, 1.0));
            ls.phi(k, l) = rng.uniform(-std::numbers::pi, std::numbers::pi);
        }
    derive_estimation_coefficients(ls, c);
    s.power = equal_power_control(c);
    return s;
}

struct ValidationRow {
    std::string check;
    std::string instance;
    double analytical = 0.0;
    double oracle = 0.0;
    double standard_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

struct ValidationOptions {
    std::size_t instances = 10;
    std::size_t draws = 100000;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    /// Negative control: scale one variance term ("coherent" or "noncoherent")
    /// before comparing, to show that the suite catches a wrong term.
    std::optional<std::string> corrupt_term;
    double corrupt_factor = 1.5;
};

/// Mean (3 SE) and variance (max(5 %, 3 SE)) of I_k for every UE of every
/// random instance, against the sampling oracle.
inline std::vector<ValidationRow> validate_instances(const ValidationOptions& opt,
                                                     const std::function<void(std::size_t)>& progress = {})
{
    if (opt.corrupt_term && *opt.corrupt_term != "coherent" && *opt.corrupt_term != "noncoherent")
        throw std::invalid_argument("unknown variance term '" + *opt.corrupt_term + "' (coherent | noncoherent)");
    std::vector<ValidationRow> rows;
    for (std::size_t n = 0; n < opt.instances; ++n) {
        const auto inst = random_small_instance(opt.seed, n);
        const auto& ls = inst.large_scale;
        const auto mean = mean_rf_power(ls, inst.power);
        auto terms = rf_power_variance_terms(ls, inst.power);
        const auto oracle = rf_power_oracle(inst.cfg, ls, inst.power, opt.draws, inst.cfg.seed, opt.workers);

        char label[96];
        std::snprintf(label, sizeof label, "#%zu L=%zu N=%zu K=%zu P=%zu", n, ls.aps(), ls.antennas, ls.ues(),
                      ls.pilots.num_pilots);
        for (std::size_t k = 0; k < ls.ues(); ++k) {
            ValidationRow m;
            m.check = "mean_rf ue" + std::to_string(k);
            m.instance = label;
            m.analytical = mean[k];
            m.oracle = oracle[k].mean;
            m.standard_error = oracle[k].standard_error_of_mean;
            m.tolerance = 3.0 * m.standard_error;
            m.pass = std::abs(m.analytical - m.oracle) <= m.tolerance;
            rows.push_back(m);

            auto& t = terms[k];
            std::string note = "coherent=" + format_number(t.coherent) + " noncoherent=" + format_number(t.noncoherent);
            if (opt.corrupt_term) {
                (*opt.corrupt_term == "coherent" ? t.coherent : t.noncoherent) *= opt.corrupt_factor;
                note = "corrupted term: " + *opt.corrupt_term + "; " + note;
            }
            ValidationRow v;
            v.check = "var_rf ue" + std::to_string(k);
            v.instance = label;
            v.analytical = t.total();
            v.oracle = oracle[k].variance;
            v.standard_error = oracle[k].standard_error_of_variance;
            v.tolerance = std::max(0.05 * std::abs(v.analytical), 3.0 * v.standard_error);
            v.pass = std::abs(v.analytical - v.oracle) <= v.tolerance;
            v.note = note;
            rows.push_back(v);
        }
        if (progress)
            progress(n);
    }
    return rows;
}

inline void write_validation_csv(const std::string& path, const std::vector<ValidationRow>& rows)
{
    CsvWriter w(path, {"check", "instance", "analytical", "oracle", "standard_error", "tolerance", "pass", "note"});
    for (const auto& r : rows)
        w.row(r.check, r.instance, r.analytical, r.oracle, r.standard_error, r.tolerance, r.pass ? "pass" : "FAIL",
              r.note);
}

} // namespace cfeh

#endif
