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

#include <cfeh/experiment.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace cfeh;

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> intervals;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> topologies;
    std::string out = "out";
    std::string topology_file;
};

void add_common(CLI::App* app, CommonOptions& o)
{
    app->add_option("--config", o.config, "YAML experiment file (defaults apply when omitted)");
    app->add_option("--seed", o.seed, "Master RNG seed");
    app->add_option("--intervals", o.intervals, "Coherence intervals per sweep point");
    app->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--topologies", o.topologies, "Topology realizations per sweep point")->check(CLI::PositiveNumber);
    app->add_option("--out", o.out, "Output directory");
}

ExperimentSpec load_spec(const CommonOptions& o)
{
    ExperimentSpec spec = o.config.empty() ? parse_config_text("") : parse_config(o.config);
    if (o.seed)
        spec.base.seed = *o.seed;
    if (o.intervals)
        spec.intervals = *o.intervals;
    if (o.workers)
        spec.workers = *o.workers;
    if (o.topologies)
        spec.topologies = *o.topologies;
    return spec;
}

std::string point_dir_name(std::size_t L, std::size_t topology, std::size_t topologies)
{
    std::string s = "L" + std::to_string(L);
    if (topologies > 1)
        s += "/t" + std::to_string(topology);
    return s;
}

void print_row(const SweepRow& s)
{
    std::printf("L=%-3zu N=%-3zu topo=%-2zu ue=%-3zu E_emp=%.4e E_an=%.4e P(dE<=0) emp=%.3f an=%.3f KS=%.4f "
                "p_down=%.3e p_up=%.3e\n",
                s.num_aps, s.antennas, s.topology, s.median_ue, s.mean_energy_empirical, s.mean_energy_analytical,
                s.pr_loss_empirical, s.pr_loss_analytical, s.ks, s.triple.down, s.triple.up);
}

int cmd_points(const CommonOptions& o, bool write_points)
{
    auto spec = load_spec(o);
    const fs::path out(o.out);
    fs::create_directories(out);
    std::vector<SweepRow> rows;

    if (!o.topology_file.empty()) {
        auto saved = load_model(o.topology_file);
        PointModel model;
        model.cfg = spec.base;
        model.cfg.num_ues = saved.large_scale.ues();
        model.cfg.num_aps = saved.large_scale.aps();
        model.cfg.antennas = saved.large_scale.antennas;
        if (saved.large_scale.pilots.num_pilots != model.cfg.tau_p)
            throw std::invalid_argument("topology file uses " + std::to_string(saved.large_scale.pilots.num_pilots) +
                                        " pilots but tau_p = " + std::to_string(model.cfg.tau_p));
        model.cfg.validate();
        model.topology = std::move(saved.topology);
        model.large_scale = std::move(saved.large_scale);
        auto r = evaluate_point(std::move(model), spec.intervals, spec.workers, spec.expansion);
        if (write_points)
            write_point_outputs(out / "loaded", r, spec, "model loaded from " + o.topology_file);
        rows.push_back(summarize(r));
        print_row(rows.back());
        for (const auto& w : r.warnings)
            std::fprintf(stderr, "warning: %s\n", w.c_str());
    } else {
        for (const auto& plan : plan_points(spec)) {
            if (!plan.note.empty())
                std::fprintf(stderr, "note: %s\n", plan.note.c_str());
            for (std::size_t t = 0; t < spec.topologies; ++t) {
                auto r = evaluate_point(build_point(point_config(spec, plan, t)), spec.intervals, spec.workers,
                                        spec.expansion, t);
                if (write_points)
                    write_point_outputs(out / point_dir_name(plan.num_aps, t, spec.topologies), r, spec, plan.note);
                rows.push_back(summarize(r));
                print_row(rows.back());
                for (const auto& w : r.warnings)
                    std::fprintf(stderr, "warning: L=%zu: %s\n", plan.num_aps, w.c_str());
            }
        }
    }
    write_sweep_csv((out / "sweep.csv").string(), rows);
    return 0;
}

int cmd_validate(const CommonOptions& o, std::optional<std::size_t> instances, std::optional<std::size_t> draws,
                 const std::string& corrupt)
{
    auto spec = load_spec(o);
    ValidationOptions v;
    v.instances = instances.value_or(spec.validate_instances);
    v.draws = draws.value_or(spec.validate_draws);
    v.seed = spec.base.seed;
    v.workers = spec.workers;
    if (!corrupt.empty())
        v.corrupt_term = corrupt;
    const auto rows = validate_instances(v);

    std::size_t failed = 0;
    std::printf("%-14s %-26s %14s %14s %11s %11s  %s\n", "check", "instance", "analytical", "oracle", "SE",
                "tolerance", "result");
    for (const auto& r : rows) {
        std::printf("%-14s %-26s %14.6e %14.6e %11.3e %11.3e  %s%s%s\n", r.check.c_str(), r.instance.c_str(),
                    r.analytical, r.oracle, r.standard_error, r.tolerance, r.pass ? "pass" : "FAIL",
                    r.note.empty() ? "" : "  ", r.pass && !v.corrupt_term ? "" : r.note.c_str());
        failed += r.pass ? 0 : 1;
    }
    fs::create_directories(o.out);
    write_validation_csv((fs::path(o.out) / "validation.csv").string(), rows);
    std::printf("%zu of %zu checks passed\n", rows.size() - failed, rows.size());
    return failed == 0 ? 0 : 1;
}

int cmd_analyze(const CommonOptions& o, const std::string& dir)
{
    auto spec = load_spec(o);
    const auto& cfg = spec.base;
    const fs::path d(dir);
    const auto table = read_csv((d / "samples.csv").string());
    const auto c_ue = table.column("ue"), c_e = table.column("E_E");
    std::vector<std::vector<double>> energy;
    for (const auto& row : table.rows) {
        const auto k = static_cast<std::size_t>(std::stoull(row.at(c_ue)));
        if (energy.size() <= k)
            energy.resize(k + 1);
        energy[k].push_back(parse_number(row.at(c_e)));
    }
    if (energy.empty())
        throw std::invalid_argument("no samples in " + (d / "samples.csv").string());

    const double consumed = consumption_energy(cfg);
    std::vector<double> means;
    std::vector<TransitionTriple> triples;
    std::vector<McEstimate> est;
    for (const auto& e : energy) {
        est.push_back(estimate(e));
        means.push_back(est.back().mean);
        triples.push_back(
            triple_from_moments(est.back().mean, est.back().variance, consumed, cfg.energy_states, cfg.battery_capacity));
    }
    const std::size_t m = median_energy_user(means);
    const fs::path out = o.out == "out" ? d : fs::path(o.out);
    fs::create_directories(out);
    // The AP count is not stored with the samples; 0 marks "from samples".
    write_transitions_csv((out / "analysis_transitions.csv").string(), 0, triples);
    write_cdf_csv((out / "analysis_cdf.csv").string(), energy[m], est[m].mean, est[m].variance);
    EnergyChain chain;
    chain.states = cfg.energy_states;
    chain.capacity = cfg.battery_capacity;
    chain.triple = triples[m];
    chain.consumed = consumed;
    chain.mean_delta = est[m].mean - consumed;
    write_markov_csv((out / "analysis_markov_evolution.csv").string(), chain, spec.markov_steps);
    std::printf("median UE %zu: mean E %.6e J, var %.6e J^2, P(dE<=0) %.4f, p_down %.4e p_stay %.6f p_up %.4e\n", m,
                est[m].mean, est[m].variance, loss_probability(est[m].mean, est[m].variance, consumed),
                triples[m].down, triples[m].stay, triples[m].up);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cfeh: harvested-energy statistics and battery Markov analysis for cell-free massive MIMO"};
    app.require_subcommand(1);

    CommonOptions sim_opt, sweep_opt, val_opt, an_opt;
    auto* sim = app.add_subcommand("simulate", "Run every sweep point and write per-point CSV/JSON outputs");
    add_common(sim, sim_opt);
    sim->add_option("--topology-file", sim_opt.topology_file, "Reuse a saved topology.json instead of drawing one");

    auto* sweep = app.add_subcommand("sweep", "Run every sweep point and write only the summary sweep.csv");
    add_common(sweep, sweep_opt);

    auto* val = app.add_subcommand("validate", "Compare closed forms against the sampling oracle");
    add_common(val, val_opt);
    std::optional<std::size_t> instances, draws;
    std::string corrupt;
    val->add_option("--instances", instances, "Random small instances");
    val->add_option("--draws", draws, "Oracle draws per instance");
    val->add_option("--corrupt-term", corrupt, "Negative control: scale one variance term (coherent | noncoherent)")
        ->check(CLI::IsMember({"coherent", "noncoherent"}));

    auto* an = app.add_subcommand("analyze", "Recompute Gamma/Markov layers from stored samples");
    add_common(an, an_opt);
    std::string dir;
    an->add_option("--dir", dir, "Directory holding samples.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim)
            return cmd_points(sim_opt, true);
        if (*sweep)
            return cmd_points(sweep_opt, false);
        if (*val)
            return cmd_validate(val_opt, instances, draws, corrupt);
        if (*an)
            return cmd_analyze(an_opt, dir);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
