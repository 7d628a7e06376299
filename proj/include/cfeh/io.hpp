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

#ifndef CFEH_IO_HPP
#define CFEH_IO_HPP

#include <cfeh/grid.hpp>
#include <cfeh/pilots.hpp>
#include <cfeh/topology.hpp>

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfeh {

/// Decimal scientific notation with 17 significant digits; parses back to the
/// same double.
inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline double parse_number(const std::string& s)
{
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || (errno == ERANGE && std::isinf(v)))
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

/// Minimal comma-separated writer. Cells are either integers/labels written
/// verbatim or doubles written with format_number().
class CsvWriter {
public:
    CsvWriter(const std::string& path, std::initializer_list<std::string> header) : out_(path)
    {
        if (!out_)
            throw std::runtime_error("cannot open '" + path + "' for writing");
        row_begin();
        for (const auto& h : header)
            cell(h);
        row_end();
    }

    CsvWriter& cell(const std::string& s)
    {
        if (!first_)
            out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }
    CsvWriter& cell(const char* s) { return cell(std::string(s)); }
    CsvWriter& cell(double v) { return cell(format_number(v)); }
    CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(long long v) { return cell(std::to_string(v)); }

    void row_begin() { first_ = true; }
    void row_end()
    {
        out_ << '\n';
        if (!out_)
            throw std::runtime_error("write failure");
    }

    template <typename... Cells>
    void row(const Cells&... cells)
    {
        row_begin();
        (cell(cells), ...);
        row_end();
    }

private:
    std::ofstream out_;
    bool first_ = true;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const
    {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name)
                return c;
        throw std::out_of_range("no column '" + name + "'");
    }
};

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ','))
            cells.push_back(c);
        if (first)
            t.header = std::move(cells);
        else
            t.rows.push_back(std::move(cells));
        first = false;
    }
    return t;
}

// JSON layout of a saved model (all K x L arrays row-major by UE):
//   { "format": "cfeh-model/1", "num_ues": K, "num_aps": L, "antennas": N,
//     "layout": "grid" | "random", "aps": [[x, y], ...], "ues": [[x, y], ...],
//     "distance": [...], "pilots": { "num_pilots": P, "pilot_of": [...] },
//     "zeta", "k_factor", "beta", "varsigma", "phi", "gamma", "upsilon", "c": [...] }
// Doubles are stored with round-trip precision, so a reload is bit-exact.

namespace detail {

inline nlohmann::json grid_to_json(const Grid<double>& g)
{
    return nlohmann::json(std::vector<double>(g.flat().begin(), g.flat().end()));
}

inline Grid<double> grid_from_json(const nlohmann::json& j, const char* key, std::size_t rows, std::size_t cols)
{
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != rows * cols)
        throw std::invalid_argument(std::string("model file: '") + key + "' has " + std::to_string(v.size()) +
                                    " entries, expected " + std::to_string(rows * cols));
    Grid<double> g(rows, cols);
    std::copy(v.begin(), v.end(), g.flat().begin());
    return g;
}

inline nlohmann::json points_to_json(const std::vector<Point>& pts)
{
    auto a = nlohmann::json::array();
    for (const auto& p : pts)
        a.push_back({p.x, p.y});
    return a;
}

inline std::vector<Point> points_from_json(const nlohmann::json& j)
{
    std::vector<Point> out;
    for (const auto& p : j)
        out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return out;
}

} // namespace detail

inline nlohmann::json model_to_json(const Topology& topo, const LargeScaleModel& ls)
{
    nlohmann::json j;
    j["format"] = "cfeh-model/1";
    j["num_ues"] = ls.ues();
    j["num_aps"] = ls.aps();
    j["antennas"] = ls.antennas;
    j["layout"] = topo.layout == ApLayout::grid ? "grid" : "random";
    j["aps"] = detail::points_to_json(topo.aps);
    j["ues"] = detail::points_to_json(topo.ues);
    j["distance"] = detail::grid_to_json(topo.distance);
    j["pilots"] = {{"num_pilots", ls.pilots.num_pilots}, {"pilot_of", ls.pilots.pilot_of}};
    j["zeta"] = detail::grid_to_json(ls.zeta);
    j["k_factor"] = detail::grid_to_json(ls.k_factor);
    j["beta"] = detail::grid_to_json(ls.beta);
    j["varsigma"] = detail::grid_to_json(ls.varsigma);
    j["phi"] = detail::grid_to_json(ls.phi);
    j["gamma"] = detail::grid_to_json(ls.gamma);
    j["upsilon"] = detail::grid_to_json(ls.upsilon);
    j["c"] = detail::grid_to_json(ls.c);
    return j;
}

struct SavedModel {
    Topology topology;
    LargeScaleModel large_scale;
};

inline SavedModel model_from_json(const nlohmann::json& j)
{
    if (j.value("format", "") != "cfeh-model/1")
        throw std::invalid_argument("model file: unknown or missing format tag");
    const auto K = j.at("num_ues").get<std::size_t>();
    const auto L = j.at("num_aps").get<std::size_t>();
    SavedModel m;
    auto& t = m.topology;
    t.layout = j.at("layout").get<std::string>() == "grid" ? ApLayout::grid : ApLayout::random;
    t.aps = detail::points_from_json(j.at("aps"));
    t.ues = detail::points_from_json(j.at("ues"));
    if (t.aps.size() != L || t.ues.size() != K)
        throw std::invalid_argument("model file: position lists do not match num_aps/num_ues");
    t.distance = detail::grid_from_json(j, "distance", K, L);

    auto& ls = m.large_scale;
    ls.antennas = j.at("antennas").get<std::size_t>();
    ls.pilots.num_pilots = j.at("pilots").at("num_pilots").get<std::size_t>();
    ls.pilots.pilot_of = j.at("pilots").at("pilot_of").get<std::vector<std::size_t>>();
    if (ls.pilots.pilot_of.size() != K)
        throw std::invalid_argument("model file: pilot list does not match num_ues");
    ls.zeta = detail::grid_from_json(j, "zeta", K, L);
    ls.k_factor = detail::grid_from_json(j, "k_factor", K, L);
    ls.beta = detail::grid_from_json(j, "beta", K, L);
    ls.varsigma = detail::grid_from_json(j, "varsigma", K, L);
    ls.phi = detail::grid_from_json(j, "phi", K, L);
    ls.gamma = detail::grid_from_json(j, "gamma", K, L);
    ls.upsilon = detail::grid_from_json(j, "upsilon", K, L);
    ls.c = detail::grid_from_json(j, "c", K, L);
    return m;
}

inline void save_model(const std::string& path, const Topology& topo, const LargeScaleModel& ls)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << model_to_json(topo, ls).dump(1) << '\n';
}

inline SavedModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    try {
        return model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("model file '" + path + "': " + e.what());
    }
}

} // namespace cfeh

#endif
