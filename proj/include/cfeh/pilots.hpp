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

#ifndef CFEH_PILOTS_HPP
#define CFEH_PILOTS_HPP

#include <cfeh/config.hpp>
#include <cfeh/rng.hpp>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cfeh {

/// Pilot index per UE (0-based) and the induced sharing sets.
struct PilotAssignment {
    std::size_t num_pilots = 0;
    std::vector<std::size_t> pilot_of;

    bool shares(std::size_t i, std::size_t k) const { return pilot_of.at(i) == pilot_of.at(k); }

    /// UEs on pilot `p`, ascending.
    std::vector<std::size_t> users_of(std::size_t p) const
    {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < pilot_of.size(); ++k)
            if (pilot_of[k] == p)
                out.push_back(k);
        return out;
    }

    /// The sharing set of UE k (includes k).
    std::vector<std::size_t> sharing_set(std::size_t k) const { return users_of(pilot_of.at(k)); }

    bool operator==(const PilotAssignment&) const = default;
};

inline PilotAssignment assign_pilots(std::size_t num_ues, std::size_t tau_p, PilotPolicy policy, RandomStream& rng)
{
    if (tau_p < 1)
        throw std::invalid_argument("assign_pilots: tau_p must be >= 1");
    PilotAssignment pa;
    pa.num_pilots = tau_p;
    pa.pilot_of.resize(num_ues);
    for (std::size_t k = 0; k < num_ues; ++k)
        pa.pilot_of[k] = policy == PilotPolicy::round_robin ? k % tau_p : rng.index(tau_p);
    return pa;
}

} // namespace cfeh

#endif
