// SPDX-License-Identifier: Apache-2.0
//
// bdris: sum-rate optimization for BD-RIS assisted multi-UAV RSMA downlinks
// Copyright (C) 2026 The bdris authors
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

#pragma once

#include "bdris/gbd.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bdris
{

enum class SchemeId
{
    rsma_bdris,
    rsma_ris,
    noma_ris,
    noma_bdris,
    rsma_noris,
    sdma
};

inline constexpr std::array<SchemeId, 6> all_schemes{SchemeId::rsma_bdris, SchemeId::rsma_ris,   SchemeId::noma_ris,
                                                     SchemeId::noma_bdris, SchemeId::rsma_noris, SchemeId::sdma};

inline std::string_view to_string(SchemeId id)
{
    switch (id)
    {
    case SchemeId::rsma_bdris: return "rsma_bdris";
    case SchemeId::rsma_ris: return "rsma_ris";
    case SchemeId::noma_ris: return "noma_ris";
    case SchemeId::noma_bdris: return "noma_bdris";
    case SchemeId::rsma_noris: return "rsma_noris";
    case SchemeId::sdma: return "sdma";
    }
    return "?";
}

inline SchemeId scheme_from_string(std::string_view s)
{
    for (SchemeId id : all_schemes)
        if (to_string(id) == s) return id;
    throw std::invalid_argument("unknown scheme '" + std::string(s) + "'");
}

/// sdma keeps the scenario's surface mode.
inline SchemeSettings scheme_settings(SchemeId id, const ScenarioConfig &c)
{
    switch (id)
    {
    case SchemeId::rsma_bdris: return {RisMode::block_unitary, StreamMode::rsma, true};
    case SchemeId::rsma_ris: return {RisMode::diagonal_circle, StreamMode::rsma, true};
    case SchemeId::noma_ris: return {RisMode::diagonal_circle, StreamMode::noma, true};
    case SchemeId::noma_bdris: return {RisMode::block_unitary, StreamMode::noma, true};
    case SchemeId::rsma_noris: return {RisMode::none, StreamMode::rsma, false};
    case SchemeId::sdma: return {c.ris_mode, StreamMode::sdma, c.ris_mode != RisMode::none};
    }
    throw std::invalid_argument("scheme");
}

/// Runs GBD for a scheme. `warm` seeds the first primal with another run's
/// assignment and continuous point.
inline Solution run_scheme(SchemeId id, const ChannelRealization &ch, const ScenarioConfig &c,
                           const Solution *warm = nullptr)
{
    GbdOptions opts;
    opts.scheme = scheme_settings(id, c);
    if (warm)
    {
        SolverPoint start = warm->point;
        start.phases.mode = opts.scheme.ris_mode == RisMode::none ? start.phases.mode : opts.scheme.ris_mode;
        Assignment u = warm->u;
        if (opts.scheme.ris_mode == RisMode::none) std::fill(u.u.begin(), u.u.end(), 0);
        opts.warm_start = std::pair{u, start};
    }
    return gbd_solve(ch, c, opts);
}

} // namespace bdris
