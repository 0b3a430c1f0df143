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

#include "bdris/baselines.hpp"

#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace bdris
{

struct CheckResult
{
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail
{

inline CMat random_unitary(std::mt19937_64 &rng, int n)
{
    std::normal_distribution<double> nd;
    CMat m(n, n);
    for (auto &x : m.reshaped()) x = cplx(nd(rng), nd(rng));
    return qr_unitary_factor(m);
}

inline CMat random_block(std::mt19937_64 &rng, int n, RisMode mode)
{
    if (mode != RisMode::diagonal_circle) return random_unitary(rng, n);
    std::uniform_real_distribution<double> ud(-std::numbers::pi, std::numbers::pi);
    CVec d(n);
    for (auto &x : d) x = std::polar(1.0, ud(rng));
    return d.asDiagonal();
}

inline CMat random_precoder(std::mt19937_64 &rng, int antennas, int users, double power)
{
    std::normal_distribution<double> nd;
    CMat t(antennas, users + 1);
    for (auto &x : t.reshaped()) x = cplx(nd(rng), nd(rng));
    return t * std::sqrt(power) / t.norm();
}

inline std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

} // namespace detail

/// Quick invariant checks on small generated instances.
inline std::vector<CheckResult> run_self_check(std::uint64_t seed = 1)
{
    std::vector<CheckResult> out;
    std::mt19937_64 rng(seed);
    ScenarioConfig c = preset_scenario("tiny");

    {
        // Unit-variance channels and noise keep the reflected term comparable to the direct one.
        ScenarioConfig u = c;
        u.noise_power_dbm = 0.0;
        u.max_uav_power_w = 1e-2;
        double worst = 0.0;
        for (RisMode mode : {RisMode::block_unitary, RisMode::diagonal_circle})
            for (int trial = 0; trial < 3; ++trial)
            {
                const auto ch = iid_channels(u, seed + static_cast<std::uint64_t>(trial));
                const Assignment a{{1, 2}};
                PhaseConfig p = initial_phases(a, u, mode);
                PrecoderSet t;
                for (int g = 0; g < u.num_groups; ++g)
                {
                    p.blocks[static_cast<std::size_t>(g)] = detail::random_block(rng, u.cluster_size(), mode);
                    t.T.push_back(detail::random_precoder(rng, u.num_antennas, u.users_in(g), u.max_uav_power_w));
                }
                const CMat grad = euclidean_grad_phase(0, a, p, t, ch, u);
                const GroupChannel gc = cluster_view(ch, 0, 1);
                const GroupPhaseObjective f(gc, t.T[0], u.noise_power_w(), {}, bandwidth_factor(u, a, 0));
                const double h = 1e-6;
                for (Eigen::Index i = 0; i < grad.rows(); ++i)
                    for (Eigen::Index j = 0; j < grad.cols(); ++j)
                    {
                        CMat e = CMat::Zero(grad.rows(), grad.cols());
                        e(i, j) = h;
                        const CMat &phi = p.blocks[0];
                        const double dre = (f.value(phi + e) - f.value(phi - e)) / (2 * h);
                        const double dim = (f.value(phi + cplx(0, 1) * e) - f.value(phi - cplx(0, 1) * e)) / (2 * h);
                        const cplx fd = 0.5 * cplx(dre, dim);
                        worst = std::max(worst, std::abs(fd - grad(i, j)) / std::max(grad.cwiseAbs().maxCoeff(), 1e-300));
                    }
            }
        out.push_back({"phase gradient vs finite differences", worst <= 1e-5, "max rel err " + detail::sci(worst)});
    }

    {
        double worst_u = 0.0, worst_c = 0.0;
        bool monotone = true;
        for (RisMode mode : {RisMode::block_unitary, RisMode::diagonal_circle})
        {
            const auto ch = generate_channels(c, seed);
            const GroupChannel gc = cluster_view(ch, 0, 1);
            const GroupPhaseObjective f(gc, detail::random_precoder(rng, c.num_antennas, c.users_in(0), c.max_uav_power_w),
                                        c.noise_power_w());
            RcgOptions o;
            double last = -std::numeric_limits<double>::infinity();
            o.on_iterate = [&](const ManifoldPoint &x, double v) {
                (mode == RisMode::block_unitary ? worst_u : worst_c) =
                    std::max(mode == RisMode::block_unitary ? worst_u : worst_c, feasibility_residual(x));
                monotone = monotone && v >= last - 1e-10;
                last = v;
            };
            rcg_maximize(f, ManifoldPoint::from_block(detail::random_block(rng, c.cluster_size(), mode), manifold_for(mode)),
                         o);
        }
        out.push_back({"manifold feasibility along rcg", worst_u <= 1e-8 && worst_c <= 1e-10,
                       "unitary " + detail::sci(worst_u) + ", circle " + detail::sci(worst_c)});
        out.push_back({"rcg ascent", monotone, ""});
    }

    {
        bool monotone = true;
        const auto ch = generate_channels(c, seed);
        for (int g = 0; g < c.num_groups; ++g)
        {
            const auto heff = effective_channels(group_channel(ch, g, 0), CMat());
            const auto r = wmmse_group(heff, detail::random_precoder(rng, c.num_antennas, c.users_in(g), c.max_uav_power_w),
                                       c.max_uav_power_w, c.noise_power_w(), WmmseOptions{});
            for (std::size_t i = 1; i < r.trace.size(); ++i) monotone = monotone && r.trace[i].wsr >= r.trace[i - 1].wsr - 1e-10;
        }
        out.push_back({"wmmse ascent", monotone, ""});
    }

    {
        bool ok = true;
        const ScenarioConfig d = preset_scenario("desk3");
        const auto sol = gbd_solve(generate_channels(d, seed), d);
        for (std::size_t i = 0; i < sol.trace.size(); ++i)
        {
            const auto &t = sol.trace[i];
            if (i > 0 && t.lb < sol.trace[i - 1].lb) ok = false;
            if (std::isfinite(t.lb) && std::isfinite(t.ub) && t.lb > t.ub + 1e-6 * std::max(1.0, std::abs(t.ub))) ok = false;
        }
        out.push_back({"gbd bounds", ok, std::to_string(sol.iterations) + " iterations"});
    }

    {
        const auto a = generate_channels(c, seed), b = generate_channels(c, seed);
        out.push_back({"channel determinism", a == b, ""});
    }
    return out;
}

} // namespace bdris
