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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "oracles.hpp"

#include "bdris/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace bdris;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

bool no_worse(double a, double b) { return a >= b - 1e-9 * std::max(1.0, std::abs(b)); }

CMat random_block(std::mt19937_64 &rng, int n, RisMode mode)
{
    return mode == RisMode::block_unitary ? oracle::random_unitary(rng, n) : oracle::random_diagonal(rng, n);
}

// Two groups, group 0 on cluster 2 with a random block, unit-variance channels.
struct PhaseCase
{
    ScenarioConfig c;
    ChannelRealization ch;
    Assignment a{{2, 0}};
    PhaseConfig p;
    PrecoderSet t;
};

PhaseCase phase_case(std::mt19937_64 &rng, RisMode mode, int cluster_size)
{
    PhaseCase pc;
    pc.c = desk_scenario(2, 2, 2 * cluster_size, 2, 2);
    pc.c.noise_power_dbm = 0.0;
    pc.ch = oracle::random_channels(rng, pc.c);
    pc.p = initial_phases(pc.a, pc.c, mode);
    pc.p.blocks[0] = random_block(rng, cluster_size, mode);
    for (int g = 0; g < 2; ++g) pc.t.T.push_back(oracle::random_precoder(rng, 2, 3, pc.c.max_uav_power_w));
    return pc;
}

Outcome gradient_correctness()
{
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (RisMode mode : {RisMode::block_unitary, RisMode::diagonal_circle})
        for (int i = 0; i < 20; ++i)
        {
            const PhaseCase pc = phase_case(rng, mode, i % 2 ? 4 : 2);
            const CMat grad = euclidean_grad_phase(0, pc.a, pc.p, pc.t, pc.ch, pc.c);
            auto f = [&](const CMat &phi) { return oracle::group_rate_terms(pc.c, pc.a.u, 0, phi, pc.t.T[0], pc.ch); };
            const bool diag = mode == RisMode::diagonal_circle;
            const CMat fd = oracle::fd_wirtinger(f, pc.p.blocks[0], 1e-6, diag);
            worst = std::max(worst, oracle::max_rel_entry_error(diag ? CMat(grad.diagonal().asDiagonal()) : grad, fd));
        }
    return {worst <= 1e-5, "max relative entry error " + sci(worst)};
}

Outcome manifold_feasibility()
{
    std::mt19937_64 rng(102);
    double worst_u = 0.0, worst_c = 0.0;
    for (RisMode mode : {RisMode::block_unitary, RisMode::diagonal_circle})
        for (int i = 0; i < 50; ++i)
        {
            const PhaseCase pc = phase_case(rng, mode, 2 + 2 * (i % 2));
            const GroupChannel v = cluster_view(pc.ch, 0, 2);
            const GroupPhaseObjective f(v, pc.t.T[0], pc.c.noise_power_w());
            RcgOptions o;
            o.on_iterate = [&](const ManifoldPoint &x, double) {
                if (mode == RisMode::block_unitary)
                    worst_u = std::max(worst_u, oracle::unitarity_residual(x.value));
                else
                    worst_c = std::max(worst_c, feasibility_residual(x));
            };
            rcg_maximize(f, ManifoldPoint::from_block(pc.p.blocks[0], manifold_for(mode)), o);
        }
    return {worst_u <= 1e-8 && worst_c <= 1e-10, "unitarity " + sci(worst_u) + ", modulus " + sci(worst_c)};
}

Outcome monotone_ascent()
{
    std::mt19937_64 rng(103);
    double worst_rcg = 0.0, worst_wmmse = 0.0;
    for (int i = 0; i < 50; ++i)
    {
        const RisMode mode = i % 2 ? RisMode::diagonal_circle : RisMode::block_unitary;
        const PhaseCase pc = phase_case(rng, mode, 4);
        const GroupChannel v = cluster_view(pc.ch, 0, 2);
        const GroupPhaseObjective f(v, pc.t.T[0], pc.c.noise_power_w());
        const auto r = rcg_maximize(f, ManifoldPoint::from_block(pc.p.blocks[0], manifold_for(mode)));
        for (std::size_t s = 1; s < r.trace.size(); ++s)
            worst_rcg = std::max(worst_rcg, r.trace[s - 1].objective - r.trace[s].objective);
    }
    const StreamMode modes[] = {StreamMode::rsma, StreamMode::noma, StreamMode::sdma};
    for (int i = 0; i < 50; ++i)
    {
        const int K = 2 + i % 2;
        std::vector<CRow> h;
        for (int k = 0; k < K; ++k)
        {
            CRow r(3);
            for (int n = 0; n < 3; ++n) r(n) = oracle::cn(rng);
            h.push_back(r);
        }
        WmmseOptions o;
        o.mode = modes[i % 3];
        const auto r = wmmse_group(h, oracle::random_precoder(rng, 3, K + 1, 1.0), 1.0, 0.1, o);
        for (std::size_t s = 1; s < r.trace.size(); ++s)
            worst_wmmse = std::max(worst_wmmse, r.trace[s - 1].wsr - r.trace[s].wsr);
    }
    return {worst_rcg <= 1e-10 && worst_wmmse <= 1e-10,
            "largest step decrease rcg " + sci(worst_rcg) + ", wmmse " + sci(worst_wmmse)};
}

Outcome single_cell_closed_form()
{
    std::mt19937_64 rng(104);
    ScenarioConfig c = desk_scenario(1, 1, 1, 1, 1);
    c.noise_power_dbm = 0.0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i)
    {
        const auto ch = oracle::random_channels(rng, c);
        const CMat T = oracle::random_precoder(rng, 1, 2, 1.0);
        const GroupChannel v = cluster_view(ch, 0, 1);
        const GroupPhaseObjective f(v, T, c.noise_power_w());
        const auto r = rcg_maximize(f, ManifoldPoint::from_block(oracle::random_diagonal(rng, 1), Manifold::diagonal_circle));
        const cplx h = ch.uav_to_user[0][0](0);
        const cplx cascade = ch.ris_to_user[0][0](0) * ch.uav_to_ris[0](0, 0) * T(0, 1);
        const double want = std::arg(h * T(0, 1)) - std::arg(cascade);
        const double err = std::remainder(std::arg(r.point.value(0)) - want, 2.0 * std::numbers::pi);
        worst = std::max(worst, std::abs(err));
    }
    return {worst <= 1e-6, "max phase error " + sci(worst) + " rad"};
}

Outcome bound_sandwich()
{
    const ScenarioConfig c = preset_scenario("desk3");
    bool ok = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        const auto sol = gbd_solve(generate_channels(c, 500 + seed), c, GbdOptions{settings_for(c), {}});
        for (std::size_t i = 0; i < sol.trace.size(); ++i)
        {
            const auto &t = sol.trace[i];
            if (i && t.lb < sol.trace[i - 1].lb) ok = false;
            if (std::isfinite(t.lb) && std::isfinite(t.ub))
            {
                const double slack = t.lb - t.ub;
                worst = std::max(worst, slack / std::max(1.0, std::abs(t.ub)));
                if (t.lb > t.ub + 1e-6 * std::max(1.0, std::abs(t.ub))) ok = false;
            }
        }
    }
    return {ok, "max (LB-UB)/max(1,|UB|) " + sci(worst)};
}

Outcome exhaustive_oracle()
{
    const ScenarioConfig c = preset_scenario("desk3");
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto ch = generate_channels(c, 600 + seed);
        double best = -std::numeric_limits<double>::infinity();
        for (const auto &a : enumerate_assignments(c.num_groups, c.num_clusters))
        {
            const auto out = solve_primal(a, ch, c, settings_for(c));
            if (const auto *f = std::get_if<PrimalFeasible>(&out)) best = std::max(best, f->value);
        }
        const auto sol = gbd_solve(ch, c, GbdOptions{settings_for(c), {}});
        worst = std::max(worst, std::abs(sol.value - best) / std::abs(best));
    }
    return {worst <= 1e-3, "max relative gap to exhaustive " + sci(worst)};
}

Outcome feasible_set_nesting()
{
    const ScenarioConfig c = preset_scenario("desk");
    bool ok = true;
    double worst_rn = std::numeric_limits<double>::infinity(), worst_bd = worst_rn;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto ch = generate_channels(c, 700 + seed);
        const auto noma = run_scheme(SchemeId::noma_ris, ch, c);
        const auto rsma = run_scheme(SchemeId::rsma_ris, ch, c, &noma);
        const auto bd = run_scheme(SchemeId::rsma_bdris, ch, c, &rsma);
        ok = ok && no_worse(rsma.value, noma.value) && no_worse(bd.value, rsma.value);
        worst_rn = std::min(worst_rn, (rsma.value - noma.value) / noma.value);
        worst_bd = std::min(worst_bd, (bd.value - rsma.value) / rsma.value);
    }
    return {ok, "min relative margin rsma-noma " + sci(worst_rn) + ", bdris-diagonal " + sci(worst_bd)};
}

double mean_for(const SweepTable &t, double x, SchemeId id)
{
    for (const auto &a : t.aggregates)
        if (a.axis_value == x && a.scheme == id) return a.mean.value_bps;
    return std::numeric_limits<double>::quiet_NaN();
}

Outcome trend_reproduction()
{
    const ScenarioConfig base = preset_scenario("desk");
    std::ostringstream detail;
    bool ok = true;

    SweepSpec cells;
    cells.axis = SweepAxis::ris_cells;
    cells.grid = {16, 32, 64};
    cells.schemes = {SchemeId::rsma_bdris};
    cells.trials = 10;
    cells.base_seed = 800;
    const auto tc = run_sweep(cells, base);
    detail << "L means";
    for (std::size_t i = 0; i < cells.grid.size(); ++i)
    {
        const double m = mean_for(tc, cells.grid[i], SchemeId::rsma_bdris);
        detail << ' ' << sci(m);
        if (i && !(m > mean_for(tc, cells.grid[i - 1], SchemeId::rsma_bdris))) ok = false;
    }

    SweepSpec power;
    power.axis = SweepAxis::uav_power;
    power.grid = {0, 5, 10};
    power.schemes = {SchemeId::rsma_bdris, SchemeId::rsma_ris, SchemeId::noma_ris, SchemeId::rsma_noris};
    power.trials = 10;
    power.base_seed = 900;
    const auto tp = run_sweep(power, base);
    for (double x : power.grid)
    {
        std::vector<double> m;
        for (SchemeId id : power.schemes) m.push_back(mean_for(tp, x, id));
        for (std::size_t i = 1; i < m.size(); ++i)
            if (!(m[i - 1] >= m[i])) ok = false;
        detail << "; " << x << " dBm";
        for (double v : m) detail << ' ' << sci(v);
    }
    return {ok, detail.str()};
}

Outcome rate_model_oracle()
{
    std::mt19937_64 rng(105);
    double worst = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (int i = 0; i < 100; ++i)
    {
        ScenarioConfig c = desk_scenario(3, 2, 8, 1 + i % 3, 2);
        c.users_per_group = {1 + i % 3, 2, 3};
        c.positions = {};
        c = default_layout(c);
        c.noise_power_dbm = 0.0;
        c.min_rate_bps = 1e5 * (i % 4);
        const auto ch = oracle::random_channels(rng, c);
        const auto all = enumerate_assignments(3, 2);
        const Assignment a = all[static_cast<std::size_t>(i) % all.size()];
        const RisMode mode = i % 2 ? RisMode::diagonal_circle : RisMode::block_unitary;
        PhaseConfig p = initial_phases(a, c, mode);
        PrecoderSet t;
        CommonRateAlloc r;
        std::vector<std::vector<double>> shares;
        std::uniform_real_distribution<double> ud(0.0, 0.5);
        for (int g = 0; g < 3; ++g)
        {
            if (a.assisted(g)) p.blocks[g] = random_block(rng, 4, mode);
            t.T.push_back(oracle::random_precoder(rng, c.num_antennas, c.users_in(g) + 1, ud(rng) * 2 * c.max_uav_power_w));
            RVec s(c.users_in(g));
            for (auto &x : s) x = ud(rng);
            r.r.push_back(s);
            shares.emplace_back(s.begin(), s.end());
        }
        const auto ev = oracle::evaluate(c, a.u, p.blocks, t.T, shares, ch);
        const auto rep = overall_rate(a, p, t, r, ch, c);
        worst = std::max(worst, std::abs(rep.overall_bps - ev.overall) / ev.overall);
        for (const auto &u : rep.users)
        {
            const auto &s = ev.sinr[u.group][u.user];
            worst = std::max(worst, std::abs(u.sinr_c - s.common) / std::max(s.common, 1e-300));
            worst = std::max(worst, std::abs(u.sinr_p - s.priv) / std::max(s.priv, 1e-300));
        }
        const RVec e = constraint_residuals(a, p, t, r, ch, c);
        for (std::size_t k = 0; k < ev.residuals.size(); ++k) worst = std::max(worst, rel(e(k), ev.residuals[k]));
    }
    return {worst <= 1e-12, "max relative deviation " + sci(worst)};
}

Outcome determinism()
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "bdris_acceptance";
    fs::create_directories(dir);
    const std::string cfg = (dir / "desk.json").string();
    std::ofstream(cfg) << serialize(preset_scenario("desk"));
    auto run = [&](const std::string &out) {
        const std::vector<std::string> args{"bdris", "sweep", "--config", cfg, "--axis", "uav_power", "--grid", "0,5",
                                            "--trials", "2", "--seed", "11", "--out", out};
        std::vector<const char *> argv;
        for (const auto &a : args) argv.push_back(a.c_str());
        std::ostringstream o, e;
        return cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
    };
    const std::string a = (dir / "sweep_a.csv").string(), b = (dir / "sweep_b.csv").string();
    if (run(a) != 0 || run(b) != 0) return {false, "sweep exited with an error"};
    auto slurp = [](const std::string &p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string x = slurp(a), y = slurp(b);
    return {!x.empty() && x == y, std::to_string(x.size()) + " bytes, " + (x == y ? "identical" : "different")};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradient_correctness},
        {"manifold feasibility", manifold_feasibility},
        {"monotone ascent", monotone_ascent},
        {"single-cell closed form", single_cell_closed_form},
        {"bound sandwich and LB monotonicity", bound_sandwich},
        {"exhaustive-assignment oracle", exhaustive_oracle},
        {"feasible-set nesting", feasible_set_nesting},
        {"trend reproduction", trend_reproduction},
        {"rate-model oracle equivalence", rate_model_oracle},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += o.pass ? 0 : 1;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.1f s", s);
        std::cout << (o.pass ? "PASS " : "FAIL ") << i + 1 << ' ' << criteria[i].first << " (" << o.detail << "; " << buf
                  << ")" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
