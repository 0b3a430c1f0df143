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

#include "bdris/experiments.hpp"
#include "bdris/self_check.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace bdris
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_usage = 1,
    exit_infeasible = 2
};

namespace detail
{

struct CommonArgs
{
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string schemes;
};

inline void add_common(CLI::App *sub, CommonArgs &a)
{
    sub->add_option("--config", a.config, "Scenario JSON file");
    sub->add_option("--preset", a.preset, "Built-in scenario: table2, desk, desk3, tiny");
    sub->add_option("--seed", a.seed, "Channel seed (sweep: base seed)");
    sub->add_option("--out", a.out, "Output file");
    sub->add_option("--scheme", a.schemes, "Scheme id or comma-separated list");
}

inline ScenarioConfig scenario_from(const CommonArgs &a)
{
    if (!a.config.empty() && !a.preset.empty())
        throw ScenarioError(ScenarioError::Kind::validation, "--config", "--config and --preset are mutually exclusive");
    if (!a.preset.empty())
    {
        try
        {
            return preset_scenario(a.preset);
        }
        catch (const std::invalid_argument &e)
        {
            throw ScenarioError(ScenarioError::Kind::validation, "--preset", std::string("--preset: ") + e.what());
        }
    }
    if (a.config.empty()) throw ScenarioError(ScenarioError::Kind::validation, "--config", "--config is required");
    return load_scenario_file(a.config);
}

inline std::vector<SchemeId> schemes_from(const std::string &text)
{
    std::vector<SchemeId> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        try
        {
            out.push_back(scheme_from_string(item));
        }
        catch (const std::invalid_argument &e)
        {
            throw ScenarioError(ScenarioError::Kind::validation, "--scheme", std::string("--scheme: ") + e.what());
        }
    }
    return out;
}

inline std::ostream &open_out(const std::string &path, std::ofstream &file, std::ostream &fallback)
{
    if (path.empty()) return fallback;
    file.open(path, std::ios::binary);
    if (!file) throw ScenarioError(ScenarioError::Kind::validation, "--out", "--out: cannot open '" + path + "'");
    return file;
}

} // namespace detail

/// `bdris solve|sweep|check`. Returns 0 on success, 1 on usage or validation
/// errors, 2 when no assignment admits a feasible point.
inline int cli_main(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
    CLI::App app{"Sum-rate optimization for BD-RIS assisted multi-UAV RSMA downlinks", "bdris"};
    app.require_subcommand(1);

    detail::CommonArgs solve_args, sweep_args;
    bool timing = false;
    std::string trace_path;
    auto *solve = app.add_subcommand("solve", "Solve one scenario and write the GBD trace");
    detail::add_common(solve, solve_args);
    solve->add_flag("--timing", timing, "Record wall-clock times in the trace");

    std::string axis = "uav_power", grid;
    int trials = 1, jobs = 1;
    auto *sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over UAV power or surface size");
    detail::add_common(sweep, sweep_args);
    sweep->add_option("--axis", axis, "uav_power (dBm grid) or ris_cells");
    sweep->add_option("--grid", grid, "Comma-separated grid values");
    sweep->add_option("--trials", trials, "Channel draws per grid point");
    sweep->add_option("--jobs", jobs, "Worker threads");
    sweep->add_flag("--timing", timing, "Record wall-clock times");

    std::uint64_t check_seed = 1;
    auto *check = app.add_subcommand("check", "Run invariant checks on small instances");
    check->add_option("--seed", check_seed, "Seed for the generated instances");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &)
    {
        out << app.help();
        return exit_ok;
    }
    catch (const CLI::CallForAllHelp &)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try
    {
        if (*check)
        {
            bool all = true;
            for (const auto &r : run_self_check(check_seed))
            {
                all = all && r.pass;
                out << (r.pass ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : " (" + r.detail + ")") << '\n';
            }
            return all ? exit_ok : exit_usage;
        }

        if (*solve)
        {
            const ScenarioConfig c = detail::scenario_from(solve_args);
            const auto ids = detail::schemes_from(solve_args.schemes.empty() ? "rsma_bdris" : solve_args.schemes);
            if (ids.size() != 1) throw ScenarioError(ScenarioError::Kind::validation, "--scheme", "--scheme: solve takes one scheme");
            const std::uint64_t seed = solve_args.seed.value_or(c.rng_seed);
            const ChannelRealization ch = generate_channels(c, seed);
            const Solution sol = run_scheme(ids[0], ch, c);

            char buf[256];
            out << "scheme " << to_string(ids[0]) << '\n' << "seed " << seed << '\n';
            out << "assignment " << sol.u.to_string() << '\n';
            std::snprintf(buf, sizeof buf, "value_bps %.17g\nlb %.17g\nub %.17g\niterations %d\n", sol.value, sol.lb,
                          sol.ub, sol.iterations);
            out << buf;
            write_rate_report_csv(out, overall_rate(sol.u, sol.point.phases, sol.point.precoders, sol.point.shares, ch, c));

            std::ofstream file;
            std::ostringstream sink;
            std::ostream &os = detail::open_out(solve_args.out.empty() ? "" : solve_args.out, file, sink);
            write_gbd_trace_csv(os, sol.trace, timing);
            return exit_ok;
        }

        const ScenarioConfig c = detail::scenario_from(sweep_args);
        if (grid.empty()) throw ScenarioError(ScenarioError::Kind::validation, "--grid", "--grid is required");
        SweepSpec spec;
        try
        {
            spec.axis = sweep_axis_from_string(axis);
        }
        catch (const std::invalid_argument &e)
        {
            throw ScenarioError(ScenarioError::Kind::validation, "--axis", std::string("--axis: ") + e.what());
        }
        spec.grid = parse_grid(grid);
        if (!sweep_args.schemes.empty()) spec.schemes = detail::schemes_from(sweep_args.schemes);
        spec.trials = trials;
        spec.jobs = jobs;
        spec.timing = timing;
        spec.base_seed = sweep_args.seed.value_or(c.rng_seed);
        const SweepTable table = run_sweep(spec, c);
        std::ofstream file;
        write_sweep_csv(detail::open_out(sweep_args.out, file, out), table);
        return exit_ok;
    }
    catch (const ScenarioError &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const GlobalInfeasibility &e)
    {
        err << "infeasible: " << e.what() << '\n';
        return exit_infeasible;
    }
}

} // namespace bdris
