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

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace bdris
{

enum class SweepAxis
{
    uav_power, // grid in dBm
    ris_cells  // grid of L values
};

inline std::string_view to_string(SweepAxis a) { return a == SweepAxis::uav_power ? "uav_power" : "ris_cells"; }

inline SweepAxis sweep_axis_from_string(std::string_view s)
{
    if (s == "uav_power") return SweepAxis::uav_power;
    if (s == "ris_cells") return SweepAxis::ris_cells;
    throw std::invalid_argument("unknown axis '" + std::string(s) + "'");
}

struct SweepSpec
{
    SweepAxis axis = SweepAxis::uav_power;
    std::vector<double> grid;
    std::vector<SchemeId> schemes{SchemeId::rsma_bdris, SchemeId::rsma_ris, SchemeId::noma_ris, SchemeId::rsma_noris};
    int trials = 1;
    std::uint64_t base_seed = 0;
    int jobs = 1;
    bool timing = false; // record wall_ms; off keeps the CSV byte-reproducible
};

struct SweepRow
{
    double axis_value = 0.0;
    SchemeId scheme = SchemeId::rsma_bdris;
    int trial = 0;
    double value_bps = 0.0;
    double lb = 0.0;
    double ub = 0.0;
    int iters = 0;
    double wall_ms = 0.0;
    bool failed = false;
};

struct SweepAggregate
{
    double axis_value = 0.0;
    SchemeId scheme = SchemeId::rsma_bdris;
    SweepRow mean, stderr_;
    int failures = 0;
};

struct SweepTable
{
    SweepAxis axis = SweepAxis::uav_power;
    std::vector<SchemeId> schemes;
    std::vector<SweepRow> rows; // sorted by (axis_value, scheme order, trial)
    std::vector<SweepAggregate> aggregates;
};

/// Scenario for one grid point; throws ScenarioError when the value does not fit.
inline ScenarioConfig config_at(const ScenarioConfig &base, SweepAxis axis, double v)
{
    ScenarioConfig c = base;
    if (axis == SweepAxis::uav_power)
        c.max_uav_power_w = dbm_to_watt(v);
    else
    {
        if (v != std::floor(v) || v < 1.0)
            throw ScenarioError(ScenarioError::Kind::validation, "grid", "ris_cells grid values must be positive integers");
        c.num_ris_cells = static_cast<int>(v);
    }
    validate(c);
    return c;
}

inline void validate(const SweepSpec &s, const ScenarioConfig &base)
{
    auto bad = [](const std::string &field, const std::string &msg) {
        throw ScenarioError(ScenarioError::Kind::validation, field, msg);
    };
    if (s.grid.empty()) bad("grid", "grid must not be empty");
    for (std::size_t i = 1; i < s.grid.size(); ++i)
        if (!(s.grid[i] > s.grid[i - 1])) bad("grid", "grid must be strictly increasing");
    if (s.trials < 1) bad("trials", "trials must be >= 1");
    if (s.schemes.empty()) bad("scheme", "at least one scheme is required");
    if (s.jobs < 1) bad("jobs", "jobs must be >= 1");
    for (double v : s.grid) (void)config_at(base, s.axis, v);
}

namespace detail
{

/// Scheme whose solution seeds a warm-started rerun (feasible-set inclusion).
inline std::optional<SchemeId> nested_under(SchemeId id)
{
    switch (id)
    {
    case SchemeId::rsma_ris: return SchemeId::noma_ris;
    case SchemeId::rsma_bdris: return SchemeId::rsma_ris;
    case SchemeId::noma_bdris: return SchemeId::noma_ris;
    default: return std::nullopt;
    }
}

/// Runs a cell's schemes so that a scheme's nested baseline is solved first;
/// the reported solution is the better of a cold run and a run warm-started
/// from the baseline's solution. Baselines not requested are solved but not reported.
inline std::map<SchemeId, std::optional<Solution>> solve_cell(const std::vector<SchemeId> &wanted,
                                                              const ChannelRealization &ch, const ScenarioConfig &c)
{
    std::map<SchemeId, std::optional<Solution>> done;
    auto solve = [&](auto &&self, SchemeId id) -> const std::optional<Solution> & {
        if (auto it = done.find(id); it != done.end()) return it->second;
        std::optional<Solution> base;
        if (auto parent = nested_under(id)) base = self(self, *parent);
        std::optional<Solution> best;
        try
        {
            best = run_scheme(id, ch, c);
        }
        catch (const std::exception &)
        {
        }
        if (base)
        {
            try
            {
                Solution warm = run_scheme(id, ch, c, &*base);
                if (!best || warm.value > best->value) best = std::move(warm);
            }
            catch (const std::exception &)
            {
            }
        }
        return done[id] = std::move(best);
    };
    for (SchemeId id : wanted) solve(solve, id);
    return done;
}

inline double mean_of(const std::vector<double> &v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample standard deviation over sqrt(n); 0 for a single value.
inline double stderr_of(const std::vector<double> &v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

} // namespace detail

/// Aggregates over the non-failed raw rows of each (axis_value, scheme) block.
inline std::vector<SweepAggregate> aggregate(const std::vector<SweepRow> &rows)
{
    std::vector<SweepAggregate> out;
    for (std::size_t i = 0; i < rows.size();)
    {
        std::size_t j = i;
        while (j < rows.size() && rows[j].axis_value == rows[i].axis_value && rows[j].scheme == rows[i].scheme) ++j;
        std::vector<double> val, lb, ub, it, ms;
        SweepAggregate a;
        a.axis_value = rows[i].axis_value;
        a.scheme = rows[i].scheme;
        for (std::size_t r = i; r < j; ++r)
        {
            if (rows[r].failed)
            {
                ++a.failures;
                continue;
            }
            val.push_back(rows[r].value_bps);
            lb.push_back(rows[r].lb);
            ub.push_back(rows[r].ub);
            it.push_back(rows[r].iters);
            ms.push_back(rows[r].wall_ms);
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        auto fill = [&](SweepRow &row, auto fn) {
            row.axis_value = a.axis_value;
            row.scheme = a.scheme;
            row.failed = val.empty();
            row.value_bps = val.empty() ? nan : fn(val);
            row.lb = val.empty() ? nan : fn(lb);
            row.ub = val.empty() ? nan : fn(ub);
            row.wall_ms = val.empty() ? nan : fn(ms);
        };
        fill(a.mean, detail::mean_of);
        fill(a.stderr_, detail::stderr_of);
        a.mean.iters = it.empty() ? -1 : static_cast<int>(std::lround(detail::mean_of(it)));
        a.stderr_.iters = 0;
        out.push_back(a);
        i = j;
    }
    return out;
}

/// Every grid point x trial is an independent job (channels seeded with
/// base_seed + trial); workers pull jobs from a shared counter and results
/// land in fixed slots, so the table does not depend on completion order.
inline SweepTable run_sweep(const SweepSpec &spec, const ScenarioConfig &base)
{
    validate(spec, base);
    const std::size_t P = spec.grid.size();
    const auto T = static_cast<std::size_t>(spec.trials);
    const std::size_t S = spec.schemes.size();
    std::vector<SweepRow> rows(P * S * T);

    auto job = [&](std::size_t idx) {
        const std::size_t p = idx / T, t = idx % T;
        const ScenarioConfig c = config_at(base, spec.axis, spec.grid[p]);
        const auto t0 = std::chrono::steady_clock::now();
        const ChannelRealization ch = generate_channels(c, spec.base_seed + t);
        const auto solved = detail::solve_cell(spec.schemes, ch, c);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        for (std::size_t s = 0; s < S; ++s)
        {
            SweepRow &r = rows[(p * S + s) * T + t];
            r.axis_value = spec.grid[p];
            r.scheme = spec.schemes[s];
            r.trial = static_cast<int>(t);
            r.wall_ms = spec.timing ? ms : 0.0;
            const auto &sol = solved.at(spec.schemes[s]);
            if (!sol)
            {
                r.failed = true;
                r.value_bps = r.lb = r.ub = std::numeric_limits<double>::quiet_NaN();
                r.iters = -1;
                continue;
            }
            r.value_bps = sol->value;
            r.lb = sol->lb;
            r.ub = sol->ub;
            r.iters = sol->iterations;
        }
    };

    const std::size_t jobs = P * T;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) job(i);
    };
    const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(spec.jobs), jobs);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto &th : pool) th.join();

    SweepTable table{spec.axis, spec.schemes, std::move(rows), {}};
    table.aggregates = aggregate(table.rows);
    return table;
}

namespace detail
{

inline std::string fmt_num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_row(std::ostream &os, const SweepRow &r, const std::string &trial)
{
    os << fmt_num(r.axis_value) << ',' << to_string(r.scheme) << ',' << trial << ',' << fmt_num(r.value_bps) << ','
       << fmt_num(r.lb) << ',' << fmt_num(r.ub) << ',' << r.iters << ',' << fmt_num(r.wall_ms) << '\n';
}

} // namespace detail

/// Raw rows of each (axis_value, scheme) block followed by its mean and stderr rows.
inline void write_sweep_csv(std::ostream &os, const SweepTable &t)
{
    os << "axis_value,scheme,trial,value_bps,lb,ub,iters,wall_ms\n";
    std::size_t a = 0;
    for (std::size_t i = 0; i < t.rows.size();)
    {
        std::size_t j = i;
        while (j < t.rows.size() && t.rows[j].axis_value == t.rows[i].axis_value && t.rows[j].scheme == t.rows[i].scheme)
        {
            detail::write_row(os, t.rows[j], std::to_string(t.rows[j].trial));
            ++j;
        }
        detail::write_row(os, t.aggregates[a].mean, "mean");
        detail::write_row(os, t.aggregates[a].stderr_, "stderr");
        ++a;
        i = j;
    }
}

/// Parses "0,5,10" into numbers.
inline std::vector<double> parse_grid(const std::string &text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        std::size_t used = 0;
        double v = 0.0;
        try
        {
            v = std::stod(item, &used);
        }
        catch (const std::exception &)
        {
            used = 0;
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (item.empty() || used != item.size())
            throw ScenarioError(ScenarioError::Kind::validation, "grid", "--grid: '" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

} // namespace bdris
