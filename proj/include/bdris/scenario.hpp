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

#include "bdris/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bdris
{

/// Thrown for malformed documents (kind == parse) or values that break a
/// scenario invariant (kind == validation). `field()` names the offending key.
class ScenarioError : public std::runtime_error
{
  public:
    enum class Kind
    {
        parse,
        validation
    };

    ScenarioError(Kind kind, std::string field, const std::string &msg)
        : std::runtime_error(msg), kind_(kind), field_(std::move(field))
    {
    }

    Kind kind() const { return kind_; }
    const std::string &field() const { return field_; }

  private:
    Kind kind_;
    std::string field_;
};

/// One value per link class. Used for Rician K-factors (dB) and path-loss exponents.
struct LinkParams
{
    double uav_ris = 0.0;
    double ris_user = 0.0;
    double uav_direct = 0.0;

    friend bool operator==(const LinkParams &, const LinkParams &) = default;
};

struct SolverBudgets
{
    int gbd_max_iter = 50;
    int bcd_max_iter = 80;
    int rcg_max_iter = 100;
    int wmmse_max_iter = 200;
    double gbd_tol = 1e-3;   // relative UB-LB gap
    double bcd_tol = 1e-6;   // relative objective change between sweeps
    double rcg_grad_tol = 1e-10;
    double wmmse_tol = 1e-9; // relative WSR improvement

    friend bool operator==(const SolverBudgets &, const SolverBudgets &) = default;
};

struct Positions
{
    std::vector<Vec3> uavs;               // one per group
    std::vector<std::vector<Vec3>> users; // [group][user]
    std::optional<Vec3> ris;              // surface center

    bool empty() const { return uavs.empty() && users.empty() && !ris.has_value(); }
    friend bool operator==(const Positions &, const Positions &) = default;
};

struct ScenarioConfig
{
    int num_groups = 1;
    std::vector<int> users_per_group{2};
    int num_antennas = 1;
    int num_ris_cells = 1;
    int num_clusters = 1;
    double bandwidth_hz = 10e6;
    std::optional<int> num_subcarriers;
    std::array<double, 2> bandwidth_split{0.6, 0.4};
    double carrier_freq_hz = 5e9;
    double noise_power_dbm = -94.0;
    double max_uav_power_w = 0.01;
    double min_rate_bps = 0.0;
    double antenna_gain_dbi = 5.0;
    double frame_length_s = 1e-3; // recorded only; no rate expression consumes it
    Positions positions;
    LinkParams rician_k_db{10.0, 3.0, 10.0};
    LinkParams pathloss_exponent{2.2, 2.8, 3.0};
    std::vector<std::pair<int, int>> coverage_holes; // (group, user), zero-based
    RisMode ris_mode = RisMode::block_unitary;
    SolverBudgets solver_budgets;
    std::uint64_t rng_seed = 0;

    friend bool operator==(const ScenarioConfig &, const ScenarioConfig &) = default;

    int cluster_size() const { return num_ris_cells / num_clusters; }
    double noise_power_w() const { return dbm_to_watt(noise_power_dbm); }
    double wavelength_m() const { return speed_of_light / carrier_freq_hz; }
    int users_in(int g) const { return users_per_group.at(static_cast<std::size_t>(g)); }
    int total_users() const { return std::accumulate(users_per_group.begin(), users_per_group.end(), 0); }
    int max_assisted_groups() const { return std::min(num_clusters, num_groups); }

    bool is_coverage_hole(int g, int k) const
    {
        return std::find(coverage_holes.begin(), coverage_holes.end(), std::pair{g, k}) != coverage_holes.end();
    }
};

namespace detail
{

[[noreturn]] inline void invalid(const std::string &field, const std::string &msg)
{
    throw ScenarioError(ScenarioError::Kind::validation, field, msg);
}

[[noreturn]] inline void malformed(const std::string &field, const std::string &msg)
{
    throw ScenarioError(ScenarioError::Kind::parse, field, msg);
}

// K-factors accept +/-inf as strings since JSON has no infinity literal.
inline double number_or_inf(const nlohmann::json &j, const std::string &field)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string())
    {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    malformed(field, field + ": expected a number or \"inf\"/\"-inf\"");
}

inline nlohmann::json inf_aware(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline Vec3 vec3_from(const nlohmann::json &j, const std::string &field)
{
    if (!j.is_array() || j.size() != 3) malformed(field, field + ": expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json vec3_to(const Vec3 &v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline LinkParams link_params_from(const nlohmann::json &j, const std::string &field, LinkParams fallback)
{
    if (!j.is_object()) malformed(field, field + ": expected an object with uav_ris, ris_user, uav_direct");
    if (j.contains("uav_ris")) fallback.uav_ris = number_or_inf(j["uav_ris"], field + ".uav_ris");
    if (j.contains("ris_user")) fallback.ris_user = number_or_inf(j["ris_user"], field + ".ris_user");
    if (j.contains("uav_direct")) fallback.uav_direct = number_or_inf(j["uav_direct"], field + ".uav_direct");
    return fallback;
}

template <class T>
T required(const nlohmann::json &doc, const std::string &key)
{
    if (!doc.contains(key)) malformed(key, "missing required field '" + key + "'");
    try
    {
        return doc[key].get<T>();
    }
    catch (const nlohmann::json::exception &e)
    {
        malformed(key, key + ": " + e.what());
    }
}

} // namespace detail

/// Checks every scenario invariant; throws ScenarioError(validation) naming the field.
inline void validate(const ScenarioConfig &c)
{
    using detail::invalid;
    if (c.num_groups < 1) invalid("num_groups", "num_groups must be >= 1");
    if (static_cast<int>(c.users_per_group.size()) != c.num_groups)
        invalid("users_per_group", "users_per_group must have num_groups entries");
    for (int k : c.users_per_group)
        if (k < 1) invalid("users_per_group", "users_per_group entries must be >= 1");
    if (c.num_antennas < 1) invalid("num_antennas", "num_antennas must be >= 1");
    if (c.num_ris_cells < 1) invalid("num_ris_cells", "num_ris_cells must be >= 1");
    if (c.num_clusters < 1) invalid("num_clusters", "num_clusters must be >= 1");
    if (c.num_ris_cells % c.num_clusters != 0) invalid("num_clusters", "F must divide L");
    if (!(c.bandwidth_hz > 0.0)) invalid("bandwidth_hz", "bandwidth_hz must be positive");
    if (c.num_subcarriers && *c.num_subcarriers < 1) invalid("num_subcarriers", "num_subcarriers must be >= 1");
    const auto [w1, w2] = c.bandwidth_split;
    if (!(w1 >= 0.0 && w2 >= 0.0) || std::abs(w1 + w2 - 1.0) > 1e-12)
        invalid("bandwidth_split", "bandwidth_split must sum to 1");
    if (!(c.carrier_freq_hz > 0.0)) invalid("carrier_freq_hz", "carrier_freq_hz must be positive");
    if (!std::isfinite(c.noise_power_dbm)) invalid("noise_power_dbm", "noise_power_dbm must be finite");
    if (!(c.max_uav_power_w > 0.0) || !std::isfinite(c.max_uav_power_w))
        invalid("max_uav_power_w", "max_uav_power_w must be positive");
    if (!(c.min_rate_bps >= 0.0)) invalid("min_rate_bps", "min_rate_bps must be nonnegative");
    if (!std::isfinite(c.antenna_gain_dbi)) invalid("antenna_gain_dbi", "antenna_gain_dbi must be finite");
    if (!(c.frame_length_s > 0.0)) invalid("frame_length_s", "frame_length_s must be positive");

    for (double a : {c.pathloss_exponent.uav_ris, c.pathloss_exponent.ris_user, c.pathloss_exponent.uav_direct})
        if (!(a > 0.0) || !std::isfinite(a)) invalid("pathloss_exponent", "path-loss exponents must be positive");
    for (double k : {c.rician_k_db.uav_ris, c.rician_k_db.ris_user, c.rician_k_db.uav_direct})
        if (std::isnan(k)) invalid("rician_k_db", "K-factors must not be NaN");

    for (auto [g, k] : c.coverage_holes)
        if (g < 0 || g >= c.num_groups || k < 0 || k >= c.users_in(g))
            invalid("coverage_holes", "coverage hole (" + std::to_string(g) + "," + std::to_string(k) + ") out of range");

    const auto &p = c.positions;
    if (static_cast<int>(p.uavs.size()) != c.num_groups) invalid("positions", "positions.uavs must have num_groups entries");
    if (static_cast<int>(p.users.size()) != c.num_groups) invalid("positions", "positions.users must have num_groups entries");
    if (!p.ris) invalid("positions", "positions.ris is required");
    std::vector<Vec3> all(p.uavs);
    for (int g = 0; g < c.num_groups; ++g)
    {
        if (static_cast<int>(p.users[g].size()) != c.users_in(g))
            invalid("positions", "positions.users[" + std::to_string(g) + "] must have users_per_group entries");
        all.insert(all.end(), p.users[g].begin(), p.users[g].end());
    }
    all.push_back(*p.ris);
    std::set<std::array<double, 3>> seen;
    for (const auto &v : all)
    {
        if (!v.finite()) invalid("positions", "positions must be finite");
        if (!seen.insert({v.x, v.y, v.z}).second) invalid("positions", "two entities share the same position");
    }

    const auto &b = c.solver_budgets;
    if (b.gbd_max_iter < 1 || b.bcd_max_iter < 1 || b.rcg_max_iter < 1 || b.wmmse_max_iter < 1)
        invalid("solver_budgets", "iteration budgets must be >= 1");
    if (!(b.gbd_tol > 0.0 && b.bcd_tol > 0.0 && b.rcg_grad_tol > 0.0 && b.wmmse_tol > 0.0))
        invalid("solver_budgets", "tolerances must be positive");
}

/// Fills the reference geometry: UAV 1 at (20,80,250), remaining UAVs on the
/// y=80, z=250 line at x = 10, 30, 40, ... (x=20 is taken by UAV 1), user 1 at
/// (10,30,1), remaining users evenly spaced on x in [15,85] at y=30, z=1, and
/// the surface at (100,75,120). Explicit positions are left untouched.
inline ScenarioConfig default_layout(ScenarioConfig c)
{
    if (!c.positions.empty()) return c;

    Positions p;
    p.uavs.reserve(static_cast<std::size_t>(c.num_groups));
    p.uavs.push_back({20.0, 80.0, 250.0});
    double x = 10.0;
    for (int g = 1; g < c.num_groups; ++g)
    {
        if (x == 20.0) x += 10.0;
        p.uavs.push_back({x, 80.0, 250.0});
        x += 10.0;
    }

    const int others = c.total_users() - 1;
    int idx = 0;
    p.users.resize(static_cast<std::size_t>(c.num_groups));
    for (int g = 0; g < c.num_groups; ++g)
    {
        for (int k = 0; k < c.users_in(g); ++k, ++idx)
        {
            if (idx == 0)
            {
                p.users[g].push_back({10.0, 30.0, 1.0});
                continue;
            }
            const double t = others > 1 ? static_cast<double>(idx - 1) / (others - 1) : 0.0;
            p.users[g].push_back({15.0 + 70.0 * t, 30.0, 1.0});
        }
    }
    p.ris = Vec3{100.0, 75.0, 120.0};
    c.positions = std::move(p);
    return c;
}

/// Parses a JSON scenario document. Missing positions are filled by default_layout.
inline ScenarioConfig scenario_from_json(const nlohmann::json &doc)
{
    using detail::malformed;
    using detail::required;
    if (!doc.is_object()) malformed("", "scenario document must be a JSON object");

    ScenarioConfig c;
    c.num_groups = required<int>(doc, "num_groups");
    const auto &kg = doc.contains("users_per_group") ? doc["users_per_group"] : nlohmann::json();
    if (kg.is_number_integer())
        c.users_per_group.assign(static_cast<std::size_t>(std::max(c.num_groups, 0)), kg.get<int>());
    else
        c.users_per_group = required<std::vector<int>>(doc, "users_per_group");
    c.num_antennas = required<int>(doc, "num_antennas");
    c.num_ris_cells = required<int>(doc, "num_ris_cells");
    c.num_clusters = required<int>(doc, "num_clusters");
    c.bandwidth_hz = required<double>(doc, "bandwidth_hz");
    if (doc.contains("num_subcarriers")) c.num_subcarriers = required<int>(doc, "num_subcarriers");
    const auto split = required<std::vector<double>>(doc, "bandwidth_split");
    if (split.size() != 2) malformed("bandwidth_split", "bandwidth_split must be a pair");
    c.bandwidth_split = {split[0], split[1]};
    c.carrier_freq_hz = required<double>(doc, "carrier_freq_hz");
    c.noise_power_dbm = required<double>(doc, "noise_power_dbm");
    if (doc.contains("max_uav_power_w"))
        c.max_uav_power_w = required<double>(doc, "max_uav_power_w");
    else if (doc.contains("max_uav_power_dbm"))
        c.max_uav_power_w = dbm_to_watt(required<double>(doc, "max_uav_power_dbm"));
    else
        malformed("max_uav_power_w", "missing required field 'max_uav_power_w'");
    if (doc.contains("min_rate_bps")) c.min_rate_bps = required<double>(doc, "min_rate_bps");
    if (doc.contains("antenna_gain_dbi")) c.antenna_gain_dbi = required<double>(doc, "antenna_gain_dbi");
    if (doc.contains("frame_length_s")) c.frame_length_s = required<double>(doc, "frame_length_s");

    if (doc.contains("positions"))
    {
        const auto &pj = doc["positions"];
        if (!pj.is_object()) malformed("positions", "positions must be an object");
        if (pj.contains("uavs"))
            for (const auto &u : pj["uavs"]) c.positions.uavs.push_back(detail::vec3_from(u, "positions.uavs"));
        if (pj.contains("users"))
            for (const auto &grp : pj["users"])
            {
                auto &row = c.positions.users.emplace_back();
                for (const auto &u : grp) row.push_back(detail::vec3_from(u, "positions.users"));
            }
        if (pj.contains("ris")) c.positions.ris = detail::vec3_from(pj["ris"], "positions.ris");
    }
    if (doc.contains("rician_k_db"))
        c.rician_k_db = detail::link_params_from(doc["rician_k_db"], "rician_k_db", c.rician_k_db);
    if (doc.contains("pathloss_exponent"))
        c.pathloss_exponent = detail::link_params_from(doc["pathloss_exponent"], "pathloss_exponent", c.pathloss_exponent);
    if (doc.contains("coverage_holes"))
    {
        for (const auto &h : doc["coverage_holes"])
        {
            if (!h.is_array() || h.size() != 2) malformed("coverage_holes", "coverage_holes entries must be [group, user]");
            c.coverage_holes.emplace_back(h[0].get<int>(), h[1].get<int>());
        }
    }
    if (doc.contains("ris_mode"))
    {
        try
        {
            c.ris_mode = ris_mode_from_string(required<std::string>(doc, "ris_mode"));
        }
        catch (const std::invalid_argument &e)
        {
            detail::invalid("ris_mode", e.what());
        }
    }
    if (doc.contains("solver_budgets"))
    {
        const auto &b = doc["solver_budgets"];
        auto &s = c.solver_budgets;
        s.gbd_max_iter = b.value("gbd_max_iter", s.gbd_max_iter);
        s.bcd_max_iter = b.value("bcd_max_iter", s.bcd_max_iter);
        s.rcg_max_iter = b.value("rcg_max_iter", s.rcg_max_iter);
        s.wmmse_max_iter = b.value("wmmse_max_iter", s.wmmse_max_iter);
        s.gbd_tol = b.value("gbd_tol", s.gbd_tol);
        s.bcd_tol = b.value("bcd_tol", s.bcd_tol);
        s.rcg_grad_tol = b.value("rcg_grad_tol", s.rcg_grad_tol);
        s.wmmse_tol = b.value("wmmse_tol", s.wmmse_tol);
    }
    if (doc.contains("rng_seed")) c.rng_seed = required<std::uint64_t>(doc, "rng_seed");

    if (c.num_groups >= 1 && static_cast<int>(c.users_per_group.size()) == c.num_groups)
    {
        bool counts_ok = true;
        for (int k : c.users_per_group) counts_ok = counts_ok && k >= 1;
        if (counts_ok) c = default_layout(std::move(c));
    }
    validate(c);
    // Normalize the split so that w1 + w2 == 1 holds exactly.
    c.bandwidth_split[1] = 1.0 - c.bandwidth_split[0];
    return c;
}

inline ScenarioConfig load_scenario(std::string_view text)
{
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        detail::malformed("", std::string("malformed scenario document: ") + e.what());
    }
    return scenario_from_json(doc);
}

inline ScenarioConfig load_scenario_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) detail::malformed("", "cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

inline nlohmann::json to_json(const ScenarioConfig &c)
{
    nlohmann::json j;
    j["num_groups"] = c.num_groups;
    j["users_per_group"] = c.users_per_group;
    j["num_antennas"] = c.num_antennas;
    j["num_ris_cells"] = c.num_ris_cells;
    j["num_clusters"] = c.num_clusters;
    j["bandwidth_hz"] = c.bandwidth_hz;
    if (c.num_subcarriers) j["num_subcarriers"] = *c.num_subcarriers;
    j["bandwidth_split"] = {c.bandwidth_split[0], c.bandwidth_split[1]};
    j["carrier_freq_hz"] = c.carrier_freq_hz;
    j["noise_power_dbm"] = c.noise_power_dbm;
    j["max_uav_power_w"] = c.max_uav_power_w;
    j["min_rate_bps"] = c.min_rate_bps;
    j["antenna_gain_dbi"] = c.antenna_gain_dbi;
    j["frame_length_s"] = c.frame_length_s;

    nlohmann::json pos = nlohmann::json::object();
    pos["uavs"] = nlohmann::json::array();
    for (const auto &u : c.positions.uavs) pos["uavs"].push_back(detail::vec3_to(u));
    pos["users"] = nlohmann::json::array();
    for (const auto &grp : c.positions.users)
    {
        auto row = nlohmann::json::array();
        for (const auto &u : grp) row.push_back(detail::vec3_to(u));
        pos["users"].push_back(row);
    }
    if (c.positions.ris) pos["ris"] = detail::vec3_to(*c.positions.ris);
    j["positions"] = pos;

    auto link = [](const LinkParams &p) {
        return nlohmann::json{{"uav_ris", detail::inf_aware(p.uav_ris)},
                              {"ris_user", detail::inf_aware(p.ris_user)},
                              {"uav_direct", detail::inf_aware(p.uav_direct)}};
    };
    j["rician_k_db"] = link(c.rician_k_db);
    j["pathloss_exponent"] = link(c.pathloss_exponent);
    j["coverage_holes"] = nlohmann::json::array();
    for (auto [g, k] : c.coverage_holes) j["coverage_holes"].push_back({g, k});
    j["ris_mode"] = std::string(to_string(c.ris_mode));
    const auto &b = c.solver_budgets;
    j["solver_budgets"] = {{"gbd_max_iter", b.gbd_max_iter}, {"bcd_max_iter", b.bcd_max_iter},
                           {"rcg_max_iter", b.rcg_max_iter}, {"wmmse_max_iter", b.wmmse_max_iter},
                           {"gbd_tol", b.gbd_tol},           {"bcd_tol", b.bcd_tol},
                           {"rcg_grad_tol", b.rcg_grad_tol}, {"wmmse_tol", b.wmmse_tol}};
    j["rng_seed"] = c.rng_seed;
    return j;
}

inline std::string serialize(const ScenarioConfig &c) { return to_json(c).dump(2); }

// ---- presets -------------------------------------------------------------

/// Reference operating point: G=8, N=4, L=512, F=4, 10 MHz, (0.6, 0.4),
/// 5 GHz, -94 dBm noise, 10 mW per UAV, 5 dBi, 50 GBD / 80 BCD iterations.
/// Long-running at full scale.
inline ScenarioConfig table2_scenario()
{
    ScenarioConfig c;
    c.num_groups = 8;
    c.users_per_group.assign(8, 2);
    c.num_antennas = 4;
    c.num_ris_cells = 512;
    c.num_clusters = 4;
    c.bandwidth_hz = 10e6;
    c.bandwidth_split = {0.6, 0.4};
    c.carrier_freq_hz = 5e9;
    c.noise_power_dbm = -94.0;
    c.max_uav_power_w = 0.01;
    c.antenna_gain_dbi = 5.0;
    c.frame_length_s = 1e-3;
    c.solver_budgets.gbd_max_iter = 50;
    c.solver_budgets.bcd_max_iter = 80;
    c = default_layout(std::move(c));
    validate(c);
    return c;
}

/// Desk-scale scenario with reduced inner budgets; same radio constants as table2_scenario.
inline ScenarioConfig desk_scenario(int groups = 2, int clusters = 2, int cells = 32, int antennas = 4,
                                    int users = 2)
{
    ScenarioConfig c = table2_scenario();
    c.num_groups = groups;
    c.users_per_group.assign(static_cast<std::size_t>(groups), users);
    c.num_antennas = antennas;
    c.num_ris_cells = cells;
    c.num_clusters = clusters;
    c.positions = {};
    c.solver_budgets.gbd_max_iter = 50;
    c.solver_budgets.bcd_max_iter = 20;
    c.solver_budgets.rcg_max_iter = 40;
    c.solver_budgets.wmmse_max_iter = 100;
    c.solver_budgets.bcd_tol = 1e-7;
    c = default_layout(std::move(c));
    validate(c);
    return c;
}

inline ScenarioConfig preset_scenario(std::string_view name)
{
    if (name == "table2") return table2_scenario();
    if (name == "desk") return desk_scenario();
    if (name == "desk3") return desk_scenario(3, 2, 16, 4, 2);
    if (name == "tiny") return desk_scenario(2, 2, 8, 2, 2);
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

} // namespace bdris
