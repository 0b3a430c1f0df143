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

#include "bdris/scenario.hpp"
#include "bdris/types.hpp"

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace bdris
{

/// One draw of every channel in the scenario. Surface channels are stored at
/// full size L so that any cluster can be sliced out later.
struct ChannelRealization
{
    std::vector<CMat> uav_to_ris;               // [g] L x N
    std::vector<std::vector<CRow>> ris_to_user; // [g][k] 1 x L
    std::vector<std::vector<CRow>> uav_to_user; // [g][k] 1 x N, zero for coverage holes
    int num_clusters = 1;
    std::uint64_t seed = 0;

    int num_groups() const { return static_cast<int>(uav_to_ris.size()); }
    int num_cells() const { return uav_to_ris.empty() ? 0 : static_cast<int>(uav_to_ris.front().rows()); }
    int cluster_size() const { return num_cells() / num_clusters; }

    friend bool operator==(const ChannelRealization &a, const ChannelRealization &b)
    {
        return a.uav_to_ris == b.uav_to_ris && a.ris_to_user == b.ris_to_user && a.uav_to_user == b.uav_to_user &&
               a.num_clusters == b.num_clusters && a.seed == b.seed;
    }
};

/// Channels of one group restricted to one surface cluster (or to the direct
/// path only when `cluster == 0`).
struct GroupChannel
{
    int cluster = 0;             // 1-based cluster id, 0 = unassisted
    CMat uav_to_ris;             // n x N (empty when unassisted)
    std::vector<CRow> ris_to_user; // [k] 1 x n
    std::vector<CRow> direct;      // [k] 1 x N

    int users() const { return static_cast<int>(direct.size()); }
    bool assisted() const { return cluster > 0; }
};

namespace detail
{

inline double path_gain(double distance_m, double exponent, const ScenarioConfig &c)
{
    const double ref = c.wavelength_m() / (4.0 * std::numbers::pi);
    return ref * ref * std::pow(distance_m, -exponent) * db_to_linear(c.antenna_gain_dbi);
}

// Weights of the LOS and scattered parts for a K-factor in dB (+/-inf allowed).
inline std::pair<double, double> rician_weights(double k_db)
{
    if (std::isinf(k_db)) return k_db > 0 ? std::pair{1.0, 0.0} : std::pair{0.0, 1.0};
    const double k = db_to_linear(k_db);
    return {std::sqrt(k / (k + 1.0)), std::sqrt(1.0 / (k + 1.0))};
}

// Element offsets of an N-antenna half-wavelength ULA along x, centered on the UAV.
inline Vec3 antenna_offset(int n, int count, double lambda)
{
    return {(n - 0.5 * (count - 1)) * 0.5 * lambda, 0.0, 0.0};
}

// Cell offsets on a square half-wavelength grid in the facade (y-z) plane, row-major.
inline Vec3 cell_offset(int i, int cells, double lambda)
{
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cells))));
    const int row = i / side;
    const int col = i % side;
    return {0.0, (col - 0.5 * (side - 1)) * 0.5 * lambda, (row - 0.5 * (side - 1)) * 0.5 * lambda};
}

// Independent stream per (link class, group, user): the direct channels do not
// move when the surface size changes, and scattered surface rows are prefix-stable.
inline std::mt19937_64 stream_for(std::uint64_t seed, unsigned link, int g, int k)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), link,
                      static_cast<unsigned>(g), static_cast<unsigned>(k)};
    return std::mt19937_64(seq);
}

inline cplx cn01(std::mt19937_64 &rng)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

inline cplx steering(double phase_m, double lambda)
{
    return std::polar(1.0, -2.0 * std::numbers::pi * phase_m / lambda);
}

} // namespace detail

/// Draws Rician channels for all links:
///   entry = sqrt(PL) * (sqrt(K/(K+1)) * LOS + sqrt(1/(K+1)) * NLOS)
/// with PL the distance power law referenced to free space at 1 m (plus the
/// antenna gain), LOS a unit-modulus plane-wave steering term and NLOS ~ CN(0,1).
inline ChannelRealization generate_channels(const ScenarioConfig &c, std::uint64_t seed)
{
    const int G = c.num_groups;
    const int N = c.num_antennas;
    const int L = c.num_ris_cells;
    const double lambda = c.wavelength_m();
    const Vec3 ris = c.positions.ris.value();

    ChannelRealization ch;
    ch.seed = seed;
    ch.num_clusters = c.num_clusters;
    ch.uav_to_ris.resize(static_cast<std::size_t>(G));
    ch.ris_to_user.resize(static_cast<std::size_t>(G));
    ch.uav_to_user.resize(static_cast<std::size_t>(G));

    const auto [los_ur, nlos_ur] = detail::rician_weights(c.rician_k_db.uav_ris);
    const auto [los_ru, nlos_ru] = detail::rician_weights(c.rician_k_db.ris_user);
    const auto [los_d, nlos_d] = detail::rician_weights(c.rician_k_db.uav_direct);

    for (int g = 0; g < G; ++g)
    {
        const Vec3 uav = c.positions.uavs[g];

        {
            const Vec3 delta = ris - uav;
            const double d = delta.norm();
            const Vec3 dir = delta * (1.0 / d);
            const double amp = std::sqrt(detail::path_gain(d, c.pathloss_exponent.uav_ris, c));
            auto rng = detail::stream_for(seed, 1, g, 0);
            CMat H(L, N);
            for (int i = 0; i < L; ++i)
            {
                const Vec3 pi = detail::cell_offset(i, L, lambda);
                for (int n = 0; n < N; ++n)
                {
                    const Vec3 an = detail::antenna_offset(n, N, lambda);
                    const cplx los = detail::steering(d + dir.dot(pi) - dir.dot(an), lambda);
                    const cplx nlos = detail::cn01(rng);
                    H(i, n) = amp * (los_ur * los + nlos_ur * nlos);
                }
            }
            ch.uav_to_ris[g] = std::move(H);
        }

        for (int k = 0; k < c.users_in(g); ++k)
        {
            const Vec3 user = c.positions.users[g][k];

            const Vec3 d_ru = user - ris;
            const double dist_ru = d_ru.norm();
            const Vec3 dir_ru = d_ru * (1.0 / dist_ru);
            const double amp_ru = std::sqrt(detail::path_gain(dist_ru, c.pathloss_exponent.ris_user, c));
            auto rng_ru = detail::stream_for(seed, 2, g, k);
            CRow hr(L);
            for (int i = 0; i < L; ++i)
            {
                const cplx los = detail::steering(dist_ru - dir_ru.dot(detail::cell_offset(i, L, lambda)), lambda);
                hr(i) = amp_ru * (los_ru * los + nlos_ru * detail::cn01(rng_ru));
            }
            ch.ris_to_user[g].push_back(std::move(hr));

            const Vec3 d_d = user - uav;
            const double dist_d = d_d.norm();
            const Vec3 dir_d = d_d * (1.0 / dist_d);
            const double amp_d = std::sqrt(detail::path_gain(dist_d, c.pathloss_exponent.uav_direct, c));
            auto rng_d = detail::stream_for(seed, 3, g, k);
            CRow hd(N);
            for (int n = 0; n < N; ++n)
            {
                const cplx los = detail::steering(dist_d - dir_d.dot(detail::antenna_offset(n, N, lambda)), lambda);
                hd(n) = amp_d * (los_d * los + nlos_d * detail::cn01(rng_d));
            }
            if (c.is_coverage_hole(g, k)) hd.setZero();
            ch.uav_to_user[g].push_back(std::move(hd));
        }
    }
    return ch;
}

/// Unit-variance i.i.d. Rayleigh channels with the scenario's dimensions and
/// no path loss. Used for generic algorithm checks where the reflected and
/// direct paths should be of comparable strength.
inline ChannelRealization iid_channels(const ScenarioConfig &c, std::uint64_t seed)
{
    ChannelRealization ch;
    ch.seed = seed;
    ch.num_clusters = c.num_clusters;
    for (int g = 0; g < c.num_groups; ++g)
    {
        auto rng = detail::stream_for(seed, 4, g, 0);
        CMat H(c.num_ris_cells, c.num_antennas);
        for (auto &x : H.reshaped()) x = detail::cn01(rng);
        ch.uav_to_ris.push_back(std::move(H));
        ch.ris_to_user.emplace_back();
        ch.uav_to_user.emplace_back();
        for (int k = 0; k < c.users_in(g); ++k)
        {
            CRow hr(c.num_ris_cells), hd(c.num_antennas);
            for (auto &x : hr) x = detail::cn01(rng);
            for (auto &x : hd) x = detail::cn01(rng);
            if (c.is_coverage_hole(g, k)) hd.setZero();
            ch.ris_to_user.back().push_back(std::move(hr));
            ch.uav_to_user.back().push_back(std::move(hd));
        }
    }
    return ch;
}

/// Rows (f-1)*L/F ... f*L/F - 1 of the surface channels of group g. f is 1-based.
inline GroupChannel cluster_view(const ChannelRealization &ch, int g, int f)
{
    if (g < 0 || g >= ch.num_groups()) throw std::out_of_range("cluster_view: group index out of range");
    if (f < 1 || f > ch.num_clusters) throw std::out_of_range("cluster_view: cluster index out of range");
    const int n = ch.cluster_size();
    const int first = (f - 1) * n;
    GroupChannel out;
    out.cluster = f;
    out.uav_to_ris = ch.uav_to_ris[g].middleRows(first, n);
    for (const auto &row : ch.ris_to_user[g]) out.ris_to_user.push_back(row.segment(first, n));
    out.direct = ch.uav_to_user[g];
    return out;
}

/// Channels group g sees under cluster id `cluster` (0 = direct path only).
inline GroupChannel group_channel(const ChannelRealization &ch, int g, int cluster)
{
    if (cluster > 0) return cluster_view(ch, g, cluster);
    GroupChannel out;
    out.direct = ch.uav_to_user.at(static_cast<std::size_t>(g));
    return out;
}

// ---- CSV fixtures ---------------------------------------------------------
//
// One line per entry: link,group,user,row,col,re,im with link in
// {uav_ris, ris_user, uav_direct}. Values use 17 significant digits, so a
// write/read cycle is lossless.

inline void write_channels_csv(std::ostream &os, const ChannelRealization &ch)
{
    os << "# seed=" << ch.seed << " clusters=" << ch.num_clusters << "\n";
    os << "link,group,user,row,col,re,im\n";
    char buf[128];
    auto emit = [&](const char *link, int g, int k, Eigen::Index r, Eigen::Index col, cplx v) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%ld,%ld,%.17g,%.17g\n", link, g, k, static_cast<long>(r),
                      static_cast<long>(col), v.real(), v.imag());
        os << buf;
    };
    for (int g = 0; g < ch.num_groups(); ++g)
    {
        const auto &H = ch.uav_to_ris[g];
        for (Eigen::Index r = 0; r < H.rows(); ++r)
            for (Eigen::Index col = 0; col < H.cols(); ++col) emit("uav_ris", g, -1, r, col, H(r, col));
        for (std::size_t k = 0; k < ch.ris_to_user[g].size(); ++k)
            for (Eigen::Index col = 0; col < ch.ris_to_user[g][k].size(); ++col)
                emit("ris_user", g, static_cast<int>(k), 0, col, ch.ris_to_user[g][k](col));
        for (std::size_t k = 0; k < ch.uav_to_user[g].size(); ++k)
            for (Eigen::Index col = 0; col < ch.uav_to_user[g][k].size(); ++col)
                emit("uav_direct", g, static_cast<int>(k), 0, col, ch.uav_to_user[g][k](col));
    }
}

inline ChannelRealization read_channels_csv(std::istream &is, const ScenarioConfig &c)
{
    ChannelRealization ch;
    ch.num_clusters = c.num_clusters;
    const auto G = static_cast<std::size_t>(c.num_groups);
    ch.uav_to_ris.assign(G, CMat::Zero(c.num_ris_cells, c.num_antennas));
    ch.ris_to_user.resize(G);
    ch.uav_to_user.resize(G);
    for (int g = 0; g < c.num_groups; ++g)
    {
        ch.ris_to_user[g].assign(static_cast<std::size_t>(c.users_in(g)), CRow::Zero(c.num_ris_cells));
        ch.uav_to_user[g].assign(static_cast<std::size_t>(c.users_in(g)), CRow::Zero(c.num_antennas));
    }
    std::string line;
    while (std::getline(is, line))
    {
        if (line.empty()) continue;
        if (line[0] == '#')
        {
            unsigned long long seed = 0;
            int clusters = 0;
            if (std::sscanf(line.c_str(), "# seed=%llu clusters=%d", &seed, &clusters) == 2) ch.seed = seed;
            continue;
        }
        if (line.rfind("link,", 0) == 0) continue;
        char link[16] = {};
        int g = 0, k = 0;
        long r = 0, col = 0;
        double re = 0, im = 0;
        if (std::sscanf(line.c_str(), "%15[^,],%d,%d,%ld,%ld,%lf,%lf", link, &g, &k, &r, &col, &re, &im) != 7)
            throw std::runtime_error("read_channels_csv: malformed line '" + line + "'");
        const std::string l(link);
        if (l == "uav_ris")
            ch.uav_to_ris.at(g)(r, col) = {re, im};
        else if (l == "ris_user")
            ch.ris_to_user.at(g).at(k)(col) = {re, im};
        else if (l == "uav_direct")
            ch.uav_to_user.at(g).at(k)(col) = {re, im};
        else
            throw std::runtime_error("read_channels_csv: unknown link '" + l + "'");
    }
    return ch;
}

} // namespace bdris
