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

#include "bdris/channel.hpp"
#include "bdris/scenario.hpp"
#include "bdris/types.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace bdris
{

/// Cluster assignment: u[g] in {0, 1..F}, 0 = not assisted by the surface.
struct Assignment
{
    std::vector<int> u;

    int size() const { return static_cast<int>(u.size()); }
    bool assisted(int g) const { return u[static_cast<std::size_t>(g)] > 0; }
    int assisted_count() const
    {
        return static_cast<int>(std::count_if(u.begin(), u.end(), [](int x) { return x > 0; }));
    }

    /// Range, exclusivity and capacity constraints for F clusters.
    bool valid(int num_clusters) const
    {
        std::set<int> used;
        for (int x : u)
        {
            if (x < 0 || x > num_clusters) return false;
            if (x > 0 && !used.insert(x).second) return false;
        }
        return static_cast<int>(used.size()) <= num_clusters;
    }

    std::string to_string(char sep = ';') const
    {
        std::string s;
        for (std::size_t i = 0; i < u.size(); ++i)
        {
            if (i) s += sep;
            s += std::to_string(u[i]);
        }
        return s;
    }

    friend bool operator==(const Assignment &, const Assignment &) = default;
    friend auto operator<=>(const Assignment &, const Assignment &) = default;
};

/// Per-group scattering blocks (n x n with n = L/F). Unassisted groups hold a zero block.
struct PhaseConfig
{
    std::vector<CMat> blocks;
    RisMode mode = RisMode::block_unitary;
};

/// Per-group precoders T_g = [t_c, t_1, ..., t_K] (N x (K+1)).
struct PrecoderSet
{
    std::vector<CMat> T;
};

/// Per-user shares of the common stream, bits/s/Hz.
struct CommonRateAlloc
{
    std::vector<RVec> r;
};

/// Evaluated streams of one group.
struct GroupRates
{
    RVec sinr_c, sinr_p, rate_c, rate_p;

    double common_capacity() const { return rate_c.size() ? rate_c.minCoeff() : 0.0; }
};

struct UserReport
{
    int group = 0;
    int user = 0;
    double sinr_c = 0.0;
    double sinr_p = 0.0;
    double rate_c = 0.0;
    double rate_p = 0.0;
    double share = 0.0;            // r_{g,k}
    double contribution_bps = 0.0; // bandwidth * (r + R^p)
};

struct RateReport
{
    std::vector<UserReport> users;
    std::vector<double> common_capacity; // per group, bits/s/Hz
    std::vector<double> bandwidth_hz;    // per group
    std::vector<double> c4_excess;       // per group, max(0, sum_k r - c_g)
    double overall_bps = 0.0;
    bool c4_violated = false;
};

// ---- single-link quantities ----------------------------------------------

inline CRow effective_channel(const GroupChannel &gc, int k, const CMat &phi)
{
    CRow h = gc.direct[static_cast<std::size_t>(k)];
    if (gc.assisted() && phi.size() > 0) h += gc.ris_to_user[static_cast<std::size_t>(k)] * phi * gc.uav_to_ris;
    return h;
}

inline std::vector<CRow> effective_channels(const GroupChannel &gc, const CMat &phi)
{
    std::vector<CRow> out;
    out.reserve(gc.direct.size());
    for (int k = 0; k < gc.users(); ++k) out.push_back(effective_channel(gc, k, phi));
    return out;
}

/// h_{g,k} + h~_{g,k} Phi_g H_g on the cluster u_g, or h_{g,k} when u_g = 0.
inline CRow effective_channel(int g, int k, const Assignment &a, const PhaseConfig &p, const ChannelRealization &ch)
{
    const int f = a.u.at(static_cast<std::size_t>(g));
    if (f == 0) return ch.uav_to_user[g][k];
    const CMat &phi = p.blocks.at(static_cast<std::size_t>(g));
    if (phi.rows() != ch.cluster_size() || phi.cols() != ch.cluster_size())
        throw std::invalid_argument("effective_channel: phase block shape mismatch");
    return effective_channel(cluster_view(ch, g, f), k, phi);
}

/// |h t_c|^2 / (sum_j |h t_j|^2 + noise).
inline double sinr_common(const CRow &heff, const CMat &T, double noise)
{
    const CRow rx = heff * T;
    const double interference = rx.tail(rx.size() - 1).squaredNorm();
    return std::norm(rx(0)) / (interference + noise);
}

/// |h t_k|^2 / (sum_{j != k} |h t_j|^2 + noise), k zero-based.
inline double sinr_private(int k, const CRow &heff, const CMat &T, double noise)
{
    const CRow rx = heff * T;
    const double signal = std::norm(rx(k + 1));
    const double interference = rx.tail(rx.size() - 1).squaredNorm() - signal;
    return signal / (std::max(interference, 0.0) + noise);
}

struct StreamRates
{
    double common = 0.0;
    double priv = 0.0;
};

inline double rate_from_sinr(double sinr) { return std::log2(1.0 + sinr); }

inline StreamRates rates(int k, const CRow &heff, const CMat &T, double noise)
{
    return {rate_from_sinr(sinr_common(heff, T, noise)), rate_from_sinr(sinr_private(k, heff, T, noise))};
}

/// min_k R^c_{g,k}: the largest total common rate every user can decode.
inline double common_capacity(const RVec &rate_c) { return rate_c.size() ? rate_c.minCoeff() : 0.0; }

inline GroupRates evaluate_group(const std::vector<CRow> &heff, const CMat &T, double noise)
{
    const auto K = static_cast<Eigen::Index>(heff.size());
    GroupRates out{RVec(K), RVec(K), RVec(K), RVec(K)};
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const auto &h = heff[static_cast<std::size_t>(k)];
        out.sinr_c(k) = sinr_common(h, T, noise);
        out.sinr_p(k) = sinr_private(static_cast<int>(k), h, T, noise);
        out.rate_c(k) = rate_from_sinr(out.sinr_c(k));
        out.rate_p(k) = rate_from_sinr(out.sinr_p(k));
    }
    return out;
}

/// Weights of the group utility sum_k w_k R^p_k + w_c min_k R^c_k used by the
/// phase and precoder solvers. Empty `priv` means all ones.
struct StreamWeights
{
    RVec priv;
    double common = 1.0;

    double private_weight(Eigen::Index k) const { return priv.size() ? priv(k) : 1.0; }
};

/// Spectral efficiency of a group when the common stream is fully allocated.
inline double group_utility(const GroupRates &r, const StreamWeights &w = {})
{
    double v = w.common * r.common_capacity();
    for (Eigen::Index k = 0; k < r.rate_p.size(); ++k) v += w.private_weight(k) * r.rate_p(k);
    return v;
}

// ---- bandwidth and the overall objective ---------------------------------

/// Hz available to group g: w1 W / F' when assisted, w2 W / (G - F') otherwise,
/// with F' the number of assisted groups under `a`.
inline double bandwidth_factor(const ScenarioConfig &c, const Assignment &a, int g)
{
    const int assisted = a.assisted_count();
    if (a.assisted(g)) return c.bandwidth_split[0] * c.bandwidth_hz / assisted;
    return c.bandwidth_split[1] * c.bandwidth_hz / (c.num_groups - assisted);
}

inline std::vector<GroupRates> evaluate_all(const Assignment &a, const PhaseConfig &p, const PrecoderSet &t,
                                            const ChannelRealization &ch, const ScenarioConfig &c)
{
    std::vector<GroupRates> out;
    out.reserve(static_cast<std::size_t>(c.num_groups));
    const double noise = c.noise_power_w();
    for (int g = 0; g < c.num_groups; ++g)
    {
        const GroupChannel gc = group_channel(ch, g, a.u[g]);
        const CMat phi = a.assisted(g) ? p.blocks.at(static_cast<std::size_t>(g)) : CMat();
        out.push_back(evaluate_group(effective_channels(gc, phi), t.T.at(static_cast<std::size_t>(g)), noise));
    }
    return out;
}

/// Sum over groups and users of bandwidth * (r_{g,k} + R^p_{g,k}), in bits/s.
/// A common-rate allocation above the group's common capacity is flagged in
/// the report, not rejected.
inline RateReport overall_rate(const Assignment &a, const PhaseConfig &p, const PrecoderSet &t,
                               const CommonRateAlloc &r, const ChannelRealization &ch, const ScenarioConfig &c)
{
    constexpr double tol = 1e-9;
    RateReport rep;
    const auto groups = evaluate_all(a, p, t, ch, c);
    for (int g = 0; g < c.num_groups; ++g)
    {
        const auto &gr = groups[static_cast<std::size_t>(g)];
        const RVec &share = r.r.at(static_cast<std::size_t>(g));
        const double bw = bandwidth_factor(c, a, g);
        const double cap = gr.common_capacity();
        const double excess = std::max(0.0, share.sum() - cap);
        rep.common_capacity.push_back(cap);
        rep.bandwidth_hz.push_back(bw);
        rep.c4_excess.push_back(excess);
        rep.c4_violated = rep.c4_violated || excess > tol;
        for (int k = 0; k < c.users_in(g); ++k)
        {
            UserReport u{g, k, gr.sinr_c(k), gr.sinr_p(k), gr.rate_c(k), gr.rate_p(k), share(k),
                         bw * (share(k) + gr.rate_p(k))};
            rep.overall_bps += u.contribution_bps;
            rep.users.push_back(u);
        }
    }
    return rep;
}

/// Number of rows in the residual vector: C4 and C5 per user, C6 per group.
inline int residual_count(const ScenarioConfig &c) { return 2 * c.total_users() + c.num_groups; }

/// Stacked constraint residuals, each >= 0 when satisfied. Order: all C4 rows
/// (group-major, user-minor), all C5 rows, then one C6 row per group.
///   C4: R^c_{g,k} - sum_j r_{g,j}        [bits/s/Hz]
///   C5: bw_g (r_{g,k} + R^p_{g,k}) - R^min [bits/s]
///   C6: P_max - ||T_g||_F^2               [W]
inline RVec constraint_residuals(const Assignment &a, const PhaseConfig &p, const PrecoderSet &t,
                                 const CommonRateAlloc &r, const ChannelRealization &ch, const ScenarioConfig &c)
{
    const int M = c.total_users();
    RVec e(residual_count(c));
    const auto groups = evaluate_all(a, p, t, ch, c);
    int row = 0;
    for (int g = 0; g < c.num_groups; ++g)
    {
        const auto &gr = groups[static_cast<std::size_t>(g)];
        const RVec &share = r.r.at(static_cast<std::size_t>(g));
        const double bw = bandwidth_factor(c, a, g);
        for (int k = 0; k < c.users_in(g); ++k, ++row)
        {
            e(row) = gr.rate_c(k) - share.sum();
            e(M + row) = bw * (share(k) + gr.rate_p(k)) - c.min_rate_bps;
        }
    }
    for (int g = 0; g < c.num_groups; ++g) e(2 * M + g) = c.max_uav_power_w - t.T.at(static_cast<std::size_t>(g)).squaredNorm();
    return e;
}

// ---- CSV -----------------------------------------------------------------

inline void write_rate_report_csv(std::ostream &os, const RateReport &rep)
{
    os << "group,user,sinr_c,sinr_p,rate_c,rate_p,r,contribution_bps\n";
    char buf[256];
    for (const auto &u : rep.users)
    {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", u.group, u.user, u.sinr_c,
                      u.sinr_p, u.rate_c, u.rate_p, u.share, u.contribution_bps);
        os << buf;
    }
}

// ---- initial points --------------------------------------------------------

inline CMat identity_phase(int n, RisMode mode)
{
    (void)mode; // identity is both unitary and unit-modulus diagonal
    return CMat::Identity(n, n);
}

inline PhaseConfig initial_phases(const Assignment &a, const ScenarioConfig &c, RisMode mode)
{
    PhaseConfig p;
    p.mode = mode;
    const int n = c.cluster_size();
    for (int g = 0; g < c.num_groups; ++g)
        p.blocks.push_back(a.assisted(g) && mode != RisMode::none ? identity_phase(n, mode) : CMat::Zero(n, n));
    return p;
}

} // namespace bdris
