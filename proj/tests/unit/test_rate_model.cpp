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

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace bdris;

namespace
{

struct Instance
{
    ScenarioConfig c;
    ChannelRealization ch;
    Assignment a;
    PhaseConfig p;
    PrecoderSet t;
    CommonRateAlloc r;
};

Instance random_instance(std::uint64_t seed, RisMode mode = RisMode::block_unitary)
{
    std::mt19937_64 rng(seed);
    Instance in;
    in.c = desk_scenario(3, 2, 8, 3, 2);
    in.c.users_per_group = {2, 1, 3};
    in.c.positions = {};
    in.c = default_layout(in.c);
    in.c.noise_power_dbm = 0.0;
    in.c.min_rate_bps = 1e5;
    in.ch = oracle::random_channels(rng, in.c);
    in.a.u = {2, 0, 1};
    in.p = initial_phases(in.a, in.c, mode);
    for (int g = 0; g < 3; ++g)
    {
        if (in.a.assisted(g))
            in.p.blocks[g] = mode == RisMode::block_unitary ? oracle::random_unitary(rng, 4) : oracle::random_diagonal(rng, 4);
        in.t.T.push_back(oracle::random_precoder(rng, 3, in.c.users_in(g) + 1, 0.7 * in.c.max_uav_power_w));
        RVec share(in.c.users_in(g));
        std::uniform_real_distribution<double> ud(0.0, 0.3);
        for (auto &x : share) x = ud(rng);
        in.r.r.push_back(share);
    }
    return in;
}

std::vector<std::vector<double>> shares(const CommonRateAlloc &r)
{
    std::vector<std::vector<double>> out;
    for (const auto &v : r.r) out.emplace_back(v.begin(), v.end());
    return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST(Assignment, ValidityRules)
{
    EXPECT_TRUE((Assignment{{0, 0, 0}}.valid(2)));
    EXPECT_TRUE((Assignment{{2, 0, 1}}.valid(2)));
    EXPECT_FALSE((Assignment{{1, 1, 0}}.valid(2)));
    EXPECT_FALSE((Assignment{{3, 0, 0}}.valid(2)));
    EXPECT_FALSE((Assignment{{-1, 0, 0}}.valid(2)));
    EXPECT_EQ((Assignment{{2, 0, 1}}.assisted_count()), 2);
    EXPECT_EQ((Assignment{{2, 0, 1}}.to_string()), "2;0;1");
}

TEST(EffectiveChannel, UnassistedIsDirect)
{
    const auto in = random_instance(1);
    EXPECT_EQ(effective_channel(1, 0, in.a, in.p, in.ch), in.ch.uav_to_user[1][0]);
}

TEST(EffectiveChannel, IdentityPhaseAddsCascade)
{
    auto in = random_instance(2);
    in.p.blocks[0] = CMat::Identity(4, 4);
    const GroupChannel gc = cluster_view(in.ch, 0, 2);
    const CRow expect = in.ch.uav_to_user[0][1] + gc.ris_to_user[1] * gc.uav_to_ris;
    EXPECT_LT((effective_channel(0, 1, in.a, in.p, in.ch) - expect).norm(), 1e-12 * expect.norm());
}

TEST(EffectiveChannel, MatchesLoopOracle)
{
    for (std::uint64_t s = 0; s < 20; ++s)
    {
        const auto in = random_instance(100 + s);
        for (int g = 0; g < 3; ++g)
            for (int k = 0; k < in.c.users_in(g); ++k)
            {
                const auto ref = oracle::effective(in.ch, g, k, in.a.u[g], in.p.blocks[g]);
                const CRow h = effective_channel(g, k, in.a, in.p, in.ch);
                for (int n = 0; n < 3; ++n) EXPECT_LT(std::abs(h(n) - ref[n]), 1e-12 * (1.0 + std::abs(ref[n])));
            }
    }
}

TEST(EffectiveChannel, RejectsWrongBlockShape)
{
    auto in = random_instance(3);
    in.p.blocks[0] = CMat::Identity(3, 3);
    EXPECT_THROW(effective_channel(0, 0, in.a, in.p, in.ch), std::invalid_argument);
}

TEST(Sinr, TrivialCases)
{
    CRow h(2);
    h << cplx(1.0, 0.0), cplx(0.0, 0.0);
    CMat T = CMat::Zero(2, 3);
    EXPECT_EQ(sinr_common(h, T, 0.5), 0.0);
    EXPECT_EQ(sinr_private(0, h, T, 0.5), 0.0);
    T(0, 0) = std::sqrt(0.5);
    EXPECT_DOUBLE_EQ(sinr_common(h, T, 0.5), 1.0);

    CMat single = CMat::Zero(2, 2);
    single(0, 1) = 2.0;
    EXPECT_DOUBLE_EQ(sinr_private(0, h, single, 0.5), 4.0 / 0.5);
}

TEST(Sinr, MatchesLoopOracle)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial)
    {
        const int K = 1 + trial % 4;
        std::vector<cplx> hv(3);
        CRow h(3);
        for (int n = 0; n < 3; ++n) h(n) = hv[n] = oracle::cn(rng);
        const CMat T = oracle::random_precoder(rng, 3, K + 1, 1.0);
        for (int k = 0; k < K; ++k)
        {
            const auto ref = oracle::sinr(hv, T, k, 0.1);
            EXPECT_LT(rel(sinr_common(h, T, 0.1), ref.common), 1e-12);
            EXPECT_LT(rel(sinr_private(k, h, T, 0.1), ref.priv), 1e-12);
        }
    }
}

TEST(Sinr, SingleUserScalesQuadratically)
{
    std::mt19937_64 rng(6);
    CRow h(2);
    h << oracle::cn(rng), oracle::cn(rng);
    CMat T = CMat::Zero(2, 2);
    T.col(1) << oracle::cn(rng), oracle::cn(rng);
    const double base = sinr_private(0, h, T, 0.3);
    EXPECT_NEAR(sinr_private(0, h, 2.5 * T, 0.3), 6.25 * base, 1e-12 * base);
}

TEST(Rates, LogTwoOfOnePlusSinr)
{
    EXPECT_EQ(rate_from_sinr(0.0), 0.0);
    EXPECT_DOUBLE_EQ(rate_from_sinr(1.0), 1.0);
    EXPECT_DOUBLE_EQ(rate_from_sinr(3.0), 2.0);
}

TEST(CommonCapacity, MinimumOverUsers)
{
    RVec r(2);
    r << 2.0, 3.0;
    EXPECT_EQ(common_capacity(r), 2.0);
    RVec one(1);
    one << 1.7;
    EXPECT_EQ(common_capacity(one), 1.7);
    RVec z(3);
    z << 1.0, 0.0, 4.0;
    EXPECT_EQ(common_capacity(z), 0.0);
    for (int k = 0; k < 2; ++k)
    {
        RVec up = r;
        up(k) += 0.5;
        EXPECT_GE(common_capacity(up), common_capacity(r));
    }
}

TEST(Bandwidth, SplitsByAssistedCount)
{
    const ScenarioConfig c = desk_scenario(3, 2, 8, 2, 2);
    const Assignment a{{1, 0, 2}};
    EXPECT_DOUBLE_EQ(bandwidth_factor(c, a, 0), 0.6 * 10e6 / 2);
    EXPECT_DOUBLE_EQ(bandwidth_factor(c, a, 1), 0.4 * 10e6 / 1);
    const Assignment none{{0, 0, 0}};
    EXPECT_DOUBLE_EQ(bandwidth_factor(c, none, 1), 0.4 * 10e6 / 3);
}

TEST(OverallRate, ZeroPrecodersGiveZero)
{
    auto in = random_instance(7);
    for (auto &T : in.t.T) T.setZero();
    for (auto &r : in.r.r) r.setZero();
    EXPECT_EQ(overall_rate(in.a, in.p, in.t, in.r, in.ch, in.c).overall_bps, 0.0);
}

TEST(OverallRate, SingleTerm)
{
    ScenarioConfig c = desk_scenario(1, 1, 4, 2, 1);
    c.noise_power_dbm = 0.0;
    std::mt19937_64 rng(8);
    const auto ch = oracle::random_channels(rng, c);
    const Assignment a{{1}};
    PhaseConfig p = initial_phases(a, c, RisMode::block_unitary);
    PrecoderSet t{{oracle::random_precoder(rng, 2, 2, 0.01)}};
    const auto gr = evaluate_all(a, p, t, ch, c)[0];
    CommonRateAlloc r{{RVec::Constant(1, gr.common_capacity())}};
    const auto rep = overall_rate(a, p, t, r, ch, c);
    EXPECT_NEAR(rep.overall_bps, 0.6 * 10e6 * (gr.rate_c(0) + gr.rate_p(0)), 1e-6);
    EXPECT_FALSE(rep.c4_violated);
}

TEST(OverallRate, MatchesLoopOracle)
{
    for (std::uint64_t s = 0; s < 20; ++s)
        for (RisMode mode : {RisMode::block_unitary, RisMode::diagonal_circle})
        {
            const auto in = random_instance(200 + s, mode);
            const auto ev = oracle::evaluate(in.c, in.a.u, in.p.blocks, in.t.T, shares(in.r), in.ch);
            const auto rep = overall_rate(in.a, in.p, in.t, in.r, in.ch, in.c);
            EXPECT_LT(std::abs(rep.overall_bps - ev.overall), 1e-12 * ev.overall);
            const RVec e = constraint_residuals(in.a, in.p, in.t, in.r, in.ch, in.c);
            ASSERT_EQ(static_cast<std::size_t>(e.size()), ev.residuals.size());
            for (std::size_t i = 0; i < ev.residuals.size(); ++i)
                EXPECT_LT(std::abs(e(i) - ev.residuals[i]), 1e-12 * std::max(1.0, std::abs(ev.residuals[i])));
        }
}

TEST(OverallRate, FlagsExcessCommonShares)
{
    auto in = random_instance(9);
    in.r.r[0].setConstant(100.0);
    const auto rep = overall_rate(in.a, in.p, in.t, in.r, in.ch, in.c);
    EXPECT_TRUE(rep.c4_violated);
    EXPECT_GT(rep.c4_excess[0], 0.0);
    EXPECT_EQ(rep.c4_excess[1], 0.0);
}

TEST(OverallRate, ZeroBlockReproducesUnassistedSinrs)
{
    auto in = random_instance(10);
    in.p.blocks[0].setZero();
    const auto assisted = evaluate_all(in.a, in.p, in.t, in.ch, in.c)[0];
    Assignment off = in.a;
    off.u[0] = 0;
    const auto direct = evaluate_all(off, in.p, in.t, in.ch, in.c)[0];
    EXPECT_EQ(assisted.sinr_c, direct.sinr_c);
    EXPECT_EQ(assisted.sinr_p, direct.sinr_p);
}

TEST(OverallRate, InvariantUnderUserPermutation)
{
    auto in = random_instance(11);
    const double before = overall_rate(in.a, in.p, in.t, in.r, in.ch, in.c).overall_bps;
    // Swap users 0 and 2 of group 2 together with their private columns and shares.
    std::swap(in.ch.uav_to_user[2][0], in.ch.uav_to_user[2][2]);
    std::swap(in.ch.ris_to_user[2][0], in.ch.ris_to_user[2][2]);
    in.t.T[2].col(1).swap(in.t.T[2].col(3));
    std::swap(in.r.r[2](0), in.r.r[2](2));
    const double after = overall_rate(in.a, in.p, in.t, in.r, in.ch, in.c).overall_bps;
    EXPECT_NEAR(after, before, 1e-9 * before);
}

TEST(Residuals, ZeroPointAndPowerBoundary)
{
    auto in = random_instance(12);
    in.c.min_rate_bps = 0.0;
    for (auto &T : in.t.T) T.setZero();
    for (auto &r : in.r.r) r.setZero();
    const RVec e = constraint_residuals(in.a, in.p, in.t, in.r, in.ch, in.c);
    ASSERT_EQ(e.size(), residual_count(in.c));
    const int M = in.c.total_users();
    for (int i = 0; i < 2 * M; ++i) EXPECT_EQ(e(i), 0.0);
    for (int g = 0; g < 3; ++g) EXPECT_EQ(e(2 * M + g), in.c.max_uav_power_w);

    in.c.max_uav_power_w = 0.25;
    in.t.T[1](0, 0) = 0.5;
    EXPECT_EQ(constraint_residuals(in.a, in.p, in.t, in.r, in.ch, in.c)(2 * M + 1), 0.0);

    std::mt19937_64 rng(1);
    in.t.T[1] = oracle::random_precoder(rng, 3, 2, in.c.max_uav_power_w);
    EXPECT_NEAR(constraint_residuals(in.a, in.p, in.t, in.r, in.ch, in.c)(2 * M + 1), 0.0, 1e-15);
}

TEST(RateReport, CsvHasOneRowPerUser)
{
    const auto in = random_instance(13);
    std::ostringstream os;
    write_rate_report_csv(os, overall_rate(in.a, in.p, in.t, in.r, in.ch, in.c));
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("group,user,sinr_c,sinr_p,rate_c,rate_p,r,contribution_bps\n", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + in.c.total_users());
}
