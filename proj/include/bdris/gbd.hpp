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

#include "bdris/phase_rcg.hpp"
#include "bdris/rsma_precoder.hpp"

#include <chrono>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace bdris
{

/// What a scheme may optimize. ris_mode none pins u to all zeros.
struct SchemeSettings
{
    RisMode ris_mode = RisMode::block_unitary;
    StreamMode stream_mode = StreamMode::rsma;
    bool optimize_phases = true;
};

inline SchemeSettings settings_for(const ScenarioConfig &c) { return {c.ris_mode, StreamMode::rsma, true}; }

/// Continuous variables of the primal problem.
struct SolverPoint
{
    PhaseConfig phases;
    PrecoderSet precoders;
    CommonRateAlloc shares;
};

struct PrimalFeasible
{
    SolverPoint point;
    double value = 0.0; // R_overall, bits/s
    RVec mu;            // multipliers, same row order as constraint_residuals
    int bcd_iterations = 0;
    std::vector<double> bcd_trace;
};

struct PrimalInfeasible
{
    SolverPoint point;
    RVec lambda;
    double violation = 0.0;
    int bcd_iterations = 0;
};

using PrimalOutcome = std::variant<PrimalFeasible, PrimalInfeasible>;

inline constexpr double feasibility_tol = 1e-6;

// ---- primal --------------------------------------------------------------

namespace detail
{

inline std::vector<std::vector<CRow>> all_effective(const Assignment &a, const PhaseConfig &p,
                                                    const ChannelRealization &ch, const ScenarioConfig &c)
{
    std::vector<std::vector<CRow>> out;
    for (int g = 0; g < c.num_groups; ++g)
    {
        const GroupChannel gc = group_channel(ch, g, a.u[g]);
        out.push_back(effective_channels(gc, a.assisted(g) ? p.blocks[static_cast<std::size_t>(g)] : CMat()));
    }
    return out;
}

/// bits/s of the point with every group's common stream fully allocated.
inline double saturated_value(const Assignment &a, const std::vector<GroupRates> &rates, const ScenarioConfig &c)
{
    double v = 0.0;
    for (int g = 0; g < c.num_groups; ++g)
        v += bandwidth_factor(c, a, g) * group_utility(rates[static_cast<std::size_t>(g)]);
    return v;
}

inline RcgOptions rcg_options(const ScenarioConfig &c)
{
    RcgOptions o;
    o.max_iter = c.solver_budgets.rcg_max_iter;
    o.grad_tol = c.solver_budgets.rcg_grad_tol;
    return o;
}

inline WmmseOptions wmmse_options(const ScenarioConfig &c, StreamMode mode)
{
    WmmseOptions o;
    o.max_iter = c.solver_budgets.wmmse_max_iter;
    o.tol = c.solver_budgets.wmmse_tol;
    o.mode = mode;
    return o;
}

struct BcdRun
{
    SolverPoint point;
    std::vector<GroupRates> rates;
    std::vector<double> power_multiplier;
    std::vector<double> trace;
    int iterations = 0;
};

/// Alternates phase ascent and WMMSE until the relative change of the
/// objective drops below bcd_tol. Every half-step is monotone, so the trace is.
inline BcdRun run_bcd(const Assignment &a, SolverPoint start, const ChannelRealization &ch, const ScenarioConfig &c,
                      const SchemeSettings &s, const std::vector<StreamWeights> &weights = {})
{
    BcdRun run;
    run.point = std::move(start);
    std::vector<int> weak;
    if (s.stream_mode == StreamMode::noma)
        for (const auto &heff : all_effective(a, run.point.phases, ch, c)) weak.push_back(weakest_user(heff));

    auto weighted = [&](const std::vector<GroupRates> &rates) {
        if (weights.empty()) return saturated_value(a, rates, c);
        double v = 0.0;
        for (int g = 0; g < c.num_groups; ++g)
            v += bandwidth_factor(c, a, g) *
                 group_utility(rates[static_cast<std::size_t>(g)], weights[static_cast<std::size_t>(g)]);
        return v;
    };

    run.rates = evaluate_all(a, run.point.phases, run.point.precoders, ch, c);
    double value = weighted(run.rates);
    run.trace.push_back(value);
    run.power_multiplier.assign(static_cast<std::size_t>(c.num_groups), 0.0);

    const bool phases_free = s.optimize_phases && s.ris_mode != RisMode::none && a.assisted_count() > 0;
    WmmseOptions wo = wmmse_options(c, s.stream_mode);
    for (int it = 1; it <= c.solver_budgets.bcd_max_iter; ++it)
    {
        if (phases_free)
            run.point.phases =
                optimize_phases(a, run.point.phases, run.point.precoders, ch, c, rcg_options(c), weights).phases;
        const PrecoderSolve ps = wmmse_solve(a, run.point.phases, ch, c, run.point.precoders, wo, weak, weights);
        run.point.precoders = ps.precoders;
        for (int g = 0; g < c.num_groups; ++g)
            run.power_multiplier[static_cast<std::size_t>(g)] = ps.per_group[static_cast<std::size_t>(g)].power_multiplier;
        run.rates = evaluate_all(a, run.point.phases, run.point.precoders, ch, c);
        const double next = weighted(run.rates);
        run.trace.push_back(next);
        run.iterations = it;
        const bool done = std::abs(next - value) <= c.solver_budgets.bcd_tol * std::max(std::abs(next), 1e-12);
        value = next;
        if (done) break;
    }
    return run;
}

/// Common shares per group plus the total floor shortfall (0 when C4/C5 can be met).
inline std::pair<CommonRateAlloc, double> allocate_all(const Assignment &a, const std::vector<GroupRates> &rates,
                                                       const ScenarioConfig &c)
{
    CommonRateAlloc alloc;
    double shortfall = 0.0;
    for (int g = 0; g < c.num_groups; ++g)
    {
        const auto &gr = rates[static_cast<std::size_t>(g)];
        auto out = allocate_common(gr.rate_c, gr.rate_p, c.min_rate_bps, bandwidth_factor(c, a, g));
        if (auto *r = std::get_if<RVec>(&out))
            alloc.r.push_back(*r);
        else
        {
            const auto &cert = std::get<InfeasibilityCertificate>(out);
            shortfall += cert.violation;
            alloc.r.push_back(scaled_floors(cert, gr.common_capacity()));
        }
    }
    return {alloc, shortfall};
}

inline double violation_of(const RVec &e)
{
    double v = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i)
        if (e(i) < -feasibility_tol) v -= e(i);
    return v;
}

} // namespace detail

/// Cold start for an assignment: identity (all-ones) phases on assisted
/// groups, matched-filter precoders on the resulting effective channels.
inline SolverPoint initial_point(const Assignment &a, const ChannelRealization &ch, const ScenarioConfig &c,
                                 const SchemeSettings &s)
{
    SolverPoint p;
    p.phases = initial_phases(a, c, s.ris_mode == RisMode::none ? RisMode::block_unitary : s.ris_mode);
    const auto heff = detail::all_effective(a, p.phases, ch, c);
    for (int g = 0; g < c.num_groups; ++g)
    {
        const auto &h = heff[static_cast<std::size_t>(g)];
        p.precoders.T.push_back(
            matched_filter_init(h, c.num_antennas, c.max_uav_power_w, s.stream_mode, weakest_user(h)));
        p.shares.r.push_back(RVec::Zero(c.users_in(g)));
    }
    return p;
}

/// Indicator of rows violated beyond the tolerance, normalized to unit L1
/// norm; uniform when nothing is violated.
inline RVec feasibility_multipliers(const RVec &e, double tol = feasibility_tol)
{
    RVec lambda = (e.array() < -tol).cast<double>().matrix();
    const double n = lambda.sum();
    if (n == 0.0) return RVec::Constant(e.size(), 1.0 / static_cast<double>(e.size()));
    return lambda / n;
}

/// Multipliers of a feasible point. C6 rows take the group's power multiplier
/// (converted to bits/s per watt); active C4/C5 rows take the finite-difference
/// gain of the allocated objective when their bound is relaxed by delta.
inline RVec primal_multipliers(const Assignment &a, const std::vector<GroupRates> &rates,
                               const std::vector<double> &power_multiplier, const RVec &e, const ScenarioConfig &c,
                               double delta = 1e-4)
{
    const int M = c.total_users();
    RVec mu = RVec::Zero(e.size());
    int row = 0;
    for (int g = 0; g < c.num_groups; ++g)
    {
        const auto &gr = rates[static_cast<std::size_t>(g)];
        const double bw = bandwidth_factor(c, a, g);
        auto value = [&](const RVec &rate_c, double rmin) {
            auto out = allocate_common(rate_c, gr.rate_p, rmin, bw);
            if (!std::holds_alternative<RVec>(out)) return -std::numeric_limits<double>::infinity();
            return bw * (std::get<RVec>(out).sum() + gr.rate_p.sum());
        };
        const double base = value(gr.rate_c, c.min_rate_bps);
        for (int k = 0; k < c.users_in(g); ++k, ++row)
        {
            if (e(row) <= feasibility_tol)
            {
                RVec relaxed = gr.rate_c;
                relaxed(k) += delta;
                mu(row) = std::max(0.0, (value(relaxed, c.min_rate_bps) - base) / delta);
            }
            if (e(M + row) <= feasibility_tol * std::max(1.0, c.min_rate_bps))
                mu(M + row) = std::max(0.0, (value(gr.rate_c, c.min_rate_bps - delta) - base) / delta);
        }
        mu(2 * M + g) = bw * power_multiplier[static_cast<std::size_t>(g)] * inv_ln2;
    }
    return mu;
}

/// Minimizes the total constraint violation for a fixed assignment: BCD
/// rounds that up-weight users whose QoS floor is missed. Returns the best
/// point seen with its violation and the normalized indicator multipliers.
inline PrimalInfeasible feasibility_problem(const Assignment &a, const ChannelRealization &ch, const ScenarioConfig &c,
                                            const SchemeSettings &s, std::optional<SolverPoint> start = {})
{
    SolverPoint point = start ? *start : initial_point(a, ch, c, s);
    std::vector<StreamWeights> weights(static_cast<std::size_t>(c.num_groups));
    for (int g = 0; g < c.num_groups; ++g) weights[static_cast<std::size_t>(g)].priv = RVec::Ones(c.users_in(g));

    PrimalInfeasible best;
    best.violation = std::numeric_limits<double>::infinity();
    constexpr int rounds = 6;
    int iterations = 0;
    for (int round = 0; round < rounds; ++round)
    {
        auto run = detail::run_bcd(a, point, ch, c, s, weights);
        iterations += run.iterations;
        auto [alloc, shortfall] = detail::allocate_all(a, run.rates, c);
        (void)shortfall;
        run.point.shares = alloc;
        const RVec e = constraint_residuals(a, run.point.phases, run.point.precoders, alloc, ch, c);
        const double viol = detail::violation_of(e);
        if (viol < best.violation)
        {
            best.point = run.point;
            best.violation = viol;
            best.lambda = feasibility_multipliers(e);
        }
        if (viol == 0.0) break;

        const int M = c.total_users();
        int row = 0;
        for (int g = 0; g < c.num_groups; ++g)
            for (int k = 0; k < c.users_in(g); ++k, ++row)
                if (e(M + row) < -feasibility_tol) weights[static_cast<std::size_t>(g)].priv(k) *= 2.0;
        point = run.point;
    }
    best.bcd_iterations = iterations;
    return best;
}

/// Fixed-assignment primal: BCD from `start` (cold start when absent), then
/// common-rate allocation. Feasible when every residual is >= -1e-6.
inline PrimalOutcome solve_primal(const Assignment &a, const ChannelRealization &ch, const ScenarioConfig &c,
                                  const SchemeSettings &s, std::optional<SolverPoint> start = {})
{
    if (!a.valid(c.num_clusters)) throw std::invalid_argument("solve_primal: assignment violates C1-C3");
    auto run = detail::run_bcd(a, start ? *start : initial_point(a, ch, c, s), ch, c, s);
    auto [alloc, shortfall] = detail::allocate_all(a, run.rates, c);
    run.point.shares = alloc;
    if (s.stream_mode == StreamMode::sdma)
        for (auto &r : run.point.shares.r) r.setZero();
    const RVec e = constraint_residuals(a, run.point.phases, run.point.precoders, run.point.shares, ch, c);
    if (shortfall == 0.0 && e.minCoeff() >= -feasibility_tol)
    {
        PrimalFeasible f;
        f.value = overall_rate(a, run.point.phases, run.point.precoders, run.point.shares, ch, c).overall_bps;
        f.mu = primal_multipliers(a, run.rates, run.power_multiplier, e, c);
        f.point = std::move(run.point);
        f.bcd_iterations = run.iterations;
        f.bcd_trace = std::move(run.trace);
        return f;
    }
    auto inf = feasibility_problem(a, ch, c, s, run.point);
    inf.bcd_iterations += run.iterations;
    if (inf.violation == 0.0)
    {
        const RVec e2 = constraint_residuals(a, inf.point.phases, inf.point.precoders, inf.point.shares, ch, c);
        PrimalFeasible f;
        f.value = overall_rate(a, inf.point.phases, inf.point.precoders, inf.point.shares, ch, c).overall_bps;
        f.mu = RVec::Zero(e2.size());
        f.point = std::move(inf.point);
        f.bcd_iterations = inf.bcd_iterations;
        return f;
    }
    return inf;
}

// ---- cuts and master -----------------------------------------------------

struct Cut
{
    enum class Kind
    {
        optimality,
        feasibility
    };
    Kind kind = Kind::optimality;
    Assignment source;
    SolverPoint point;
    RVec multipliers;
};

/// Frozen phases mapped onto U: a group keeps its block when U assists it;
/// groups the frozen point did not assist start from the identity.
inline PhaseConfig phases_for(const Assignment &a, const PhaseConfig &frozen, const ScenarioConfig &c)
{
    PhaseConfig p = frozen;
    const int n = c.cluster_size();
    for (int g = 0; g < c.num_groups; ++g)
    {
        auto &b = p.blocks[static_cast<std::size_t>(g)];
        if (!a.assisted(g))
            b = CMat::Zero(n, n);
        else if (b.cwiseAbs().maxCoeff() == 0.0)
            b = CMat::Identity(n, n);
    }
    return p;
}

/// Optimality cut: R_overall + mu.E at the frozen point under U.
/// Feasibility cut: lambda.E.
inline double lagrangian_value(const Assignment &a, const Cut &cut, const ChannelRealization &ch,
                               const ScenarioConfig &c)
{
    const PhaseConfig p = phases_for(a, cut.point.phases, c);
    const RVec e = constraint_residuals(a, p, cut.point.precoders, cut.point.shares, ch, c);
    const double penalty = cut.multipliers.dot(e);
    if (cut.kind == Cut::Kind::feasibility) return penalty;
    return overall_rate(a, p, cut.point.precoders, cut.point.shares, ch, c).overall_bps + penalty;
}

/// Every assignment meeting C1-C3 with at most F assisted groups, in
/// lexicographic order of u.
inline std::vector<Assignment> enumerate_assignments(int groups, int clusters)
{
    std::vector<Assignment> out;
    Assignment a{std::vector<int>(static_cast<std::size_t>(groups), 0)};
    for (;;)
    {
        if (a.valid(clusters)) out.push_back(a);
        int g = groups - 1;
        while (g >= 0 && a.u[static_cast<std::size_t>(g)] == clusters) a.u[static_cast<std::size_t>(g--)] = 0;
        if (g < 0) break;
        ++a.u[static_cast<std::size_t>(g)];
    }
    return out;
}

struct GbdIteration
{
    int iteration = 0;
    Assignment u;
    double lb = 0.0;
    double ub = 0.0;
    bool primal_feasible = false;
    double wall_ms = 0.0;
};

struct GbdState
{
    int iteration = 0;
    double lb = -std::numeric_limits<double>::infinity();
    double ub = std::numeric_limits<double>::infinity();
    std::vector<Cut> cuts;
    std::vector<std::pair<Assignment, double>> feasible_visits; // J with primal values
    std::vector<Assignment> infeasible_visits;                  // J-bar
    std::optional<Assignment> incumbent_u;
    std::optional<SolverPoint> incumbent;
};

struct MasterResult
{
    std::optional<Assignment> u; // nullopt: every candidate excluded
    double eta = -std::numeric_limits<double>::infinity();
};

/// Relaxed master by enumeration. Candidates failing a feasibility cut are
/// dropped; eta(U) is the smallest optimality-cut value, and never below the
/// known primal value of an already solved feasible U. Ties go to the
/// lexicographically smallest u.
inline MasterResult solve_master(const GbdState &state, const ChannelRealization &ch, const ScenarioConfig &c,
                                 const std::vector<Assignment> &candidates)
{
    MasterResult best;
    for (const auto &a : candidates)
    {
        const double *known = nullptr;
        for (const auto &[v, val] : state.feasible_visits)
            if (v == a) known = &val;
        bool excluded = false;
        double eta = std::numeric_limits<double>::infinity();
        for (const auto &cut : state.cuts)
        {
            const double l = lagrangian_value(a, cut, ch, c);
            if (cut.kind == Cut::Kind::feasibility)
            {
                if (!known && l < 0.0) excluded = true;
            }
            else
                eta = std::min(eta, l);
            if (excluded) break;
        }
        if (excluded) continue;
        if (known) eta = std::max(eta == std::numeric_limits<double>::infinity() ? *known : eta, *known);
        if (!best.u || eta > best.eta)
        {
            best.u = a;
            best.eta = eta;
        }
    }
    return best;
}

inline std::vector<Assignment> candidates_for(const ScenarioConfig &c, const SchemeSettings &s)
{
    if (s.ris_mode == RisMode::none) return {Assignment{std::vector<int>(static_cast<std::size_t>(c.num_groups), 0)}};
    return enumerate_assignments(c.num_groups, c.num_clusters);
}

/// Groups ranked by the Frobenius norm of their full-surface cascade
/// (sum_k ||h~_k||^2 ||H||_F^2); the top min(F, G) get clusters 1, 2, ... in rank order.
inline Assignment initial_assignment(const ChannelRealization &ch, const ScenarioConfig &c, const SchemeSettings &s)
{
    Assignment a{std::vector<int>(static_cast<std::size_t>(c.num_groups), 0)};
    if (s.ris_mode == RisMode::none) return a;
    std::vector<double> score(static_cast<std::size_t>(c.num_groups), 0.0);
    for (int g = 0; g < c.num_groups; ++g)
        for (const auto &row : ch.ris_to_user[static_cast<std::size_t>(g)])
            score[static_cast<std::size_t>(g)] += row.squaredNorm() * ch.uav_to_ris[static_cast<std::size_t>(g)].squaredNorm();
    std::vector<int> order(static_cast<std::size_t>(c.num_groups));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return score[static_cast<std::size_t>(x)] > score[static_cast<std::size_t>(y)]; });
    for (int i = 0; i < c.max_assisted_groups(); ++i) a.u[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i + 1;
    return a;
}

class GlobalInfeasibility : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct Solution
{
    Assignment u;
    SolverPoint point;
    double value = 0.0;
    double lb = 0.0;
    double ub = 0.0;
    int iterations = 0;
    std::vector<GbdIteration> trace;
};

struct GbdOptions
{
    SchemeSettings scheme;
    // Start of the first primal (its assignment and continuous point); later primals start cold.
    std::optional<std::pair<Assignment, SolverPoint>> warm_start;
};

/// Primal/master alternation until UB - LB <= gbd_tol * max(1, |UB|), the
/// master proposes an assignment already solved, or gbd_max_iter.
inline Solution gbd_solve(const ChannelRealization &ch, const ScenarioConfig &c, const GbdOptions &opts = {})
{
    using clock = std::chrono::steady_clock;
    const SchemeSettings &s = opts.scheme;
    const auto candidates = candidates_for(c, s);
    GbdState st;
    Solution sol;
    Assignment u = opts.warm_start ? opts.warm_start->first : initial_assignment(ch, c, s);
    std::optional<SolverPoint> start;
    if (opts.warm_start) start = opts.warm_start->second;
    std::vector<Assignment> visited;

    for (int it = 1; it <= c.solver_budgets.gbd_max_iter; ++it)
    {
        const auto t0 = clock::now();
        st.iteration = it;
        visited.push_back(u);
        auto outcome = solve_primal(u, ch, c, s, start);
        start.reset();
        bool feasible = false;
        if (auto *f = std::get_if<PrimalFeasible>(&outcome))
        {
            feasible = true;
            st.feasible_visits.emplace_back(u, f->value);
            if (f->value > st.lb)
            {
                st.lb = f->value;
                st.incumbent_u = u;
                st.incumbent = f->point;
            }
            st.cuts.push_back({Cut::Kind::optimality, u, f->point, f->mu});
        }
        else
        {
            auto &inf = std::get<PrimalInfeasible>(outcome);
            st.infeasible_visits.push_back(u);
            st.cuts.push_back({Cut::Kind::feasibility, u, inf.point, inf.lambda});
        }

        const MasterResult m = solve_master(st, ch, c, candidates);
        const bool any_optimality = !st.feasible_visits.empty();
        st.ub = m.u ? (any_optimality ? m.eta : std::numeric_limits<double>::infinity())
                    : -std::numeric_limits<double>::infinity();
        const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        sol.trace.push_back({it, u, st.lb, st.ub, feasible, ms});
        sol.iterations = it;

        if (!m.u)
        {
            if (!st.incumbent) throw GlobalInfeasibility("gbd: every assignment is excluded by feasibility cuts");
            break;
        }
        if (st.incumbent && st.ub - st.lb <= c.solver_budgets.gbd_tol * std::max(1.0, std::abs(st.ub))) break;
        if (std::find(visited.begin(), visited.end(), *m.u) != visited.end()) break;
        u = *m.u;
    }
    if (!st.incumbent) throw GlobalInfeasibility("gbd: no feasible assignment found");
    sol.u = *st.incumbent_u;
    sol.point = *st.incumbent;
    sol.value = st.lb;
    sol.lb = st.lb;
    sol.ub = st.ub;
    return sol;
}

inline void write_gbd_trace_csv(std::ostream &os, const std::vector<GbdIteration> &trace, bool timing = true)
{
    os << "iteration,assignment,lb,ub,primal_status,wall_time_ms\n";
    char buf[256];
    for (const auto &t : trace)
    {
        std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%s,%.3f\n", t.iteration, t.u.to_string().c_str(), t.lb, t.ub,
                      t.primal_feasible ? "feasible" : "infeasible", timing ? t.wall_ms : 0.0);
        os << buf;
    }
}

} // namespace bdris
