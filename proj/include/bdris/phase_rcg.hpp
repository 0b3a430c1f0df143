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

#include "bdris/manifold.hpp"
#include "bdris/rate_model.hpp"

#include <concepts>
#include <functional>
#include <ostream>
#include <vector>

namespace bdris
{

enum class BetaRule
{
    polak_ribiere_plus,
    fletcher_reeves
};

struct RcgOptions
{
    int max_iter = 100;
    double grad_tol = 1e-10;    // on the Riemannian gradient norm
    double initial_step = 1.0;  // length of the first trial displacement
    double max_step = 2.0;      // cap on any trial displacement
    double contraction = 0.5;
    double armijo = 1e-4;
    int max_backtracks = 60;
    BetaRule beta_rule = BetaRule::polak_ribiere_plus;
    // Observer called with every accepted iterate (including the start point).
    std::function<void(const ManifoldPoint &, double)> on_iterate;
};

struct RcgTraceEntry
{
    int iteration = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
};

struct RcgResult
{
    ManifoldPoint point;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false; // gradient tolerance reached
    bool stalled = false;   // line search found no ascent
    std::vector<RcgTraceEntry> trace;
};

/// Smooth objective over a scattering block. `gradient` returns the conjugate
/// Wirtinger derivative dF/dPhi* as a full n x n matrix.
template <class F>
concept PhaseObjective = requires(const F &f, const CMat &block) {
    { f.value(block) } -> std::convertible_to<double>;
    { f.gradient(block) } -> std::convertible_to<CMat>;
};

namespace detail
{

// Steepest-ascent direction for <A,B> = Re tr(A^H B) is twice the Wirtinger gradient.
template <PhaseObjective F>
CMat ambient_gradient(const F &f, const ManifoldPoint &x)
{
    const CMat w = f.gradient(x.as_block());
    if (x.manifold == Manifold::block_unitary) return 2.0 * w;
    return 2.0 * CMat(w.diagonal());
}

} // namespace detail

/// Riemannian conjugate-gradient ascent with Armijo backtracking, projection
/// vector transport and PR+ (or FR) conjugacy with restart on non-ascent directions.
template <PhaseObjective F>
RcgResult rcg_maximize(const F &f, ManifoldPoint x0, const RcgOptions &opts = {})
{
    RcgResult res;
    res.point = std::move(x0);
    res.objective = f.value(res.point.as_block());
    CMat grad = project_tangent(res.point, detail::ambient_gradient(f, res.point));
    double gnorm = grad.norm();
    res.trace.push_back({0, res.objective, gnorm, 0.0});
    if (opts.on_iterate) opts.on_iterate(res.point, res.objective);

    CMat dir = grad;
    double last_disp = opts.initial_step / 2.0;
    for (int it = 1; it <= opts.max_iter; ++it)
    {
        if (gnorm <= opts.grad_tol)
        {
            res.converged = true;
            break;
        }
        double slope = real_inner(grad, dir);
        if (!(slope > 0.0))
        {
            dir = grad;
            slope = gnorm * gnorm;
        }
        const double dnorm = dir.norm();
        double alpha = std::min(2.0 * last_disp, opts.max_step) / dnorm;

        bool accepted = false;
        ManifoldPoint next;
        double fnext = 0.0;
        for (int b = 0; b < opts.max_backtracks; ++b, alpha *= opts.contraction)
        {
            auto cand = retract(res.point, dir, alpha);
            if (!cand) continue;
            const double fc = f.value(cand->as_block());
            if (std::isfinite(fc) && fc >= res.objective + opts.armijo * alpha * slope && fc > res.objective)
            {
                next = std::move(*cand);
                fnext = fc;
                accepted = true;
                break;
            }
        }
        if (!accepted)
        {
            res.stalled = true;
            break;
        }

        const CMat grad_next = project_tangent(next, detail::ambient_gradient(f, next));
        const CMat grad_moved = project_tangent(next, grad);
        const double denom = gnorm * gnorm;
        double beta = 0.0;
        if (opts.beta_rule == BetaRule::polak_ribiere_plus)
            beta = std::max(0.0, real_inner(grad_next, CMat(grad_next - grad_moved)) / denom);
        else
            beta = grad_next.squaredNorm() / denom;

        dir = grad_next + beta * project_tangent(next, dir);
        last_disp = alpha * dnorm;
        res.point = std::move(next);
        res.objective = fnext;
        grad = grad_next;
        gnorm = grad.norm();
        res.iterations = it;
        res.trace.push_back({it, res.objective, gnorm, alpha});
        if (opts.on_iterate) opts.on_iterate(res.point, res.objective);
    }
    if (gnorm <= opts.grad_tol) res.converged = true;
    return res;
}

/// Group utility  scale * (sum_k w_k R^p_k + w_c R^c_{k*})  as a function of the
/// scattering block, where k* is the user with the smallest common rate (lowest
/// index on ties). With the common stream fully allocated this is the group's
/// share of the overall rate.
class GroupPhaseObjective
{
  public:
    GroupPhaseObjective(const GroupChannel &gc, CMat T, double noise, StreamWeights weights = {}, double scale = 1.0)
        : gc_(gc), T_(std::move(T)), noise_(noise), weights_(std::move(weights)), scale_(scale)
    {
        cascade_ = gc_.uav_to_ris * T_;
        for (const auto &h : gc_.direct) direct_rx_.push_back(h * T_);
    }

    double value(const CMat &phi) const
    {
        const auto rx = received(phi);
        RVec rc(users()), rp(users());
        for (int k = 0; k < users(); ++k)
        {
            const double total_p = rx[k].tail(streams() - 1).squaredNorm() + noise_;
            const double sig_p = std::norm(rx[k](k + 1));
            rp(k) = std::log2(total_p / (total_p - sig_p));
            rc(k) = std::log2((total_p + std::norm(rx[k](0))) / total_p);
        }
        double v = weights_.common * rc.minCoeff();
        for (int k = 0; k < users(); ++k) v += weights_.private_weight(k) * rp(k);
        return scale_ * v;
    }

    CMat gradient(const CMat &phi) const
    {
        const auto rx = received(phi);
        const Eigen::Index n = phi.rows();
        CMat grad = CMat::Zero(n, n);

        int worst = 0;
        double worst_rate = std::numeric_limits<double>::infinity();
        for (int k = 0; k < users(); ++k)
        {
            const double total_p = rx[k].tail(streams() - 1).squaredNorm() + noise_;
            const double rc = std::log2((total_p + std::norm(rx[k](0))) / total_p);
            if (rc < worst_rate)
            {
                worst_rate = rc;
                worst = k;
            }
        }

        for (int k = 0; k < users(); ++k)
        {
            const CRow &a = rx[k];
            const double total_p = a.tail(streams() - 1).squaredNorm() + noise_;
            const double den_p = total_p - std::norm(a(k + 1));
            const double wk = weights_.private_weight(k);
            RVec coef = RVec::Zero(streams());
            // d log2(S_all/S_den) = (1/ln2)(d S_all / S_all - d S_den / S_den)
            for (Eigen::Index s = 1; s < streams(); ++s)
                coef(s) += wk * (1.0 / total_p - (s == k + 1 ? 0.0 : 1.0 / den_p));
            if (k == worst && weights_.common != 0.0)
            {
                const double total_c = total_p + std::norm(a(0));
                coef(0) += weights_.common / total_c;
                for (Eigen::Index s = 1; s < streams(); ++s)
                    coef(s) += weights_.common * (1.0 / total_c - 1.0 / total_p);
            }
            // d|a_s|^2 / dPhi* = a_s h~^H (H t_s)^H
            const CRow weighted = (coef.transpose().cast<cplx>().array() * a.array()).matrix();
            grad += gc_.ris_to_user[static_cast<std::size_t>(k)].adjoint() * (weighted * cascade_.adjoint());
        }
        return (scale_ * inv_ln2) * grad;
    }

    int users() const { return gc_.users(); }
    Eigen::Index streams() const { return T_.cols(); }

  private:
    std::vector<CRow> received(const CMat &phi) const
    {
        std::vector<CRow> rx;
        rx.reserve(direct_rx_.size());
        for (int k = 0; k < users(); ++k)
            rx.push_back(direct_rx_[k] + gc_.ris_to_user[static_cast<std::size_t>(k)] * (phi * cascade_));
        return rx;
    }

    const GroupChannel &gc_;
    CMat T_;
    double noise_;
    StreamWeights weights_;
    double scale_;
    CMat cascade_;                // H T  (n x (K+1))
    std::vector<CRow> direct_rx_; // h_k T
};

inline Manifold manifold_for(RisMode mode)
{
    return mode == RisMode::diagonal_circle ? Manifold::diagonal_circle : Manifold::block_unitary;
}

/// Conjugate gradient of group g's rate terms  bw_g (sum_k r_k + R^p_k)  with
/// the common shares tied to the common capacity, w.r.t. Phi_g. Requires u_g > 0.
inline CMat euclidean_grad_phase(int g, const Assignment &a, const PhaseConfig &p, const PrecoderSet &t,
                                 const ChannelRealization &ch, const ScenarioConfig &c, const StreamWeights &w = {})
{
    if (!a.assisted(g)) throw std::invalid_argument("euclidean_grad_phase: group is not assisted");
    const GroupChannel gc = cluster_view(ch, g, a.u[g]);
    GroupPhaseObjective obj(gc, t.T.at(static_cast<std::size_t>(g)), c.noise_power_w(), w, bandwidth_factor(c, a, g));
    return obj.gradient(p.blocks.at(static_cast<std::size_t>(g)));
}

struct PhaseSolve
{
    PhaseConfig phases;
    std::vector<RcgResult> per_group; // empty entries for unassisted groups
};

/// Optimizes every assisted group's block with precoders fixed. Groups are
/// independent, so each gets its own RCG run on its own utility.
inline PhaseSolve optimize_phases(const Assignment &a, const PhaseConfig &start, const PrecoderSet &t,
                                  const ChannelRealization &ch, const ScenarioConfig &c, const RcgOptions &opts,
                                  const std::vector<StreamWeights> &weights = {})
{
    PhaseSolve out{start, {}};
    out.per_group.resize(static_cast<std::size_t>(c.num_groups));
    const Manifold m = manifold_for(start.mode);
    for (int g = 0; g < c.num_groups; ++g)
    {
        if (!a.assisted(g)) continue;
        const GroupChannel gc = cluster_view(ch, g, a.u[g]);
        const StreamWeights w = weights.empty() ? StreamWeights{} : weights[static_cast<std::size_t>(g)];
        GroupPhaseObjective obj(gc, t.T.at(static_cast<std::size_t>(g)), c.noise_power_w(), w);
        auto res = rcg_maximize(obj, ManifoldPoint::from_block(start.blocks.at(static_cast<std::size_t>(g)), m), opts);
        out.phases.blocks[static_cast<std::size_t>(g)] = res.point.as_block();
        out.per_group[static_cast<std::size_t>(g)] = std::move(res);
    }
    return out;
}

inline void write_rcg_trace_csv(std::ostream &os, const RcgResult &r)
{
    os << "iteration,objective,grad_norm,step\n";
    char buf[160];
    for (const auto &e : r.trace)
    {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e.iteration, e.objective, e.grad_norm, e.step);
        os << buf;
    }
}

} // namespace bdris
