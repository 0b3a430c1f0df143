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

#include "bdris/rate_model.hpp"

#include <Eigen/Eigenvalues>

#include <limits>
#include <ostream>
#include <variant>
#include <vector>

namespace bdris
{

/// How a group uses its streams.
///   rsma: one common stream plus one private stream per user.
///   noma: the weakest user's private stream is switched off and its whole
///         message rides on the common stream (two-layer superposition + SIC).
///   sdma: no common stream.
enum class StreamMode
{
    rsma,
    noma,
    sdma
};

inline std::string_view to_string(StreamMode m)
{
    switch (m)
    {
    case StreamMode::rsma: return "rsma";
    case StreamMode::noma: return "noma";
    case StreamMode::sdma: return "sdma";
    }
    return "?";
}

class BisectionError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct WmmseOptions
{
    int max_iter = 200;
    double tol = 1e-9; // relative improvement of the utility per sweep
    double diagonal_loading = 0.0;
    StreamMode mode = StreamMode::rsma;
    int noma_weak_user = -1; // -1: pick the weakest effective channel
    StreamWeights weights;
};

struct WmmseTraceEntry
{
    int sweep = 0;
    double wsr = 0.0;
    double power_used = 0.0;
};

struct WmmseResult
{
    CMat T;
    GroupRates rates;
    double wsr = 0.0;
    double power_multiplier = 0.0; // multiplier of the power constraint at the last precoder update
    int sweeps = 0;
    std::vector<WmmseTraceEntry> trace;
};

/// Index of the user with the smallest ||h_eff|| (lowest index on ties).
inline int weakest_user(const std::vector<CRow> &heff)
{
    int weak = 0;
    for (int k = 1; k < static_cast<int>(heff.size()); ++k)
        if (heff[k].squaredNorm() < heff[weak].squaredNorm()) weak = k;
    return weak;
}

inline std::vector<bool> active_columns(int users, StreamMode mode, int weak)
{
    std::vector<bool> on(static_cast<std::size_t>(users + 1), true);
    if (mode == StreamMode::sdma) on[0] = false;
    if (mode == StreamMode::noma) on[static_cast<std::size_t>(weak + 1)] = false;
    return on;
}

/// Matched-filter start: each active column points along its user's channel
/// (the common column along the sum of channels) and the budget is split
/// equally, so the power constraint holds with equality unless every channel is zero.
inline CMat matched_filter_init(const std::vector<CRow> &heff, int antennas, double power, StreamMode mode, int weak)
{
    const int K = static_cast<int>(heff.size());
    CMat T = CMat::Zero(antennas, K + 1);
    const auto on = active_columns(K, mode, weak);
    CVec sum = CVec::Zero(antennas);
    for (const auto &h : heff) sum += h.adjoint();
    if (on[0]) T.col(0) = sum;
    for (int k = 0; k < K; ++k)
        if (on[static_cast<std::size_t>(k + 1)]) T.col(k + 1) = heff[static_cast<std::size_t>(k)].adjoint();
    int nonzero = 0;
    for (int s = 0; s <= K; ++s) nonzero += T.col(s).norm() > 0.0 ? 1 : 0;
    if (nonzero == 0) return T;
    for (int s = 0; s <= K; ++s)
    {
        const double nrm = T.col(s).norm();
        if (nrm > 0.0) T.col(s) *= std::sqrt(power / nonzero) / nrm;
    }
    return T;
}

namespace detail
{

/// MMSE receivers and weights 1/MSE at the current precoder, per user.
struct Equalizers
{
    std::vector<cplx> g_p, g_c;
    std::vector<double> w_p, w_c;
};

inline Equalizers mmse_equalizers(const std::vector<CRow> &heff, const CMat &T, double noise)
{
    const auto K = static_cast<Eigen::Index>(heff.size());
    Equalizers eq;
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const CRow rx = heff[static_cast<std::size_t>(k)] * T;
        const double total_p = rx.tail(K).squaredNorm() + noise;
        const double total_c = total_p + std::norm(rx(0));
        eq.g_p.push_back(std::conj(rx(k + 1)) / total_p);
        eq.w_p.push_back(1.0 / std::max(1.0 - std::norm(rx(k + 1)) / total_p, 1e-300));
        eq.g_c.push_back(std::conj(rx(0)) / total_c);
        eq.w_c.push_back(1.0 / std::max(1.0 - std::norm(rx(0)) / total_c, 1e-300));
    }
    return eq;
}

/// Rate minorizer (ln w - w e(T) + 1) / ln 2 of every stream for fixed
/// receivers; tight at the precoder the receivers were computed from.
struct Surrogate
{
    RVec common;
    RVec priv;
};

inline Surrogate surrogate(const std::vector<CRow> &heff, const CMat &T, double noise, const Equalizers &eq)
{
    const auto K = static_cast<Eigen::Index>(heff.size());
    Surrogate out{RVec(K), RVec(K)};
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const auto i = static_cast<std::size_t>(k);
        const CRow rx = heff[i] * T;
        const double total_p = rx.tail(K).squaredNorm() + noise;
        const double total_c = total_p + std::norm(rx(0));
        const double e_p = std::norm(eq.g_p[i]) * total_p - 2.0 * (eq.g_p[i] * rx(k + 1)).real() + 1.0;
        const double e_c = std::norm(eq.g_c[i]) * total_c - 2.0 * (eq.g_c[i] * rx(0)).real() + 1.0;
        out.priv(k) = (std::log(eq.w_p[i]) - eq.w_p[i] * e_p + 1.0) * inv_ln2;
        out.common(k) = (std::log(eq.w_c[i]) - eq.w_c[i] * e_c + 1.0) * inv_ln2;
    }
    return out;
}

struct PrecoderSystem
{
    Eigen::SelfAdjointEigenSolver<CMat> priv, common;
    CMat priv_rhs;   // U_p^H [b_1..b_K]
    CVec common_rhs; // U_c^H b_0
};

// Eigenvalues below 1e-13 of this scale count as zero for the min-norm solution at mu = 0.
inline double system_scale(const PrecoderSystem &s)
{
    return std::max({s.priv.eigenvalues().cwiseAbs().maxCoeff(), s.common.eigenvalues().cwiseAbs().maxCoeff(), 1e-300});
}

inline double system_power(const PrecoderSystem &s, double mu)
{
    const auto &lp = s.priv.eigenvalues();
    const auto &lc = s.common.eigenvalues();
    const double scale = system_scale(s);
    auto term = [&](double lambda, double num) {
        const double d = lambda + mu;
        if (mu == 0.0 && std::abs(lambda) <= 1e-13 * scale) return 0.0; // min-norm solution at mu = 0
        return num / (d * d);
    };
    double p = 0.0;
    for (Eigen::Index i = 0; i < lp.size(); ++i) p += term(lp(i), s.priv_rhs.row(i).squaredNorm());
    for (Eigen::Index i = 0; i < lc.size(); ++i) p += term(lc(i), std::norm(s.common_rhs(i)));
    return p;
}

inline CVec solve_column(const Eigen::SelfAdjointEigenSolver<CMat> &es, const CVec &rhs_rot, double mu, double scale)
{
    const auto &l = es.eigenvalues();
    CVec y(rhs_rot.size());
    for (Eigen::Index i = 0; i < l.size(); ++i)
    {
        const double d = l(i) + mu;
        y(i) = (mu == 0.0 && std::abs(l(i)) <= 1e-13 * scale) ? cplx(0.0) : rhs_rot(i) / d;
    }
    return es.eigenvectors() * y;
}

struct PrecoderUpdate
{
    CMat T;
    double mu = 0.0;
};

/// Minimizer of  sum_k a_k w_pk e_pk + w_c sum_k beta_k w_ck e_ck  over
/// ||T||^2 <= P: (A + mu I) t = b per column, mu by bisection.
inline PrecoderUpdate precoder_update(const std::vector<CRow> &heff, const Equalizers &eq, const RVec &beta,
                                      const std::vector<bool> &on, const StreamWeights &w, double power,
                                      double loading)
{
    const int K = static_cast<int>(heff.size());
    const Eigen::Index N = heff.front().size();
    CMat A_p = CMat::Identity(N, N) * loading;
    CMat A_c = CMat::Identity(N, N) * loading;
    CMat B = CMat::Zero(N, K);
    CVec b0 = CVec::Zero(N);
    for (int k = 0; k < K; ++k)
    {
        const auto i = static_cast<std::size_t>(k);
        const CRow &h = heff[i];
        const CMat hh = h.adjoint() * h;
        if (on[i + 1])
        {
            const double weight = w.private_weight(k) * eq.w_p[i];
            A_p += weight * std::norm(eq.g_p[i]) * hh;
            B.col(k) = weight * std::conj(eq.g_p[i]) * h.adjoint();
        }
        if (on[0] && beta(k) > 0.0)
        {
            const double weight = w.common * beta(k) * eq.w_c[i];
            const CMat outer = weight * std::norm(eq.g_c[i]) * hh;
            A_c += outer;
            A_p += outer;
            b0 += weight * std::conj(eq.g_c[i]) * h.adjoint();
        }
    }

    PrecoderSystem sys{Eigen::SelfAdjointEigenSolver<CMat>(A_p), Eigen::SelfAdjointEigenSolver<CMat>(A_c), CMat(),
                       CVec()};
    sys.priv_rhs = sys.priv.eigenvectors().adjoint() * B;
    sys.common_rhs = sys.common.eigenvectors().adjoint() * b0;

    double mu = 0.0;
    if (system_power(sys, 0.0) > power)
    {
        const double rhs_energy = B.squaredNorm() + b0.squaredNorm();
        double lo = 0.0;
        double hi = std::sqrt(rhs_energy / power) * (1.0 + 1e-9);
        if (!(system_power(sys, hi) <= power)) throw BisectionError("wmmse: power multiplier bracket failed");
        for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (system_power(sys, mid) > power ? lo : hi) = mid;
        }
        mu = hi;
    }

    PrecoderUpdate out{CMat::Zero(N, K + 1), mu};
    const double scale = system_scale(sys);
    if (on[0]) out.T.col(0) = solve_column(sys.common, sys.common_rhs, mu, scale);
    for (int k = 0; k < K; ++k)
        if (on[static_cast<std::size_t>(k + 1)])
            out.T.col(k + 1) = solve_column(sys.priv, sys.priv_rhs.col(k), mu, scale);
    const double used = out.T.squaredNorm();
    if (!out.T.allFinite() || used > power * (1.0 + 1e-10))
        throw BisectionError("wmmse: precoder update broke the power budget");
    if (used > power) out.T *= std::sqrt(power / used);
    return out;
}

/// Maximizes  sum_k a_k S_pk + w_c min_k S_ck  over the power ball. The min
/// is handled through its dual: beta on the simplex minimizes the convex
/// function d(beta) = max_T [sum a S_p + w_c sum beta S_c], whose gradient
/// is S_c at the inner maximizer. Bisection on beta_1 for two users,
/// exponentiated-gradient steps otherwise. Returns the best T seen.
inline PrecoderUpdate maximize_surrogate(const std::vector<CRow> &heff, const Equalizers &eq, double noise,
                                         const std::vector<bool> &on, const StreamWeights &w, double power,
                                         double loading)
{
    const int K = static_cast<int>(heff.size());
    PrecoderUpdate best;
    double best_value = -std::numeric_limits<double>::infinity();
    auto evaluate = [&](const RVec &beta) {
        PrecoderUpdate u = precoder_update(heff, eq, beta, on, w, power, loading);
        const Surrogate s = surrogate(heff, u.T, noise, eq);
        double v = 0.0;
        for (int k = 0; k < K; ++k)
            if (on[static_cast<std::size_t>(k + 1)]) v += w.private_weight(k) * s.priv(k);
        if (on[0]) v += w.common * s.common.minCoeff();
        if (v > best_value)
        {
            best_value = v;
            best = u;
        }
        return s.common;
    };

    if (!on[0] || w.common == 0.0 || K == 1)
    {
        evaluate(RVec::Ones(K));
        return best;
    }
    if (K == 2)
    {
        auto slope = [&](double b1) {
            const RVec s = evaluate((RVec(2) << b1, 1.0 - b1).finished());
            return s(0) - s(1);
        };
        if (slope(0.0) >= 0.0 || slope(1.0) <= 0.0) return best;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 40; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) > 0.0 ? hi : lo) = mid;
        }
        return best;
    }
    RVec beta = RVec::Constant(K, 1.0 / K);
    for (int it = 0; it < 100; ++it)
    {
        const RVec s = evaluate(beta);
        const double range = s.maxCoeff() - s.minCoeff();
        if (range <= 1e-15) break;
        const double eta = 4.0 / (range * std::sqrt(it + 1.0));
        beta = (beta.array() * (-eta * (s.array() - s.minCoeff())).exp()).matrix();
        beta /= beta.sum();
    }
    return best;
}

} // namespace detail

/// WMMSE for one group with phases fixed. Each sweep computes MMSE receivers
/// and weights 1/MSE for all streams, then maximizes the resulting rate
/// minorizer (common term: min over users) under the power budget. A sweep
/// that would lower the utility is damped towards the current point; if no
/// damped step helps the solver stops, so the trace never decreases.
inline WmmseResult wmmse_group(const std::vector<CRow> &heff, const CMat &T_init, double power, double noise,
                               const WmmseOptions &opts)
{
    const int K = static_cast<int>(heff.size());
    const int weak = opts.noma_weak_user >= 0 ? opts.noma_weak_user : weakest_user(heff);
    const auto on = active_columns(K, opts.mode, weak);
    const StreamWeights &w = opts.weights;

    WmmseResult res;
    res.T = T_init;
    for (int s = 0; s <= K; ++s)
        if (!on[static_cast<std::size_t>(s)]) res.T.col(s).setZero();
    res.rates = evaluate_group(heff, res.T, noise);
    res.wsr = group_utility(res.rates, w);
    res.trace.push_back({0, res.wsr, res.T.squaredNorm()});

    for (int sweep = 1; sweep <= opts.max_iter; ++sweep)
    {
        const detail::Equalizers eq = detail::mmse_equalizers(heff, res.T, noise);
        const detail::PrecoderUpdate up =
            detail::maximize_surrogate(heff, eq, noise, on, w, power, opts.diagonal_loading);

        bool accepted = false;
        for (double tau = 1.0; tau >= 1.0 / 1024.0; tau *= 0.5)
        {
            const CMat cand = tau == 1.0 ? up.T : CMat(res.T + tau * (up.T - res.T));
            auto rates = evaluate_group(heff, cand, noise);
            const double value = group_utility(rates, w);
            if (value >= res.wsr)
            {
                const double gain = value - res.wsr;
                res.T = cand;
                res.rates = std::move(rates);
                res.wsr = value;
                res.power_multiplier = up.mu;
                res.sweeps = sweep;
                res.trace.push_back({sweep, value, cand.squaredNorm()});
                accepted = gain > opts.tol * std::max(std::abs(value), 1e-12);
                break;
            }
        }
        if (!accepted) break;
    }
    return res;
}

/// WMMSE over all groups with phases fixed; groups are independent.
struct PrecoderSolve
{
    PrecoderSet precoders;
    std::vector<WmmseResult> per_group;
};

inline PrecoderSolve wmmse_solve(const Assignment &a, const PhaseConfig &p, const ChannelRealization &ch,
                                 const ScenarioConfig &c, const PrecoderSet &T_init, const WmmseOptions &opts,
                                 const std::vector<int> &weak_users = {},
                                 const std::vector<StreamWeights> &weights = {})
{
    PrecoderSolve out;
    for (int g = 0; g < c.num_groups; ++g)
    {
        const GroupChannel gc = group_channel(ch, g, a.u[g]);
        const auto heff = effective_channels(gc, a.assisted(g) ? p.blocks[static_cast<std::size_t>(g)] : CMat());
        WmmseOptions o = opts;
        if (!weak_users.empty()) o.noma_weak_user = weak_users[static_cast<std::size_t>(g)];
        if (!weights.empty()) o.weights = weights[static_cast<std::size_t>(g)];
        WmmseResult r;
        try
        {
            r = wmmse_group(heff, T_init.T.at(static_cast<std::size_t>(g)), c.max_uav_power_w, c.noise_power_w(), o);
        }
        catch (const BisectionError &)
        {
            o.diagonal_loading = std::max(o.diagonal_loading, 1e-12);
            r = wmmse_group(heff, T_init.T.at(static_cast<std::size_t>(g)), c.max_uav_power_w, c.noise_power_w(), o);
        }
        out.precoders.T.push_back(r.T);
        out.per_group.push_back(std::move(r));
    }
    return out;
}

inline void write_wmmse_trace_csv(std::ostream &os, const std::vector<WmmseResult> &groups)
{
    os << "group,sweep,wsr,power_used\n";
    char buf[160];
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (const auto &e : groups[g].trace)
        {
            std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g\n", g, e.sweep, e.wsr, e.power_used);
            os << buf;
        }
}

// ---- common-rate allocation ----------------------------------------------

struct InfeasibilityCertificate
{
    double violation = 0.0; // sum of floors minus the common capacity
    RVec floors;
};

using AllocationOutcome = std::variant<RVec, InfeasibilityCertificate>;

/// Splits the common capacity c = min_k R^c_k among users: each user first
/// gets the floor max(0, R^min/bw - R^p_k) it needs to meet the QoS target,
/// then the surplus is shared equally. Infeasible floors yield a certificate.
inline AllocationOutcome allocate_common(const RVec &rate_c, const RVec &rate_p, double min_rate_bps,
                                         double bandwidth_hz)
{
    const double cap = common_capacity(rate_c);
    RVec floors = (min_rate_bps / bandwidth_hz - rate_p.array()).cwiseMax(0.0).matrix();
    const double need = floors.sum();
    if (need > cap) return InfeasibilityCertificate{need - cap, floors};
    return RVec((floors.array() + (cap - need) / static_cast<double>(rate_c.size())).matrix());
}

/// Shares used when the floors do not fit: floors scaled to the capacity.
inline RVec scaled_floors(const InfeasibilityCertificate &cert, double capacity)
{
    const double need = cert.floors.sum();
    return need > 0.0 ? RVec(cert.floors * (capacity / need)) : RVec(RVec::Zero(cert.floors.size()));
}

} // namespace bdris
