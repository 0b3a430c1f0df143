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

#include <Eigen/QR>

#include <optional>

namespace bdris
{

enum class Manifold
{
    block_unitary,  // n x n unitary matrices
    diagonal_circle // n unit-modulus entries (stored as an n x 1 column)
};

struct ManifoldPoint
{
    CMat value;
    Manifold manifold = Manifold::block_unitary;

    /// Scattering block represented by this point.
    CMat as_block() const
    {
        if (manifold == Manifold::block_unitary) return value;
        return value.col(0).asDiagonal();
    }

    static ManifoldPoint from_block(const CMat &block, Manifold m)
    {
        if (m == Manifold::block_unitary) return {block, m};
        return {CMat(block.diagonal()), m};
    }
};

/// ||X^H X - I||_F for unitary points, max_i | |x_i| - 1 | on the circle.
inline double feasibility_residual(const ManifoldPoint &x)
{
    if (x.manifold == Manifold::block_unitary)
        return (x.value.adjoint() * x.value - CMat::Identity(x.value.cols(), x.value.cols())).norm();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.value.size(); ++i) worst = std::max(worst, std::abs(std::abs(x.value(i)) - 1.0));
    return worst;
}

/// Orthogonal projection of an ambient direction onto the tangent space at x.
///   unitary: G - X herm(X^H G);  circle: g_i - Re(g_i conj(x_i)) x_i
inline CMat project_tangent(const ManifoldPoint &x, const CMat &g)
{
    if (x.manifold == Manifold::block_unitary)
    {
        const CMat xg = x.value.adjoint() * g;
        return g - x.value * (0.5 * (xg + xg.adjoint()));
    }
    CMat out(g.rows(), 1);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
    {
        const cplx xi = x.value(i);
        out(i) = g(i) - (g(i) * std::conj(xi)).real() * xi;
    }
    return out;
}

/// Unitary factor of a QR decomposition with the phases of R's diagonal moved
/// into Q, which makes diag(R) real positive and Q unique.
inline CMat qr_unitary_factor(const CMat &m)
{
    Eigen::HouseholderQR<CMat> qr(m);
    CMat q = qr.householderQ();
    const CMat &r = qr.matrixQR();
    for (Eigen::Index i = 0; i < m.cols(); ++i)
    {
        const cplx d = r(i, i);
        const double mag = std::abs(d);
        if (mag > 0.0) q.col(i) *= d / mag;
    }
    return q;
}

/// Maps x + step * xi back onto the manifold (QR retraction / entrywise
/// normalization). Returns nullopt when a circle entry collapses to zero; the
/// caller should shrink the step.
inline std::optional<ManifoldPoint> retract(const ManifoldPoint &x, const CMat &xi, double step)
{
    if (step == 0.0) return x;
    const CMat y = x.value + step * xi;
    if (x.manifold == Manifold::block_unitary)
    {
        if (!y.allFinite()) return std::nullopt;
        return ManifoldPoint{qr_unitary_factor(y), x.manifold};
    }
    CMat out(y.rows(), 1);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
    {
        const double mag = std::abs(y(i));
        if (!(mag > 1e-300) || !std::isfinite(mag)) return std::nullopt;
        out(i) = y(i) / mag;
    }
    return ManifoldPoint{std::move(out), x.manifold};
}

} // namespace bdris
