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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bdris
{

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using CRow = Eigen::RowVectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double inv_ln2 = 1.0 / std::numbers::ln2;

/// Reflection model of the surface. `none` disables the reflected path entirely.
enum class RisMode
{
    block_unitary,
    diagonal_circle,
    none
};

inline std::string_view to_string(RisMode m)
{
    switch (m)
    {
    case RisMode::block_unitary: return "block_unitary";
    case RisMode::diagonal_circle: return "diagonal_circle";
    case RisMode::none: return "none";
    }
    return "?";
}

inline RisMode ris_mode_from_string(std::string_view s)
{
    if (s == "block_unitary") return RisMode::block_unitary;
    if (s == "diagonal_circle") return RisMode::diagonal_circle;
    if (s == "none") return RisMode::none;
    throw std::invalid_argument("unknown ris_mode '" + std::string(s) + "'");
}

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3 &, const Vec3 &) = default;
    Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3 &o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Real inner product <A, B> = Re tr(A^H B) on complex matrices.
template <class A, class B>
double real_inner(const Eigen::MatrixBase<A> &a, const Eigen::MatrixBase<B> &b)
{
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

} // namespace bdris
