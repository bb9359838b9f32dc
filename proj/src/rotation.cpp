/*
 * Copyright 2026 The mirrorball Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mirrorball/rotation.hpp"

#include "mirrorball/error.hpp"
#include "mirrorball/projection.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mirrorball {

std::string rotation_violation(const Eigen::Matrix3d& m)
{
    if (!m.allFinite())
    {
        return "matrix contains non-finite values";
    }
    const double ortho_err = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho_err > Rotation3::kTolerance)
    {
        std::ostringstream os;
        os << "matrix is not orthonormal: max |R^T R - I| = " << ortho_err << " exceeds " << Rotation3::kTolerance;
        return os.str();
    }
    const double det = m.determinant();
    if (std::abs(det - 1.0) > Rotation3::kTolerance)
    {
        std::ostringstream os;
        os << "matrix is not a proper rotation: det = " << det;
        return os.str();
    }
    return {};
}

Rotation3::Rotation3(const Eigen::Matrix3d& m)
    : m_(m)
{
    if (auto why = rotation_violation(m); !why.empty())
    {
        throw ValidationError(why);
    }
}

Rotation3 Rotation3::from_row_major(const std::array<double, 9>& values)
{
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
    {
        for (int c = 0; c < 3; ++c)
        {
            m(r, c) = values[static_cast<std::size_t>(r * 3 + c)];
        }
    }
    return Rotation3(m);
}

Rotation3 Rotation3::from_axis_angle(const Eigen::Vector3d& axis, double angle_deg)
{
    if (!(axis.norm() > 0.0))
    {
        throw ValidationError("rotation axis must be non-zero");
    }
    const Eigen::AngleAxisd aa(deg_to_rad(angle_deg), axis.normalized());
    return Rotation3(aa.toRotationMatrix(), Unchecked{});
}

std::array<double, 9> Rotation3::row_major() const
{
    std::array<double, 9> out{};
    for (int r = 0; r < 3; ++r)
    {
        for (int c = 0; c < 3; ++c)
        {
            out[static_cast<std::size_t>(r * 3 + c)] = m_(r, c);
        }
    }
    return out;
}

Rotation3 Rotation3::transpose() const { return Rotation3(m_.transpose(), Unchecked{}); }

Rotation3 operator*(const Rotation3& a, const Rotation3& b) { return Rotation3(a.m_ * b.m_, Rotation3::Unchecked{}); }

double geodesic_distance_deg(const Rotation3& a, const Rotation3& b)
{
    const Eigen::Matrix3d d = a.matrix().transpose() * b.matrix();
    const double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
    // Near zero acos loses precision; use the skew part for the sine.
    const Eigen::Vector3d w(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
    return rad_to_deg(std::atan2(0.5 * w.norm(), c));
}

Rotation3 view_rotation(double yaw_deg, double pitch_deg, double roll_deg)
{
    const Eigen::Matrix3d yaw = Eigen::AngleAxisd(deg_to_rad(yaw_deg), Eigen::Vector3d::UnitY()).toRotationMatrix();
    const Eigen::Matrix3d pitch = Eigen::AngleAxisd(-deg_to_rad(pitch_deg), Eigen::Vector3d::UnitX()).toRotationMatrix();
    const Eigen::Matrix3d roll = Eigen::AngleAxisd(deg_to_rad(roll_deg), Eigen::Vector3d::UnitZ()).toRotationMatrix();
    return Rotation3(yaw * pitch * roll);
}

} // namespace mirrorball
