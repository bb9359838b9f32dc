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

#pragma once

#include <Eigen/Core>

#include <array>
#include <string>

namespace mirrorball {

// Proper 3x3 rotation: R^T R = I and det R = +1, both within 1e-9.
class Rotation3
{
public:
    static constexpr double kTolerance = 1e-9;

    Rotation3() : m_(Eigen::Matrix3d::Identity()) {}
    // Throws ValidationError naming the violated invariant.
    explicit Rotation3(const Eigen::Matrix3d& m);

    static Rotation3 identity() { return Rotation3(); }
    static Rotation3 from_row_major(const std::array<double, 9>& values);
    // Right-handed rotation by angle_deg about axis (need not be unit).
    static Rotation3 from_axis_angle(const Eigen::Vector3d& axis, double angle_deg);

    const Eigen::Matrix3d& matrix() const { return m_; }
    std::array<double, 9> row_major() const;

    Rotation3 transpose() const;
    Eigen::Vector3d apply(const Eigen::Vector3d& v) const { return m_ * v; }

    friend Rotation3 operator*(const Rotation3& a, const Rotation3& b);
    friend bool operator==(const Rotation3& a, const Rotation3& b) { return a.m_ == b.m_; }

private:
    struct Unchecked
    {
    };
    Rotation3(const Eigen::Matrix3d& m, Unchecked) : m_(m) {}

    Eigen::Matrix3d m_;
};

// Describes why m is not a proper rotation, or returns an empty string.
std::string rotation_violation(const Eigen::Matrix3d& m);

// Angle of a^T b in degrees.
double geodesic_distance_deg(const Rotation3& a, const Rotation3& b);

// Yaw about +y, then pitch about the rotated x axis (positive looks up), then
// roll about the view axis; maps camera-frame rays (+z forward, +y up) to the
// outer frame.
Rotation3 view_rotation(double yaw_deg, double pitch_deg, double roll_deg);

} // namespace mirrorball
