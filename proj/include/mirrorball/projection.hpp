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

// Forward and inverse mirror ball projection terms.
//
// Frame: the ball is the unit sphere at the origin, +z points from the ball
// towards the camera. A reflection direction r maps to a point on the unit
// disk (ix rightward, iy upward) that is the ball's silhouette in the image.
//
// Classical term (orthographic camera):
//     p = (r_x, r_y) / sqrt(2 (r_z + 1))
// Improved term (perspective camera with reflected field of view alpha):
//     p = (r_x, r_y) / (sqrt(2 (r_z + 1)) * sin(alpha / 4))
// Rays whose image falls outside the unit disk are undefined; they form the
// blind cone behind the ball that shows up as a black circle after unwrapping.

#pragma once

#include <Eigen/Core>

#include <optional>

namespace mirrorball {

// Guard on (r_z + 1) before dividing; the pole itself is a single direction.
inline constexpr double kPoleEpsilon = 1e-12;

// Unit direction in the ball-centered frame. Construction normalizes.
class ReflectionRay
{
public:
    ReflectionRay(double x, double y, double z);
    explicit ReflectionRay(const Eigen::Vector3d& v);

    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }
    const Eigen::Vector3d& vec() const { return v_; }

    // Angle from +z in radians.
    double polar_angle() const;

private:
    Eigen::Vector3d v_;
};

// Point on the normalized image plane of the ball; on-ball iff ix^2 + iy^2 <= 1.
struct DiskPoint
{
    double ix = 0.0;
    double iy = 0.0;

    double norm_squared() const { return ix * ix + iy * iy; }
    bool on_ball() const { return norm_squared() <= 1.0; }
};

// Reflected field of view in degrees, 180 < alpha <= 360.
class FovAlpha
{
public:
    explicit FovAlpha(double alpha_deg);

    double degrees() const { return deg_; }
    double radians() const;
    // sin(alpha / 4), in (0.707, 1] for every admissible alpha.
    double stretch() const { return stretch_; }

private:
    double deg_;
    double stretch_;
};

// Unit normal on the camera-facing hemisphere (nz >= 0). Construction normalizes.
class SurfaceNormal
{
public:
    SurfaceNormal(double nx, double ny, double nz);

    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }
    const Eigen::Vector3d& vec() const { return v_; }

private:
    Eigen::Vector3d v_;
};

// Physical ball radius and camera-to-center distance in millimeters.
struct BallGeometry
{
    double radius_mm;
    double distance_mm;

    BallGeometry(double radius, double distance);
};

// Law of reflection: 2 (i . n) n - i.
ReflectionRay reflect(const ReflectionRay& incident, const SurfaceNormal& normal);

// Normal of the unit sphere seen at disk point p by an orthographic camera:
// (ix, iy, n_z) with n_z recovered from the unit-length constraint.
SurfaceNormal normal_at(const DiskPoint& p);

std::optional<DiskPoint> classical_forward(const ReflectionRay& r);

std::optional<DiskPoint> improved_forward(const ReflectionRay& r, const FovAlpha& fov);

// Inverse of the improved term. Throws ValidationError for off-ball points.
ReflectionRay improved_inverse(const DiskPoint& p, const FovAlpha& fov);

// alpha = 360 - 2 asin(R / d): everything except the cone hidden behind the
// ball as seen from the camera.
FovAlpha alpha_from_geometry(const BallGeometry& geom);

// Half-angle in degrees of the cone around +z that the projection can represent.
double defined_region(const FovAlpha& fov);

// True when improved_forward(r, fov) is defined.
bool is_defined(const ReflectionRay& r, const FovAlpha& fov);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

} // namespace mirrorball
