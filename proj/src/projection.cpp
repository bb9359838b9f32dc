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

#include "mirrorball/projection.hpp"

#include "mirrorball/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mirrorball {

namespace {

// Slack for points that land on the rim up to rounding.
constexpr double kRimSlack = 1e-12;

Eigen::Vector3d normalized_or_throw(const Eigen::Vector3d& v, const char* what)
{
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
    {
        throw ValidationError(std::string(what) + " must be a finite non-zero vector");
    }
    return v / n;
}

} // namespace

double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

ReflectionRay::ReflectionRay(double x, double y, double z)
    : ReflectionRay(Eigen::Vector3d(x, y, z))
{
}

ReflectionRay::ReflectionRay(const Eigen::Vector3d& v)
    : v_(normalized_or_throw(v, "reflection ray"))
{
}

double ReflectionRay::polar_angle() const
{
    // atan2 keeps precision near both poles, unlike acos(z).
    return std::atan2(std::hypot(v_.x(), v_.y()), v_.z());
}

FovAlpha::FovAlpha(double alpha_deg)
    : deg_(alpha_deg)
{
    if (!(alpha_deg > 180.0 && alpha_deg <= 360.0))
    {
        throw ValidationError("alpha must satisfy 180 < alpha <= 360 degrees, got " + std::to_string(alpha_deg));
    }
    stretch_ = std::sin(deg_to_rad(alpha_deg / 4.0));
}

double FovAlpha::radians() const { return deg_to_rad(deg_); }

SurfaceNormal::SurfaceNormal(double nx, double ny, double nz)
    : v_(normalized_or_throw(Eigen::Vector3d(nx, ny, nz), "surface normal"))
{
    if (v_.z() < 0.0)
    {
        throw ValidationError("surface normal must face the camera (nz >= 0)");
    }
}

BallGeometry::BallGeometry(double radius, double distance)
    : radius_mm(radius), distance_mm(distance)
{
    if (!(radius > 0.0))
    {
        throw ValidationError("ball radius must be positive");
    }
    if (!(distance > radius))
    {
        throw ValidationError("camera distance must exceed the ball radius (camera outside the ball)");
    }
}

ReflectionRay reflect(const ReflectionRay& incident, const SurfaceNormal& normal)
{
    const Eigen::Vector3d& i = incident.vec();
    const Eigen::Vector3d& n = normal.vec();
    return ReflectionRay(2.0 * i.dot(n) * n - i);
}

SurfaceNormal normal_at(const DiskPoint& p)
{
    const double rho2 = p.norm_squared();
    if (rho2 > 1.0 + kRimSlack)
    {
        throw ValidationError("disk point lies outside the ball silhouette");
    }
    return SurfaceNormal(p.ix, p.iy, std::sqrt(std::max(0.0, 1.0 - rho2)));
}

std::optional<DiskPoint> classical_forward(const ReflectionRay& r)
{
    if (r.z() + 1.0 <= kPoleEpsilon)
    {
        return std::nullopt;
    }
    const double denom = std::sqrt(2.0 * (r.z() + 1.0));
    return DiskPoint{r.x() / denom, r.y() / denom};
}

std::optional<DiskPoint> improved_forward(const ReflectionRay& r, const FovAlpha& fov)
{
    if (r.z() + 1.0 <= kPoleEpsilon)
    {
        return std::nullopt;
    }
    const double denom = std::sqrt(2.0 * (r.z() + 1.0)) * fov.stretch();
    DiskPoint p{r.x() / denom, r.y() / denom};
    const double rho2 = p.norm_squared();
    if (rho2 > 1.0 + kRimSlack)
    {
        return std::nullopt;
    }
    if (rho2 > 1.0)
    {
        const double k = 1.0 / std::sqrt(rho2);
        p.ix *= k;
        p.iy *= k;
    }
    return p;
}

ReflectionRay improved_inverse(const DiskPoint& p, const FovAlpha& fov)
{
    double rho2 = p.norm_squared();
    if (!(rho2 <= 1.0 + kRimSlack))
    {
        throw ValidationError("disk point lies outside the ball silhouette");
    }
    rho2 = std::min(rho2, 1.0);
    const double s = fov.stretch();
    const double rz = 1.0 - 2.0 * s * s * rho2;
    const double k = s * std::sqrt(std::max(0.0, 2.0 * (rz + 1.0)));
    const double rx = p.ix * k;
    const double ry = p.iy * k;
    // Exactly at the pole (alpha = 360, rim) the xy part vanishes.
    return ReflectionRay(rx, ry, rz);
}

FovAlpha alpha_from_geometry(const BallGeometry& geom)
{
    const double blind_half_angle = std::asin(geom.radius_mm / geom.distance_mm);
    return FovAlpha(360.0 - 2.0 * rad_to_deg(blind_half_angle));
}

double defined_region(const FovAlpha& fov) { return fov.degrees() / 2.0; }

bool is_defined(const ReflectionRay& r, const FovAlpha& fov) { return improved_forward(r, fov).has_value(); }

} // namespace mirrorball
