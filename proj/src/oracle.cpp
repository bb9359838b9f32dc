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

#include "mirrorball/oracle.hpp"

#include "mirrorball/error.hpp"
#include "mirrorball/parallel.hpp"
#include "mirrorball/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mirrorball::oracle {

namespace {

Rgb lerp(const Rgb& a, const Rgb& b, double t)
{
    return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

// Distance from x to the nearest multiple of step.
double distance_to_grid(double x, double step)
{
    const double r = x - step * std::floor(x / step);
    return std::min(r, step - r);
}

Rgb sample_checkerboard(const Checkerboard& cb, const Eigen::Vector3d& d)
{
    const double lon = rad_to_deg(std::atan2(d.x(), d.z()));
    const double lat = rad_to_deg(std::asin(std::clamp(d.y(), -1.0, 1.0)));
    const auto parity = (static_cast<long>(std::floor(lon / cb.cell_deg)) + static_cast<long>(std::floor(lat / cb.cell_deg))) & 1L;
    const Rgb& own = parity ? cb.dark : cb.light;
    const Rgb& other = parity ? cb.light : cb.dark;
    if (!(cb.soft_deg > 0.0))
    {
        return own;
    }
    // Arc distance to the nearest cell edge; lon lines shrink with cos(lat).
    const double d_lon = distance_to_grid(lon, cb.cell_deg) * std::cos(deg_to_rad(lat));
    const double d_lat = distance_to_grid(lat, cb.cell_deg);
    const double edge = std::min(d_lon, d_lat);
    const double mix = 0.5 * std::max(0.0, 1.0 - edge / (0.5 * cb.soft_deg));
    return lerp(own, other, mix);
}

Rgb sample_room(const Room& room, const Eigen::Vector3d& d)
{
    double t = std::numeric_limits<double>::infinity();
    int axis = 0;
    for (int a = 0; a < 3; ++a)
    {
        if (std::abs(d[a]) > 0.0)
        {
            const double ta = room.half_extent[a] / std::abs(d[a]);
            if (ta < t)
            {
                t = ta;
                axis = a;
            }
        }
    }
    const Eigen::Vector3d p = t * d;
    const int face = 2 * axis + (d[axis] > 0.0 ? 0 : 1);
    double edge = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a)
    {
        if (a != axis)
        {
            edge = std::min(edge, room.half_extent[a] - std::abs(p[a]));
        }
    }
    const double line = std::max(0.0, 1.0 - edge / room.line_width);
    return lerp(room.faces[static_cast<std::size_t>(face)], room.line, line);
}

Rgb sample_equirect(const RasterImage& img, const Eigen::Vector3d& d)
{
    const double lon = rad_to_deg(std::atan2(d.x(), d.z()));
    const double lat = rad_to_deg(std::asin(std::clamp(d.y(), -1.0, 1.0)));
    const int w = img.width();
    const int h = img.height();
    const double u = (lon + 180.0) / 360.0 * w - 0.5;
    const double v = (90.0 - lat) / 180.0 * h - 0.5;
    const double uf = std::floor(u);
    const double vf = std::floor(v);
    const double fx = u - uf;
    const double fy = v - vf;
    const auto wrap = [w](long x) { return static_cast<int>(((x % w) + w) % w); };
    const int x0 = wrap(static_cast<long>(uf));
    const int x1 = wrap(static_cast<long>(uf) + 1);
    const int y0 = std::clamp(static_cast<int>(vf), 0, h - 1);
    const int y1 = std::clamp(static_cast<int>(vf) + 1, 0, h - 1);
    const double scale = img.depth() == SampleDepth::U8 ? 1.0 : 255.0 / 65535.0;
    Rgb out{};
    for (int c = 0; c < 3; ++c)
    {
        const int ch = img.channels() == 1 ? 0 : c;
        const double s = (1 - fx) * (1 - fy) * img.at(x0, y0, ch) + fx * (1 - fy) * img.at(x1, y0, ch) +
            (1 - fx) * fy * img.at(x0, y1, ch) + fx * fy * img.at(x1, y1, ch);
        out[static_cast<std::size_t>(c)] = s * scale;
    }
    return out;
}

void write_pixel(RasterImage& img, int x, int y, const Rgb& c)
{
    if (img.channels() == 1)
    {
        img.set(x, y, 0, to_u8(luminance(c)));
        return;
    }
    for (int k = 0; k < 3; ++k)
    {
        img.set(x, y, k, to_u8(c[static_cast<std::size_t>(k)]));
    }
}

// Camera ray for continuous pixel coordinates, in the ball frame.
struct CameraRay
{
    Eigen::Vector3d origin;
    Eigen::Vector3d dir;
};

CameraRay camera_ray(const SyntheticCamera& cam, double px, double py)
{
    const double c = 0.5 * (cam.resolution - 1);
    const double r_px = cam.fill * cam.resolution / 2.0;
    if (cam.mode == CameraMode::Orthographic)
    {
        const double x = (px - c) / r_px * cam.radius_mm;
        const double y = (c - py) / r_px * cam.radius_mm;
        return {{x, y, 2.0 * cam.radius_mm}, {0.0, 0.0, -1.0}};
    }
    // Silhouette half-angle asin(R/d) must land on r_px.
    const double tan_beta = std::tan(std::asin(cam.radius_mm / cam.distance_mm));
    const double f = r_px / tan_beta;
    return {{0.0, 0.0, cam.distance_mm}, Eigen::Vector3d((px - c) / f, (c - py) / f, -1.0).normalized()};
}

} // namespace

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

double luminance(const Rgb& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

SyntheticEnvironment::SyntheticEnvironment(Pattern pattern)
    : pattern_(std::move(pattern))
{
    if (const auto* m = std::get_if<EquirectMap>(&pattern_); m && m->image.empty())
    {
        throw ValidationError("environment map image is empty");
    }
}

Rgb SyntheticEnvironment::sample(const Eigen::Vector3d& direction) const
{
    const Eigen::Vector3d d = direction.normalized();
    return std::visit(
        [&](const auto& p) -> Rgb {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantColor>)
            {
                return p.color;
            }
            else if constexpr (std::is_same_v<T, AxisGradient>)
            {
                return {(d.x() + 1.0) * 127.5, (d.y() + 1.0) * 127.5, (d.z() + 1.0) * 127.5};
            }
            else if constexpr (std::is_same_v<T, Checkerboard>)
            {
                return sample_checkerboard(p, d);
            }
            else if constexpr (std::is_same_v<T, Room>)
            {
                return sample_room(p, d);
            }
            else
            {
                return sample_equirect(p.image, d);
            }
        },
        pattern_);
}

void SyntheticCamera::validate() const
{
    if (!(radius_mm > 0.0))
    {
        throw ValidationError("synthetic ball radius must be positive");
    }
    if (mode == CameraMode::Perspective && !(distance_mm > radius_mm))
    {
        throw ValidationError("perspective camera must sit outside the ball (distance > radius)");
    }
    if (resolution < 32 || !(fill > 0.0 && fill <= 1.0))
    {
        throw ValidationError("synthetic camera needs resolution >= 32 and 0 < fill <= 1");
    }
    if (channels != 1 && channels != 3)
    {
        throw ValidationError("synthetic camera renders 1 or 3 channels");
    }
}

BallCircle SyntheticCamera::circle() const
{
    const double c = 0.5 * (resolution - 1);
    return {c, c, fill * resolution / 2.0};
}

std::optional<Eigen::Vector3d> reflected_direction(const SyntheticCamera& cam, double px, double py)
{
    const CameraRay ray = camera_ray(cam, px, py);
    const double R = cam.radius_mm;
    const double b = ray.origin.dot(ray.dir);
    const double c = ray.origin.squaredNorm() - R * R;
    const double disc = b * b - c;
    if (disc < 0.0)
    {
        return std::nullopt;
    }
    const double t = -b - std::sqrt(disc);
    const Eigen::Vector3d n = (ray.origin + t * ray.dir) / R;
    // Law of reflection on the travel direction.
    return (ray.dir - 2.0 * ray.dir.dot(n) * n).normalized();
}

BallRender raytrace_ball(const SyntheticEnvironment& env, const SyntheticCamera& cam)
{
    cam.validate();
    BallRender out{RasterImage(cam.resolution, cam.resolution, cam.channels, SampleDepth::U8), cam.circle()};
    const Eigen::Matrix3d to_env = cam.orientation.matrix();
    parallel_rows(cam.resolution, [&](int row_begin, int row_end) {
        for (int y = row_begin; y < row_end; ++y)
        {
            for (int x = 0; x < cam.resolution; ++x)
            {
                const auto r = reflected_direction(cam, x, y);
                write_pixel(out.image, x, y, r ? env.sample(to_env * *r) : kBackground);
            }
        }
    });
    return out;
}

double max_reflected_angle_deg(const SyntheticCamera& cam)
{
    cam.validate();
    const int n = cam.resolution;
    const auto angle = [](const Eigen::Vector3d& r) { return std::atan2(std::hypot(r.x(), r.y()), r.z()); };

    std::vector<std::uint8_t> hit(static_cast<std::size_t>(n) * n);
    double best = 0.0;
    for (int y = 0; y < n; ++y)
    {
        for (int x = 0; x < n; ++x)
        {
            const auto r = reflected_direction(cam, x, y);
            hit[static_cast<std::size_t>(y) * n + x] = r.has_value();
            if (r)
            {
                best = std::max(best, angle(*r));
            }
        }
    }

    // A hit pixel next to a miss straddles the silhouette: walk towards the
    // miss and keep the last position that still hits.
    const int offsets[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (int y = 1; y + 1 < n; ++y)
    {
        for (int x = 1; x + 1 < n; ++x)
        {
            if (!hit[static_cast<std::size_t>(y) * n + x])
            {
                continue;
            }
            for (const auto& o : offsets)
            {
                if (hit[static_cast<std::size_t>(y + o[1]) * n + (x + o[0])])
                {
                    continue;
                }
                double lo = 0.0;
                double hi = 1.0;
                for (int it = 0; it < 60; ++it)
                {
                    const double mid = 0.5 * (lo + hi);
                    (reflected_direction(cam, x + mid * o[0], y + mid * o[1]) ? lo : hi) = mid;
                }
                if (const auto r = reflected_direction(cam, x + lo * o[0], y + lo * o[1]))
                {
                    best = std::max(best, angle(*r));
                }
            }
        }
    }
    return rad_to_deg(best);
}

RasterImage ground_truth_view(const SyntheticEnvironment& env, const OutputSpec& output, int channels)
{
    validate_output(output);
    RasterImage out(output_width(output), output_height(output), channels, SampleDepth::U8);
    parallel_rows(out.height(), [&](int row_begin, int row_end) {
        for (int v = row_begin; v < row_end; ++v)
        {
            for (int u = 0; u < out.width(); ++u)
            {
                write_pixel(out, u, v, env.sample(output_ray(output, u, v)));
            }
        }
    });
    return out;
}

} // namespace mirrorball::oracle
