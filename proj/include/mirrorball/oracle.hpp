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

// Minimal ray tracer for a perfect mirror sphere in a known environment. It
// intersects camera rays with the sphere analytically and reflects them, so it
// never touches the projection terms it is used to check.

#pragma once

#include "mirrorball/raster.hpp"
#include "mirrorball/remap.hpp"
#include "mirrorball/rotation.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <variant>
#include <vector>

namespace mirrorball::oracle {

using Rgb = std::array<double, 3>;

struct ConstantColor
{
    Rgb color{128.0, 128.0, 128.0};
};

// Colour channels are (x, y, z) of the ray mapped from [-1, 1] to [0, 255].
struct AxisGradient
{
};

// Longitude/latitude checkerboard with cells of cell_deg; the transition
// between cells is blurred over soft_deg of arc.
struct Checkerboard
{
    double cell_deg = 30.0;
    double soft_deg = 3.0;
    Rgb dark{40.0, 60.0, 90.0};
    Rgb light{230.0, 210.0, 160.0};
};

// Box room centred on the ball. Walls are flat coloured; all twelve box edges
// are drawn as dark lines of line_width (same length unit as the extents).
struct Room
{
    Eigen::Vector3d half_extent{4.0, 2.5, 6.0};
    double line_width = 0.05;
    Rgb line{10.0, 10.0, 10.0};
    // +x, -x, +y, -y, +z, -z faces.
    std::array<Rgb, 6> faces{{
        {200.0, 80.0, 80.0},
        {80.0, 200.0, 80.0},
        {230.0, 230.0, 230.0},
        {120.0, 100.0, 80.0},
        {80.0, 80.0, 200.0},
        {200.0, 200.0, 80.0},
    }};
};

// Equirectangular image, sampled bilinearly with longitude wraparound.
struct EquirectMap
{
    RasterImage image;
};

using Pattern = std::variant<ConstantColor, AxisGradient, Checkerboard, Room, EquirectMap>;

class SyntheticEnvironment
{
public:
    explicit SyntheticEnvironment(Pattern pattern);

    // Colour seen along a unit direction, channels in [0, 255].
    Rgb sample(const Eigen::Vector3d& direction) const;

    const Pattern& pattern() const { return pattern_; }

private:
    Pattern pattern_;
};

enum class CameraMode
{
    Orthographic,
    Perspective,
};

// Square sensor looking at the ball along -z from the +z side. The ball
// silhouette is centred and has radius fill * resolution / 2 pixels.
struct SyntheticCamera
{
    CameraMode mode = CameraMode::Orthographic;
    double radius_mm = 50.0;
    double distance_mm = 500.0;
    int resolution = 1024;
    double fill = 0.9;
    // Camera (ball) frame -> environment frame.
    Rotation3 orientation;
    // 1 renders luminance, 3 renders RGB.
    int channels = 3;

    void validate() const;
    BallCircle circle() const;
};

inline const Rgb kBackground{255.0, 0.0, 255.0};

struct BallRender
{
    RasterImage image;
    BallCircle circle;
};

// Reflected direction in the camera's ball frame for continuous pixel
// coordinates, or nothing when the camera ray misses the ball.
std::optional<Eigen::Vector3d> reflected_direction(const SyntheticCamera& cam, double px, double py);

BallRender raytrace_ball(const SyntheticEnvironment& env, const SyntheticCamera& cam);

// Largest angle from +z among reflected rays present in the render. Pixels on
// the silhouette are refined by bisection inside their footprint.
double max_reflected_angle_deg(const SyntheticCamera& cam);

// Direct render of the environment in an output projection (no ball).
RasterImage ground_truth_view(const SyntheticEnvironment& env, const OutputSpec& output, int channels = 3);

// Helpers shared by the oracle tests.
std::uint8_t to_u8(double v);
double luminance(const Rgb& c);

} // namespace mirrorball::oracle
