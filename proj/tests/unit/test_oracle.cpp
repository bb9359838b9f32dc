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
#include "mirrorball/projection.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mirrorball;
using namespace mirrorball::oracle;

namespace {

double bilinear(const RasterImage& img, double x, double y, int c)
{
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    return (1 - fx) * (1 - fy) * img.at(x0, y0, c) + fx * (1 - fy) * img.at(x0 + 1, y0, c) +
        (1 - fx) * fy * img.at(x0, y0 + 1, c) + fx * fy * img.at(x0 + 1, y0 + 1, c);
}

double mae(const RasterImage& a, const RasterImage& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.byte_size(); ++i)
    {
        s += std::abs(int(a.bytes()[i]) - int(b.bytes()[i]));
    }
    return s / double(a.byte_size());
}

} // namespace

TEST_CASE("constant environment fills the disk")
{
    SyntheticCamera cam;
    cam.resolution = 128;
    const auto r = raytrace_ball(SyntheticEnvironment(ConstantColor{{10, 200, 30}}), cam);
    CHECK(r.image.at(64, 64, 1) == 200);
    CHECK(r.image.at(64, 20, 0) == 10);
    CHECK(r.image.at(0, 0, 0) == 255);
    CHECK(r.image.at(0, 0, 1) == 0);
    CHECK(r.circle.r_px == doctest::Approx(0.9 * 64));
    CHECK(r.circle.cx == doctest::Approx(63.5));
}

TEST_CASE("axis gradient: the disk center sees +z")
{
    SyntheticCamera cam;
    cam.resolution = 129;
    const auto dir = reflected_direction(cam, 64, 64);
    REQUIRE(dir);
    CHECK(dir->z() == doctest::Approx(1.0));
    const auto r = raytrace_ball(SyntheticEnvironment(AxisGradient{}), cam);
    CHECK(r.image.at(64, 64, 2) == 255);
    CHECK(r.image.at(64, 64, 0) == doctest::Approx(128).epsilon(0.01));
    CHECK_FALSE(reflected_direction(cam, 0, 0));
}

TEST_CASE("orthographic renders follow the classical term")
{
    SyntheticCamera cam;
    cam.resolution = 512;
    const SyntheticEnvironment env(AxisGradient{});
    const auto r = raytrace_ball(env, cam);
    std::mt19937 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    int checked = 0;
    while (checked < 500)
    {
        const Eigen::Vector3d v = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
        if (v.z() < -0.5)
        {
            continue;
        }
        const auto p = classical_forward(ReflectionRay(v));
        const auto px = disk_to_pixels(*p, r.circle);
        const auto expect = env.sample(v);
        for (int c = 0; c < 3; ++c)
        {
            CHECK(std::abs(bilinear(r.image, px.x, px.y, c) - expect[static_cast<std::size_t>(c)]) < 2.0);
        }
        ++checked;
    }
}

TEST_CASE("perspective at 10R spans the predicted cone")
{
    SyntheticCamera cam;
    cam.mode = CameraMode::Perspective;
    cam.resolution = 512;
    cam.distance_mm = 10 * cam.radius_mm;
    const double expect = alpha_from_geometry(BallGeometry(cam.radius_mm, cam.distance_mm)).degrees() / 2.0;
    CHECK(std::abs(max_reflected_angle_deg(cam) - expect) < 0.5);
}

TEST_CASE("perspective renders converge to orthographic with distance")
{
    const SyntheticEnvironment env(Checkerboard{});
    SyntheticCamera ortho;
    ortho.resolution = 256;
    const auto ref = raytrace_ball(env, ortho).image;
    double last = 1e9;
    for (double k : {3.0, 10.0, 30.0, 100.0})
    {
        SyntheticCamera cam = ortho;
        cam.mode = CameraMode::Perspective;
        cam.distance_mm = k * cam.radius_mm;
        const double e = mae(raytrace_ball(env, cam).image, ref);
        CHECK(e < last);
        last = e;
    }
}

TEST_CASE("equirect ground truth of an equirect environment is the identity")
{
    RasterImage map(256, 128, 3, SampleDepth::U8);
    const SyntheticEnvironment smooth(AxisGradient{});
    for (int y = 0; y < 128; ++y)
    {
        for (int x = 0; x < 256; ++x)
        {
            const auto c = smooth.sample(equirect_ray(EquirectSpec{256, 128}, x, y));
            for (int k = 0; k < 3; ++k)
            {
                map.set(x, y, k, to_u8(c[static_cast<std::size_t>(k)]));
            }
        }
    }
    const auto out = ground_truth_view(SyntheticEnvironment(EquirectMap{map}), EquirectSpec{256, 128});
    CHECK(mae(out, map) <= 1.0);
}

TEST_CASE("camera validation")
{
    SyntheticCamera cam;
    cam.fill = 1.2;
    CHECK_THROWS(cam.validate());
    cam = {};
    cam.mode = CameraMode::Perspective;
    cam.distance_mm = cam.radius_mm;
    CHECK_THROWS(cam.validate());
}
