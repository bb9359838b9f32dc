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

#include "mirrorball/error.hpp"
#include "mirrorball/oracle.hpp"
#include "mirrorball/registration.hpp"

#include <doctest.h>

#include <cmath>

using namespace mirrorball;

namespace {

oracle::BallRender checker_ball(int channels = 3)
{
    oracle::SyntheticCamera cam;
    cam.resolution = 256;
    cam.channels = channels;
    return oracle::raytrace_ball(oracle::SyntheticEnvironment(oracle::Checkerboard{}), cam);
}

BallView view_of(const oracle::BallRender& r, const std::string& id, double alpha = 360.0)
{
    return BallView{r.image, r.circle, FovAlpha(alpha), Rotation3::identity(), id};
}

RigSource source_of(const oracle::BallRender& r, const std::string& id, const Rotation3& rot = Rotation3::identity())
{
    return RigSource{id, r.circle, FovAlpha(360.0), rot};
}

const OutputSpec kOut = EquirectSpec{128, 64};

} // namespace

TEST_CASE("single-source switch equals the plain resample")
{
    const auto ball = checker_ball();
    const Rig rig("a", {source_of(ball, "a")}, {});
    const auto merged = merge_views(rig, {view_of(ball, "a")}, kOut);
    const auto direct = resample(ball.image, build_equirect_table(view_of(ball, "a"), 128, 64), black_fill(ball.image));
    CHECK(merged.combined == direct);
    REQUIRE(merged.layers.size() == 1);
    CHECK(merged.layers[0].image == direct);
}

TEST_CASE("equal views blended 50/50 reproduce the input within one step")
{
    const auto ball = checker_ball();
    const Rig rig("a", {source_of(ball, "a"), source_of(ball, "b")}, {BlendMode::AlphaBlend, "", {{"a", 0.5}, {"b", 0.5}}});
    const auto merged = merge_views(rig, {view_of(ball, "a"), view_of(ball, "b")}, kOut);
    const auto& single = merged.layers[0].image;
    int worst = 0;
    for (int y = 0; y < 64; ++y)
    {
        for (int x = 0; x < 128; ++x)
        {
            for (int c = 0; c < 3; ++c)
            {
                worst = std::max(worst, std::abs(int(merged.combined.at(x, y, c)) - int(single.at(x, y, c))));
            }
        }
    }
    CHECK(worst <= 1);
}

TEST_CASE("switch follows the active source")
{
    const auto ball = checker_ball();
    RasterImage flat(ball.image.width(), ball.image.height(), 3, SampleDepth::U8);
    const Rig rig("a", {source_of(ball, "a"), source_of(ball, "b")}, {BlendMode::Switch, "b", {}});
    const auto merged = merge_views(rig, {view_of(ball, "a"), BallView{flat, ball.circle, FovAlpha(360.0), {}, "b"}}, kOut);
    CHECK(merged.combined == merged.layers[1].image);
    CHECK(merged.combined.at(10, 10, 0) == 0);
}

TEST_CASE("rig rotation moves content into the reference frame")
{
    // Source b is a ball whose camera is yawed by 90 degrees. With the right
    // rig rotation its layer matches the reference layer.
    const Rotation3 yaw = Rotation3::from_axis_angle({0, 1, 0}, 90.0);
    oracle::SyntheticCamera cam;
    cam.resolution = 256;
    const oracle::SyntheticEnvironment env(oracle::AxisGradient{});
    const auto ref = oracle::raytrace_ball(env, cam);
    cam.orientation = yaw;
    const auto turned = oracle::raytrace_ball(env, cam);
    const Rig rig("a", {source_of(ref, "a"), source_of(turned, "b", yaw)}, {BlendMode::AlphaBlend, "", {{"a", 0.5}, {"b", 0.5}}});
    const auto merged = merge_views(rig, {view_of(ref, "a"), view_of(turned, "b")}, kOut);
    double sum = 0.0;
    int n = 0;
    for (int y = 8; y < 56; ++y)
    {
        for (int x = 0; x < 128; ++x)
        {
            const std::size_t i = static_cast<std::size_t>(y) * 128 + x;
            if (!merged.layers[0].valid[i] || !merged.layers[1].valid[i])
            {
                continue;
            }
            for (int c = 0; c < 3; ++c)
            {
                sum += std::abs(int(merged.layers[0].image.at(x, y, c)) - int(merged.layers[1].image.at(x, y, c)));
                ++n;
            }
        }
    }
    REQUIRE(n > 0);
    CHECK(sum / n < 2.0);
}

TEST_CASE("merge rejects inconsistent inputs")
{
    const auto ball = checker_ball();
    const Rig rig("a", {source_of(ball, "a"), source_of(ball, "b")}, {BlendMode::Switch, "b", {}});
    CHECK_THROWS_AS(merge_views(rig, {view_of(ball, "a")}, kOut), ValidationError);
    CHECK_THROWS_AS(merge_views(rig, {}, kOut), ValidationError);
    CHECK_THROWS_AS(merge_views(rig, {view_of(ball, "a"), view_of(ball, "zzz")}, kOut), ValidationError);
}

TEST_CASE("thermal layers are tone-mapped and blend with colour")
{
    const auto color = checker_ball(3);
    auto thermal = checker_ball(1);
    // Widen to 16-bit like a radiometric frame.
    RasterImage wide(thermal.image.width(), thermal.image.height(), 1, SampleDepth::U16);
    for (int y = 0; y < wide.height(); ++y)
    {
        for (int x = 0; x < wide.width(); ++x)
        {
            wide.set(x, y, 0, thermal.image.at(x, y, 0) * 200);
        }
    }
    const Rig rig("color", {source_of(color, "color"), source_of(thermal, "thermal")},
                  {BlendMode::AlphaBlend, "", {{"color", 0.3}, {"thermal", 0.7}}});
    const auto merged = merge_views(rig, {view_of(color, "color"), BallView{wide, thermal.circle, FovAlpha(360.0), {}, "thermal"}}, kOut);
    CHECK(merged.combined.channels() == 3);
    CHECK(merged.combined.depth() == SampleDepth::U8);
    CHECK(merged.layers[1].raw.depth() == SampleDepth::U16);
    CHECK(merged.layers[1].image.channels() == 3);
}

TEST_CASE("tone_map_thermal spans the ramp")
{
    RasterImage g(3, 1, 1, SampleDepth::U16);
    g.set(0, 0, 0, 1000);
    g.set(1, 0, 0, 2000);
    g.set(2, 0, 0, 3000);
    const auto rgb = tone_map_thermal(g, {1, 1, 1});
    CHECK(rgb.at(0, 0, 0) == 0);
    CHECK(rgb.at(0, 0, 2) == 4);
    CHECK(rgb.at(2, 0, 0) == 252);
    CHECK(rgb.at(2, 0, 2) == 164);
    CHECK(rgb.at(1, 0, 0) == 188);
    const auto end = thermal_ramp(1.0);
    CHECK(end[1] == 255);
}
