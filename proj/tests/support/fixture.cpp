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

#include "fixture.hpp"

#include "mirrorball/image_io.hpp"
#include "mirrorball/oracle.hpp"

#include <random>
#include <string>

namespace mirrorball::testing {

std::filesystem::path scratch_dir(const std::string& name)
{
    std::random_device rd;
    const auto dir = std::filesystem::temp_directory_path() / ("mirrorball-" + name + "-" + std::to_string(rd()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

namespace {

RasterImage widen(const RasterImage& gray)
{
    RasterImage out(gray.width(), gray.height(), 1, SampleDepth::U16);
    for (int y = 0; y < gray.height(); ++y)
    {
        for (int x = 0; x < gray.width(); ++x)
        {
            out.set(x, y, 0, gray.at(x, y, 0) * 257u);
        }
    }
    return out;
}

} // namespace

std::filesystem::path write_fixture(const std::filesystem::path& dir, const FixtureOptions& options)
{
    using namespace oracle;
    const Rotation3 turn = Rotation3::from_axis_angle({0, 1, 0}, 30.0);
    const int count = std::max(1, options.frames);

    BallCircle color_circle{};
    BallCircle thermal_circle{};
    for (int f = 0; f < count; ++f)
    {
        // Each frame tilts the scene slightly so frames differ.
        const SyntheticEnvironment env(Checkerboard{30.0 + 2.0 * f});
        SyntheticCamera cam;
        cam.resolution = options.resolution;
        const auto color = raytrace_ball(env, cam);
        cam.orientation = turn;
        cam.channels = 1;
        cam.fill = 0.8;
        const auto thermal = raytrace_ball(env, cam);
        color_circle = color.circle;
        thermal_circle = thermal.circle;
        if (options.frames == 0)
        {
            io::save_image(dir / "color.png", color.image);
            io::save_image(dir / "thermal.pgm", widen(thermal.image));
        }
        else
        {
            std::filesystem::create_directories(dir / "color");
            std::filesystem::create_directories(dir / "thermal");
            io::save_image(dir / "color" / ("c" + std::to_string(f) + ".png"), color.image);
            io::save_image(dir / "thermal" / ("t" + std::to_string(f) + ".pgm"), widen(thermal.image));
        }
    }

    const Rig rig("color",
                  {RigSource{"color", color_circle, FovAlpha(360.0), Rotation3::identity()},
                   RigSource{"thermal", thermal_circle, FovAlpha(360.0), turn}},
                  {BlendMode::AlphaBlend, "", {{"color", 0.5}, {"thermal", 0.5}}});
    io::ProjectConfig config{rig, {}, {}, {}, dir};
    if (options.frames == 0)
    {
        config.inputs["color"] = io::InputSpec{"color.png", "", ""};
        config.inputs["thermal"] = io::InputSpec{"thermal.pgm", "", ""};
    }
    else
    {
        config.inputs["color"] = io::InputSpec{"", "color", "c*.png"};
        config.inputs["thermal"] = io::InputSpec{"", "thermal", "t*.pgm"};
    }
    config.outputs.push_back({"pano", EquirectSpec{256, 128}, "pano.png"});
    config.service.port = 0;
    const auto path = dir / "project.json";
    io::save_config(path, config);
    return path;
}

} // namespace mirrorball::testing
