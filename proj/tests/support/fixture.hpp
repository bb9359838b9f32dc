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

// Synthetic two-source project written to a scratch directory.

#pragma once

#include "mirrorball/config.hpp"

#include <filesystem>

namespace mirrorball::testing {

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

struct FixtureOptions
{
    int resolution = 256;
    // Frames per source; 0 writes single images.
    int frames = 0;
};

// Writes color.png (orthographic checkerboard ball), thermal.pgm (16-bit
// gray ball of the same scene, camera yawed 30 degrees) and project.json with
// the matching rig. Returns the config path.
std::filesystem::path write_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

} // namespace mirrorball::testing
