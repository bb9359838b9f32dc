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

// JSON documents: the rig, correspondence files and the project config that
// ties inputs, outputs and the service together.

#pragma once

#include "mirrorball/registration.hpp"
#include "mirrorball/image_io.hpp"
#include "mirrorball/remap.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mirrorball::io {

inline constexpr int kConfigSchemaVersion = 1;

// Rig <-> JSON. Parsing validates every invariant (ValidationError).
nlohmann::json rig_to_json(const Rig& rig);
Rig rig_from_json(const nlohmann::json& j);

OutputSpec output_spec_from_json(const nlohmann::json& j);
nlohmann::json output_spec_to_json(const OutputSpec& spec);

// One correspondence per entry: {"a": [x_px, y_px], "b": [x_px, y_px]}.
struct PixelCorrespondence
{
    PixelCoord a;
    PixelCoord b;
};

std::vector<PixelCorrespondence> correspondences_from_json(const nlohmann::json& j);
nlohmann::json correspondences_to_json(const std::vector<PixelCorrespondence>& pairs);

// Pixel pairs -> disk pairs via each view's ball circle.
std::vector<Correspondence> to_disk(const std::vector<PixelCorrespondence>& pairs, const BallCircle& circle_a,
                                    const BallCircle& circle_b);

// A single image or a directory of numbered frames. pattern holds one '*'
// standing for the frame number; frames are ordered by that number.
struct InputSpec
{
    std::string image;
    std::string frames_directory;
    std::string frames_pattern;

    bool is_sequence() const { return !frames_directory.empty(); }

    friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

struct OutputEntry
{
    std::string name;
    OutputSpec spec;
    std::string path;

    friend bool operator==(const OutputEntry&, const OutputEntry&) = default;
};

struct ServiceSettings
{
    std::string bind = "127.0.0.1";
    int port = 8080;
    // Frame sequences advance at this rate while serving; 0 holds frame 0.
    double fps = 0.0;

    friend bool operator==(const ServiceSettings&, const ServiceSettings&) = default;
};

struct ProjectConfig
{
    Rig rig;
    std::map<std::string, InputSpec> inputs;
    std::vector<OutputEntry> outputs;
    ServiceSettings service;
    // Directory relative paths are resolved against; not serialized.
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::string& p) const;

    friend bool operator==(const ProjectConfig& a, const ProjectConfig& b)
    {
        return a.rig == b.rig && a.inputs == b.inputs && a.outputs == b.outputs && a.service == b.service;
    }
};

nlohmann::json config_to_json(const ProjectConfig& config);
// check_paths verifies that every input resolves to an existing file or a
// directory holding at least one matching frame.
ProjectConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir, bool check_paths = true);

ProjectConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ProjectConfig& config);

nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);

// Frame files of an input in playback order (a single entry for images).
std::vector<std::filesystem::path> input_frames(const ProjectConfig& config, const std::string& source_id);

// Number of frames all inputs can supply together.
std::size_t common_frame_count(const ProjectConfig& config);

// Decodes frame `index` of every input into views carrying the rig geometry.
std::vector<BallView> load_views(const ProjectConfig& config, std::size_t index, const WarningSink& warn = {});

} // namespace mirrorball::io
