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

#include "mirrorball/config.hpp"

#include "mirrorball/error.hpp"

#include <algorithm>
#include <fstream>

namespace mirrorball::io {

using nlohmann::json;

namespace {

// Typed field access that turns JSON type errors into ValidationError.
template <typename T>
T field(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
    {
        throw ValidationError(where + ": missing field '" + key + "'");
    }
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception&)
    {
        throw ValidationError(where + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
    {
        return fallback;
    }
    return field<T>(j, key, where);
}

void check_schema(const json& j, int supported, const std::string& where)
{
    const int v = field<int>(j, "schema_version", where);
    if (v != supported)
    {
        throw ValidationError(where + ": unsupported schema_version " + std::to_string(v) + " (supported: " +
                              std::to_string(supported) + ")");
    }
}

PixelCoord pixel_pair(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    {
        throw ValidationError(where + ": expected [x_px, y_px]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

// Natural order key of a frame file: the number captured by '*'.
std::optional<long long> frame_number(const std::string& name, const std::string& prefix, const std::string& suffix)
{
    if (name.size() < prefix.size() + suffix.size() || name.compare(0, prefix.size(), prefix) != 0 ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
    {
        return std::nullopt;
    }
    const std::string middle = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    if (middle.empty() || middle.size() > 18 || !std::all_of(middle.begin(), middle.end(), [](char c) { return c >= '0' && c <= '9'; }))
    {
        return std::nullopt;
    }
    return std::stoll(middle);
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir, const std::string& pattern)
{
    const auto star = pattern.find('*');
    if (star == std::string::npos || pattern.find('*', star + 1) != std::string::npos)
    {
        throw ValidationError("frame pattern '" + pattern + "' must contain exactly one '*'");
    }
    const std::string prefix = pattern.substr(0, star);
    const std::string suffix = pattern.substr(star + 1);
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
    {
        throw IoError("frame directory '" + dir.string() + "' does not exist");
    }
    std::vector<std::pair<long long, std::filesystem::path>> found;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
    {
        if (!entry.is_regular_file())
        {
            continue;
        }
        if (auto n = frame_number(entry.path().filename().string(), prefix, suffix))
        {
            found.emplace_back(*n, entry.path());
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::filesystem::path> out;
    out.reserve(found.size());
    for (auto& f : found)
    {
        out.push_back(std::move(f.second));
    }
    return out;
}

} // namespace

json rig_to_json(const Rig& rig)
{
    json sources = json::array();
    for (const auto& s : rig.sources())
    {
        sources.push_back({
            {"id", s.id},
            {"circle", {{"cx", s.circle.cx}, {"cy", s.circle.cy}, {"r_px", s.circle.r_px}}},
            {"alpha_deg", s.fov.degrees()},
            {"rotation", s.rotation.row_major()},
        });
    }
    json blend;
    if (rig.blend().mode == BlendMode::Switch)
    {
        blend = {{"policy", "switch"}, {"weights", json::object()}};
        if (!rig.blend().active.empty())
        {
            blend["active"] = rig.blend().active;
        }
    }
    else
    {
        blend = {{"policy", "blend"}, {"weights", rig.blend().weights}};
    }
    return {{"schema_version", kRigSchemaVersion}, {"reference", rig.reference_id()}, {"sources", sources}, {"blend", blend}};
}

Rig rig_from_json(const json& j)
{
    const std::string where = "rig";
    check_schema(j, kRigSchemaVersion, where);
    const json& sources_json = j.contains("sources") ? j.at("sources") : json();
    if (!sources_json.is_array())
    {
        throw ValidationError("rig: 'sources' must be an array");
    }
    std::vector<RigSource> sources;
    for (std::size_t i = 0; i < sources_json.size(); ++i)
    {
        const json& s = sources_json[i];
        const std::string sw = "rig.sources[" + std::to_string(i) + "]";
        RigSource src;
        src.id = field<std::string>(s, "id", sw);
        const json circle = field<json>(s, "circle", sw);
        src.circle = {field<double>(circle, "cx", sw + ".circle"), field<double>(circle, "cy", sw + ".circle"),
                      field<double>(circle, "r_px", sw + ".circle")};
        src.fov = FovAlpha(field<double>(s, "alpha_deg", sw));
        const auto rot = field<std::vector<double>>(s, "rotation", sw);
        if (rot.size() != 9)
        {
            throw ValidationError(sw + ": rotation needs 9 numbers (row-major 3x3)");
        }
        std::array<double, 9> m{};
        std::copy(rot.begin(), rot.end(), m.begin());
        try
        {
            src.rotation = Rotation3::from_row_major(m);
        }
        catch (const ValidationError& e)
        {
            throw ValidationError(sw + " ('" + src.id + "'): " + e.what());
        }
        sources.push_back(std::move(src));
    }

    const json blend_json = field<json>(j, "blend", where);
    BlendPolicy blend;
    const auto policy = field<std::string>(blend_json, "policy", "rig.blend");
    if (policy == "switch")
    {
        blend.mode = BlendMode::Switch;
        blend.active = field_or<std::string>(blend_json, "active", "", "rig.blend");
    }
    else if (policy == "blend")
    {
        blend.mode = BlendMode::AlphaBlend;
        blend.weights = field<std::map<std::string, double>>(blend_json, "weights", "rig.blend");
    }
    else
    {
        throw ValidationError("rig.blend: policy must be 'switch' or 'blend', got '" + policy + "'");
    }
    return Rig(field<std::string>(j, "reference", where), std::move(sources), std::move(blend));
}

OutputSpec output_spec_from_json(const json& j)
{
    const std::string where = "output";
    const auto projection = field<std::string>(j, "projection", where);
    OutputSpec spec;
    if (projection == "equirect")
    {
        const int w = field<int>(j, "width", where);
        spec = EquirectSpec{w, field_or<int>(j, "height", w / 2, where)};
    }
    else if (projection == "pinhole")
    {
        VirtualCamera cam;
        cam.yaw_deg = field_or<double>(j, "yaw_deg", 0.0, where);
        cam.pitch_deg = field_or<double>(j, "pitch_deg", 0.0, where);
        cam.roll_deg = field_or<double>(j, "roll_deg", 0.0, where);
        cam.hfov_deg = field_or<double>(j, "hfov_deg", 90.0, where);
        cam.out_width = field<int>(j, "width", where);
        cam.out_height = field<int>(j, "height", where);
        spec = cam;
    }
    else
    {
        throw ValidationError("output: projection must be 'equirect' or 'pinhole', got '" + projection + "'");
    }
    validate_output(spec);
    return spec;
}

json output_spec_to_json(const OutputSpec& spec)
{
    if (const auto* e = std::get_if<EquirectSpec>(&spec))
    {
        return {{"projection", "equirect"}, {"width", e->width}, {"height", e->height}};
    }
    const auto& c = std::get<VirtualCamera>(spec);
    return {{"projection", "pinhole"}, {"yaw_deg", c.yaw_deg}, {"pitch_deg", c.pitch_deg}, {"roll_deg", c.roll_deg},
            {"hfov_deg", c.hfov_deg}, {"width", c.out_width}, {"height", c.out_height}};
}

std::vector<PixelCorrespondence> correspondences_from_json(const json& j)
{
    const json& list = j.is_object() && j.contains("correspondences") ? j.at("correspondences") : j;
    if (!list.is_array())
    {
        throw ValidationError("correspondences: expected a JSON list of {a: [x, y], b: [x, y]}");
    }
    std::vector<PixelCorrespondence> out;
    for (std::size_t i = 0; i < list.size(); ++i)
    {
        const std::string where = "correspondences[" + std::to_string(i) + "]";
        if (!list[i].is_object() || !list[i].contains("a") || !list[i].contains("b"))
        {
            throw ValidationError(where + ": expected {a: [x, y], b: [x, y]}");
        }
        out.push_back({pixel_pair(list[i]["a"], where + ".a"), pixel_pair(list[i]["b"], where + ".b")});
    }
    return out;
}

json correspondences_to_json(const std::vector<PixelCorrespondence>& pairs)
{
    json out = json::array();
    for (const auto& p : pairs)
    {
        out.push_back({{"a", {p.a.x, p.a.y}}, {"b", {p.b.x, p.b.y}}});
    }
    return out;
}

std::vector<Correspondence> to_disk(const std::vector<PixelCorrespondence>& pairs, const BallCircle& circle_a,
                                    const BallCircle& circle_b)
{
    std::vector<Correspondence> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs)
    {
        out.push_back({pixels_to_disk(p.a, circle_a), pixels_to_disk(p.b, circle_b)});
    }
    return out;
}

std::filesystem::path ProjectConfig::resolve(const std::string& p) const
{
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

json config_to_json(const ProjectConfig& config)
{
    json inputs = json::object();
    for (const auto& [id, in] : config.inputs)
    {
        if (in.is_sequence())
        {
            inputs[id] = {{"frames", {{"directory", in.frames_directory}, {"pattern", in.frames_pattern}}}};
        }
        else
        {
            inputs[id] = {{"image", in.image}};
        }
    }
    json outputs = json::array();
    for (const auto& o : config.outputs)
    {
        json e = output_spec_to_json(o.spec);
        e["name"] = o.name;
        e["path"] = o.path;
        outputs.push_back(std::move(e));
    }
    return {
        {"schema_version", kConfigSchemaVersion},
        {"rig", rig_to_json(config.rig)},
        {"inputs", inputs},
        {"outputs", outputs},
        {"service", {{"bind", config.service.bind}, {"port", config.service.port}, {"fps", config.service.fps}}},
    };
}

ProjectConfig config_from_json(const json& j, const std::filesystem::path& base_dir, bool check_paths)
{
    const std::string where = "config";
    check_schema(j, kConfigSchemaVersion, where);
    ProjectConfig config{rig_from_json(field<json>(j, "rig", where)), {}, {}, {}, base_dir};

    const json inputs = field<json>(j, "inputs", where);
    if (!inputs.is_object())
    {
        throw ValidationError("config: 'inputs' must map source ids to input specs");
    }
    for (const auto& [id, spec] : inputs.items())
    {
        const std::string iw = "config.inputs." + id;
        if (!config.rig.find(id))
        {
            throw ValidationError(iw + ": source is not part of the rig");
        }
        InputSpec in;
        if (spec.contains("image"))
        {
            in.image = field<std::string>(spec, "image", iw);
        }
        else if (spec.contains("frames"))
        {
            const json frames = field<json>(spec, "frames", iw);
            in.frames_directory = field<std::string>(frames, "directory", iw + ".frames");
            in.frames_pattern = field_or<std::string>(frames, "pattern", "*.png", iw + ".frames");
        }
        else
        {
            throw ValidationError(iw + ": expected 'image' or 'frames'");
        }
        config.inputs.emplace(id, std::move(in));
    }
    for (const auto& s : config.rig.sources())
    {
        if (!config.inputs.count(s.id))
        {
            throw ValidationError("config: rig source '" + s.id + "' has no input");
        }
    }

    if (j.contains("outputs"))
    {
        if (!j.at("outputs").is_array())
        {
            throw ValidationError("config: 'outputs' must be a list");
        }
        for (const auto& o : j.at("outputs"))
        {
            config.outputs.push_back({field_or<std::string>(o, "name", "", "config.outputs"), output_spec_from_json(o),
                                      field_or<std::string>(o, "path", "", "config.outputs")});
        }
    }

    if (j.contains("service"))
    {
        const json& s = j.at("service");
        config.service.bind = field_or<std::string>(s, "bind", config.service.bind, "config.service");
        config.service.port = field_or<int>(s, "port", config.service.port, "config.service");
        config.service.fps = field_or<double>(s, "fps", config.service.fps, "config.service");
        if (config.service.port < 0 || config.service.port > 65535 || !(config.service.fps >= 0.0))
        {
            throw ValidationError("config.service: port must be 0-65535 and fps >= 0");
        }
    }

    if (check_paths)
    {
        for (const auto& s : config.rig.sources())
        {
            if (input_frames(config, s.id).empty())
            {
                throw IoError("input for source '" + s.id + "' has no frames");
            }
        }
    }
    return config;
}

json load_json(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f)
    {
        throw IoError("cannot open '" + path.string() + "'");
    }
    try
    {
        return json::parse(f);
    }
    catch (const json::parse_error& e)
    {
        throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void save_json(const std::filesystem::path& path, const json& j)
{
    const std::string text = j.dump(2) + "\n";
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ProjectConfig load_config(const std::filesystem::path& path)
{
    return config_from_json(load_json(path), path.parent_path());
}

void save_config(const std::filesystem::path& path, const ProjectConfig& config) { save_json(path, config_to_json(config)); }

std::vector<std::filesystem::path> input_frames(const ProjectConfig& config, const std::string& source_id)
{
    const auto it = config.inputs.find(source_id);
    if (it == config.inputs.end())
    {
        throw ValidationError("no input configured for source '" + source_id + "'");
    }
    const InputSpec& in = it->second;
    if (!in.is_sequence())
    {
        const auto p = config.resolve(in.image);
        std::error_code ec;
        if (!std::filesystem::is_regular_file(p, ec))
        {
            throw IoError("input image '" + p.string() + "' for source '" + source_id + "' does not exist");
        }
        return {p};
    }
    return list_frames(config.resolve(in.frames_directory), in.frames_pattern);
}

std::size_t common_frame_count(const ProjectConfig& config)
{
    std::size_t n = std::numeric_limits<std::size_t>::max();
    bool any_sequence = false;
    for (const auto& [id, in] : config.inputs)
    {
        if (in.is_sequence())
        {
            any_sequence = true;
            n = std::min(n, input_frames(config, id).size());
        }
    }
    return any_sequence ? n : 1;
}

std::vector<BallView> load_views(const ProjectConfig& config, std::size_t index, const WarningSink& warn)
{
    std::vector<BallView> views;
    for (const auto& s : config.rig.sources())
    {
        const auto frames = input_frames(config, s.id);
        if (frames.empty())
        {
            throw IoError("input for source '" + s.id + "' has no frames");
        }
        // Single images stand still while sequences play.
        const auto& path = frames.size() == 1 ? frames.front() : frames.at(index % frames.size());
        BallView view{load_image(path, warn), s.circle, s.fov, Rotation3::identity(), s.id};
        view.validate();
        views.push_back(std::move(view));
    }
    return views;
}

} // namespace mirrorball::io
