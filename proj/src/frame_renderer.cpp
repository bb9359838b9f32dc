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

#include "mirrorball/frame_renderer.hpp"

#include "mirrorball/image_io.hpp"

#include <algorithm>
#include <cmath>

namespace mirrorball::service {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j.at(key).is_null())
    {
        return fallback;
    }
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception&)
    {
        throw ValidationError(std::string("view state: field '") + key + "' has the wrong type");
    }
}

} // namespace

void ViewState::validate() const
{
    VirtualCamera cam = camera_of(*this);
    cam.validate();
    if (width > kMaxFrameSide || height > kMaxFrameSide)
    {
        throw ValidationError("view state: frame side must not exceed " + std::to_string(kMaxFrameSide) + " px");
    }
    if (blend && !(*blend >= 0.0 && *blend <= 1.0))
    {
        throw ValidationError("view state: blend weight must lie in [0, 1]");
    }
    if (layer && blend)
    {
        throw ValidationError("view state: give either 'layer' or 'blend', not both");
    }
    for (const auto& [id, a] : alpha_override)
    {
        FovAlpha check(a);
        (void)check;
    }
}

ViewState view_state_from_json(const json& j)
{
    if (!j.is_object())
    {
        throw ValidationError("view state must be a JSON object");
    }
    ViewState v;
    v.yaw_deg = get_or<double>(j, "yaw_deg", v.yaw_deg);
    v.pitch_deg = get_or<double>(j, "pitch_deg", v.pitch_deg);
    v.roll_deg = get_or<double>(j, "roll_deg", v.roll_deg);
    v.hfov_deg = get_or<double>(j, "hfov_deg", v.hfov_deg);
    v.width = get_or<int>(j, "width", v.width);
    v.height = get_or<int>(j, "height", v.height);
    if (j.contains("layer") && !j.at("layer").is_null())
    {
        v.layer = get_or<std::string>(j, "layer", "");
    }
    if (j.contains("blend") && !j.at("blend").is_null())
    {
        v.blend = get_or<double>(j, "blend", 0.0);
    }
    v.alpha_override = get_or<std::map<std::string, double>>(j, "alpha_override", {});
    v.validate();
    return v;
}

json view_state_to_json(const ViewState& v)
{
    json j = {{"yaw_deg", v.yaw_deg}, {"pitch_deg", v.pitch_deg}, {"roll_deg", v.roll_deg}, {"hfov_deg", v.hfov_deg},
              {"width", v.width},     {"height", v.height}};
    if (v.layer)
    {
        j["layer"] = *v.layer;
    }
    if (v.blend)
    {
        j["blend"] = *v.blend;
    }
    if (!v.alpha_override.empty())
    {
        j["alpha_override"] = v.alpha_override;
    }
    return j;
}

VirtualCamera camera_of(const ViewState& v)
{
    return {v.yaw_deg, v.pitch_deg, v.roll_deg, v.hfov_deg, v.width, v.height};
}

Rig apply_view_state(const Rig& rig, const ViewState& v)
{
    Rig out = rig;
    for (const auto& [id, a] : v.alpha_override)
    {
        if (!rig.find(id))
        {
            throw UnknownSourceError("unknown source id '" + id + "' in alpha_override");
        }
        out = out.with_alpha(id, FovAlpha(a));
    }
    if (v.layer)
    {
        if (!rig.find(*v.layer))
        {
            throw UnknownSourceError("unknown source id '" + *v.layer + "'");
        }
        out = out.with_blend({BlendMode::Switch, *v.layer, {}});
    }
    else if (v.blend)
    {
        const auto other = std::find_if(rig.sources().begin(), rig.sources().end(),
                                        [&](const RigSource& s) { return s.id != rig.reference_id(); });
        if (other == rig.sources().end())
        {
            out = out.with_blend({BlendMode::Switch, rig.reference_id(), {}});
        }
        else if (*v.blend == 0.0)
        {
            out = out.with_blend({BlendMode::AlphaBlend, {}, {{rig.reference_id(), 1.0}}});
        }
        else if (*v.blend == 1.0)
        {
            out = out.with_blend({BlendMode::AlphaBlend, {}, {{other->id, 1.0}}});
        }
        else
        {
            out = out.with_blend({BlendMode::AlphaBlend, {}, {{rig.reference_id(), 1.0 - *v.blend}, {other->id, *v.blend}}});
        }
    }
    return out;
}

RasterImage render_view(const Rig& rig, const std::vector<BallView>& views, const ViewState& v)
{
    v.validate();
    const Rig effective = apply_view_state(rig, v);
    // Views carry the rig's alpha; overrides must reach the tables.
    std::vector<BallView> adjusted = views;
    for (auto& view : adjusted)
    {
        if (const RigSource* s = effective.find(view.source_id))
        {
            view.fov = s->fov;
            view.circle = s->circle;
        }
    }
    return merge_views(effective, adjusted, camera_of(v)).combined;
}

std::vector<std::uint8_t> render_png(const Rig& rig, const std::vector<BallView>& views, const ViewState& v)
{
    return io::encode_png(render_view(rig, views, v));
}

std::vector<std::uint8_t> encode_stream_frame(std::uint32_t seq, const RasterImage& image)
{
    if (image.width() > 0xffff || image.height() > 0xffff)
    {
        throw ValidationError("frame too large for the stream header");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kStreamHeaderSize + image.sample_count());
    for (int i = 0; i < 4; ++i)
    {
        out.push_back(static_cast<std::uint8_t>(seq >> (8 * i)));
    }
    for (const int v : {image.width(), image.height()})
    {
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    out.push_back(static_cast<std::uint8_t>(image.channels()));
    if (image.depth() == SampleDepth::U8)
    {
        out.insert(out.end(), image.bytes().begin(), image.bytes().end());
    }
    else
    {
        for (const std::uint16_t s : image.samples16())
        {
            out.push_back(static_cast<std::uint8_t>(s >> 8));
        }
    }
    return out;
}

StreamFrameHeader decode_stream_header(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kStreamHeaderSize)
    {
        throw ValidationError("stream frame shorter than its header");
    }
    StreamFrameHeader h;
    h.seq = static_cast<std::uint32_t>(bytes[0]) | static_cast<std::uint32_t>(bytes[1]) << 8 |
        static_cast<std::uint32_t>(bytes[2]) << 16 | static_cast<std::uint32_t>(bytes[3]) << 24;
    h.width = static_cast<std::uint16_t>(bytes[4] | bytes[5] << 8);
    h.height = static_cast<std::uint16_t>(bytes[6] | bytes[7] << 8);
    h.channels = bytes[8];
    if (bytes.size() != kStreamHeaderSize + static_cast<std::size_t>(h.width) * h.height * h.channels)
    {
        throw ValidationError("stream frame payload does not match its header");
    }
    return h;
}

} // namespace mirrorball::service
