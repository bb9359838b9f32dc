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

// ViewState handling shared by the stream service and `reproject --config`,
// so both produce byte-identical frames for the same parameters.

#pragma once

#include "mirrorball/config.hpp"
#include "mirrorball/error.hpp"
#include "mirrorball/registration.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mirrorball::service {

// A ViewState or request names a source the rig does not know (HTTP 404).
class UnknownSourceError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

inline constexpr int kMaxFrameSide = 4096;

struct ViewState
{
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    double roll_deg = 0.0;
    double hfov_deg = 90.0;
    int width = 640;
    int height = 480;
    // Show one source only.
    std::optional<std::string> layer;
    // Crossfade: the reference gets 1 - blend, the first other source gets blend.
    std::optional<double> blend;
    std::map<std::string, double> alpha_override;

    // Throws ValidationError (never UnknownSourceError; ids are checked against a rig).
    void validate() const;

    friend bool operator==(const ViewState&, const ViewState&) = default;
};

ViewState view_state_from_json(const nlohmann::json& j);
nlohmann::json view_state_to_json(const ViewState& v);

VirtualCamera camera_of(const ViewState& v);

// Rig as seen by this view: layer/blend select the policy, alpha overrides
// replace per-source alpha. Throws UnknownSourceError for unknown ids.
Rig apply_view_state(const Rig& rig, const ViewState& v);

// Merged pinhole render for a view.
RasterImage render_view(const Rig& rig, const std::vector<BallView>& views, const ViewState& v);

// PNG bytes of render_view.
std::vector<std::uint8_t> render_png(const Rig& rig, const std::vector<BallView>& views, const ViewState& v);

// Little-endian stream frame: u32 seq, u16 width, u16 height, u8 channels,
// then 8-bit interleaved pixels (16-bit renders are reduced to their high byte).
std::vector<std::uint8_t> encode_stream_frame(std::uint32_t seq, const RasterImage& image);

struct StreamFrameHeader
{
    std::uint32_t seq = 0;
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::uint8_t channels = 0;
};

inline constexpr std::size_t kStreamHeaderSize = 9;

// Throws ValidationError when the payload does not match its header.
StreamFrameHeader decode_stream_header(std::span<const std::uint8_t> bytes);

} // namespace mirrorball::service
