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

// HTTP + WebSocket service steering live renders of a configured rig.
//
//   GET  /api/rig                 current rig JSON
//   PUT  /api/rig                 replace the rig (400 on invalid, 404 on unknown source)
//   POST /api/register            {correspondences, source_a?, source_b?} -> rotation + residual_deg
//   GET  /api/frame?view=<json>   PNG of the merged pinhole render
//   WS   /api/stream              ViewState text messages in, binary frames out (latest wins)

#pragma once

#include "mirrorball/config.hpp"
#include "mirrorball/frame_renderer.hpp"

#include <json.hpp>

#include <chrono>
#include <memory>
#include <mutex>
#include <string>

namespace mirrorball::service {

struct HttpReply
{
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

// Source of the current rig and frames. The rig is swapped as a whole under
// a mutex; a render works on the snapshot it took.
class ServiceState
{
public:
    explicit ServiceState(io::ProjectConfig config);

    std::shared_ptr<const Rig> rig() const;
    // Validates against the configured inputs (UnknownSourceError) and swaps.
    void replace_rig(Rig rig);

    // Frames for the current playback position.
    std::vector<BallView> current_views() const;

    const io::ProjectConfig& config() const { return config_; }

private:
    io::ProjectConfig config_;
    mutable std::mutex mutex_;
    std::shared_ptr<const Rig> rig_;
    std::chrono::steady_clock::time_point started_;
    mutable std::size_t cached_index_ = static_cast<std::size_t>(-1);
    mutable std::shared_ptr<const std::vector<BallView>> cached_views_;
};

// Transport-independent request handling for the HTTP endpoints.
HttpReply handle_http(ServiceState& state, const std::string& method, const std::string& target, const std::string& body);

// Renders one ViewState message for the stream (binary frame or error text).
struct StreamReply
{
    bool binary = true;
    std::vector<std::uint8_t> payload;
};
StreamReply render_stream_message(ServiceState& state, std::uint32_t seq, const ViewState& view);

std::string url_decode(const std::string& s);

class StreamService
{
public:
    explicit StreamService(io::ProjectConfig config);
    ~StreamService();

    StreamService(const StreamService&) = delete;
    StreamService& operator=(const StreamService&) = delete;

    // Binds and serves on background threads; port 0 picks a free port.
    // Returns the bound port.
    unsigned short start(const std::string& bind, unsigned short port, int io_threads = 2);
    void stop();
    // Blocks until SIGINT or SIGTERM.
    void wait_for_signal();

    ServiceState& state() { return *state_; }

private:
    struct Impl;
    std::shared_ptr<ServiceState> state_;
    std::unique_ptr<Impl> impl_;
};

} // namespace mirrorball::service
