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

// Minimal blocking HTTP and WebSocket clients for talking to the service.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace mirrorball::testing {

struct HttpResult
{
    int status = 0;
    std::string content_type;
    std::string body;
};

HttpResult http_request(unsigned short port, const std::string& method, const std::string& target,
                        const std::string& body = {});

// Percent-encodes everything outside the unreserved set.
std::string url_encode(const std::string& s);

class WsClient
{
public:
    WsClient(unsigned short port, const std::string& target);
    ~WsClient();

    void send_text(const std::string& text);
    // Next message; binary reports whether it was a binary frame.
    std::vector<std::uint8_t> read(bool& binary);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace mirrorball::testing
