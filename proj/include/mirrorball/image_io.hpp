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

#pragma once

#include "mirrorball/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mirrorball::io {

// Receives non-fatal decoder messages (e.g. a dropped alpha channel).
using WarningSink = std::function<void(const std::string&)>;

// Decodes PNG (8/16-bit gray or RGB; alpha dropped with a warning) and binary
// PGM/PPM (P5/P6, maxval up to 65535). Throws IoError for missing, unsupported
// or corrupt files; the message names the file.
RasterImage load_image(const std::filesystem::path& path, const WarningSink& warn = {});
RasterImage decode_image(std::span<const std::uint8_t> bytes, const std::string& name, const WarningSink& warn = {});

// Format chosen from the extension: .png, .pgm or .ppm.
void save_image(const std::filesystem::path& path, const RasterImage& image);

// Deterministic PNG encoding (fixed compression settings, no timestamps).
std::vector<std::uint8_t> encode_png(const RasterImage& image);
std::vector<std::uint8_t> encode_pnm(const RasterImage& image);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace mirrorball::io
