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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mirrorball {

enum class SampleDepth : std::uint8_t
{
    U8 = 1,
    U16 = 2,
};

inline std::size_t bytes_per_sample(SampleDepth d) { return static_cast<std::size_t>(d); }

// Row-major interleaved raster, 1 or 3 channels, 8 or 16 bit per sample.
// 16-bit samples are stored in native byte order.
class RasterImage
{
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, SampleDepth depth);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    SampleDepth depth() const { return depth_; }
    bool empty() const { return width_ == 0 || height_ == 0; }

    std::size_t sample_count() const
    {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_) * static_cast<std::size_t>(channels_);
    }
    std::size_t byte_size() const { return bytes_.size(); }

    std::span<std::uint8_t> bytes() { return bytes_; }
    std::span<const std::uint8_t> bytes() const { return bytes_; }

    // Typed view; T must match depth().
    std::span<std::uint8_t> samples8();
    std::span<const std::uint8_t> samples8() const;
    std::span<std::uint16_t> samples16();
    std::span<const std::uint16_t> samples16() const;

    // Sample value widened to 32 bits regardless of depth.
    std::uint32_t at(int x, int y, int c) const;
    void set(int x, int y, int c, std::uint32_t v);

    std::uint32_t max_value() const { return depth_ == SampleDepth::U8 ? 255u : 65535u; }

    friend bool operator==(const RasterImage& a, const RasterImage& b)
    {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.channels_ == b.channels_ && a.depth_ == b.depth_ &&
            a.bytes_ == b.bytes_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    SampleDepth depth_ = SampleDepth::U8;
    std::vector<std::uint8_t> bytes_;
};

// A fill colour / pixel value with one entry per channel.
using PixelValue = std::vector<std::uint32_t>;

} // namespace mirrorball
