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

#include "mirrorball/raster.hpp"

#include "mirrorball/error.hpp"

#include <cstring>
#include <string>

namespace mirrorball {

RasterImage::RasterImage(int width, int height, int channels, SampleDepth depth)
    : width_(width), height_(height), channels_(channels), depth_(depth)
{
    if (width < 0 || height < 0)
    {
        throw ValidationError("raster dimensions must be non-negative");
    }
    if (channels != 1 && channels != 3)
    {
        throw ValidationError("raster must have 1 or 3 channels, got " + std::to_string(channels));
    }
    bytes_.assign(sample_count() * bytes_per_sample(depth), 0);
}

std::span<std::uint8_t> RasterImage::samples8()
{
    if (depth_ != SampleDepth::U8)
    {
        throw ValidationError("raster is not 8-bit");
    }
    return bytes_;
}

std::span<const std::uint8_t> RasterImage::samples8() const
{
    if (depth_ != SampleDepth::U8)
    {
        throw ValidationError("raster is not 8-bit");
    }
    return bytes_;
}

std::span<std::uint16_t> RasterImage::samples16()
{
    if (depth_ != SampleDepth::U16)
    {
        throw ValidationError("raster is not 16-bit");
    }
    return {reinterpret_cast<std::uint16_t*>(bytes_.data()), sample_count()};
}

std::span<const std::uint16_t> RasterImage::samples16() const
{
    if (depth_ != SampleDepth::U16)
    {
        throw ValidationError("raster is not 16-bit");
    }
    return {reinterpret_cast<const std::uint16_t*>(bytes_.data()), sample_count()};
}

std::uint32_t RasterImage::at(int x, int y, int c) const
{
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    if (depth_ == SampleDepth::U8)
    {
        return bytes_[i];
    }
    std::uint16_t v;
    std::memcpy(&v, bytes_.data() + 2 * i, 2);
    return v;
}

void RasterImage::set(int x, int y, int c, std::uint32_t v)
{
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    if (depth_ == SampleDepth::U8)
    {
        bytes_[i] = static_cast<std::uint8_t>(v);
        return;
    }
    const auto s = static_cast<std::uint16_t>(v);
    std::memcpy(bytes_.data() + 2 * i, &s, 2);
}

} // namespace mirrorball
