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

// Precomputed remap tables from an output projection (equirectangular or a
// virtual pinhole camera) into the pixels of a mirror ball image, and the
// bilinear resampler that consumes them.

#pragma once

#include "mirrorball/projection.hpp"
#include "mirrorball/raster.hpp"
#include "mirrorball/rotation.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mirrorball {

// Ball silhouette in source pixel coordinates. Pixel centres sit on integer
// coordinates, so the image spans [-0.5, width - 0.5] horizontally.
struct BallCircle
{
    double cx = 0.0;
    double cy = 0.0;
    double r_px = 0.0;

    // Throws ValidationError unless r_px > 8 and the disk fits inside the image.
    void validate(int image_width, int image_height) const;

    friend bool operator==(const BallCircle&, const BallCircle&) = default;
};

struct PixelCoord
{
    double x = 0.0;
    double y = 0.0;
};

// src_x = cx + ix r, src_y = cy - iy r (disk frame is y-up, raster is y-down).
PixelCoord disk_to_pixels(const DiskPoint& p, const BallCircle& circle);
DiskPoint pixels_to_disk(const PixelCoord& px, const BallCircle& circle);

// One camera's view of the ball. orientation maps world rays into this
// camera's ball frame.
struct BallView
{
    RasterImage image;
    BallCircle circle;
    FovAlpha fov{360.0};
    Rotation3 orientation;
    std::string source_id;

    void validate() const;
};

struct EquirectSpec
{
    int width = 0;
    int height = 0;

    void validate() const;

    friend bool operator==(const EquirectSpec&, const EquirectSpec&) = default;
};

struct VirtualCamera
{
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    double roll_deg = 0.0;
    double hfov_deg = 90.0;
    int out_width = 0;
    int out_height = 0;

    void validate() const;

    friend bool operator==(const VirtualCamera&, const VirtualCamera&) = default;
};

using OutputSpec = std::variant<EquirectSpec, VirtualCamera>;

void validate_output(const OutputSpec& spec);
int output_width(const OutputSpec& spec);
int output_height(const OutputSpec& spec);

// Longitude/latitude in degrees at the centre of output pixel (u, v).
double equirect_longitude_deg(const EquirectSpec& spec, double u);
double equirect_latitude_deg(const EquirectSpec& spec, double v);

// Unit world ray through the centre of equirect pixel (u, v):
// (cos(lat) sin(lon), sin(lat), cos(lat) cos(lon)).
Eigen::Vector3d equirect_ray(const EquirectSpec& spec, double u, double v);

// Unit world ray of pinhole pixel (u, v).
Eigen::Vector3d pinhole_ray(const VirtualCamera& cam, double u, double v);

Eigen::Vector3d output_ray(const OutputSpec& spec, double u, double v);

// Per output pixel source coordinates and a validity flag.
class RemapTable
{
public:
    RemapTable() = default;
    RemapTable(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return valid_.size(); }

    double src_x(std::size_t i) const { return xs_[i]; }
    double src_y(std::size_t i) const { return ys_[i]; }
    bool valid(std::size_t i) const { return valid_[i] != 0; }

    void set(std::size_t i, double x, double y) { xs_[i] = x; ys_[i] = y; valid_[i] = 1; }
    void set_invalid(std::size_t i) { xs_[i] = 0.0; ys_[i] = 0.0; valid_[i] = 0; }

    std::size_t valid_count() const;

    // Little-endian "MBRT" format: magic, u16 version, u32 width, u32 height,
    // then per pixel f32 src_x, f32 src_y, u8 valid.
    std::vector<std::uint8_t> serialize() const;
    static RemapTable deserialize(std::span<const std::uint8_t> bytes);
    void save(const std::filesystem::path& path) const;
    static RemapTable load(const std::filesystem::path& path);

    friend bool operator==(const RemapTable&, const RemapTable&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<std::uint8_t> valid_;
};

inline constexpr std::uint16_t kRemapTableVersion = 1;

// Generic builder: world ray of every output pixel -> orientation -> improved
// term -> source pixels. Pixels in the blind cone are invalid.
RemapTable build_table(const BallCircle& circle, const FovAlpha& fov, const Rotation3& orientation,
                       const OutputSpec& output);

RemapTable build_equirect_table(const BallView& view, int out_width, int out_height);
RemapTable build_pinhole_table(const BallView& view, const VirtualCamera& cam);

// Bilinear resampling; invalid entries get fill (one value per channel).
RasterImage resample(const RasterImage& src, const RemapTable& table, const PixelValue& fill);

// Black in the source's channel count.
PixelValue black_fill(const RasterImage& src);

} // namespace mirrorball
