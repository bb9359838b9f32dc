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

#include "mirrorball/remap.hpp"

#include "mirrorball/error.hpp"
#include "mirrorball/parallel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace mirrorball {

namespace {

constexpr char kMagic[4] = {'M', 'B', 'R', 'T'};
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4;
constexpr std::size_t kRecordSize = 4 + 4 + 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v)
{
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
    {
        std::reverse(std::begin(raw), std::end(raw));
    }
    out.insert(out.end(), std::begin(raw), std::end(raw));
}

template <typename T>
T get_le(const std::uint8_t* p)
{
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
    {
        std::reverse(std::begin(raw), std::end(raw));
    }
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
}

template <typename T, int C>
void resample_kernel(const RasterImage& src, const RemapTable& table, const PixelValue& fill, RasterImage& out)
{
    const T* in = reinterpret_cast<const T*>(src.bytes().data());
    T* dst = reinterpret_cast<T*>(out.bytes().data());
    const int sw = src.width();
    const int sh = src.height();
    const int tw = table.width();
    T fill_px[C];
    for (int c = 0; c < C; ++c)
    {
        fill_px[c] = static_cast<T>(fill[static_cast<std::size_t>(c)]);
    }

    parallel_rows(table.height(), [&](int row_begin, int row_end) {
        for (int v = row_begin; v < row_end; ++v)
        {
            for (int u = 0; u < tw; ++u)
            {
                const std::size_t i = static_cast<std::size_t>(v) * tw + u;
                T* o = dst + i * C;
                if (!table.valid(i))
                {
                    for (int c = 0; c < C; ++c)
                    {
                        o[c] = fill_px[c];
                    }
                    continue;
                }
                const double x = table.src_x(i);
                const double y = table.src_y(i);
                const double xf = std::floor(x);
                const double yf = std::floor(y);
                const float fx = static_cast<float>(x - xf);
                const float fy = static_cast<float>(y - yf);
                const int x0 = std::clamp(static_cast<int>(xf), 0, sw - 1);
                const int y0 = std::clamp(static_cast<int>(yf), 0, sh - 1);
                const int x1 = std::clamp(static_cast<int>(xf) + 1, 0, sw - 1);
                const int y1 = std::clamp(static_cast<int>(yf) + 1, 0, sh - 1);
                const T* p00 = in + (static_cast<std::size_t>(y0) * sw + x0) * C;
                const T* p10 = in + (static_cast<std::size_t>(y0) * sw + x1) * C;
                const T* p01 = in + (static_cast<std::size_t>(y1) * sw + x0) * C;
                const T* p11 = in + (static_cast<std::size_t>(y1) * sw + x1) * C;
                const float w00 = (1.0f - fx) * (1.0f - fy);
                const float w10 = fx * (1.0f - fy);
                const float w01 = (1.0f - fx) * fy;
                const float w11 = fx * fy;
                for (int c = 0; c < C; ++c)
                {
                    const float s = w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c];
                    o[c] = static_cast<T>(s + 0.5f);
                }
            }
        }
    });
}

} // namespace

void BallCircle::validate(int image_width, int image_height) const
{
    if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(r_px))
    {
        throw ValidationError("ball circle must be finite");
    }
    if (!(r_px > 8.0))
    {
        throw ValidationError("ball circle radius must exceed 8 px");
    }
    if (cx - r_px < -0.5 || cy - r_px < -0.5 || cx + r_px > image_width - 0.5 || cy + r_px > image_height - 0.5)
    {
        std::ostringstream os;
        os << "ball circle (cx=" << cx << ", cy=" << cy << ", r=" << r_px << ") does not fit inside the "
           << image_width << "x" << image_height << " image";
        throw ValidationError(os.str());
    }
}

PixelCoord disk_to_pixels(const DiskPoint& p, const BallCircle& circle)
{
    return {circle.cx + p.ix * circle.r_px, circle.cy - p.iy * circle.r_px};
}

DiskPoint pixels_to_disk(const PixelCoord& px, const BallCircle& circle)
{
    return {(px.x - circle.cx) / circle.r_px, (circle.cy - px.y) / circle.r_px};
}

void BallView::validate() const
{
    if (image.empty())
    {
        throw ValidationError("ball view '" + source_id + "' has an empty image");
    }
    circle.validate(image.width(), image.height());
}

void EquirectSpec::validate() const
{
    if (width <= 0 || height <= 0)
    {
        throw ValidationError("equirectangular output needs positive width and height");
    }
}

void VirtualCamera::validate() const
{
    if (!(hfov_deg > 0.0 && hfov_deg < 180.0))
    {
        throw ValidationError("hfov must satisfy 0 < hfov < 180 degrees");
    }
    if (out_width <= 0 || out_height <= 0)
    {
        throw ValidationError("virtual camera needs positive output width and height");
    }
    if (!std::isfinite(yaw_deg) || !std::isfinite(pitch_deg) || !std::isfinite(roll_deg))
    {
        throw ValidationError("virtual camera angles must be finite");
    }
}

void validate_output(const OutputSpec& spec)
{
    std::visit([](const auto& s) { s.validate(); }, spec);
}

int output_width(const OutputSpec& spec)
{
    if (const auto* e = std::get_if<EquirectSpec>(&spec))
    {
        return e->width;
    }
    return std::get<VirtualCamera>(spec).out_width;
}

int output_height(const OutputSpec& spec)
{
    if (const auto* e = std::get_if<EquirectSpec>(&spec))
    {
        return e->height;
    }
    return std::get<VirtualCamera>(spec).out_height;
}

double equirect_longitude_deg(const EquirectSpec& spec, double u) { return -180.0 + (u + 0.5) * 360.0 / spec.width; }

double equirect_latitude_deg(const EquirectSpec& spec, double v) { return 90.0 - (v + 0.5) * 180.0 / spec.height; }

Eigen::Vector3d equirect_ray(const EquirectSpec& spec, double u, double v)
{
    const double lon = deg_to_rad(equirect_longitude_deg(spec, u));
    const double lat = deg_to_rad(equirect_latitude_deg(spec, v));
    return {std::cos(lat) * std::sin(lon), std::sin(lat), std::cos(lat) * std::cos(lon)};
}

Eigen::Vector3d pinhole_ray(const VirtualCamera& cam, double u, double v)
{
    const double f = 0.5 * cam.out_width / std::tan(deg_to_rad(cam.hfov_deg) / 2.0);
    const Eigen::Vector3d local((u - 0.5 * (cam.out_width - 1)) / f, -(v - 0.5 * (cam.out_height - 1)) / f, 1.0);
    return view_rotation(cam.yaw_deg, cam.pitch_deg, cam.roll_deg).apply(local.normalized());
}

Eigen::Vector3d output_ray(const OutputSpec& spec, double u, double v)
{
    if (const auto* e = std::get_if<EquirectSpec>(&spec))
    {
        return equirect_ray(*e, u, v);
    }
    return pinhole_ray(std::get<VirtualCamera>(spec), u, v);
}

RemapTable::RemapTable(int width, int height)
    : width_(width), height_(height)
{
    if (width < 0 || height < 0)
    {
        throw ValidationError("remap table dimensions must be non-negative");
    }
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    xs_.assign(n, 0.0);
    ys_.assign(n, 0.0);
    valid_.assign(n, 0);
}

std::size_t RemapTable::valid_count() const
{
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

std::vector<std::uint8_t> RemapTable::serialize() const
{
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + size() * kRecordSize);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_le<std::uint16_t>(out, kRemapTableVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(width_));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(height_));
    for (std::size_t i = 0; i < size(); ++i)
    {
        put_le<float>(out, static_cast<float>(xs_[i]));
        put_le<float>(out, static_cast<float>(ys_[i]));
        out.push_back(valid_[i]);
    }
    return out;
}

RemapTable RemapTable::deserialize(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
    {
        throw ValidationError("not a remap table: missing MBRT header");
    }
    const auto version = get_le<std::uint16_t>(bytes.data() + 4);
    if (version != kRemapTableVersion)
    {
        throw ValidationError("unsupported remap table version " + std::to_string(version));
    }
    const auto w = get_le<std::uint32_t>(bytes.data() + 6);
    const auto h = get_le<std::uint32_t>(bytes.data() + 10);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (w > 1u << 20 || h > 1u << 20 || bytes.size() != kHeaderSize + n * kRecordSize)
    {
        throw ValidationError("remap table payload size does not match its header");
    }
    RemapTable t(static_cast<int>(w), static_cast<int>(h));
    const std::uint8_t* p = bytes.data() + kHeaderSize;
    for (std::size_t i = 0; i < n; ++i, p += kRecordSize)
    {
        t.xs_[i] = get_le<float>(p);
        t.ys_[i] = get_le<float>(p + 4);
        if (p[8] > 1)
        {
            throw ValidationError("remap table validity flag must be 0 or 1");
        }
        t.valid_[i] = p[8];
    }
    return t;
}

void RemapTable::save(const std::filesystem::path& path) const
{
    const auto bytes = serialize();
    std::ofstream f(path, std::ios::binary);
    if (!f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    {
        throw IoError("cannot write remap table " + path.string());
    }
}

RemapTable RemapTable::load(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
    {
        throw IoError("cannot open remap table " + path.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

RemapTable build_table(const BallCircle& circle, const FovAlpha& fov, const Rotation3& orientation,
                       const OutputSpec& output)
{
    validate_output(output);
    const int w = output_width(output);
    const int h = output_height(output);
    RemapTable table(w, h);

    // Fold the pinhole view rotation into the orientation once.
    Eigen::Matrix3d to_ball = orientation.matrix();
    double focal = 0.0;
    const auto* cam = std::get_if<VirtualCamera>(&output);
    if (cam)
    {
        to_ball = to_ball * view_rotation(cam->yaw_deg, cam->pitch_deg, cam->roll_deg).matrix();
        focal = 0.5 * cam->out_width / std::tan(deg_to_rad(cam->hfov_deg) / 2.0);
    }
    const auto* eq = std::get_if<EquirectSpec>(&output);

    parallel_rows(h, [&](int row_begin, int row_end) {
        for (int v = row_begin; v < row_end; ++v)
        {
            for (int u = 0; u < w; ++u)
            {
                Eigen::Vector3d local;
                if (eq)
                {
                    local = equirect_ray(*eq, u, v);
                }
                else
                {
                    local = Eigen::Vector3d((u - 0.5 * (w - 1)) / focal, -(v - 0.5 * (h - 1)) / focal, 1.0).normalized();
                }
                const std::size_t i = static_cast<std::size_t>(v) * w + u;
                const auto p = improved_forward(ReflectionRay(to_ball * local), fov);
                if (!p)
                {
                    table.set_invalid(i);
                    continue;
                }
                const PixelCoord px = disk_to_pixels(*p, circle);
                table.set(i, px.x, px.y);
            }
        }
    });
    return table;
}

RemapTable build_equirect_table(const BallView& view, int out_width, int out_height)
{
    view.validate();
    return build_table(view.circle, view.fov, view.orientation, EquirectSpec{out_width, out_height});
}

RemapTable build_pinhole_table(const BallView& view, const VirtualCamera& cam)
{
    view.validate();
    return build_table(view.circle, view.fov, view.orientation, cam);
}

PixelValue black_fill(const RasterImage& src) { return PixelValue(static_cast<std::size_t>(src.channels()), 0u); }

RasterImage resample(const RasterImage& src, const RemapTable& table, const PixelValue& fill)
{
    if (fill.size() != static_cast<std::size_t>(src.channels()))
    {
        throw ValidationError("fill value has " + std::to_string(fill.size()) + " channels but the source has " +
                              std::to_string(src.channels()));
    }
    for (auto f : fill)
    {
        if (f > src.max_value())
        {
            throw ValidationError("fill value exceeds the source sample range");
        }
    }
    if (src.empty() && table.valid_count() > 0)
    {
        throw ValidationError("cannot resample an empty source image");
    }
    RasterImage out(table.width(), table.height(), src.channels(), src.depth());
    const bool wide = src.depth() == SampleDepth::U16;
    if (src.channels() == 1)
    {
        wide ? resample_kernel<std::uint16_t, 1>(src, table, fill, out) : resample_kernel<std::uint8_t, 1>(src, table, fill, out);
    }
    else
    {
        wide ? resample_kernel<std::uint16_t, 3>(src, table, fill, out) : resample_kernel<std::uint8_t, 3>(src, table, fill, out);
    }
    return out;
}

} // namespace mirrorball
