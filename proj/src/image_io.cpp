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

#include "mirrorball/image_io.hpp"

#include "mirrorball/error.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

namespace mirrorball::io {

namespace {

struct ReadCursor
{
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n)
{
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + n > cur->size)
    {
        png_error(png, "unexpected end of data (truncated file)");
    }
    std::memcpy(out, cur->data + cur->pos, n);
    cur->pos += n;
}

void png_write_to_vector(png_structp png, png_bytep in, png_size_t n)
{
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), in, in + n);
}

void png_flush_noop(png_structp) {}

struct PngError
{
    char message[256];
};

void png_error_handler(png_structp png, png_const_charp msg)
{
    auto* err = static_cast<PngError*>(png_get_error_ptr(png));
    std::snprintf(err->message, sizeof(err->message), "%s", msg);
    png_longjmp(png, 1);
}

void png_warning_silent(png_structp, png_const_charp) {}

struct PngDecoded
{
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    bool dropped_alpha = false;
    std::vector<std::uint8_t> pixels;
};

// Returns false with err filled on failure. No objects with destructors are
// created between setjmp and the last libpng call.
bool decode_png_raw(const std::uint8_t* data, std::size_t size, PngDecoded& out, PngError& err)
{
    ReadCursor cursor{data, size, 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_silent);
    if (!png)
    {
        std::snprintf(err.message, sizeof(err.message), "cannot allocate PNG decoder");
        return false;
    }
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep>* volatile rows = new std::vector<png_bytep>();
    if (!info || setjmp(png_jmpbuf(png)))
    {
        if (!info)
        {
            std::snprintf(err.message, sizeof(err.message), "cannot allocate PNG info");
        }
        png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        delete rows;
        return false;
    }
    png_set_read_fn(png, &cursor, png_read_from_memory);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE)
    {
        png_set_palette_to_rgb(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8)
    {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color_type & PNG_COLOR_MASK_ALPHA)
    {
        png_set_strip_alpha(png);
        out.dropped_alpha = true;
    }
    if (depth == 16 && std::endian::native == std::endian::little)
    {
        png_set_swap(png);
    }
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.pixels.resize(stride * static_cast<std::size_t>(out.height));
    rows->resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y)
    {
        (*rows)[static_cast<std::size_t>(y)] = out.pixels.data() + stride * static_cast<std::size_t>(y);
    }
    png_read_image(png, rows->data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    return true;
}

RasterImage decode_png(std::span<const std::uint8_t> bytes, const std::string& name, const WarningSink& warn)
{
    PngDecoded dec;
    PngError err{};
    if (!decode_png_raw(bytes.data(), bytes.size(), dec, err))
    {
        throw IoError("cannot decode PNG '" + name + "': " + err.message);
    }
    if (dec.channels != 1 && dec.channels != 3)
    {
        throw IoError("unsupported PNG channel layout in '" + name + "'");
    }
    if (dec.dropped_alpha && warn)
    {
        warn("'" + name + "': alpha channel dropped");
    }
    RasterImage img(dec.width, dec.height, dec.channels, dec.bit_depth == 16 ? SampleDepth::U16 : SampleDepth::U8);
    if (img.byte_size() != dec.pixels.size())
    {
        throw IoError("unexpected PNG row layout in '" + name + "'");
    }
    std::memcpy(img.bytes().data(), dec.pixels.data(), dec.pixels.size());
    return img;
}

class PnmHeaderReader
{
public:
    PnmHeaderReader(std::span<const std::uint8_t> bytes, const std::string& name) : bytes_(bytes), name_(name) {}

    long next_int()
    {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
        {
            throw IoError("corrupt PNM header in '" + name_ + "'");
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]))
        {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > 1'000'000'000L)
            {
                throw IoError("corrupt PNM header in '" + name_ + "'");
            }
        }
        return v;
    }

    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_offset()
    {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
        {
            throw IoError("corrupt PNM header in '" + name_ + "'");
        }
        return pos_ + 1;
    }

    void seek(std::size_t p) { pos_ = p; }

private:
    void skip_space_and_comments()
    {
        while (pos_ < bytes_.size())
        {
            if (std::isspace(bytes_[pos_]))
            {
                ++pos_;
            }
            else if (bytes_[pos_] == '#')
            {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                {
                    ++pos_;
                }
            }
            else
            {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    const std::string& name_;
    std::size_t pos_ = 0;
};

RasterImage decode_pnm(std::span<const std::uint8_t> bytes, const std::string& name)
{
    const int channels = bytes[1] == '5' ? 1 : 3;
    PnmHeaderReader hdr(bytes, name);
    hdr.seek(2);
    const long w = hdr.next_int();
    const long h = hdr.next_int();
    const long maxval = hdr.next_int();
    const std::size_t offset = hdr.raster_offset();
    if (w <= 0 || h <= 0 || w > 65535 || h > 65535 || maxval <= 0 || maxval > 65535)
    {
        throw IoError("unsupported PNM dimensions or maxval in '" + name + "'");
    }
    const SampleDepth depth = maxval > 255 ? SampleDepth::U16 : SampleDepth::U8;
    RasterImage img(static_cast<int>(w), static_cast<int>(h), channels, depth);
    if (bytes.size() < offset + img.byte_size())
    {
        throw IoError("truncated PNM raster in '" + name + "'");
    }
    if (depth == SampleDepth::U8)
    {
        std::memcpy(img.bytes().data(), bytes.data() + offset, img.byte_size());
        return img;
    }
    auto out = img.samples16();
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        out[i] = static_cast<std::uint16_t>((bytes[offset + 2 * i] << 8) | bytes[offset + 2 * i + 1]);
    }
    return img;
}

std::string lower_extension(const std::filesystem::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

} // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
    {
        throw IoError("cannot open '" + path.string() + "'");
    }
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

RasterImage decode_image(std::span<const std::uint8_t> bytes, const std::string& name, const WarningSink& warn)
{
    static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0)
    {
        return decode_png(bytes, name, warn);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
    {
        return decode_pnm(bytes, name);
    }
    throw IoError("unsupported image format in '" + name + "' (expected PNG, binary PGM or PPM)");
}

RasterImage load_image(const std::filesystem::path& path, const WarningSink& warn)
{
    const auto bytes = read_file(path);
    return decode_image(bytes, path.string(), warn);
}

std::vector<std::uint8_t> encode_png(const RasterImage& image)
{
    if (image.empty())
    {
        throw ValidationError("cannot encode an empty image");
    }
    std::vector<std::uint8_t> out;
    PngError err{};
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_silent);
    if (!png)
    {
        throw IoError("cannot allocate PNG encoder");
    }
    png_infop info = png_create_info_struct(png);
    const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels() * bytes_per_sample(image.depth());
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    for (int y = 0; y < image.height(); ++y)
    {
        rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(image.bytes().data() + stride * static_cast<std::size_t>(y));
    }
    if (!info || setjmp(png_jmpbuf(png)))
    {
        png_destroy_write_struct(&png, info ? &info : nullptr);
        throw IoError(std::string("PNG encoding failed: ") + err.message);
    }
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()),
                 image.depth() == SampleDepth::U16 ? 16 : 8,
                 image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    if (image.depth() == SampleDepth::U16 && std::endian::native == std::endian::little)
    {
        png_set_swap(png);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

std::vector<std::uint8_t> encode_pnm(const RasterImage& image)
{
    if (image.empty())
    {
        throw ValidationError("cannot encode an empty image");
    }
    const std::string header = std::string(image.channels() == 1 ? "P5" : "P6") + "\n" + std::to_string(image.width()) +
        " " + std::to_string(image.height()) + "\n" + std::to_string(image.max_value()) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (image.depth() == SampleDepth::U8)
    {
        out.insert(out.end(), image.bytes().begin(), image.bytes().end());
        return out;
    }
    for (const std::uint16_t s : image.samples16())
    {
        out.push_back(static_cast<std::uint8_t>(s >> 8));
        out.push_back(static_cast<std::uint8_t>(s & 0xff));
    }
    return out;
}

void save_image(const std::filesystem::path& path, const RasterImage& image)
{
    const std::string ext = lower_extension(path);
    if (ext == ".png")
    {
        write_file(path, encode_png(image));
        return;
    }
    if ((ext == ".pgm" && image.channels() == 1) || (ext == ".ppm" && image.channels() == 3))
    {
        write_file(path, encode_pnm(image));
        return;
    }
    throw ValidationError("cannot save a " + std::to_string(image.channels()) + "-channel image as '" + path.string() +
                          "' (use .png, .pgm for gray or .ppm for colour)");
}

} // namespace mirrorball::io
