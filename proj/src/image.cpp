// SPDX-License-Identifier: Apache-2.0
#include "hydroptic/image.hpp"

#include "hydroptic/error.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

namespace hydroptic {

ImagePlane::ImagePlane(int width, int height, float fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
        throw_invariant("image dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height * 3, fill);
}

std::uint8_t quantize8(float v) {
    if (!(v > 0.0f)) return 0; // catches NaN as well
    if (v >= 1.0f) return 255;
    return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

ImagePlane quantize_image(const ImagePlane& img) {
    ImagePlane out = img;
    for (float& v : out.values()) v = dequantize8(quantize8(v));
    return out;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    // Jumps back to the setjmp point established by the caller.
    (void)msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

} // namespace

ImagePlane read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw_io("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_error_fn, png_warning_fn);
    if (!png) throw_io("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw_io("libpng init failed");
    }

    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw_parse("not a decodable PNG: " + path.string());
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB; alpha is dropped.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw_parse("unsupported channel layout in " + path.string());
    }

    const std::size_t stride = png_get_rowbytes(png, info);
    rows.resize(stride * h);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        row_ptrs[y] = rows.data() + y * stride;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImagePlane img(static_cast<int>(w), static_cast<int>(h));
    float* dst = img.values().data();
    for (png_uint_32 y = 0; y < h; ++y) {
        const png_byte* src = rows.data() + y * stride;
        for (png_uint_32 x = 0; x < w * 3; ++x)
            *dst++ = dequantize8(src[x]);
    }
    return img;
}

void write_png(const ImagePlane& img, const std::filesystem::path& path) {
    if (img.empty()) throw_invariant("refusing to write an empty image");

    const std::filesystem::path tmp = path.string() + ".tmp";
    FilePtr fp(std::fopen(tmp.string().c_str(), "wb"));
    if (!fp) throw_io("cannot create " + tmp.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_error_fn, png_warning_fn);
    if (!png) throw_io("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw_io("libpng init failed");
    }

    const int w = img.width();
    const int h = img.height();
    std::vector<png_byte> row(static_cast<std::size_t>(w) * 3);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw_io("PNG encode failed for " + path.string());
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const float* src = img.values().data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w * 3; ++x)
            row[x] = quantize8(*src++);
        png_write_row(png, row.data());
    }
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    fp.reset();

    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw_io("cannot move " + tmp.string() + " to " + path.string());
}

ImagePlane hstack(const ImagePlane& left, const ImagePlane& right, int gutter) {
    if (left.height() != right.height())
        throw_invariant("hstack requires equal heights");
    ImagePlane out(left.width() + gutter + right.width(), left.height(), 1.0f);
    for (int y = 0; y < left.height(); ++y) {
        for (int x = 0; x < left.width(); ++x)
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = left.at(x, y, c);
        for (int x = 0; x < right.width(); ++x)
            for (int c = 0; c < 3; ++c)
                out.at(left.width() + gutter + x, y, c) = right.at(x, y, c);
    }
    return out;
}

} // namespace hydroptic
