// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hydroptic {

/// H x W x 3 raster of linear channel intensities, row-major and
/// channel-interleaved (RGB). Values are held in [0,1] at the 8-bit codec
/// boundary; intermediate math may leave the range until the caller clamps
/// or rescales.
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(int width, int height, float fill = 0.0f);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    std::size_t sample_count() const { return data_.size(); }

    float& at(int x, int y, int c) {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
    }
    float at(int x, int y, int c) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
    }

    std::span<float> values() { return data_; }
    std::span<const float> values() const { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// Clamp to [0,1] and round half up to the 8-bit code value.
std::uint8_t quantize8(float v);

inline float dequantize8(std::uint8_t v) { return static_cast<float>(v) / 255.0f; }

/// Snap every sample to its 8-bit code value (the file round trip without
/// touching disk).
ImagePlane quantize_image(const ImagePlane& img);

/// Decode an 8-bit RGB PNG. Gray and palette images are expanded, 16-bit
/// depth is narrowed, and any alpha channel is dropped.
ImagePlane read_png(const std::filesystem::path& path);

/// Encode as 8-bit RGB PNG. Writes to a temp file in the target directory
/// and renames it over the destination, so readers never observe a partial
/// file. Output bytes depend only on pixel content.
void write_png(const ImagePlane& img, const std::filesystem::path& path);

/// Side-by-side strip with a thin white gutter, used for comparison panels.
ImagePlane hstack(const ImagePlane& left, const ImagePlane& right, int gutter = 4);

} // namespace hydroptic
