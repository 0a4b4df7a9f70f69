#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpm4d/errors.hpp"

namespace dpm4d {

// Row-major interleaved raster with value semantics.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels = 1, T fill = T{})
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, fill) {
        if (width < 0 || height < 0 || channels < 1)
            throw DimensionError("invalid image dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

using RgbImage = Image<std::uint8_t>;     // 3 channels, R G B order
using DepthImage = Image<std::uint16_t>;  // millimetres, 0 = invalid
using Mask = Image<std::uint8_t>;         // 0 / 1

}  // namespace dpm4d
