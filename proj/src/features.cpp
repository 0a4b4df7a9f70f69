#include "dpm4d/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dpm4d {

void HogParams::validate() const {
    if (cell_size < 1)
        throw ConfigError("hog cell size must be positive");
    if (bins < 1)
        throw ConfigError("hog bin count must be positive");
    if (clip <= 0.0)
        throw ConfigError("hog clip value must be positive");
}

FeatureGrid::FeatureGrid(int rows, int cols, int dims, int cell_size, int bins)
    : rows_(rows), cols_(cols), dims_(dims), cell_size_(cell_size), bins_(bins),
      values_(static_cast<std::size_t>(rows) * cols * dims, 0.0) {
    if (rows < 0 || cols < 0 || dims < 0)
        throw DimensionError("invalid feature grid dimensions");
}

namespace {

template <typename T>
FeatureGrid hog_impl(const Image<T>& image, const HogParams& params, bool invalid_zero) {
    params.validate();
    const int w = image.width();
    const int h = image.height();
    const int cs = params.cell_size;
    if (w < 3 * cs || h < 3 * cs)
        throw DimensionError("image " + std::to_string(w) + "x" + std::to_string(h) +
                             " too small for hog: minimum is " + std::to_string(3 * cs) + "x" +
                             std::to_string(3 * cs));
    const int rows = h / cs;
    const int cols = w / cs;
    const int bins = params.bins;
    std::vector<double> hist(static_cast<std::size_t>(rows) * cols * bins, 0.0);

    const double bin_width = std::numbers::pi / bins;
    for (int y = 0; y < rows * cs; ++y) {
        for (int x = 0; x < cols * cs; ++x) {
            double best_gx = 0.0;
            double best_gy = 0.0;
            double best_mag2 = 0.0;
            for (int c = 0; c < image.channels(); ++c) {
                const double centre = static_cast<double>(image.at(x, y, c));
                if (invalid_zero && centre == 0.0)
                    continue;
                auto sample = [&](int sx, int sy) {
                    sx = std::clamp(sx, 0, w - 1);
                    sy = std::clamp(sy, 0, h - 1);
                    const double v = static_cast<double>(image.at(sx, sy, c));
                    return (invalid_zero && v == 0.0) ? centre : v;
                };
                const double gx = sample(x + 1, y) - sample(x - 1, y);
                const double gy = sample(x, y + 1) - sample(x, y - 1);
                const double mag2 = gx * gx + gy * gy;
                if (mag2 > best_mag2) {
                    best_mag2 = mag2;
                    best_gx = gx;
                    best_gy = gy;
                }
            }
            if (best_mag2 == 0.0)
                continue;
            double angle = std::atan2(best_gy, best_gx);
            if (angle < 0.0)
                angle += std::numbers::pi;
            int bin = static_cast<int>(angle / bin_width);
            bin = std::clamp(bin, 0, bins - 1);
            hist[(static_cast<std::size_t>(y / cs) * cols + x / cs) * bins + bin] += std::sqrt(best_mag2);
        }
    }

    std::vector<double> energy(static_cast<std::size_t>(rows) * cols, 0.0);
    for (std::size_t cell = 0; cell < energy.size(); ++cell)
        for (int b = 0; b < bins; ++b)
            energy[cell] += hist[cell * bins + b] * hist[cell * bins + b];
    auto cell_energy = [&](int r, int c) {
        if (r < 0 || c < 0 || r >= rows || c >= cols)
            return 0.0;
        return energy[static_cast<std::size_t>(r) * cols + c];
    };

    FeatureGrid grid(rows, cols, params.dims(), cs, bins);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            auto out = grid.cell(r, c);
            const double* in = &hist[(static_cast<std::size_t>(r) * cols + c) * bins];
            // Blocks whose top-left cell is (r + dr, c + dc), dr, dc in {-1, 0}.
            int block = 0;
            for (int dr = -1; dr <= 0; ++dr) {
                for (int dc = -1; dc <= 0; ++dc, ++block) {
                    const double e = cell_energy(r + dr, c + dc) + cell_energy(r + dr + 1, c + dc) +
                                     cell_energy(r + dr, c + dc + 1) + cell_energy(r + dr + 1, c + dc + 1);
                    if (e <= 0.0)
                        continue;
                    const double inv = 1.0 / std::sqrt(e);
                    for (int b = 0; b < bins; ++b)
                        out[block * bins + b] = std::min(in[b] * inv, params.clip);
                }
            }
        }
    }
    return grid;
}

}  // namespace

FeatureGrid compute_hog(const Image<std::uint8_t>& image, const HogParams& params) {
    return hog_impl(image, params, false);
}

FeatureGrid compute_hog(const Image<std::uint16_t>& depth, const HogParams& params) {
    return hog_impl(depth, params, true);
}

FeatureGrid compute_hog(const Image<double>& image, const HogParams& params) {
    return hog_impl(image, params, false);
}

}  // namespace dpm4d
