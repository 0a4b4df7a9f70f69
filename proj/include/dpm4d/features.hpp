#pragma once

#include <span>
#include <vector>

#include "dpm4d/image.hpp"

namespace dpm4d {

struct HogParams {
    int cell_size = 8;
    int bins = 9;        // unsigned orientations over [0, pi)
    double clip = 0.2;

    void validate() const;
    int dims() const { return 4 * bins; }
};

// Per-cell HOG descriptors. Each cell holds `bins` orientation energies
// normalised by each of the four 2x2-cell blocks that contain it, so a
// descriptor has 4 * bins entries, all in [0, clip].
class FeatureGrid {
public:
    FeatureGrid() = default;
    FeatureGrid(int rows, int cols, int dims, int cell_size, int bins);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int dims() const { return dims_; }
    int cell_size() const { return cell_size_; }
    int bins() const { return bins_; }

    std::span<const double> cell(int row, int col) const {
        return {values_.data() + offset(row, col), static_cast<std::size_t>(dims_)};
    }
    std::span<double> cell(int row, int col) {
        return {values_.data() + offset(row, col), static_cast<std::size_t>(dims_)};
    }
    std::span<const double> values() const { return values_; }

    bool operator==(const FeatureGrid&) const = default;

private:
    std::size_t offset(int row, int col) const {
        return (static_cast<std::size_t>(row) * cols_ + col) * dims_;
    }

    int rows_ = 0;
    int cols_ = 0;
    int dims_ = 0;
    int cell_size_ = 0;
    int bins_ = 0;
    std::vector<double> values_;
};

// Gradient per pixel comes from the channel with the largest magnitude.
FeatureGrid compute_hog(const Image<std::uint8_t>& image, const HogParams& params = {});

// Depth channel: millimetre values, 0 = invalid. Invalid pixels have zero
// gradient and never act as a neighbour in a finite difference.
FeatureGrid compute_hog(const Image<std::uint16_t>& depth, const HogParams& params = {});

FeatureGrid compute_hog(const Image<double>& image, const HogParams& params = {});

}  // namespace dpm4d
