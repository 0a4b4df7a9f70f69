#pragma once

#include <cstdint>
#include <vector>

#include "dpm4d/types.hpp"

namespace dpm4d {

// Parameters of the depth-based stable region detector.
//
// Depth is linearly quantised to `levels` grey levels spanning the valid
// depth range of the frame before the component tree is built; `delta` is
// measured in those levels. `max_area` and `area_threshold` of 0 resolve to
// the frame area and to a quarter of it respectively.
struct MserParams {
    int delta = 8;
    int min_area = 30;
    int max_area = 0;
    int area_threshold = 0;
    double stability_cutoff = 0.1;
    int levels = 256;

    void validate() const;
    int resolved_max_area(int frame_area) const { return max_area > 0 ? max_area : frame_area; }
    int resolved_area_threshold(int frame_area) const {
        return area_threshold > 0 ? area_threshold : frame_area / 4;
    }
};

// near: components of {level <= t} (closer than a threshold).
// far:  components of {level >= t}, swept on inverted levels.
enum class Polarity { near, far };

struct StableRegion {
    std::vector<int> pixels;  // sorted linear indices y * width + x
    int area = 0;
    double stability = 0.0;   // min over the region's lifetime of |R(i+d) \ R(i-d)| / |R|
    int level = 0;            // swept level at which the region first appears
    int best_level = 0;       // level attaining `stability`
    std::uint16_t representative = 0;  // depth (mm) corresponding to `level`
    Polarity polarity = Polarity::near;
};

// Quantised depth on the swept scale of `polarity`: -1 for invalid pixels,
// otherwise a level in [0, levels).
std::vector<int> quantize_depth(const DepthImage& depth, int levels, Polarity polarity);

// Stable extremal regions of both polarities, de-duplicated by pixel set and
// sorted by area (descending). An all-invalid raster yields an empty list.
std::vector<StableRegion> detect_stable_regions(const DepthImage& depth, const MserParams& params);

struct BackgroundRemoval {
    RgbdFrame frame;
    Mask mask;  // 1 on retained pixels
    std::vector<StableRegion> removed;
};

// Zeroes depth and rgb inside far-polarity stable regions larger than the
// area threshold. A region covering every valid pixel is never background.
// Invalid depth pixels are background: zeroed in rgb and 0 in the mask.
BackgroundRemoval remove_background(const RgbdFrame& frame, const MserParams& params);

}  // namespace dpm4d
