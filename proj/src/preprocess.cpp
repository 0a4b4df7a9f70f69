#include "dpm4d/preprocess.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace dpm4d {

void MserParams::validate() const {
    if (delta < 1)
        throw ConfigError("mser delta must be >= 1");
    if (min_area <= 0 || (max_area > 0 && max_area <= min_area))
        throw ConfigError("mser areas must satisfy 0 < min_area < max_area");
    if (stability_cutoff < 0.0)
        throw ConfigError("mser stability cutoff must be non-negative");
    if (levels < 2 || levels > 65536)
        throw ConfigError("mser level count must lie in [2, 65536]");
    if (area_threshold < 0)
        throw ConfigError("mser area threshold must be non-negative");
}

std::vector<int> quantize_depth(const DepthImage& depth, int levels, Polarity polarity) {
    const auto data = depth.data();
    std::uint16_t lo = std::numeric_limits<std::uint16_t>::max();
    std::uint16_t hi = 0;
    for (auto v : data) {
        if (v == 0)
            continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<int> q(data.size(), -1);
    const std::uint64_t span = hi > lo ? hi - lo : 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i] == 0)
            continue;
        int level = 0;
        if (span > 0)
            level = static_cast<int>(((data[i] - lo) * static_cast<std::uint64_t>(levels - 1) + span / 2) / span);
        q[i] = polarity == Polarity::near ? level : levels - 1 - level;
    }
    return q;
}

namespace {

std::uint16_t dequantize(const DepthImage& depth, int level, int levels, Polarity polarity) {
    std::uint16_t lo = std::numeric_limits<std::uint16_t>::max();
    std::uint16_t hi = 0;
    for (auto v : depth.data()) {
        if (v == 0)
            continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo)
        return lo;
    const int l = polarity == Polarity::near ? level : levels - 1 - level;
    return static_cast<std::uint16_t>(lo + (static_cast<double>(hi - lo) * l) / (levels - 1) + 0.5);
}

struct TreeNode {
    int birth = 0;
    int area = 0;
    int parent = -1;
    int seed = 0;
    std::vector<std::pair<int, int>> samples;  // (level, |R ∩ {q <= level - delta}|)
};

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n, -1), area_(n, 0), old_(n, 0) {}

    void add(int p) {
        parent_[p] = p;
        area_[p] = 1;
    }
    bool added(int p) const { return parent_[p] >= 0; }
    int find(int p) {
        int r = p;
        while (parent_[r] != r)
            r = parent_[r];
        while (parent_[p] != r) {
            int next = parent_[p];
            parent_[p] = r;
            p = next;
        }
        return r;
    }
    // Returns (surviving root, absorbed root).
    std::pair<int, int> unite(int a, int b) {
        if (area_[a] < area_[b] || (area_[a] == area_[b] && b < a))
            std::swap(a, b);
        parent_[b] = a;
        area_[a] += area_[b];
        old_[a] += old_[b];
        return {a, b};
    }
    int area(int r) const { return area_[r]; }
    int& old(int r) { return old_[r]; }

private:
    std::vector<int> parent_;
    std::vector<int> area_;
    std::vector<int> old_;
};

std::vector<int> flood_region(const std::vector<int>& q, int width, int height, int seed, int level) {
    std::vector<int> pixels;
    std::vector<char> visited(q.size(), 0);
    std::vector<int> stack{seed};
    visited[seed] = 1;
    while (!stack.empty()) {
        int p = stack.back();
        stack.pop_back();
        pixels.push_back(p);
        const int x = p % width;
        const int y = p / width;
        const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (const auto& n : nbrs) {
            if (n[0] < 0 || n[1] < 0 || n[0] >= width || n[1] >= height)
                continue;
            const int np = n[1] * width + n[0];
            if (!visited[np] && q[np] >= 0 && q[np] <= level) {
                visited[np] = 1;
                stack.push_back(np);
            }
        }
    }
    std::sort(pixels.begin(), pixels.end());
    return pixels;
}

std::vector<StableRegion> sweep(const DepthImage& depth, const MserParams& params, Polarity polarity) {
    const int width = depth.width();
    const int height = depth.height();
    const int levels = params.levels;
    const int delta = params.delta;
    const int max_area = params.resolved_max_area(width * height);
    const std::vector<int> q = quantize_depth(depth, levels, polarity);

    std::vector<std::vector<int>> by_level(levels);
    for (std::size_t p = 0; p < q.size(); ++p)
        if (q[p] >= 0)
            by_level[q[p]].push_back(static_cast<int>(p));

    UnionFind uf(q.size());
    std::vector<TreeNode> nodes;
    std::vector<int> node_of_root(q.size(), -1);
    std::vector<std::vector<int>> pending(q.size());
    std::vector<int> candidates;
    std::vector<int> stamp(q.size(), -1);

    const int last_level = levels - 1 + delta;
    for (int level = 0; level <= last_level; ++level) {
        std::vector<int> touched;
        if (level < levels) {
            for (int p : by_level[level]) {
                uf.add(p);
                touched.push_back(p);
                const int x = p % width;
                const int y = p / width;
                const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
                for (const auto& n : nbrs) {
                    if (n[0] < 0 || n[1] < 0 || n[0] >= width || n[1] >= height)
                        continue;
                    const int np = n[1] * width + n[0];
                    if (!uf.added(np))
                        continue;
                    int ra = uf.find(p);
                    int rb = uf.find(np);
                    if (ra == rb)
                        continue;
                    auto [keep, gone] = uf.unite(ra, rb);
                    auto& into = pending[keep];
                    into.insert(into.end(), pending[gone].begin(), pending[gone].end());
                    pending[gone].clear();
                    if (node_of_root[gone] >= 0)
                        into.push_back(node_of_root[gone]);
                    node_of_root[gone] = -1;
                }
            }
            // Every component that changed at this level becomes a new node.
            for (int p : touched) {
                const int r = uf.find(p);
                if (stamp[r] == level)
                    continue;
                stamp[r] = level;
                TreeNode node;
                node.birth = level;
                node.area = uf.area(r);
                node.seed = r;
                const int id = static_cast<int>(nodes.size());
                if (node_of_root[r] >= 0)
                    pending[r].push_back(node_of_root[r]);
                for (int child : pending[r])
                    nodes[child].parent = id;
                pending[r].clear();
                node_of_root[r] = id;
                nodes.push_back(std::move(node));
                candidates.push_back(r);
            }
        }
        const int old_level = level - delta;
        if (old_level >= 0 && old_level < levels)
            for (int p : by_level[old_level])
                ++uf.old(uf.find(p));

        // Record samples for every live component inside the area window.
        std::vector<int> next;
        next.reserve(candidates.size());
        for (int r : candidates) {
            if (uf.find(r) != r || stamp[r] == -2 - level)
                continue;
            stamp[r] = -2 - level;
            const int area = uf.area(r);
            if (area > max_area)
                continue;
            next.push_back(r);
            if (area >= params.min_area)
                nodes[node_of_root[r]].samples.emplace_back(level, uf.old(r));
        }
        candidates.swap(next);
    }

    std::vector<StableRegion> regions;
    for (const auto& node : nodes) {
        if (node.samples.empty())
            continue;
        double best = std::numeric_limits<double>::infinity();
        int best_level = node.birth;
        for (auto [level, old] : node.samples) {
            const int target = level + delta;
            const TreeNode* up = &node;
            while (up->parent >= 0 && nodes[up->parent].birth <= target)
                up = &nodes[up->parent];
            const double s = static_cast<double>(up->area - old) / node.area;
            if (s < best) {
                best = s;
                best_level = level;
            }
        }
        if (best > params.stability_cutoff)
            continue;
        StableRegion region;
        region.pixels = flood_region(q, width, height, node.seed, node.birth);
        region.area = node.area;
        region.stability = best;
        region.level = node.birth;
        region.best_level = best_level;
        region.representative = dequantize(depth, node.birth, levels, polarity);
        region.polarity = polarity;
        regions.push_back(std::move(region));
    }
    return regions;
}

}  // namespace

std::vector<StableRegion> detect_stable_regions(const DepthImage& depth, const MserParams& params) {
    params.validate();
    if (depth.empty())
        throw DimensionError("depth raster is empty");
    std::vector<StableRegion> regions = sweep(depth, params, Polarity::near);
    for (auto& far : sweep(depth, params, Polarity::far)) {
        auto same = std::find_if(regions.begin(), regions.end(),
                                 [&](const StableRegion& r) { return r.pixels == far.pixels; });
        if (same == regions.end())
            regions.push_back(std::move(far));
        else if (far.stability < same->stability)
            *same = std::move(far);
    }
    std::stable_sort(regions.begin(), regions.end(), [](const StableRegion& a, const StableRegion& b) {
        if (a.area != b.area)
            return a.area > b.area;
        if (a.pixels.front() != b.pixels.front())
            return a.pixels.front() < b.pixels.front();
        return a.polarity < b.polarity;
    });
    return regions;
}

BackgroundRemoval remove_background(const RgbdFrame& frame, const MserParams& params) {
    const int width = frame.width();
    const int height = frame.height();
    const int threshold = params.resolved_area_threshold(width * height);
    const auto depth = frame.depth.data();
    const int valid = static_cast<int>(std::count_if(depth.begin(), depth.end(), [](auto v) { return v != 0; }));

    BackgroundRemoval out{frame, Mask(width, height, 1, 1), {}};
    for (std::size_t p = 0; p < depth.size(); ++p)
        if (depth[p] == 0)
            out.mask.data()[p] = 0;

    for (auto& region : detect_stable_regions(frame.depth, params)) {
        if (region.polarity != Polarity::far || region.area <= threshold || region.area == valid)
            continue;
        for (int p : region.pixels)
            out.mask.data()[p] = 0;
        out.removed.push_back(std::move(region));
    }
    auto rgb = out.frame.rgb.data();
    auto out_depth = out.frame.depth.data();
    for (std::size_t p = 0; p < out_depth.size(); ++p) {
        if (out.mask.data()[p])
            continue;
        out_depth[p] = 0;
        rgb[3 * p] = rgb[3 * p + 1] = rgb[3 * p + 2] = 0;
    }
    return out;
}

}  // namespace dpm4d
