#include "dpm4d/types.hpp"

#include <algorithm>
#include <sstream>

namespace dpm4d {

ReachabilityError::ReachabilityError(double distance, double min_reach, double max_reach)
    : Error([&] {
          std::ostringstream os;
          os << "target at distance " << distance << " outside reachable annulus [" << min_reach
             << ", " << max_reach << "]";
          return os.str();
      }()),
      distance_(distance), min_reach_(min_reach), max_reach_(max_reach) {}

DegenerateOrientationError::DegenerateOrientationError(double q5)
    : Error("wrist singularity: q4 and q6 are not separable"), q5_(q5) {}

RgbdFrame::RgbdFrame(RgbImage rgb_, DepthImage depth_, int index_)
    : rgb(std::move(rgb_)), depth(std::move(depth_)), index(index_) {
    if (rgb.channels() != 3)
        throw FormatError("rgb raster must have 3 channels");
    if (depth.empty() || rgb.width() != depth.width() || rgb.height() != depth.height()) {
        std::ostringstream os;
        os << "rgb " << rgb.width() << "x" << rgb.height() << " does not match depth "
           << depth.width() << "x" << depth.height();
        throw FormatError(os.str());
    }
    if (index < 0)
        throw ArgumentError("frame index must be non-negative");
}

void validate_tree(int part_count, const std::vector<std::pair<int, int>>& edges) {
    if (part_count < 1)
        throw ArgumentError("skeleton needs at least one part");
    if (static_cast<int>(edges.size()) != part_count - 1)
        throw ArgumentError("skeleton edge count must be part_count - 1");
    std::vector<int> parent(part_count, -2);
    parent[0] = -1;
    for (auto [p, c] : edges) {
        if (p < 0 || c < 0 || p >= part_count || c >= part_count || p == c)
            throw ArgumentError("skeleton edge index out of range");
        if (c == 0 || parent[c] != -2)
            throw ArgumentError("skeleton part has more than one parent");
        parent[c] = p;
    }
    // With n-1 edges and a unique parent per non-root part, the graph is a tree
    // iff every part reaches the root.
    for (int start = 0; start < part_count; ++start) {
        int node = start;
        for (int steps = 0; node != 0; ++steps) {
            if (steps > part_count)
                throw ArgumentError("skeleton edges contain a cycle");
            node = parent[node];
        }
    }
}

SkeletonDef::SkeletonDef(std::vector<std::string> names, std::vector<std::pair<int, int>> edges)
    : names_(std::move(names)), edges_(std::move(edges)) {
    validate_tree(part_count(), edges_);
    parent_.assign(part_count(), -1);
    children_.assign(part_count(), {});
    for (auto [p, c] : edges_) {
        parent_[c] = p;
        children_[p].push_back(c);
    }
    order_.push_back(0);
    for (std::size_t i = 0; i < order_.size(); ++i)
        for (int c : children_[order_[i]])
            order_.push_back(c);
}

std::optional<int> SkeletonDef::find(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        return std::nullopt;
    return static_cast<int>(it - names_.begin());
}

int SkeletonDef::index_of(std::string_view name) const {
    if (auto idx = find(name))
        return *idx;
    throw SchemaError("unknown part name '" + std::string(name) + "'");
}

std::string_view to_string(SkeletonKind kind) {
    switch (kind) {
    case SkeletonKind::reduced10: return "reduced10";
    case SkeletonKind::full14: return "full14";
    case SkeletonKind::custom: return "custom";
    }
    return "custom";
}

SkeletonKind skeleton_kind_from_string(std::string_view text) {
    if (text == "reduced10")
        return SkeletonKind::reduced10;
    if (text == "full14")
        return SkeletonKind::full14;
    if (text == "custom")
        return SkeletonKind::custom;
    throw SchemaError("unknown skeleton kind '" + std::string(text) + "'");
}

const SkeletonDef& full14_skeleton() {
    static const SkeletonDef skeleton(
        {"neck", "head", "r_shoulder", "l_shoulder", "r_elbow", "l_elbow", "r_wrist", "l_wrist",
         "r_hip", "l_hip", "r_knee", "l_knee", "r_ankle", "l_ankle"},
        {{0, 1}, {0, 2}, {0, 3}, {2, 4}, {3, 5}, {4, 6}, {5, 7},
         {0, 8}, {0, 9}, {8, 10}, {9, 11}, {10, 12}, {11, 13}});
    return skeleton;
}

const SkeletonDef& reduced10_skeleton() {
    static const SkeletonDef skeleton(
        {"neck", "head", "r_shoulder", "l_shoulder", "r_wrist", "l_wrist", "r_hip", "l_hip",
         "r_ankle", "l_ankle"},
        {{0, 1}, {0, 2}, {0, 3}, {2, 4}, {3, 5}, {0, 6}, {0, 7}, {6, 8}, {7, 9}});
    return skeleton;
}

const SkeletonDef& skeleton_for(SkeletonKind kind) {
    switch (kind) {
    case SkeletonKind::reduced10: return reduced10_skeleton();
    case SkeletonKind::full14: return full14_skeleton();
    case SkeletonKind::custom: break;
    }
    throw ArgumentError("custom skeletons have no canonical definition");
}

SkeletonKind kind_of(const SkeletonDef& skeleton) {
    if (skeleton == reduced10_skeleton())
        return SkeletonKind::reduced10;
    if (skeleton == full14_skeleton())
        return SkeletonKind::full14;
    return SkeletonKind::custom;
}

Pose remap_pose(const Pose& pose, const SkeletonDef& from, const SkeletonDef& to) {
    Pose out;
    out.skeleton_kind = kind_of(to);
    out.total_score = pose.total_score;
    for (int part = 0; part < to.part_count(); ++part) {
        auto src = from.find(to.name(part));
        if (!src || *src >= static_cast<int>(pose.joints.size()))
            throw SchemaError("part '" + to.name(part) + "' missing from source pose");
        Joint j = pose.joints[*src];
        j.part_id = part;
        out.joints.push_back(j);
    }
    return out;
}

}  // namespace dpm4d
