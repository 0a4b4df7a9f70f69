#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpm4d/image.hpp"

namespace dpm4d {

// Registered RGB + depth pair. rgb is 3-channel, depth is millimetres with
// 0 marking invalid pixels; both share the same width and height.
struct RgbdFrame {
    RgbImage rgb;
    DepthImage depth;
    int index = 0;

    RgbdFrame() = default;
    RgbdFrame(RgbImage rgb_, DepthImage depth_, int index_);

    int width() const { return depth.width(); }
    int height() const { return depth.height(); }
};

// Part tree. Edges are (parent, child) and the root is part 0.
class SkeletonDef {
public:
    SkeletonDef() = default;
    SkeletonDef(std::vector<std::string> names, std::vector<std::pair<int, int>> edges);

    int part_count() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::string& name(int part) const { return names_.at(part); }
    std::optional<int> find(std::string_view name) const;
    int index_of(std::string_view name) const;

    int parent(int part) const { return parent_.at(part); }  // -1 for the root
    const std::vector<int>& children(int part) const { return children_.at(part); }
    // Parents always appear before their children.
    const std::vector<int>& root_to_leaf() const { return order_; }

    bool operator==(const SkeletonDef& other) const {
        return names_ == other.names_ && edges_ == other.edges_;
    }

private:
    std::vector<std::string> names_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
    std::vector<int> order_;
};

// Throws ArgumentError unless `edges` form a tree over `part_count` nodes
// rooted at 0 with every edge directed away from the root.
void validate_tree(int part_count, const std::vector<std::pair<int, int>>& edges);

enum class SkeletonKind { reduced10, full14, custom };

std::string_view to_string(SkeletonKind kind);
SkeletonKind skeleton_kind_from_string(std::string_view text);

const SkeletonDef& full14_skeleton();
const SkeletonDef& reduced10_skeleton();
const SkeletonDef& skeleton_for(SkeletonKind kind);
// full14 / reduced10 when `skeleton` equals one of them, custom otherwise.
SkeletonKind kind_of(const SkeletonDef& skeleton);

struct Joint {
    int part_id = 0;
    double x = 0.0;
    double y = 0.0;
    int type_id = 0;
    double score = 0.0;

    bool operator==(const Joint&) const = default;
};

struct Pose {
    std::vector<Joint> joints;  // indexed by part_id
    SkeletonKind skeleton_kind = SkeletonKind::reduced10;
    double total_score = 0.0;

    bool operator==(const Pose&) const = default;
};

struct Joint3d {
    int part_id = 0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    bool has_z = true;  // false when no valid depth was found around the joint

    bool operator==(const Joint3d&) const = default;
};

// Coordinates are in any consistent unit. lift_to_3d fills x/y with pixel
// coordinates and z with millimetres; the synthetic generator provides
// metric (mm) figures.
struct Pose3d {
    std::vector<Joint3d> joints;
    SkeletonKind skeleton_kind = SkeletonKind::reduced10;

    bool operator==(const Pose3d&) const = default;
};

struct BoundingBox {
    int h = 0;
    int w = 0;

    bool operator==(const BoundingBox&) const = default;
};

struct Annotation {
    int frame = 0;
    BoundingBox bbox;
    Pose pose;

    bool operator==(const Annotation&) const = default;
};

struct AnnotationSet {
    std::vector<Annotation> entries;  // strictly increasing frame indices

    bool operator==(const AnnotationSet&) const = default;
};

// Maps the joints of `pose` (defined on `from`) onto the parts of `to` by
// name. Throws SchemaError when a part of `to` has no counterpart.
Pose remap_pose(const Pose& pose, const SkeletonDef& from, const SkeletonDef& to);

}  // namespace dpm4d
