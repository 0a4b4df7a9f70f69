#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "dpm4d/features.hpp"
#include "dpm4d/types.hpp"

namespace dpm4d {

enum class Channel { monocular = 0, depth = 1 };

struct FilterShape {
    int rows = 5;
    int cols = 5;
    bool operator==(const FilterShape&) const = default;
};

struct Point2d {
    double x = 0.0;
    double y = 0.0;
};

// [dx, dx^2, dy, dy^2] of xi - xj.
std::array<double, 4> deformation_feature(Point2d xi, Point2d xj);

// All weights of the model live in one flat vector so the trainer can treat
// the model as a point alpha. Per part and type: monocular filter, monocular
// bias, depth filter, depth bias. Per non-root part i (edge to its parent j)
// and type pair (ti, tj): monocular deformation (4), monocular pair bias,
// depth deformation (4), depth pair bias.
class PartsModel {
public:
    PartsModel() = default;
    PartsModel(SkeletonDef skeleton, std::vector<int> type_counts, std::vector<FilterShape> shapes,
               int cell_size = 8, int bins = 9);

    const SkeletonDef& skeleton() const { return skeleton_; }
    int part_count() const { return skeleton_.part_count(); }
    int type_count(int part) const { return type_counts_.at(part); }
    const std::vector<int>& type_counts() const { return type_counts_; }
    FilterShape filter_shape(int part) const { return shapes_.at(part); }
    const std::vector<FilterShape>& filter_shapes() const { return shapes_; }
    int cell_size() const { return cell_size_; }
    int bins() const { return bins_; }
    int feature_dims() const { return 4 * bins_; }
    HogParams hog_params() const;

    std::size_t filter_offset(int part, int type, Channel ch) const;
    std::size_t filter_size(int part) const;
    std::size_t bias_offset(int part, int type, Channel ch) const;
    std::size_t deformation_offset(int child, int child_type, int parent_type, Channel ch) const;
    std::size_t pair_bias_offset(int child, int child_type, int parent_type, Channel ch) const;

    std::span<double> filter(int part, int type, Channel ch);
    std::span<const double> filter(int part, int type, Channel ch) const;
    double& bias(int part, int type, Channel ch) { return weights_[bias_offset(part, type, ch)]; }
    double bias(int part, int type, Channel ch) const { return weights_[bias_offset(part, type, ch)]; }
    std::span<double> deformation(int child, int child_type, int parent_type, Channel ch);
    std::span<const double> deformation(int child, int child_type, int parent_type, Channel ch) const;
    double& pair_bias(int child, int child_type, int parent_type, Channel ch) {
        return weights_[pair_bias_offset(child, child_type, parent_type, ch)];
    }
    double pair_bias(int child, int child_type, int parent_type, Channel ch) const {
        return weights_[pair_bias_offset(child, child_type, parent_type, ch)];
    }

    // Deformation weights of both channels summed, as used by inference.
    std::array<double, 4> combined_deformation(int child, int child_type, int parent_type) const;
    double combined_pair_bias(int child, int child_type, int parent_type) const;
    double deformation_score(int child, int child_type, int parent_type, int dx, int dy) const;

    // Indices of every dx^2 / dy^2 weight.
    std::vector<std::size_t> quadratic_indices() const;

    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }

    bool operator==(const PartsModel&) const = default;

private:
    void layout();

    SkeletonDef skeleton_;
    std::vector<int> type_counts_;
    std::vector<FilterShape> shapes_;
    int cell_size_ = 8;
    int bins_ = 9;
    std::vector<std::size_t> part_offsets_;
    std::vector<std::size_t> edge_offsets_;
    std::vector<double> weights_;
};

class ScoreGrid {
public:
    ScoreGrid() = default;
    ScoreGrid(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& at(int row, int col) { return values_[static_cast<std::size_t>(row) * cols_ + col]; }
    double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * cols_ + col]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool operator==(const ScoreGrid&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> values_;
};

struct ChannelScores {
    ScoreGrid monocular;
    ScoreGrid depth;
};

// Cross-correlation of the part filter (anchored at its centre cell) with
// each feature grid plus the channel bias. Cells outside the grid read as
// zero features.
ChannelScores score_part_appearance(const PartsModel& model, int part, int type, const FeatureGrid& fm,
                                    const FeatureGrid& fd);

// Appearance of both channels plus biases plus one message per child, keyed
// by child part id; each message is already taken for parent type `type`.
ScoreGrid local_score(const PartsModel& model, int part, int type, const FeatureGrid& fm, const FeatureGrid& fd,
                      const std::map<int, ScoreGrid>& child_messages);

enum class MessageMethod { automatic, distance_transform, exhaustive };

struct Message {
    ScoreGrid values;
    std::vector<int> best_type;  // per parent cell
    std::vector<int> best_row;
    std::vector<int> best_col;
};

// m_child(tj, xj) = max over ti, xi of pair bias + score(ti, xi) + w . psi(xi - xj)
// with xi, xj in cell units. `child_scores` holds one grid per child type.
Message pass_message(const PartsModel& model, int child, int parent_type, const std::vector<ScoreGrid>& child_scores,
                     MessageMethod method = MessageMethod::automatic);

struct PartState {
    int type = 0;
    int row = 0;
    int col = 0;
    bool operator==(const PartState&) const = default;
};

using Configuration = std::vector<PartState>;  // indexed by part id

// Local score grids and messages of one leaf-to-root pass.
struct ScoreMaps {
    std::vector<std::vector<ScoreGrid>> local;      // [part][type]
    std::vector<std::vector<Message>> messages;     // [child part][parent type], empty for the root
};

ScoreMaps compute_score_maps(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd,
                             MessageMethod method = MessageMethod::automatic);

Configuration backtrack(const PartsModel& model, const ScoreMaps& maps, PartState root);

// Full-pose score computed term by term from the model and features.
double score_configuration(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd,
                           const Configuration& config);

// Sparse joint feature Phi: score_configuration == weights . Phi.
struct FeatureSegment {
    std::size_t offset = 0;
    std::vector<double> values;
};
using JointFeature = std::vector<FeatureSegment>;

JointFeature joint_feature(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd,
                           const Configuration& config);
double dot(const std::vector<double>& weights, const JointFeature& phi);
double squared_norm(const JointFeature& phi);

struct InferenceParams {
    MessageMethod method = MessageMethod::automatic;
    int max_detections = 5;
    double threshold = -std::numeric_limits<double>::infinity();
    double nms_overlap = 0.3;
    bool pyramid = false;
    int octaves = 2;
    int levels_per_octave = 8;

    void validate() const;
};

struct Detection {
    Pose pose;                // pixel coordinates in the input frame
    double score = 0.0;
    Configuration config;     // cells at `level`
    int level = 0;
    double scale = 1.0;       // feature level size / input size
};

// Detections on precomputed feature grids (single level), best first.
std::vector<Detection> infer_poses(const PartsModel& model, const FeatureGrid& fm, const FeatureGrid& fd,
                                   const InferenceParams& params = {});

// Full frame: HOG of both channels (optionally over a pyramid), DP, NMS.
std::vector<Detection> infer_poses(const PartsModel& model, const RgbdFrame& frame,
                                   const InferenceParams& params = {});

// Cell -> pixel centre and back.
Point2d cell_center(int row, int col, int cell_size, double scale = 1.0);
PartState pixel_to_cell(double x, double y, int cell_size, int rows, int cols, double scale = 1.0);

}  // namespace dpm4d
