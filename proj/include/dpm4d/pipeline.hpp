#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpm4d/features.hpp"
#include "dpm4d/io.hpp"
#include "dpm4d/kinematics.hpp"
#include "dpm4d/metrics.hpp"
#include "dpm4d/parts_model.hpp"
#include "dpm4d/preprocess.hpp"
#include "dpm4d/synth.hpp"
#include "dpm4d/tracker.hpp"
#include "dpm4d/training.hpp"

namespace dpm4d {

struct PipelineConfig {
    struct Paths {
        std::string dataset;        // positive / inference sequence directory
        std::string manifest = "manifest.txt";
        std::string annotations;    // annotation file of the dataset
        std::string negatives;      // person-free sequence directory
        std::string model = "model.4ddpm";
        std::string output = "out";
    } paths;

    bool preprocess_enabled = true;
    MserParams mser;
    HogParams hog;

    struct Model {
        int types = 4;
        int filter_rows = 5;
        int filter_cols = 5;
        InferenceParams inference;
    } model;

    TrainConfig training;

    struct Tracker {
        bool enabled = true;
        TrackerParams params;
        std::vector<std::pair<std::string, std::string>> pairing;  // empty: wrists to shoulders, ankles to hips
        std::optional<double> joint_score_threshold;               // joints below are missing measurements
    } tracker;

    struct Kinematics {
        bool enabled = true;
        std::optional<LimbLengths> lengths;  // pixels; estimated per sequence when absent
        double upper_ratio = 0.48;
        double percentile = 0.9;
        BranchPolicy policy = BranchPolicy::anatomical;
        int lift_window = 2;
    } kinematics;

    double alpha = 0.2;

    void validate() const;
};

PipelineConfig default_config();
std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

std::string figure_spec_to_json(const FigureSpec& spec);
FigureSpec figure_spec_from_json(const std::string& text);

// Preprocessing (when enabled) followed by HOG on both channels.
RgbdFrame preprocess_frame(const RgbdFrame& frame, const PipelineConfig& config);
std::pair<FeatureGrid, FeatureGrid> frame_features(const RgbdFrame& frame, const PipelineConfig& config);

PartsModel initial_model(const PipelineConfig& config, const SkeletonDef& skeleton = reduced10_skeleton());

struct TrainingSet {
    std::vector<LabeledSample> positives;
    std::vector<NegativeSample> negatives;
};

// Ground truth may be full14 or reduced10; it is remapped onto the model's
// skeleton. Mixture types come from assign_types.
TrainingSet build_training_set(const PipelineConfig& config, const PartsModel& model,
                               const std::vector<RgbdFrame>& positives, const AnnotationSet& gt,
                               const std::vector<RgbdFrame>& negatives);

struct InferOptions {
    bool use_tracker = true;
    bool use_ik = true;
    bool strict = false;
    bool log_timing = true;  // per-frame seconds on stderr
    std::optional<std::filesystem::path> score_map_dir;
};

struct FrameDiagnostics {
    int frame = 0;
    double innovation_norm = 0.0;
    double eps_filter = 0.0;
    double eps_previous = 0.0;
    bool used_filter = true;
    double seconds = 0.0;
};

struct InferResult {
    std::vector<PoseRecord> records;
    std::vector<std::vector<Detection>> detections;  // per frame, raw detector output
    std::vector<FrameDiagnostics> diagnostics;
    std::vector<std::string> warnings;
};

// Per frame: preprocess, features, detection, tracking, lifting, completion.
InferResult run_inference(const PipelineConfig& config, const PartsModel& model, const std::vector<RgbdFrame>& frames,
                          const InferOptions& options);

std::string diagnostics_to_csv(const std::vector<FrameDiagnostics>& diag);
std::string detections_to_json(const std::vector<RgbdFrame>& frames, const std::vector<std::vector<Detection>>& dets);
FrameDetections detections_from_json(const std::string& text);

struct Overlay {
    RgbImage image;
    int segments = 0;
    std::vector<std::string> warnings;
};

Overlay render_overlay(const RgbImage& rgb, const Pose& pose);

void write_score_maps(const std::filesystem::path& dir, int frame, const ScoreMaps& maps);

}  // namespace dpm4d
