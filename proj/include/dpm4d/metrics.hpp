#pragma once

#include <map>
#include <string>
#include <vector>

#include "dpm4d/types.hpp"

namespace dpm4d {

struct PartValues {
    std::vector<double> per_part;  // indexed by part id
    double average = 0.0;          // mean over parts
};

using FramePoses = std::map<int, Pose>;                 // frame -> best pose
using FrameDetections = std::map<int, std::vector<Pose>>;  // frame -> scored candidates

// Percent of frames whose joint lies within alpha * max(h, w) of the truth.
PartValues pck(const FramePoses& predictions, const AnnotationSet& gt, double alpha);

// Average precision per part (percent). Candidates of all frames are ranked
// by joint score (ties keep frame order, then candidate order) and greedily
// matched to the single ground-truth joint of their frame.
PartValues apk(const FrameDetections& detections, const AnnotationSet& gt, double alpha);

// Mean Euclidean pixel distance per part over all frames.
PartValues mean_error(const FramePoses& predictions, const AnnotationSet& gt);

// Rows of the summary table and the grouped columns.
struct EvalReport {
    double alpha = 0.2;
    int frame_count = 0;
    std::vector<std::string> part_names;
    PartValues pck;
    PartValues apk;
    PartValues error;
    // Head, Shoulder, Wrist, Hip, Ankle, Average; left/right pairs averaged.
    std::vector<std::string> columns;
    std::vector<double> pck_columns;
    std::vector<double> apk_columns;
    std::vector<double> error_columns;
};

EvalReport evaluate(const FramePoses& predictions, const FrameDetections& detections, const AnnotationSet& gt,
                    const SkeletonDef& skeleton, double alpha);

std::string format_report_table(const EvalReport& report);
std::string report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);

}  // namespace dpm4d
