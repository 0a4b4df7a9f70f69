#include "dpm4d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace dpm4d {

namespace {

int part_count_of(const AnnotationSet& gt) {
    if (gt.entries.empty())
        throw EvaluationError("no annotated frames to evaluate");
    return static_cast<int>(gt.entries.front().pose.joints.size());
}

template <typename Map>
void check_frames(const Map& predictions, const AnnotationSet& gt) {
    std::vector<int> missing;
    for (const auto& a : gt.entries)
        if (!predictions.count(a.frame))
            missing.push_back(a.frame);
    if (missing.empty())
        return;
    std::ostringstream ss;
    ss << "predictions missing for frames:";
    for (int f : missing)
        ss << ' ' << f;
    throw EvaluationError(ss.str());
}

const Joint& joint_of(const Pose& p, int part, int frame) {
    if (part >= static_cast<int>(p.joints.size()) || p.joints[part].part_id != part)
        throw SchemaError("pose of frame " + std::to_string(frame) + " lacks part " + std::to_string(part));
    return p.joints[part];
}

double threshold(const Annotation& a, double alpha) { return alpha * std::max(a.bbox.h, a.bbox.w); }

double mean_of(const std::vector<double>& v) {
    if (v.empty())
        return 0.0;
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / v.size();
}

}  // namespace

PartValues pck(const FramePoses& predictions, const AnnotationSet& gt, double alpha) {
    if (!(alpha >= 0.0))
        throw ArgumentError("alpha must be non-negative");
    const int parts = part_count_of(gt);
    check_frames(predictions, gt);
    PartValues out;
    out.per_part.assign(parts, 0.0);
    for (const auto& a : gt.entries) {
        const Pose& p = predictions.at(a.frame);
        const double thr = threshold(a, alpha);
        for (int i = 0; i < parts; ++i) {
            const Joint& pj = joint_of(p, i, a.frame);
            const Joint& gj = joint_of(a.pose, i, a.frame);
            if (std::hypot(pj.x - gj.x, pj.y - gj.y) <= thr)
                out.per_part[i] += 1.0;
        }
    }
    for (auto& v : out.per_part)
        v = 100.0 * v / gt.entries.size();
    out.average = mean_of(out.per_part);
    return out;
}

PartValues apk(const FrameDetections& detections, const AnnotationSet& gt, double alpha) {
    if (!(alpha >= 0.0))
        throw ArgumentError("alpha must be non-negative");
    const int parts = part_count_of(gt);
    check_frames(detections, gt);
    std::map<int, const Annotation*> by_frame;
    for (const auto& a : gt.entries)
        by_frame[a.frame] = &a;

    PartValues out;
    out.per_part.assign(parts, 0.0);
    const double positives = static_cast<double>(gt.entries.size());
    for (int i = 0; i < parts; ++i) {
        struct Cand {
            double score;
            int frame;
            double x, y;
        };
        std::vector<Cand> cands;
        for (const auto& [frame, poses] : detections) {
            if (!by_frame.count(frame))
                continue;
            for (const auto& p : poses) {
                const Joint& j = joint_of(p, i, frame);
                cands.push_back({j.score, frame, j.x, j.y});
            }
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.score > b.score; });
        std::map<int, bool> matched;
        std::vector<double> precision, recall;
        double tp = 0.0, fp = 0.0;
        for (const auto& c : cands) {
            const Annotation& a = *by_frame.at(c.frame);
            const Joint& g = joint_of(a.pose, i, c.frame);
            const bool hit = !matched[c.frame] && std::hypot(c.x - g.x, c.y - g.y) <= threshold(a, alpha);
            if (hit) {
                matched[c.frame] = true;
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            precision.push_back(tp / (tp + fp));
            recall.push_back(tp / positives);
        }
        // All-points interpolation: precision made monotone from the right.
        for (int k = static_cast<int>(precision.size()) - 2; k >= 0; --k)
            precision[k] = std::max(precision[k], precision[k + 1]);
        double ap = 0.0, prev_recall = 0.0;
        for (std::size_t k = 0; k < precision.size(); ++k) {
            ap += (recall[k] - prev_recall) * precision[k];
            prev_recall = recall[k];
        }
        out.per_part[i] = 100.0 * ap;
    }
    out.average = mean_of(out.per_part);
    return out;
}

PartValues mean_error(const FramePoses& predictions, const AnnotationSet& gt) {
    const int parts = part_count_of(gt);
    check_frames(predictions, gt);
    PartValues out;
    out.per_part.assign(parts, 0.0);
    for (const auto& a : gt.entries) {
        const Pose& p = predictions.at(a.frame);
        for (int i = 0; i < parts; ++i) {
            const Joint& pj = joint_of(p, i, a.frame);
            const Joint& gj = joint_of(a.pose, i, a.frame);
            out.per_part[i] += std::hypot(pj.x - gj.x, pj.y - gj.y);
        }
    }
    for (auto& v : out.per_part)
        v /= gt.entries.size();
    out.average = mean_of(out.per_part);
    return out;
}

EvalReport evaluate(const FramePoses& predictions, const FrameDetections& detections, const AnnotationSet& gt,
                    const SkeletonDef& skeleton, double alpha) {
    EvalReport r;
    r.alpha = alpha;
    r.frame_count = static_cast<int>(gt.entries.size());
    r.part_names = skeleton.names();
    for (const auto& a : gt.entries)
        if (static_cast<int>(a.pose.joints.size()) != skeleton.part_count())
            throw SchemaError("annotation of frame " + std::to_string(a.frame) + " does not match the skeleton");
    r.pck = pck(predictions, gt, alpha);
    r.error = mean_error(predictions, gt);
    if (detections.empty()) {
        FrameDetections single;
        for (const auto& [f, p] : predictions)
            single[f] = {p};
        r.apk = apk(single, gt, alpha);
    } else {
        r.apk = apk(detections, gt, alpha);
    }

    const std::vector<std::pair<std::string, std::vector<std::string>>> groups = {
        {"Head", {"head"}},
        {"Shoulder", {"r_shoulder", "l_shoulder"}},
        {"Wrist", {"r_wrist", "l_wrist"}},
        {"Hip", {"r_hip", "l_hip"}},
        {"Ankle", {"r_ankle", "l_ankle"}}};
    auto group_value = [&](const PartValues& v, const std::vector<std::string>& names) {
        double s = 0.0;
        int n = 0;
        for (const auto& name : names)
            if (auto id = skeleton.find(name)) {
                s += v.per_part[*id];
                ++n;
            }
        return n ? s / n : std::numeric_limits<double>::quiet_NaN();
    };
    for (const auto& [col, names] : groups) {
        r.columns.push_back(col);
        r.pck_columns.push_back(group_value(r.pck, names));
        r.apk_columns.push_back(group_value(r.apk, names));
        r.error_columns.push_back(group_value(r.error, names));
    }
    auto avg = [](const std::vector<double>& v) {
        double s = 0.0;
        int n = 0;
        for (double x : v)
            if (std::isfinite(x)) {
                s += x;
                ++n;
            }
        return n ? s / n : std::numeric_limits<double>::quiet_NaN();
    };
    r.columns.push_back("Average");
    r.pck_columns.push_back(avg(r.pck_columns));
    r.apk_columns.push_back(avg(r.apk_columns));
    r.error_columns.push_back(avg(r.error_columns));
    return r;
}

std::string format_report_table(const EvalReport& r) {
    std::ostringstream ss;
    ss << "alpha=" << r.alpha << "  frames=" << r.frame_count << "  (error over all keypoints, pixels)\n";
    ss << std::left << std::setw(8) << "";
    for (const auto& c : r.columns)
        ss << std::right << std::setw(10) << c;
    ss << '\n';
    auto row = [&](const char* name, const std::vector<double>& v) {
        ss << std::left << std::setw(8) << name;
        for (double x : v) {
            if (std::isfinite(x))
                ss << std::right << std::setw(10) << std::fixed << std::setprecision(2) << x;
            else
                ss << std::right << std::setw(10) << "-";
        }
        ss << '\n';
    };
    row("APK", r.apk_columns);
    row("PCK", r.pck_columns);
    row("Error", r.error_columns);
    return ss.str();
}

std::string report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["alpha"] = r.alpha;
    j["frames"] = r.frame_count;
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr); };
    nlohmann::ordered_json table;
    for (std::size_t k = 0; k < r.columns.size(); ++k) {
        table[r.columns[k]] = {{"apk", num(r.apk_columns[k])},
                               {"pck", num(r.pck_columns[k])},
                               {"error", num(r.error_columns[k])}};
    }
    j["table"] = table;
    nlohmann::ordered_json parts;
    for (std::size_t i = 0; i < r.part_names.size(); ++i)
        parts[r.part_names[i]] = {{"apk", r.apk.per_part[i]}, {"pck", r.pck.per_part[i]}, {"error", r.error.per_part[i]}};
    j["parts"] = parts;
    j["average_over_parts"] = {{"apk", r.apk.average}, {"pck", r.pck.average}, {"error", r.error.average}};
    return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& r) {
    std::ostringstream ss;
    ss << std::setprecision(17) << "metric";
    for (const auto& c : r.columns)
        ss << ',' << c;
    ss << '\n';
    auto row = [&](const char* name, const std::vector<double>& v) {
        ss << name;
        for (double x : v) {
            ss << ',';
            if (std::isfinite(x))
                ss << x;
        }
        ss << '\n';
    };
    row("APK", r.apk_columns);
    row("PCK", r.pck_columns);
    row("Error", r.error_columns);
    return ss.str();
}

}  // namespace dpm4d
