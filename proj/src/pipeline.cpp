#include "dpm4d/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>
#include <opencv2/imgproc.hpp>

#include "dpm4d/model_io.hpp"

namespace dpm4d {

using ojson = nlohmann::ordered_json;

void PipelineConfig::validate() const {
    mser.validate();
    hog.validate();
    model.inference.validate();
    training.validate();
    tracker.params.validate();
    if (model.types < 1)
        throw ConfigError("model.types must be >= 1");
    if (model.filter_rows < 1 || model.filter_cols < 1)
        throw ConfigError("model filter size must be positive");
    if (kinematics.lift_window < 0)
        throw ConfigError("kinematics.lift_window must be >= 0");
    if (!(kinematics.upper_ratio > 0.0 && kinematics.upper_ratio < 1.0))
        throw ConfigError("kinematics.upper_ratio must lie in (0, 1)");
    if (!(kinematics.percentile > 0.0 && kinematics.percentile <= 1.0))
        throw ConfigError("kinematics.percentile must lie in (0, 1]");
    if (kinematics.lengths) {
        const auto& l = *kinematics.lengths;
        if (!(l.arm_upper > 0 && l.arm_lower > 0 && l.leg_upper > 0 && l.leg_lower > 0))
            throw ConfigError("limb lengths must be positive");
    }
    if (!(alpha > 0.0))
        throw ConfigError("metrics alpha must be positive");
}

PipelineConfig default_config() { return PipelineConfig{}; }

namespace {

std::string method_name(MessageMethod m) {
    switch (m) {
    case MessageMethod::automatic: return "automatic";
    case MessageMethod::distance_transform: return "distance_transform";
    case MessageMethod::exhaustive: return "exhaustive";
    }
    return "automatic";
}

MessageMethod method_from(const std::string& s) {
    if (s == "automatic")
        return MessageMethod::automatic;
    if (s == "distance_transform")
        return MessageMethod::distance_transform;
    if (s == "exhaustive")
        return MessageMethod::exhaustive;
    throw ConfigError("unknown message method: " + s);
}

template <typename T>
void read(const ojson& obj, const char* key, T& out) {
    if (obj.contains(key) && !obj[key].is_null())
        out = obj[key].get<T>();
}

}  // namespace

std::string config_to_json(const PipelineConfig& c) {
    ojson j;
    j["paths"] = {{"dataset", c.paths.dataset},     {"manifest", c.paths.manifest}, {"annotations", c.paths.annotations},
                  {"negatives", c.paths.negatives}, {"model", c.paths.model},       {"output", c.paths.output}};
    j["preprocess"] = {{"enabled", c.preprocess_enabled},
                       {"delta", c.mser.delta},
                       {"min_area", c.mser.min_area},
                       {"max_area", c.mser.max_area},
                       {"area_threshold", c.mser.area_threshold},
                       {"stability_cutoff", c.mser.stability_cutoff},
                       {"levels", c.mser.levels}};
    j["features"] = {{"cell_size", c.hog.cell_size}, {"bins", c.hog.bins}, {"clip", c.hog.clip}};
    const auto& inf = c.model.inference;
    j["model"] = {{"types", c.model.types},
                  {"filter_rows", c.model.filter_rows},
                  {"filter_cols", c.model.filter_cols},
                  {"message_method", method_name(inf.method)},
                  {"max_detections", inf.max_detections},
                  {"score_threshold", std::isfinite(inf.threshold) ? ojson(inf.threshold) : ojson(nullptr)},
                  {"nms_overlap", inf.nms_overlap},
                  {"pyramid", inf.pyramid},
                  {"octaves", inf.octaves},
                  {"levels_per_octave", inf.levels_per_octave}};
    const auto& t = c.training;
    j["training"] = {{"C", t.C},
                     {"max_iterations", t.max_iterations},
                     {"solver_passes", t.solver_passes},
                     {"tolerance", t.tolerance},
                     {"quadratic_bound", t.quadratic_bound},
                     {"negatives_per_image", t.negatives_per_image},
                     {"seed", t.seed}};
    ojson pairing = ojson::array();
    for (const auto& [a, b] : c.tracker.pairing)
        pairing.push_back({a, b});
    j["tracker"] = {{"enabled", c.tracker.enabled},
                    {"q_scale", c.tracker.params.q_scale},
                    {"r_scale", c.tracker.params.r_scale},
                    {"coupling", c.tracker.params.coupling},
                    {"initial_variance", c.tracker.params.initial_variance},
                    {"pairing", pairing},
                    {"joint_score_threshold",
                     c.tracker.joint_score_threshold ? ojson(*c.tracker.joint_score_threshold) : ojson(nullptr)}};
    ojson lengths = nullptr;
    if (c.kinematics.lengths) {
        const auto& l = *c.kinematics.lengths;
        lengths = {{"arm_upper", l.arm_upper}, {"arm_lower", l.arm_lower}, {"leg_upper", l.leg_upper},
                   {"leg_lower", l.leg_lower}};
    }
    j["kinematics"] = {{"enabled", c.kinematics.enabled},
                       {"limb_lengths", lengths},
                       {"upper_ratio", c.kinematics.upper_ratio},
                       {"percentile", c.kinematics.percentile},
                       {"branch_policy", std::string(to_string(c.kinematics.policy))},
                       {"lift_window", c.kinematics.lift_window}};
    j["metrics"] = {{"alpha", c.alpha}};
    return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig c;
    try {
        if (j.contains("paths")) {
            const auto& p = j["paths"];
            read(p, "dataset", c.paths.dataset);
            read(p, "manifest", c.paths.manifest);
            read(p, "annotations", c.paths.annotations);
            read(p, "negatives", c.paths.negatives);
            read(p, "model", c.paths.model);
            read(p, "output", c.paths.output);
        }
        if (j.contains("preprocess")) {
            const auto& p = j["preprocess"];
            read(p, "enabled", c.preprocess_enabled);
            read(p, "delta", c.mser.delta);
            read(p, "min_area", c.mser.min_area);
            read(p, "max_area", c.mser.max_area);
            read(p, "area_threshold", c.mser.area_threshold);
            read(p, "stability_cutoff", c.mser.stability_cutoff);
            read(p, "levels", c.mser.levels);
        }
        if (j.contains("features")) {
            const auto& p = j["features"];
            read(p, "cell_size", c.hog.cell_size);
            read(p, "bins", c.hog.bins);
            read(p, "clip", c.hog.clip);
        }
        if (j.contains("model")) {
            const auto& p = j["model"];
            auto& inf = c.model.inference;
            read(p, "types", c.model.types);
            read(p, "filter_rows", c.model.filter_rows);
            read(p, "filter_cols", c.model.filter_cols);
            if (p.contains("message_method"))
                inf.method = method_from(p["message_method"].get<std::string>());
            read(p, "max_detections", inf.max_detections);
            read(p, "score_threshold", inf.threshold);
            read(p, "nms_overlap", inf.nms_overlap);
            read(p, "pyramid", inf.pyramid);
            read(p, "octaves", inf.octaves);
            read(p, "levels_per_octave", inf.levels_per_octave);
        }
        if (j.contains("training")) {
            const auto& p = j["training"];
            auto& t = c.training;
            read(p, "C", t.C);
            read(p, "max_iterations", t.max_iterations);
            read(p, "solver_passes", t.solver_passes);
            read(p, "tolerance", t.tolerance);
            read(p, "quadratic_bound", t.quadratic_bound);
            read(p, "negatives_per_image", t.negatives_per_image);
                    read(p, "seed", t.seed);
        }
        if (j.contains("tracker")) {
            const auto& p = j["tracker"];
            read(p, "enabled", c.tracker.enabled);
            read(p, "q_scale", c.tracker.params.q_scale);
            read(p, "r_scale", c.tracker.params.r_scale);
            read(p, "coupling", c.tracker.params.coupling);
            read(p, "initial_variance", c.tracker.params.initial_variance);
            if (p.contains("pairing") && p["pairing"].is_array())
                for (const auto& e : p["pairing"])
                    c.tracker.pairing.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
            if (p.contains("joint_score_threshold") && !p["joint_score_threshold"].is_null())
                c.tracker.joint_score_threshold = p["joint_score_threshold"].get<double>();
        }
        if (j.contains("kinematics")) {
            const auto& p = j["kinematics"];
            read(p, "enabled", c.kinematics.enabled);
            if (p.contains("limb_lengths") && !p["limb_lengths"].is_null()) {
                const auto& l = p["limb_lengths"];
                c.kinematics.lengths = LimbLengths{l.at("arm_upper").get<double>(), l.at("arm_lower").get<double>(),
                                                   l.at("leg_upper").get<double>(), l.at("leg_lower").get<double>()};
            }
            read(p, "upper_ratio", c.kinematics.upper_ratio);
            read(p, "percentile", c.kinematics.percentile);
            if (p.contains("branch_policy"))
                c.kinematics.policy = branch_policy_from_string(p["branch_policy"].get<std::string>());
            read(p, "lift_window", c.kinematics.lift_window);
        }
        if (j.contains("metrics"))
            read(j["metrics"], "alpha", c.alpha);
    } catch (const ojson::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(text);
}

std::string figure_spec_to_json(const FigureSpec& s) {
    ojson j = {{"width", s.width},
               {"height", s.height},
               {"focal_px", s.focal_px},
               {"plane_depth", s.plane_depth},
               {"background_offset", s.background_offset},
               {"background_noise", s.background_noise},
               {"rgb_noise", s.rgb_noise},
               {"joint_jitter", s.joint_jitter},
               {"head", s.head},
               {"shoulder_half", s.shoulder_half},
               {"hip_half", s.hip_half},
               {"torso", s.torso},
               {"upper_arm", s.upper_arm},
               {"forearm", s.forearm},
               {"thigh", s.thigh},
               {"shin", s.shin},
               {"limb_radius_px", s.limb_radius_px},
               {"torso_radius_px", s.torso_radius_px},
               {"head_radius_px", s.head_radius_px},
               {"script", std::string(to_string(s.script))},
               {"swing_rate", s.swing_rate},
               {"center_jitter_px", s.center_jitter_px},
               {"person", s.person},
               {"clutter", s.clutter}};
    return j.dump(2) + "\n";
}

FigureSpec figure_spec_from_json(const std::string& text) {
    FigureSpec s;
    try {
        const ojson j = ojson::parse(text);
        read(j, "width", s.width);
        read(j, "height", s.height);
        read(j, "focal_px", s.focal_px);
        read(j, "plane_depth", s.plane_depth);
        read(j, "background_offset", s.background_offset);
        read(j, "background_noise", s.background_noise);
        read(j, "rgb_noise", s.rgb_noise);
        read(j, "joint_jitter", s.joint_jitter);
        read(j, "head", s.head);
        read(j, "shoulder_half", s.shoulder_half);
        read(j, "hip_half", s.hip_half);
        read(j, "torso", s.torso);
        read(j, "upper_arm", s.upper_arm);
        read(j, "forearm", s.forearm);
        read(j, "thigh", s.thigh);
        read(j, "shin", s.shin);
        read(j, "limb_radius_px", s.limb_radius_px);
        read(j, "torso_radius_px", s.torso_radius_px);
        read(j, "head_radius_px", s.head_radius_px);
        if (j.contains("script"))
            s.script = motion_script_from_string(j["script"].get<std::string>());
        read(j, "swing_rate", s.swing_rate);
        read(j, "center_jitter_px", s.center_jitter_px);
        read(j, "person", s.person);
        read(j, "clutter", s.clutter);
    } catch (const ojson::exception& e) {
        throw ConfigError(std::string("bad figure spec: ") + e.what());
    }
    s.validate();
    return s;
}

RgbdFrame preprocess_frame(const RgbdFrame& frame, const PipelineConfig& config) {
    if (!config.preprocess_enabled)
        return frame;
    return remove_background(frame, config.mser).frame;
}

std::pair<FeatureGrid, FeatureGrid> frame_features(const RgbdFrame& frame, const PipelineConfig& config) {
    const RgbdFrame f = preprocess_frame(frame, config);
    return {compute_hog(f.rgb, config.hog), compute_hog(f.depth, config.hog)};
}

PartsModel initial_model(const PipelineConfig& config, const SkeletonDef& skeleton) {
    const int n = skeleton.part_count();
    return PartsModel(skeleton, std::vector<int>(n, config.model.types),
                      std::vector<FilterShape>(n, FilterShape{config.model.filter_rows, config.model.filter_cols}),
                      config.hog.cell_size, config.hog.bins);
}

TrainingSet build_training_set(const PipelineConfig& config, const PartsModel& model,
                               const std::vector<RgbdFrame>& positives, const AnnotationSet& gt,
                               const std::vector<RgbdFrame>& negatives) {
    const auto& sk = model.skeleton();
    std::map<int, const Annotation*> by_frame;
    for (const auto& a : gt.entries)
        by_frame[a.frame] = &a;

    TrainingSet set;
    std::vector<std::vector<Point2d>> joints;
    for (const auto& f : positives) {
        auto it = by_frame.find(f.index);
        if (it == by_frame.end())
            continue;
        const Pose& src = it->second->pose;
        const Pose pose = remap_pose(src, skeleton_for(src.skeleton_kind), sk);
        auto [fm, fd] = frame_features(f, config);
        LabeledSample s{std::move(fm), std::move(fd), {}};
        std::vector<Point2d> pts;
        for (const auto& j : pose.joints) {
            s.config.push_back(pixel_to_cell(j.x, j.y, model.cell_size(), s.fm.rows(), s.fm.cols()));
            pts.push_back({j.x, j.y});
        }
        joints.push_back(std::move(pts));
        set.positives.push_back(std::move(s));
    }
    if (set.positives.empty())
        throw ConfigError("no annotated positive frames");
    const auto types = assign_types(sk, joints, model.type_count(0), config.training.seed);
    for (std::size_t k = 0; k < set.positives.size(); ++k)
        for (int i = 0; i < sk.part_count(); ++i)
            set.positives[k].config[i].type = std::min(types[k][i], model.type_count(i) - 1);
    for (const auto& f : negatives) {
        auto [fm, fd] = frame_features(f, config);
        set.negatives.push_back({std::move(fm), std::move(fd)});
    }
    return set;
}

namespace {

Pairing resolve_pairing(const PipelineConfig& config, const SkeletonDef& sk) {
    if (config.tracker.pairing.empty())
        return default_pairing(sk);
    Pairing out;
    for (const auto& [a, b] : config.tracker.pairing) {
        auto i = sk.find(a);
        auto j = sk.find(b);
        if (!i || !j)
            throw ConfigError("tracker pairing names unknown part '" + (i ? b : a) + "'");
        out.emplace_back(*i, *j);
    }
    return out;
}

}  // namespace

InferResult run_inference(const PipelineConfig& config, const PartsModel& model, const std::vector<RgbdFrame>& frames,
                          const InferOptions& options) {
    config.validate();
    const auto& sk = model.skeleton();
    const int n = sk.part_count();
    const bool can_complete = options.use_ik && kind_of(sk) == SkeletonKind::reduced10;
    InferResult out;
    if (options.use_ik && !can_complete)
        out.warnings.push_back("skeleton completion needs a reduced10 model; skipped");

    std::optional<JointTracker> tracker;
    if (options.use_tracker)
        tracker.emplace(n, resolve_pairing(config, sk), config.tracker.params);

    struct Pending {
        int frame;
        std::optional<Pose> pose;
        DepthImage depth;
        std::string error;
    };
    std::vector<Pending> pending;
    for (const auto& frame : frames) {
        const auto t0 = std::chrono::steady_clock::now();
        FrameDiagnostics diag;
        diag.frame = frame.index;
        Pending p{frame.index, std::nullopt, {}, {}};
        try {
            const RgbdFrame pre = preprocess_frame(frame, config);
            auto dets = infer_poses(model, pre, config.model.inference);
            if (options.score_map_dir) {
                const auto fm = compute_hog(pre.rgb, config.hog);
                const auto fd = compute_hog(pre.depth, config.hog);
                write_score_maps(*options.score_map_dir, frame.index,
                                 compute_score_maps(model, fm, fd, config.model.inference.method));
            }
            out.detections.push_back(dets);
            if (dets.empty())
                throw Error("no detection above the score threshold");
            Pose pose = dets.front().pose;
            if (tracker) {
                Eigen::VectorXd b(2 * n);
                for (int i = 0; i < n; ++i) {
                    const auto& j = pose.joints[i];
                    const bool missing = config.tracker.joint_score_threshold && j.score < *config.tracker.joint_score_threshold;
                    b(2 * i) = missing ? std::nan("") : j.x;
                    b(2 * i + 1) = missing ? std::nan("") : j.y;
                }
                const TrackStep step = tracker->step(b);
                for (int i = 0; i < n; ++i) {
                    pose.joints[i].x = step.output(2 * i);
                    pose.joints[i].y = step.output(2 * i + 1);
                }
                diag.innovation_norm = step.innovation_norm;
                diag.eps_filter = step.eps_filter;
                diag.eps_previous = step.eps_previous;
                diag.used_filter = step.used_filter;
            }
            p.pose = std::move(pose);
            p.depth = pre.depth;
        } catch (const Error& e) {
            if (options.strict)
                throw;
            if (out.detections.size() < pending.size() + 1)
                out.detections.emplace_back();
            p.error = e.what();
        }
        diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.diagnostics.push_back(diag);
        if (options.log_timing)
            std::fprintf(stderr, "frame %d: %.3f s\n", frame.index, diag.seconds);
        pending.push_back(std::move(p));
    }

    // Limb lengths need the whole sequence, so completion runs afterwards.
    std::vector<Pose3d> lifted(pending.size());
    std::vector<Pose3d> planar;
    for (std::size_t k = 0; k < pending.size(); ++k) {
        if (!pending[k].pose)
            continue;
        lifted[k] = lift_to_3d(*pending[k].pose, pending[k].depth, config.kinematics.lift_window);
        Pose3d flat = lifted[k];
        for (auto& j : flat.joints) {
            j.z = 0.0;
            j.has_z = true;
        }
        planar.push_back(flat);
    }
    LimbLengths lengths;
    if (can_complete && !planar.empty())
        lengths = config.kinematics.lengths
                      ? *config.kinematics.lengths
                      : estimate_limb_lengths(planar, config.kinematics.upper_ratio, config.kinematics.percentile);

    std::optional<Pose3d> previous;
    for (std::size_t k = 0; k < pending.size(); ++k) {
        PoseRecord rec;
        rec.frame = pending[k].frame;
        if (!pending[k].pose) {
            rec.error = pending[k].error;
            out.records.push_back(std::move(rec));
            continue;
        }
        const Pose& pose = *pending[k].pose;
        if (!can_complete) {
            rec.pose = pose;
            for (const auto& j : lifted[k].joints)
                rec.z.push_back(j.has_z ? std::optional<double>(j.z) : std::nullopt);
            out.records.push_back(std::move(rec));
            continue;
        }
        Pose3d flat = lifted[k];
        for (auto& j : flat.joints) {
            j.z = 0.0;
            j.has_z = true;
        }
        CompletionOptions co;
        co.policy = config.kinematics.policy;
        co.previous = previous;
        auto done = complete_skeleton(flat, lengths, co);
        for (const auto& w : done.warnings)
            out.warnings.push_back("frame " + std::to_string(rec.frame) + ": " + w);
        previous = done.pose;

        const auto& fsk = full14_skeleton();
        const auto& rsk = reduced10_skeleton();
        rec.pose.skeleton_kind = SkeletonKind::full14;
        rec.pose.total_score = pose.total_score;
        rec.pose.joints.resize(14);
        rec.z.assign(14, std::nullopt);
        for (int i = 0; i < 14; ++i) {
            const auto& dj = done.pose.joints[i];
            rec.pose.joints[i] = Joint{i, dj.x, dj.y, 0, pose.total_score};
        }
        for (int i = 0; i < 10; ++i) {
            const int fi = fsk.index_of(rsk.name(i));
            rec.pose.joints[fi].type_id = pose.joints[i].type_id;
            if (lifted[k].joints[i].has_z)
                rec.z[fi] = lifted[k].joints[i].z;
        }
        // Completed joints take their depth from the raster as well.
        Pose added;
        added.skeleton_kind = SkeletonKind::full14;
        for (const char* name : {"r_elbow", "l_elbow", "r_knee", "l_knee"})
            added.joints.push_back(rec.pose.joints[fsk.index_of(name)]);
        const auto z = lift_to_3d(added, pending[k].depth, config.kinematics.lift_window);
        for (const auto& j : z.joints)
            if (j.has_z)
                rec.z[j.part_id] = j.z;
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::string diagnostics_to_csv(const std::vector<FrameDiagnostics>& diag) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "frame,innovation_norm,eps_filter,eps_previous,chosen\n";
    for (const auto& d : diag)
        ss << d.frame << ',' << d.innovation_norm << ',' << d.eps_filter << ',' << d.eps_previous << ','
           << (d.used_filter ? "filter" : "previous") << '\n';
    return ss.str();
}

std::string detections_to_json(const std::vector<RgbdFrame>& frames, const std::vector<std::vector<Detection>>& dets) {
    ojson root = ojson::array();
    for (std::size_t k = 0; k < frames.size() && k < dets.size(); ++k) {
        std::vector<PoseRecord> recs;
        for (const auto& d : dets[k])
            recs.push_back({frames[k].index, d.pose, {}, {}});
        ojson rec;
        rec["frame"] = frames[k].index;
        rec["candidates"] = ojson::parse(pose_records_to_json(recs));
        root.push_back(std::move(rec));
    }
    return root.dump(1) + "\n";
}

FrameDetections detections_from_json(const std::string& text) {
    FrameDetections out;
    ojson root;
    try {
        root = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ParseError(std::string("detection file is not valid JSON: ") + e.what());
    }
    for (const auto& rec : root) {
        const int frame = rec.at("frame").get<int>();
        auto& list = out[frame];
        for (auto& r : pose_records_from_json(rec.at("candidates").dump()))
            list.push_back(std::move(r.pose));
    }
    return out;
}

Overlay render_overlay(const RgbImage& rgb, const Pose& pose) {
    Overlay out;
    const SkeletonDef& sk = pose.skeleton_kind == SkeletonKind::custom ? SkeletonDef() : skeleton_for(pose.skeleton_kind);
    if (pose.skeleton_kind == SkeletonKind::custom)
        throw ArgumentError("overlay rendering needs a reduced10 or full14 pose");
    if (static_cast<int>(pose.joints.size()) != sk.part_count())
        throw SchemaError("pose does not match its skeleton");
    cv::Mat img(rgb.height(), rgb.width(), CV_8UC3);
    std::copy(rgb.data().begin(), rgb.data().end(), img.ptr<std::uint8_t>(0));
    std::vector<cv::Point> pts;
    for (const auto& j : pose.joints) {
        double x = j.x, y = j.y;
        if (!(x >= 0 && y >= 0 && x <= rgb.width() - 1 && y <= rgb.height() - 1)) {
            out.warnings.push_back("joint " + sk.name(j.part_id) + " outside the frame; clamped");
            x = std::clamp(std::isfinite(x) ? x : 0.0, 0.0, rgb.width() - 1.0);
            y = std::clamp(std::isfinite(y) ? y : 0.0, 0.0, rgb.height() - 1.0);
        }
        pts.emplace_back(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y)));
    }
    auto colour = [](int part) {
        static const cv::Scalar palette[] = {{255, 255, 255}, {255, 220, 0},   {255, 60, 60},  {60, 120, 255},
                                             {255, 140, 60},  {60, 200, 255},  {255, 0, 160},  {0, 255, 200},
                                             {200, 255, 0},   {120, 0, 255},   {255, 200, 120}, {120, 200, 255},
                                             {255, 100, 200}, {100, 255, 120}};
        return palette[part % 14];
    };
    for (auto [p, c] : sk.edges()) {
        cv::line(img, pts[p], pts[c], colour(c), 2, cv::LINE_AA);
        ++out.segments;
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        cv::circle(img, pts[i], 3, colour(static_cast<int>(i)), cv::FILLED, cv::LINE_AA);
    out.image = RgbImage(rgb.width(), rgb.height(), 3);
    std::copy(img.ptr<std::uint8_t>(0), img.ptr<std::uint8_t>(0) + out.image.data().size(), out.image.data().begin());
    return out;
}

void write_score_maps(const std::filesystem::path& dir, int frame, const ScoreMaps& maps) {
    std::filesystem::create_directories(dir);
    char name[64];
    std::snprintf(name, sizeof name, "scoremap_%05d", frame);
    ojson index = ojson::array();
    std::string payload;
    for (std::size_t part = 0; part < maps.local.size(); ++part)
        for (std::size_t t = 0; t < maps.local[part].size(); ++t) {
            const auto& g = maps.local[part][t];
            index.push_back({{"part", part}, {"type", t}, {"rows", g.rows()}, {"cols", g.cols()},
                             {"offset", payload.size() / 4}});
            for (double v : g.values()) {
                const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
                for (int k = 0; k < 4; ++k)
                    payload.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
            }
        }
    write_text_file(dir / (std::string(name) + ".json"), ojson{{"format", "float32-le"}, {"maps", index}}.dump(1) + "\n");
    std::ofstream bin(dir / (std::string(name) + ".bin"), std::ios::binary);
    if (!bin)
        throw IoError("cannot write score map: " + (dir / name).string());
    bin.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

}  // namespace dpm4d
