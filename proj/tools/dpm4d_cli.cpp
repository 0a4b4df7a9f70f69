// dpm4d: synth / train / infer / eval / render / config init
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpm4d/io.hpp"
#include "dpm4d/model_io.hpp"
#include "dpm4d/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dpm4d;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, config_error = 1, data_error = 2, stage_error = 3 };

PipelineConfig config_or_default(const std::string& path) {
    return path.empty() ? default_config() : load_config(path);
}

fs::path annotations_path(const PipelineConfig& c) {
    if (!c.paths.annotations.empty())
        return c.paths.annotations;
    return fs::path(c.paths.dataset) / "annotations.json";
}

// Annotation and pose files may hold either skeleton.
AnnotationSet load_any_annotations(const fs::path& path) {
    try {
        return load_annotations(path, full14_skeleton());
    } catch (const SchemaError&) {
        return load_annotations(path, reduced10_skeleton());
    }
}

int cmd_config_init(const std::string& out) {
    const std::string text = config_to_json(default_config());
    if (out.empty())
        std::cout << text;
    else
        write_text_file(out, text);
    return ok;
}

struct SynthArgs {
    std::string out;
    std::string spec;
    std::string script;
    int frames = 10;
    std::uint64_t seed = 1;
    double jitter = -1.0;
    bool no_person = false;
    int clutter = -1;
};

int cmd_synth(const SynthArgs& a) {
    FigureSpec spec = a.spec.empty() ? FigureSpec{} : figure_spec_from_json(read_text_file(a.spec));
    if (!a.script.empty())
        spec.script = motion_script_from_string(a.script);
    if (a.jitter >= 0.0)
        spec.joint_jitter = a.jitter;
    if (a.no_person)
        spec.person = false;
    if (a.clutter >= 0)
        spec.clutter = a.clutter;
    const SynthSequence seq = render_sequence(spec, a.frames, a.seed);
    write_sequence(a.out, "manifest.txt", seq.frames);
    write_annotations(fs::path(a.out) / "annotations.json", seq.gt);
    write_text_file(fs::path(a.out) / "figure.json", figure_spec_to_json(spec));
    std::cerr << "wrote " << seq.frames.size() << " frames to " << a.out << "\n";
    return ok;
}

int cmd_train(const std::string& config_path) {
    const PipelineConfig c = config_or_default(config_path);
    if (c.paths.dataset.empty())
        throw ConfigError("paths.dataset is required for training");
    const auto positives = load_sequence(c.paths.dataset, c.paths.manifest);
    const auto gt = load_any_annotations(annotations_path(c));
    std::vector<RgbdFrame> negatives;
    if (!c.paths.negatives.empty())
        negatives = load_sequence(c.paths.negatives, c.paths.manifest);
    PartsModel model = initial_model(c);
    const TrainingSet set = build_training_set(c, model, positives, gt, negatives);
    std::cerr << "training on " << set.positives.size() << " positives, " << set.negatives.size()
              << " negatives\n";
    const TrainResult r = train_toy(c.training, model, set.positives, set.negatives);
    for (const auto& w : r.warnings)
        std::cerr << "warning: " << w << "\n";
    save_model(r.model, c.paths.model);

    ojson log;
    log["objective"] = r.objective_log;
    log["converged"] = r.converged;
    log["max_new_violation"] = r.max_new_violation;
    log["violations"] = r.final_report.violations;
    log["warnings"] = r.warnings;
    fs::create_directories(c.paths.output);
    write_text_file(fs::path(c.paths.output) / "train_log.json", log.dump(2) + "\n");
    for (std::size_t k = 0; k < r.objective_log.size(); ++k)
        std::cerr << "iter " << k << ": objective " << r.objective_log[k] << "\n";
    return ok;
}

struct InferArgs {
    std::string config;
    bool no_kf = false;
    bool no_ik = false;
    bool strict = false;
    std::string score_maps;
    std::string diagnostics;
};

int cmd_infer(const InferArgs& a) {
    PipelineConfig c = config_or_default(a.config);
    if (c.paths.dataset.empty())
        throw ConfigError("paths.dataset is required for inference");
    // Model first: a missing model stops the run before any frame is read.
    const PartsModel model = load_model(c.paths.model);
    const auto frames = load_sequence(c.paths.dataset, c.paths.manifest);
    InferOptions opt;
    opt.use_tracker = c.tracker.enabled && !a.no_kf;
    opt.use_ik = c.kinematics.enabled && !a.no_ik;
    opt.strict = a.strict;
    if (!a.score_maps.empty())
        opt.score_map_dir = a.score_maps;
    const InferResult r = run_inference(c, model, frames, opt);
    for (const auto& w : r.warnings)
        std::cerr << "warning: " << w << "\n";
    fs::create_directories(c.paths.output);
    write_pose_json(fs::path(c.paths.output) / "poses.json", r.records);
    write_text_file(fs::path(c.paths.output) / "detections.json", detections_to_json(frames, r.detections));
    if (!a.diagnostics.empty())
        write_text_file(a.diagnostics, diagnostics_to_csv(r.diagnostics));
    int failed = 0;
    for (const auto& rec : r.records)
        if (!rec.error.empty()) {
            std::cerr << "frame " << rec.frame << ": " << rec.error << "\n";
            ++failed;
        }
    std::cerr << r.records.size() - failed << "/" << r.records.size() << " frames posed\n";
    return ok;
}

struct EvalArgs {
    std::string predictions;
    std::string annotations;
    std::string detections;
    std::string json_out;
    std::string csv_out;
    std::string config;
    double alpha = -1.0;
};

int cmd_eval(const EvalArgs& a) {
    double alpha = a.alpha;
    if (alpha < 0.0)
        alpha = config_or_default(a.config).alpha;
    if (!(alpha > 0.0))
        throw ConfigError("alpha must be positive");
    const auto records = read_pose_json(a.predictions);
    AnnotationSet gt = load_any_annotations(a.annotations);

    FramePoses preds;
    std::optional<SkeletonKind> kind;
    for (const auto& r : records) {
        if (!r.error.empty())
            continue;
        if (kind && *kind != r.pose.skeleton_kind)
            throw SchemaError("predictions mix skeletons");
        kind = r.pose.skeleton_kind;
        preds[r.frame] = r.pose;
    }
    FrameDetections raw;
    if (!a.detections.empty())
        raw = detections_from_json(read_text_file(a.detections));
    for (const auto& [f, poses] : raw)
        if (!poses.empty())
            kind = kind ? kind : poses.front().skeleton_kind;
    const SkeletonKind gt_kind = gt.entries.empty() ? SkeletonKind::full14 : gt.entries.front().pose.skeleton_kind;
    // Score on the smallest skeleton involved: detector candidates are
    // reduced10 even when the written poses were completed to full14.
    SkeletonKind use = kind.value_or(gt_kind);
    for (const auto& [f, poses] : raw)
        for (const auto& p : poses)
            if (p.skeleton_kind == SkeletonKind::reduced10)
                use = SkeletonKind::reduced10;
    const SkeletonDef& sk = skeleton_for(use);
    for (auto& e : gt.entries)
        e.pose = remap_pose(e.pose, skeleton_for(e.pose.skeleton_kind), sk);
    for (auto& [f, p] : preds)
        p = remap_pose(p, skeleton_for(p.skeleton_kind), sk);
    FrameDetections dets;
    for (auto& [f, poses] : raw)
        for (const auto& p : poses)
            dets[f].push_back(remap_pose(p, skeleton_for(p.skeleton_kind), sk));

    const EvalReport report = evaluate(preds, dets, gt, sk, alpha);
    std::cout << format_report_table(report);
    if (!a.json_out.empty())
        write_text_file(a.json_out, report_to_json(report));
    if (!a.csv_out.empty())
        write_text_file(a.csv_out, report_to_csv(report));
    return ok;
}

int cmd_render(const std::string& dataset, const std::string& manifest, const std::string& poses,
               const std::string& out) {
    const auto records = read_pose_json(poses);
    if (records.empty())
        return ok;
    SequenceReader reader(dataset, manifest);
    fs::create_directories(out);
    int written = 0;
    for (const auto& rec : records) {
        if (!rec.error.empty())
            continue;
        if (rec.frame < 0 || static_cast<std::size_t>(rec.frame) >= reader.size())
            throw SchemaError("pose references missing frame " + std::to_string(rec.frame));
        const RgbdFrame frame = reader.load(rec.frame);
        const Overlay o = render_overlay(frame.rgb, rec.pose);
        for (const auto& w : o.warnings)
            std::cerr << "frame " << rec.frame << ": " << w << "\n";
        char name[32];
        std::snprintf(name, sizeof name, "overlay_%05d.png", rec.frame);
        write_rgb(fs::path(out) / name, o.image);
        ++written;
    }
    std::cerr << "wrote " << written << " overlays\n";
    return ok;
}

int exit_code_of(const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e))
        return config_error;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const EvaluationError*>(&e) ||
        dynamic_cast<const GenerationError*>(&e))
        return data_error;
    return stage_error;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"4D-DPM pose estimation on RGB-D sequences"};
    app.require_subcommand(1);

    auto* config_cmd = app.add_subcommand("config", "configuration helpers");
    config_cmd->require_subcommand(1);
    std::string config_out;
    auto* init = config_cmd->add_subcommand("init", "print or write the default configuration");
    init->add_option("-o,--output", config_out, "write to this file instead of stdout");

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "render a synthetic annotated sequence");
    synth->add_option("-o,--output", sa.out, "output directory")->required();
    synth->add_option("--spec", sa.spec, "figure spec JSON");
    synth->add_option("--frames", sa.frames, "frame count");
    synth->add_option("--seed", sa.seed, "random seed");
    synth->add_option("--script", sa.script, "static, arm_swing, direction_reversal or random");
    synth->add_option("--jitter", sa.jitter, "joint jitter sigma in pixels");
    synth->add_flag("--no-person", sa.no_person, "background only (negatives)");
    synth->add_option("--clutter", sa.clutter, "limb-like distractor sticks per frame");

    std::string train_config;
    auto* train = app.add_subcommand("train", "train a model on annotated positives and negatives");
    train->add_option("--config", train_config, "pipeline config");

    InferArgs ia;
    auto* infer = app.add_subcommand("infer", "estimate poses for every frame of a sequence");
    infer->add_option("--config", ia.config, "pipeline config");
    infer->add_flag("--no-kf", ia.no_kf, "skip the tracker");
    infer->add_flag("--no-ik", ia.no_ik, "skip skeleton completion (reduced10 output)");
    infer->add_flag("--strict", ia.strict, "abort on the first failing frame");
    infer->add_option("--dump-score-maps", ia.score_maps, "directory for per-frame score maps");
    infer->add_option("--diagnostics-csv", ia.diagnostics, "per-frame tracker diagnostics");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "score predictions against annotations");
    eval->add_option("--predictions", ea.predictions, "pose JSON")->required();
    eval->add_option("--annotations", ea.annotations, "annotation JSON")->required();
    eval->add_option("--detections", ea.detections, "candidate list for APK");
    eval->add_option("--alpha", ea.alpha, "PCK threshold factor");
    eval->add_option("--config", ea.config, "pipeline config (alpha default)");
    eval->add_option("--json", ea.json_out, "write the report as JSON");
    eval->add_option("--csv", ea.csv_out, "write the table as CSV");

    std::string r_dataset, r_manifest = "manifest.txt", r_poses, r_out;
    auto* render = app.add_subcommand("render", "draw poses over their frames");
    render->add_option("--dataset", r_dataset, "sequence directory")->required();
    render->add_option("--manifest", r_manifest, "manifest name");
    render->add_option("--poses", r_poses, "pose JSON")->required();
    render->add_option("-o,--output", r_out, "overlay directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*init)
            return cmd_config_init(config_out);
        if (*synth)
            return cmd_synth(sa);
        if (*train)
            return cmd_train(train_config);
        if (*infer)
            return cmd_infer(ia);
        if (*eval)
            return cmd_eval(ea);
        if (*render)
            return cmd_render(r_dataset, r_manifest, r_poses, r_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_of(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return stage_error;
    }
    return ok;
}
