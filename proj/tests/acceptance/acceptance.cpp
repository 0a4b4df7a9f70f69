// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "../support.hpp"
#include "dpm4d/io.hpp"
#include "dpm4d/kinematics.hpp"
#include "dpm4d/metrics.hpp"
#include "dpm4d/model_io.hpp"
#include "dpm4d/pipeline.hpp"
#include "dpm4d/preprocess.hpp"
#include "dpm4d/synth.hpp"
#include "dpm4d/tracker.hpp"

#ifndef DPM4D_CLI_PATH
#define DPM4D_CLI_PATH "dpm4d"
#endif

namespace fs = std::filesystem;
using namespace dpm4d;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "dpm4d_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome dp_matches_exhaustive() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    int mismatches = 0, enumerated = 0;
    double worst = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const int parts = std::uniform_int_distribution<int>(1, 4)(rng);
        std::vector<int> types(parts);
        std::vector<FilterShape> shapes(parts);
        int min_rows = 1, min_cols = 1;
        for (int p = 0; p < parts; ++p) {
            types[p] = std::uniform_int_distribution<int>(1, 2)(rng);
            shapes[p] = {std::uniform_int_distribution<int>(1, 3)(rng), std::uniform_int_distribution<int>(1, 3)(rng)};
            min_rows = std::max(min_rows, shapes[p].rows);
            min_cols = std::max(min_cols, shapes[p].cols);
        }
        // a grid smaller than a filter is a dimension error, not an instance
        const int rows = std::uniform_int_distribution<int>(min_rows, 12)(rng);
        const int cols = std::uniform_int_distribution<int>(min_cols, 12)(rng);
        PartsModel m(testing::random_tree(parts, rng), types, shapes, 8, 2);
        testing::randomize(m, rng, inst % 2 == 1);
        const FeatureGrid fm = testing::random_grid(rows, cols, 2, rng);
        const FeatureGrid fd = testing::random_grid(rows, cols, 2, rng);

        // Product-space enumeration where it is affordable, otherwise every
        // child state against every parent state.
        const bool full = testing::state_product(m, rows, cols) <= 400000;
        const auto oracle = full ? testing::brute_force(m, fm, fd) : testing::tree_exhaustive(m, fm, fd);
        enumerated += full;
        InferenceParams params;
        params.max_detections = 1;
        const auto dets = infer_poses(m, fm, fd, params);
        const double diff = dets.empty() ? INFINITY : std::abs(dets[0].score - oracle.score);
        worst = std::max(worst, diff);
        if (dets.empty() || diff > 1e-9 || dets[0].config != oracle.config)
            ++mismatches;
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = mismatches == 0 && secs < 10.0;
    o.detail = fmt("200 instances, %.0f fully enumerated, %.0f mismatches, max |dscore| %.2e, %.2f s", enumerated,
                   mismatches, worst, secs);
    return o;
}

// ---------------------------------------------------------------------------

using PositionSolver = std::function<ChainSolution(const Eigen::Vector3d&, double, double, int, int)>;

struct RoundTrip {
    int failures = 0;
    double worst_pos = 0.0;
    double worst_rot = 0.0;
};

RoundTrip ik_round_trip(const PositionSolver& solve, int targets, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> len(150.0, 450.0);
    RoundTrip rt;
    for (int k = 0; k < targets; ++k) {
        const double a2 = len(rng), a3 = len(rng);
        const KinematicChain chain = make_limb_chain(a2, a3);
        JointAngles q;
        for (double& v : q)
            v = ang(rng);
        const Eigen::Matrix4d T = forward_kinematics(chain, q);
        const Eigen::Vector3d p = T.topRightCorner<3, 1>();
        double best_pos = INFINITY, best_rot = INFINITY;
        for (int sb : {1, -1})
            for (int eb : {1, -1}) {
                const ChainSolution s = solve(p, a2, a3, sb, eb);
                JointAngles sol = s.q;
                try {
                    const auto w = ik_orientation(T.topLeftCorner<3, 3>(), sol[0], sol[1], sol[2], chain);
                    sol[3] = w[0];
                    sol[4] = w[1];
                    sol[5] = w[2];
                } catch (const Error&) {
                    continue;
                }
                const Eigen::Matrix4d F = forward_kinematics(chain, sol);
                const double pe = (F.topRightCorner<3, 1>() - p).norm();
                const double re = (F.topLeftCorner<3, 3>() - T.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff();
                if (!std::isfinite(pe) || !std::isfinite(re))
                    continue;
                if (pe < best_pos) {
                    best_pos = pe;
                    best_rot = re;
                }
            }
        rt.worst_pos = std::max(rt.worst_pos, std::isfinite(best_pos) ? best_pos : 1e300);
        rt.worst_rot = std::max(rt.worst_rot, std::isfinite(best_rot) ? best_rot : 1e300);
        if (!(best_pos < 1e-6 && best_rot < 1e-6))
            ++rt.failures;
    }
    return rt;
}

// Position solution with the segment lengths left unsquared in the cosine law.
ChainSolution unsquared_position(const Eigen::Vector3d& t, double a2, double a3, int sb, int eb) {
    const double x = t.x(), y = t.y(), z = t.z();
    const double c3 = (x * x + y * y + z * z - a2 - a3) / (2.0 * a2 * a3);
    const double s3 = (eb >= 0 ? 1.0 : -1.0) * std::sqrt(1.0 - c3 * c3);
    double r = std::hypot(x, y);
    double q1 = std::atan2(y, x);
    if (sb < 0) {
        q1 += std::numbers::pi;
        r = -r;
    }
    ChainSolution s;
    s.q = {q1, std::atan2(z, r) - std::atan2(a3 * s3, a2 + a3 * c3), std::atan2(s3, c3), 0.0, 0.0, 0.0};
    return s;
}

Outcome fk_ik_round_trip() {
    const auto t0 = Clock::now();
    const RoundTrip rt = ik_round_trip(
        [](const Eigen::Vector3d& p, double a2, double a3, int sb, int eb) { return ik_position(p, a2, a3, sb, eb); },
        1000, 99);
    const double secs = seconds_since(t0);
    // Regression: the unsquared cosine law must not survive the same suite.
    const RoundTrip bad = ik_round_trip(unsquared_position, 1000, 99);
    Outcome o;
    o.pass = rt.failures == 0 && secs < 5.0 && bad.failures > 0;
    o.detail = fmt("1000 targets, %.0f failures, max pos err %.2e mm, max rot err %.2e, %.2f s", rt.failures,
                   rt.worst_pos, rt.worst_rot, secs) +
               fmt("; unsquared law fails %.0f/1000", bad.failures);
    return o;
}

// ---------------------------------------------------------------------------

Outcome matrix_patterns() {
    const double h1[6][6] = {{1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0},
                             {0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}};
    const double a1[6][6] = {{1, 0, 1, 0, 0, 0}, {0, 1, 0, 1, 0, 0}, {0, 0, 1, 0, 1, 0},
                             {0, 0, 0, 1, 0, 1}, {0, 0, 0, 0, 1, 0}, {0, 0, 0, 0, 0, 1}};
    const double a2[6][6] = {{0, 0, -1, 0, 0, 0}, {0, 0, 0, -1, 0, 0}, {0, 0, 0, 0, -1, 0},
                             {0, 0, 0, 0, 0, -1}, {0, 0, 0, 0, 0, 0},  {0, 0, 0, 0, 0, 0}};
    // Block layout of the 8-joint transition matrix: 1 = A1, 2 = A2.
    const char* layout[8] = {"12000000", "01000200", "00100020", "00210000",
                             "00001200", "00000100", "00000010", "00000021"};
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(48, 48), H = Eigen::MatrixXd::Zero(48, 48);
    for (int bi = 0; bi < 8; ++bi)
        for (int bj = 0; bj < 8; ++bj)
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c) {
                    const char b = layout[bi][bj];
                    A(6 * bi + r, 6 * bj + c) = b == '1' ? a1[r][c] : b == '2' ? a2[r][c] : 0.0;
                    if (bi == bj)
                        H(6 * bi + r, 6 * bj + c) = h1[r][c];
                }
    const Eigen::MatrixXd gotA = build_transition_matrix(8, reference_pairing8());
    const Eigen::MatrixXd gotH = build_measurement_matrix(8);
    int bad = 0;
    if (gotA.rows() != 48 || gotA.cols() != 48 || gotH.rows() != 48 || gotH.cols() != 48)
        return {false, "wrong dimensions"};
    for (int r = 0; r < 48; ++r)
        for (int c = 0; c < 48; ++c)
            bad += (gotA(r, c) != A(r, c)) + (gotH(r, c) != H(r, c));
    return {bad == 0, fmt("48x48 A and H, %.0f differing elements", bad)};
}

// ---------------------------------------------------------------------------

struct NoiseRun {
    int wins = 0;
};

NoiseRun kf_noise(const Pairing& pairing) {
    NoiseRun out;
    const int n = 8, frames = 60, burn_in = 10;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        std::uniform_real_distribution<double> pos(40.0, 280.0), vel(-2.0, 2.0);
        std::normal_distribution<double> noise(0.0, 3.0);
        Eigen::VectorXd p0(2 * n), v(2 * n);
        for (int k = 0; k < 2 * n; ++k) {
            p0(k) = pos(rng);
            v(k) = vel(rng);
        }
        TrackerParams params;
        params.r_scale = 9.0;  // the simulated measurement variance
        TrackState s;
        double se_filter = 0.0, se_meas = 0.0;
        for (int t = 0; t < frames; ++t) {
            const Eigen::VectorXd truth = p0 + t * v;
            Eigen::VectorXd z(2 * n);
            for (int k = 0; k < 2 * n; ++k)
                z(k) = truth(k) + noise(rng);
            if (t == 0) {
                s = make_track_state(z, pairing, params);
            } else {
                s = kf_update(kf_predict(s), stack_positions(z));
            }
            if (t >= burn_in) {
                se_filter += (positions_of(s.x) - truth).squaredNorm();
                se_meas += (z - truth).squaredNorm();
            }
        }
        out.wins += se_filter < se_meas;
    }
    return out;
}

Outcome kf_noise_reduction() {
    const NoiseRun coupled = kf_noise(reference_pairing8());
    const NoiseRun free = kf_noise({});
    Outcome o;
    o.pass = coupled.wins >= 95;
    o.detail = fmt("filtered RMSE below measurement RMSE in %.0f/100 seeds (reference pairing), %.0f/100 uncoupled",
                   coupled.wins, free.wins);
    return o;
}

// ---------------------------------------------------------------------------

AnnotationSet reduce(const AnnotationSet& gt) {
    AnnotationSet out = gt;
    for (auto& a : out.entries)
        a.pose = remap_pose(a.pose, full14_skeleton(), reduced10_skeleton());
    return out;
}

double pck_of(const InferResult& r, const AnnotationSet& gt, double alpha) {
    FramePoses preds;
    for (const auto& rec : r.records)
        if (rec.error.empty())
            preds[rec.frame] = rec.pose;
    for (const auto& a : gt.entries)
        if (!preds.count(a.frame)) {
            // A failed frame scores as a miss on every joint.
            Pose far;
            far.skeleton_kind = SkeletonKind::reduced10;
            for (int i = 0; i < 10; ++i)
                far.joints.push_back({i, -1e6, -1e6, 0, 0.0});
            preds[a.frame] = far;
        }
    return pck(preds, gt, alpha).average;
}

struct Benchmark {
    PipelineConfig config;
    PartsModel model;
    bool trained = false;
};

Benchmark& benchmark() {
    static Benchmark b;
    return b;
}

Outcome synthetic_benchmark() {
    const auto t0 = Clock::now();
    FigureSpec spec;
    spec.script = MotionScript::random_poses;
    const SynthSequence train = render_sequence(spec, 200, 501);
    const SynthSequence held = render_sequence(spec, 100, 502);
    FigureSpec empty = spec;
    empty.person = false;
    empty.clutter = 6;
    const SynthSequence negatives = render_sequence(empty, 100, 503);

    Benchmark& b = benchmark();
    b.config = default_config();
    PartsModel model = initial_model(b.config);
    const TrainingSet set = build_training_set(b.config, model, train.frames, train.gt, negatives.frames);
    const TrainResult tr = train_toy(b.config.training, model, set.positives, set.negatives);
    b.model = tr.model;
    b.trained = true;
    const double train_secs = seconds_since(t0);

    InferOptions raw;
    raw.use_tracker = false;
    raw.use_ik = false;
    raw.log_timing = false;
    const double pck_held = pck_of(run_inference(b.config, b.model, held.frames, raw), reduce(held.gt), 0.2);

    FigureSpec swing = spec;
    swing.script = MotionScript::direction_reversal;
    swing.swing_rate = 0.04;
    swing.joint_jitter = 2.0;
    const SynthSequence jittered = render_sequence(swing, 100, 504);
    InferOptions kf = raw;
    kf.use_tracker = true;
    const double without = pck_of(run_inference(b.config, b.model, jittered.frames, raw), reduce(jittered.gt), 0.2);
    const double with = pck_of(run_inference(b.config, b.model, jittered.frames, kf), reduce(jittered.gt), 0.2);
    const double secs = seconds_since(t0);

    Outcome o;
    o.pass = pck_held >= 90.0 && with >= without && secs < 1800.0;
    o.detail = fmt("held-out PCK@0.2 %.2f; jittered PCK with KF %.2f, without %.2f; ", pck_held, with, without) +
               fmt("train %.0f s, total %.0f s", train_secs, secs);
    return o;
}

// ---------------------------------------------------------------------------

Pose3d reduced_of(const Pose3d& full) {
    Pose3d out;
    out.skeleton_kind = SkeletonKind::reduced10;
    const auto& rsk = reduced10_skeleton();
    for (int i = 0; i < 10; ++i) {
        Joint3d j = full.joints[full14_skeleton().index_of(rsk.name(i))];
        j.part_id = i;
        out.joints.push_back(j);
    }
    return out;
}

// Side of the proximal-to-distal line on which `p` lies, in the image plane.
double side(const Joint3d& a, const Joint3d& b, const Joint3d& p) {
    return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

Outcome ik_completion() {
    FigureSpec spec;
    spec.script = MotionScript::random_poses;
    const SynthSequence seq = render_sequence(spec, 50, 601);
    const auto& fsk = full14_skeleton();
    const char* limbs[4][3] = {{"r_shoulder", "r_elbow", "r_wrist"},
                               {"l_shoulder", "l_elbow", "l_wrist"},
                               {"r_hip", "r_knee", "r_ankle"},
                               {"l_hip", "l_knee", "l_ankle"}};
    const LimbLengths mm{spec.upper_arm, spec.forearm, spec.thigh, spec.shin};

    double worst_mm = 0.0;
    for (const Pose3d& truth : seq.joints_mm) {
        // Branch of each limb that lands on the true side, told to the solver.
        CompletionResult both[2];
        for (int b = 0; b < 2; ++b) {
            CompletionOptions opt;
            opt.policy = BranchPolicy::fixed;
            opt.fixed_branches = b == 0 ? std::array<int, 4>{1, 1, 1, 1} : std::array<int, 4>{-1, -1, -1, -1};
            both[b] = complete_skeleton(reduced_of(truth), mm, opt);
        }
        for (const auto& L : limbs) {
            const int p = fsk.index_of(L[0]), m = fsk.index_of(L[1]), d = fsk.index_of(L[2]);
            const double want = side(truth.joints[p], truth.joints[d], truth.joints[m]);
            const int b = side(truth.joints[p], truth.joints[d], both[0].pose.joints[m]) * want > 0 ? 0 : 1;
            const Joint3d& got = both[b].pose.joints[m];
            const Joint3d& ref = truth.joints[m];
            worst_mm = std::max(worst_mm, std::sqrt(std::pow(got.x - ref.x, 2) + std::pow(got.y - ref.y, 2) +
                                                    std::pow(got.z - ref.z, 2)));
        }
    }

    // Same figures in pixels, sigma 2 px noise on the completion inputs, true
    // branch again; the anatomical pick is reported alongside for reference.
    const SynthSequence clean = render_sequence(spec, 50, 602);
    std::mt19937_64 rng(602);
    std::normal_distribution<double> jitter(0.0, 2.0);
    const double k = spec.focal_px / spec.plane_depth;
    const LimbLengths px{spec.upper_arm * k, spec.forearm * k, spec.thigh * k, spec.shin * k};
    double worst_px = 0.0, worst_anatomical = 0.0;
    for (const auto& a : clean.gt.entries) {
        Pose3d truth, noisy;
        truth.skeleton_kind = noisy.skeleton_kind = SkeletonKind::full14;
        for (const auto& j : a.pose.joints) {
            truth.joints.push_back({j.part_id, j.x, j.y, 0.0, true});
            noisy.joints.push_back({j.part_id, j.x + jitter(rng), j.y + jitter(rng), 0.0, true});
        }
        CompletionResult both[2];
        for (int b = 0; b < 2; ++b) {
            CompletionOptions opt;
            opt.policy = BranchPolicy::fixed;
            opt.fixed_branches = b == 0 ? std::array<int, 4>{1, 1, 1, 1} : std::array<int, 4>{-1, -1, -1, -1};
            both[b] = complete_skeleton(reduced_of(noisy), px, opt);
        }
        const CompletionResult anatomical = complete_skeleton(reduced_of(noisy), px);
        for (const auto& L : limbs) {
            const int p = fsk.index_of(L[0]), m = fsk.index_of(L[1]), d = fsk.index_of(L[2]);
            const double want = side(truth.joints[p], truth.joints[d], truth.joints[m]);
            const int b = side(noisy.joints[p], noisy.joints[d], both[0].pose.joints[m]) * want > 0 ? 0 : 1;
            const Joint3d& ref = truth.joints[m];
            worst_px = std::max(worst_px, std::hypot(both[b].pose.joints[m].x - ref.x, both[b].pose.joints[m].y - ref.y));
            worst_anatomical = std::max(worst_anatomical, std::hypot(anatomical.pose.joints[m].x - ref.x,
                                                                     anatomical.pose.joints[m].y - ref.y));
        }
    }
    Outcome o;
    o.pass = worst_mm <= 1e-3 && worst_px <= 15.0;
    o.detail = fmt("noiseless worst %.2e mm; jittered worst %.2f px (true branch), %.2f px with the anatomical pick",
                   worst_mm, worst_px, worst_anatomical);
    return o;
}

// ---------------------------------------------------------------------------

Outcome background_separation() {
    FigureSpec spec;
    spec.script = MotionScript::random_poses;
    const SynthSequence seq = render_sequence(spec, 10, 701);
    long long bg = 0, bg_zero = 0, fg = 0, fg_kept = 0;
    const auto person = static_cast<std::uint16_t>(std::lround(spec.plane_depth));
    for (const auto& f : seq.frames) {
        const auto r = remove_background(f, MserParams{});
        for (int y = 0; y < f.height(); ++y)
            for (int x = 0; x < f.width(); ++x) {
                const bool is_fg = f.depth.at(x, y) == person;
                const bool kept = r.frame.depth.at(x, y) != 0;
                if (is_fg) {
                    ++fg;
                    fg_kept += kept;
                } else {
                    ++bg;
                    bg_zero += !kept && r.frame.rgb.at(x, y, 0) == 0 && r.frame.rgb.at(x, y, 1) == 0 &&
                               r.frame.rgb.at(x, y, 2) == 0;
                }
            }
    }
    const double zeroed = 100.0 * bg_zero / bg, kept = 100.0 * fg_kept / fg;
    return {zeroed >= 99.0 && kept >= 95.0,
            fmt("background zeroed %.2f%%, foreground kept %.2f%% over 10 frames", zeroed, kept)};
}

// ---------------------------------------------------------------------------

Outcome metric_fixtures() {
    int bad = 0;
    std::ostringstream why;
    auto pose_of = [](std::vector<std::pair<double, double>> pts, double score = 0.0) {
        Pose p;
        p.skeleton_kind = SkeletonKind::custom;
        for (std::size_t i = 0; i < pts.size(); ++i)
            p.joints.push_back({static_cast<int>(i), pts[i].first, pts[i].second, 0, score});
        return p;
    };
    auto check = [&](const char* name, double got, double want) {
        if (got != want) {
            ++bad;
            why << ' ' << name << '=' << got;
        }
    };

    // Threshold 0.2 * max(100, 50) = 20 px: 15 px off is inside, 25 px is not.
    AnnotationSet gt{{{0, {100, 50}, pose_of({{10, 10}, {50, 50}})}}};
    FramePoses pred{{0, pose_of({{25, 10}, {50, 75}})}};
    const PartValues p = pck(pred, gt, 0.2);
    check("pck0", p.per_part[0], 100.0);
    check("pck1", p.per_part[1], 0.0);

    AnnotationSet one{{{0, {100, 100}, pose_of({{0, 0}})}}};
    const PartValues hi = apk({{0, {pose_of({{1, 1}}, 0.9), pose_of({{90, 90}}, 0.1)}}}, one, 0.2);
    const PartValues lo = apk({{0, {pose_of({{1, 1}}, 0.1), pose_of({{90, 90}}, 0.9)}}}, one, 0.2);
    check("ap_correct_first", hi.per_part[0], 100.0);
    check("ap_false_first", lo.per_part[0], 50.0);

    AnnotationSet two{{{0, {10, 10}, pose_of({{0, 0}, {5, 5}})}, {1, {10, 10}, pose_of({{1, 1}, {2, 2}})}}};
    const PartValues e = mean_error({{0, pose_of({{3, 4}, {8, 9}})}, {1, pose_of({{4, 5}, {5, 6}})}}, two);
    check("err0", e.per_part[0], 5.0);
    check("err1", e.per_part[1], 5.0);
    check("err_avg", e.average, 5.0);
    const PartValues m = mean_error({{0, pose_of({{2, 0}, {5, 5}})}, {1, pose_of({{1, 5}, {2, 2}})}}, two);
    check("err_2_4", m.per_part[0], 3.0);
    return {bad == 0, bad == 0 ? "20 px threshold, AP 100/50, 3-4-5 error and {2,4} mean all exact"
                               : "mismatch:" + why.str()};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    try {
        return read_text_file(p);
    } catch (const Error&) {
        return {};
    }
}

Outcome repeated_infer() {
    const Benchmark& b = benchmark();
    if (!b.trained)
        return {false, "no trained model"};
    const fs::path dir = work_dir();
    FigureSpec spec;
    spec.script = MotionScript::direction_reversal;
    spec.joint_jitter = 2.0;
    const SynthSequence seq = render_sequence(spec, 12, 801);
    write_sequence(dir / "seq", "manifest.txt", seq.frames);
    save_model(b.model, dir / "model.4ddpm");
    PipelineConfig c = b.config;
    c.paths.dataset = (dir / "seq").string();
    c.paths.model = (dir / "model.4ddpm").string();
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
        c.paths.output = (dir / ("run" + std::to_string(run))).string();
        write_text_file(dir / "config.json", config_to_json(c));
        const std::string cmd = std::string("\"") + DPM4D_CLI_PATH + "\" infer --config \"" +
                                (dir / "config.json").string() + "\" 2> \"" + (dir / "infer.log").string() + "\"";
        if (std::system(cmd.c_str()) != 0)
            return {false, "infer exited with an error"};
        outputs[run] = slurp(fs::path(c.paths.output) / "poses.json");
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    return {same, fmt("two infer runs on 12 frames, %.0f bytes each, ", static_cast<double>(outputs[0].size())) +
                      (same ? "identical" : "different")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Criterion all[] = {
        {1, "dp inference equals exhaustive search", dp_matches_exhaustive},
        {2, "fk/ik round trip", fk_ik_round_trip},
        {3, "tracker matrix patterns", matrix_patterns},
        {4, "kalman noise reduction", kf_noise_reduction},
        {5, "synthetic end-to-end benchmark", synthetic_benchmark},
        {6, "skeleton completion accuracy", ik_completion},
        {7, "background separation", background_separation},
        {8, "metric fixtures", metric_fixtures},
        {9, "repeated infer is byte-identical", repeated_infer},
    };
    int failed = 0;
    for (const auto& c : all) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %d  %-40s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/9 criteria passed\n", 9 - failed);
    return failed == 0 ? 0 : 1;
}
