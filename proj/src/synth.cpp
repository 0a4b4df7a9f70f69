#include "dpm4d/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace dpm4d {

std::string_view to_string(MotionScript script) {
    switch (script) {
    case MotionScript::static_pose: return "static";
    case MotionScript::arm_swing: return "arm_swing";
    case MotionScript::direction_reversal: return "direction_reversal";
    case MotionScript::random_poses: return "random";
    }
    return "static";
}

MotionScript motion_script_from_string(std::string_view text) {
    if (text == "static")
        return MotionScript::static_pose;
    if (text == "arm_swing")
        return MotionScript::arm_swing;
    if (text == "direction_reversal")
        return MotionScript::direction_reversal;
    if (text == "random")
        return MotionScript::random_poses;
    throw ConfigError("unknown motion script: " + std::string(text));
}

void FigureSpec::validate() const {
    if (width < 16 || height < 16)
        throw ConfigError("synthetic frames must be at least 16x16");
    if (!(focal_px > 0.0))
        throw ConfigError("focal length must be positive");
    if (plane_depth < 500.0 || plane_depth > 8000.0)
        throw ConfigError("figure plane depth must lie in [500, 8000] mm");
    if (plane_depth + background_offset > 65535.0 || background_offset < 0.0)
        throw ConfigError("background depth out of the 16-bit range");
    for (double v : {head, shoulder_half, hip_half, torso, upper_arm, forearm, thigh, shin, limb_radius_px,
                     torso_radius_px, head_radius_px})
        if (!(v > 0.0))
            throw ConfigError("figure lengths and radii must be positive");
    if (background_noise < 0.0 || rgb_noise < 0.0 || joint_jitter < 0.0 || center_jitter_px < 0.0)
        throw ConfigError("noise parameters must be non-negative");
    if (clutter < 0)
        throw ConfigError("clutter count must be non-negative");
}

namespace {

struct Vec {
    double x, y;
};

Vec limb_end(Vec from, double length, double angle, double outward) {
    // angle 0 points down (+y); positive angles swing away from the midline.
    return {from.x + outward * length * std::sin(angle), from.y + length * std::cos(angle)};
}

}  // namespace

Pose figure_joints(const FigureSpec& spec, const LimbAngles& a, double offset_x, double offset_y) {
    const double k = spec.focal_px / spec.plane_depth;  // px per mm
    // Vertical centre of the figure between head top and ankles.
    const double top = -spec.head;
    const double bottom = spec.torso + spec.thigh + spec.shin;
    const Vec neck{spec.width / 2.0 + offset_x, spec.height / 2.0 - 0.5 * (top + bottom) * k + offset_y};
    auto px = [&](double mm_x, double mm_y) { return Vec{neck.x + mm_x * k, neck.y + mm_y * k}; };

    const Vec head = px(0.0, -spec.head);
    // The person faces the camera: their right side is on the image left.
    const Vec r_sh = px(-spec.shoulder_half, 0.0);
    const Vec l_sh = px(spec.shoulder_half, 0.0);
    const Vec r_hip = px(-spec.hip_half, spec.torso);
    const Vec l_hip = px(spec.hip_half, spec.torso);
    const Vec r_el = limb_end(r_sh, spec.upper_arm * k, a.r_arm, -1.0);
    const Vec r_wr = limb_end(r_el, spec.forearm * k, a.r_arm + a.r_elbow, -1.0);
    const Vec l_el = limb_end(l_sh, spec.upper_arm * k, a.l_arm, 1.0);
    const Vec l_wr = limb_end(l_el, spec.forearm * k, a.l_arm + a.l_elbow, 1.0);
    const Vec r_kn = limb_end(r_hip, spec.thigh * k, a.r_leg, -1.0);
    const Vec r_an = limb_end(r_kn, spec.shin * k, a.r_leg + a.r_knee, -1.0);
    const Vec l_kn = limb_end(l_hip, spec.thigh * k, a.l_leg, 1.0);
    const Vec l_an = limb_end(l_kn, spec.shin * k, a.l_leg + a.l_knee, 1.0);

    // full14 order
    const std::array<Vec, 14> pts = {neck, head, r_sh, l_sh, r_el, l_el, r_wr, l_wr, r_hip, l_hip, r_kn, l_kn, r_an, l_an};
    Pose pose;
    pose.skeleton_kind = SkeletonKind::full14;
    for (int i = 0; i < 14; ++i)
        pose.joints.push_back({i, pts[i].x, pts[i].y, 0, 0.0});
    return pose;
}

Joint3d back_project(const FigureSpec& spec, const Joint& joint, double depth_mm) {
    const double cx = spec.width / 2.0;
    const double cy = spec.height / 2.0;
    return {joint.part_id, (joint.x - cx) * depth_mm / spec.focal_px, (joint.y - cy) * depth_mm / spec.focal_px,
            depth_mm, true};
}

namespace {

double segment_distance(double px, double py, Vec a, Vec b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

struct Capsule {
    Vec a, b;
    double radius;
    std::array<std::uint8_t, 3> color;
};

LimbAngles script_angles(const FigureSpec& spec, int t, int frames, std::mt19937_64& rng) {
    LimbAngles a;
    switch (spec.script) {
    case MotionScript::static_pose:
        break;
    case MotionScript::arm_swing:
        a.r_arm += spec.swing_rate * t;
        a.l_arm += spec.swing_rate * t;
        break;
    case MotionScript::direction_reversal: {
        const int turn = frames / 2;
        const double s = spec.swing_rate * (t <= turn ? t : 2 * turn - t);
        a.r_arm += s;
        a.l_arm += s;
        break;
    }
    case MotionScript::random_poses: {
        std::uniform_real_distribution<double> arm(0.15, 2.6), elbow(-1.2, 0.0), leg(0.02, 0.5), knee(-0.5, 0.0);
        a.r_arm = arm(rng);
        a.r_elbow = elbow(rng);
        a.l_arm = arm(rng);
        a.l_elbow = elbow(rng);
        a.r_leg = leg(rng);
        a.r_knee = knee(rng);
        a.l_leg = leg(rng);
        a.l_knee = knee(rng);
        break;
    }
    }
    return a;
}

}  // namespace

SynthSequence render_sequence(const FigureSpec& spec, int frame_count, std::uint64_t seed) {
    spec.validate();
    if (frame_count < 1)
        throw GenerationError("frame_count must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> centre(-1.0, 1.0);
    const int W = spec.width, H = spec.height;
    const auto bg_depth = static_cast<double>(spec.plane_depth + spec.background_offset);

    SynthSequence seq;
    for (int t = 0; t < frame_count; ++t) {
        const LimbAngles ang = script_angles(spec, t, frame_count, rng);
        double ox = 0.0, oy = 0.0;
        if (spec.center_jitter_px > 0.0) {
            ox = spec.center_jitter_px * centre(rng);
            oy = 0.5 * spec.center_jitter_px * centre(rng);
        }
        Pose pose = figure_joints(spec, ang, ox, oy);
        if (spec.joint_jitter > 0.0)
            for (auto& j : pose.joints) {
                j.x += spec.joint_jitter * unit(rng);
                j.y += spec.joint_jitter * unit(rng);
            }

        RgbImage rgb(W, H, 3);
        DepthImage depth(W, H, 1);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const double d = bg_depth + spec.background_noise * unit(rng);
                depth.at(x, y) = static_cast<std::uint16_t>(std::clamp(std::lround(d), 1L, 65535L));
                const double g = 70.0 + spec.rgb_noise * unit(rng);
                const auto v = static_cast<std::uint8_t>(std::clamp(std::lround(g), 0L, 255L));
                rgb.at(x, y, 0) = v;
                rgb.at(x, y, 1) = v;
                rgb.at(x, y, 2) = static_cast<std::uint8_t>(std::min(255, v + 10));
            }

        auto draw = [&](const Capsule& c) {
            const int x0 = std::max(0, static_cast<int>(std::floor(std::min(c.a.x, c.b.x) - c.radius - 2)));
            const int x1 = std::min(W - 1, static_cast<int>(std::ceil(std::max(c.a.x, c.b.x) + c.radius + 2)));
            const int y0 = std::max(0, static_cast<int>(std::floor(std::min(c.a.y, c.b.y) - c.radius - 2)));
            const int y1 = std::min(H - 1, static_cast<int>(std::ceil(std::max(c.a.y, c.b.y) + c.radius + 2)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double d = segment_distance(x + 0.5, y + 0.5, c.a, c.b);
                    const double cover = std::clamp(c.radius + 0.5 - d, 0.0, 1.0);
                    if (cover <= 0.0)
                        continue;
                    for (int ch = 0; ch < 3; ++ch) {
                        const double v = cover * c.color[ch] + (1.0 - cover) * rgb.at(x, y, ch);
                        rgb.at(x, y, ch) = static_cast<std::uint8_t>(std::lround(v));
                    }
                    if (cover >= 0.5)
                        depth.at(x, y) = static_cast<std::uint16_t>(std::lround(spec.plane_depth));
                }
        };

        if (spec.person) {
            for (const auto& j : pose.joints)
                if (!(j.x >= 0.0 && j.y >= 0.0 && j.x < W && j.y < H))
                    throw GenerationError("figure leaves the image in frame " + std::to_string(t) + " (part " +
                                          full14_skeleton().name(j.part_id) + ")");
            auto P = [&](int i) { return Vec{pose.joints[i].x, pose.joints[i].y}; };
            const Vec mid_hip{0.5 * (P(8).x + P(9).x), 0.5 * (P(8).y + P(9).y)};
            const std::array<std::uint8_t, 3> torso_c{200, 180, 60}, head_c{230, 200, 170}, right_c{220, 60, 50},
                left_c{60, 90, 220}, leg_r{200, 90, 40}, leg_l{40, 150, 200};
            const double lr = spec.limb_radius_px;
            const std::vector<Capsule> caps = {
                {P(0), mid_hip, spec.torso_radius_px, torso_c},
                {P(2), P(3), lr, torso_c},
                {P(8), P(9), lr, torso_c},
                {P(8), P(10), lr + 0.5, leg_r},
                {P(10), P(12), lr, leg_r},
                {P(9), P(11), lr + 0.5, leg_l},
                {P(11), P(13), lr, leg_l},
                {P(2), P(4), lr, right_c},
                {P(4), P(6), lr, right_c},
                {P(3), P(5), lr, left_c},
                {P(5), P(7), lr, left_c},
                {P(0), P(1), lr, head_c},
                {P(1), P(1), spec.head_radius_px, head_c},
            };
            for (const auto& c : caps)
                draw(c);
        }

        if (spec.clutter > 0) {
            std::uniform_real_distribution<double> px(0.0, W), py(0.0, H), len(30.0, 110.0), turn(-1.6, 1.6),
                dir(0.0, 2.0 * std::acos(-1.0));
            std::bernoulli_distribution bent(0.5);
            const std::array<std::uint8_t, 3> colors[] = {{220, 60, 50}, {60, 90, 220}, {200, 90, 40}, {40, 150, 200}};
            for (int k = 0; k < spec.clutter; ++k) {
                Vec a{px(rng), py(rng)};
                double th = dir(rng);
                const auto& col = colors[k % 4];
                const int pieces = bent(rng) ? 2 : 1;
                for (int m = 0; m < pieces; ++m) {
                    const double l = len(rng);
                    const Vec b{a.x + l * std::cos(th), a.y + l * std::sin(th)};
                    draw({a, b, spec.limb_radius_px, col});
                    a = b;
                    th += turn(rng);
                }
            }
        }

        seq.frames.emplace_back(std::move(rgb), std::move(depth), t);
        Annotation ann;
        ann.frame = t;
        ann.pose = pose;
        if (spec.person) {
            double minx = W, miny = H, maxx = 0, maxy = 0;
            for (const auto& j : pose.joints) {
                minx = std::min(minx, j.x);
                maxx = std::max(maxx, j.x);
                miny = std::min(miny, j.y);
                maxy = std::max(maxy, j.y);
            }
            ann.bbox = {std::max(1, static_cast<int>(std::ceil((maxy - miny) * 1.1))),
                        std::max(1, static_cast<int>(std::ceil((maxx - minx) * 1.1)))};
            Pose3d p3;
            p3.skeleton_kind = SkeletonKind::full14;
            for (const auto& j : pose.joints)
                p3.joints.push_back(back_project(spec, j, spec.plane_depth));
            seq.joints_mm.push_back(std::move(p3));
            seq.gt.entries.push_back(std::move(ann));
        }
        seq.angles.push_back(ang);
    }
    return seq;
}

}  // namespace dpm4d
