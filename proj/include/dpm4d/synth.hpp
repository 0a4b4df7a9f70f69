#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpm4d/types.hpp"

namespace dpm4d {

enum class MotionScript { static_pose, arm_swing, direction_reversal, random_poses };

std::string_view to_string(MotionScript script);
MotionScript motion_script_from_string(std::string_view text);

// A stick figure on a fronto-parallel plane seen by a pinhole camera.
// Lengths are millimetres, angles radians measured from straight down with
// positive values pointing away from the body midline.
struct FigureSpec {
    int width = 320;
    int height = 240;
    double focal_px = 290.0;
    double plane_depth = 3000.0;
    double background_offset = 1500.0;  // background lies this much behind the figure
    double background_noise = 30.0;     // depth sigma, mm
    double rgb_noise = 8.0;             // background intensity sigma
    double joint_jitter = 0.0;          // px sigma applied to rendered joints

    double head = 230.0;         // neck to head centre
    double shoulder_half = 190.0;
    double hip_half = 110.0;
    double torso = 520.0;        // neck to mid-hip
    double upper_arm = 300.0;
    double forearm = 280.0;
    double thigh = 430.0;
    double shin = 420.0;
    double limb_radius_px = 4.5;
    double torso_radius_px = 14.0;
    double head_radius_px = 11.0;

    MotionScript script = MotionScript::static_pose;
    double swing_rate = 0.05;     // rad per frame for the swing scripts
    double center_jitter_px = 0.0;  // random figure offset per frame (random_poses)
    bool person = true;           // false renders background only
    int clutter = 0;              // limb-like sticks at the figure's depth, not part of any person

    void validate() const;
};

struct LimbAngles {
    double r_arm = 0.45, r_elbow = -0.35;
    double l_arm = 0.45, l_elbow = -0.35;
    double r_leg = 0.12, r_knee = -0.10;
    double l_leg = 0.12, l_knee = -0.10;
};

struct SynthSequence {
    std::vector<RgbdFrame> frames;
    AnnotationSet gt;                // full14 pixel joints
    std::vector<Pose3d> joints_mm;   // full14 camera-frame millimetres (back-projected rendered joints)
    std::vector<LimbAngles> angles;
};

// Figure joints (full14, pixel coordinates) for the given angles and centre
// offset, before jitter.
Pose figure_joints(const FigureSpec& spec, const LimbAngles& angles, double offset_x = 0.0, double offset_y = 0.0);

SynthSequence render_sequence(const FigureSpec& spec, int frame_count, std::uint64_t seed);

// Pixel + depth to camera millimetres with the FigureSpec pinhole (focal_px, image centre).
Joint3d back_project(const FigureSpec& spec, const Joint& joint, double depth_mm);

}  // namespace dpm4d
