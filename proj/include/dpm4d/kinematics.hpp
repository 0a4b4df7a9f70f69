#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpm4d/types.hpp"

namespace dpm4d {

// theta is the constant angle of a fixed row and an offset added to the
// joint variable of a variable row.
struct DhRow {
    double theta = 0.0;
    double d = 0.0;
    double alpha = 0.0;
    double a = 0.0;
    bool variable = true;
};

struct KinematicChain {
    std::array<DhRow, 6> rows;
    Eigen::Matrix4d base_frame = Eigen::Matrix4d::Identity();
    double a2 = 0.0;
    double a3 = 0.0;

    void validate() const;
};

using JointAngles = std::array<double, 6>;

struct ChainSolution {
    JointAngles q{};
    int shoulder_branch = 1;  // +1: q1 = atan2(y, x), -1: q1 + pi
    int elbow_branch = 1;     // sign of sin(q3)
};

// Six revolute joints: a 3R positioning arm (upper segment a2, lower a3)
// followed by a spherical wrist at the end of the lower segment.
KinematicChain make_limb_chain(double a2, double a3, const Eigen::Matrix4d& base = Eigen::Matrix4d::Identity());

Eigen::Matrix4d dh_transform(const DhRow& row, double q);
// 0T6 in base coordinates (base_frame not applied).
Eigen::Matrix4d forward_kinematics(const KinematicChain& chain, const JointAngles& q);
// 0Tk for k = 0..6.
std::array<Eigen::Matrix4d, 7> chain_frames(const KinematicChain& chain, const JointAngles& q);

// q1..q3 placing the wrist centre at `target` (base frame). When x = y = 0,
// q1 takes `q1_fallback`.
ChainSolution ik_position(const Eigen::Vector3d& target, double a2, double a3, int shoulder_branch = 1,
                          int elbow_branch = 1, double q1_fallback = 0.0);
// All four position branches, in order (+,+), (+,-), (-,+), (-,-).
std::vector<ChainSolution> ik_position_all(const Eigen::Vector3d& target, double a2, double a3,
                                           double q1_fallback = 0.0);

// q4..q6 from the wrist rotation 3R6 = (0R3)^T 0R6. Throws
// DegenerateOrientationError at the wrist singularity.
std::array<double, 3> ik_orientation(const Eigen::Matrix3d& R06, double q1, double q2, double q3,
                                     const KinematicChain& chain);

// Full IK for a 0T6 target: every position branch that admits an
// orientation solution.
std::vector<ChainSolution> inverse_kinematics(const KinematicChain& chain, const Eigen::Matrix4d& T06,
                                              double q1_fallback = 0.0);

struct LimbLengths {
    double arm_upper = 0.0;
    double arm_lower = 0.0;
    double leg_upper = 0.0;
    double leg_lower = 0.0;
};

// 90th percentile of shoulder-wrist and hip-ankle distances over the given
// reduced poses (joints with has_z == false ignored), split upper/lower by
// `upper_ratio`.
LimbLengths estimate_limb_lengths(const std::vector<Pose3d>& reduced, double upper_ratio = 0.48,
                                  double percentile = 0.9);

enum class BranchPolicy { anatomical, previous_frame, fixed };

std::string_view to_string(BranchPolicy policy);
BranchPolicy branch_policy_from_string(std::string_view text);

struct CompletionOptions {
    BranchPolicy policy = BranchPolicy::anatomical;
    // previous_frame: the last completed full14 pose.
    std::optional<Pose3d> previous;
    // fixed: elbow branch per limb, order r_arm, l_arm, r_leg, l_leg.
    std::array<int, 4> fixed_branches{1, 1, 1, 1};
};

struct CompletionResult {
    Pose3d pose;                       // full14
    std::array<int, 4> branches{};     // chosen elbow branch per limb
    std::vector<std::string> warnings;
};

// Anchors one chain per limb at the shoulder / hip with a base frame whose z
// axis runs along the torso (neck to mid-hip) and whose x axis points from
// the right to the left side, solves IK for the wrist / ankle and reads the
// elbow / knee off the chain's third frame. Units are whatever the input
// uses; limb lengths must be in the same units.
CompletionResult complete_skeleton(const Pose3d& reduced, const LimbLengths& lengths,
                                   const CompletionOptions& options = {});

// Median of valid depth in a (2 window + 1)^2 neighbourhood per joint.
Pose3d lift_to_3d(const Pose& pose, const DepthImage& depth, int window = 2);

}  // namespace dpm4d
