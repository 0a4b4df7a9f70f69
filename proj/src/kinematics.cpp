#include "dpm4d/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dpm4d {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double reach_tol = 1e-9;
constexpr double singular_tol = 1e-9;

}  // namespace

void KinematicChain::validate() const {
    for (const auto& r : rows)
        if (!std::isfinite(r.theta) || !std::isfinite(r.d) || !std::isfinite(r.alpha) || !std::isfinite(r.a) ||
            r.a < 0.0)
            throw ArgumentError("D-H rows must be finite with a >= 0");
    const Eigen::Matrix3d R = base_frame.topLeftCorner<3, 3>();
    if ((R * R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
        std::abs(R.determinant() - 1.0) > 1e-9)
        throw ArgumentError("base frame is not a rigid transform");
}

KinematicChain make_limb_chain(double a2, double a3, const Eigen::Matrix4d& base) {
    if (!(a2 > 0.0) || !(a3 > 0.0))
        throw ArgumentError("limb segment lengths must be positive");
    KinematicChain c;
    c.rows = {DhRow{0.0, 0.0, pi / 2, 0.0, true},  DhRow{0.0, 0.0, 0.0, a2, true},
              DhRow{pi / 2, 0.0, pi / 2, 0.0, true}, DhRow{0.0, a3, pi / 2, 0.0, true},
              DhRow{0.0, 0.0, pi / 2, 0.0, true},  DhRow{-pi / 2, 0.0, 0.0, 0.0, true}};
    c.base_frame = base;
    c.a2 = a2;
    c.a3 = a3;
    c.validate();
    return c;
}

Eigen::Matrix4d dh_transform(const DhRow& row, double q) {
    const double th = row.variable ? row.theta + q : row.theta;
    const double ct = std::cos(th), st = std::sin(th);
    const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
    Eigen::Matrix4d T;
    T << ct, -st * ca, st * sa, row.a * ct,
         st, ct * ca, -ct * sa, row.a * st,
         0.0, sa, ca, row.d,
         0.0, 0.0, 0.0, 1.0;
    return T;
}

std::array<Eigen::Matrix4d, 7> chain_frames(const KinematicChain& chain, const JointAngles& q) {
    std::array<Eigen::Matrix4d, 7> f;
    f[0] = Eigen::Matrix4d::Identity();
    for (int i = 0; i < 6; ++i)
        f[i + 1] = f[i] * dh_transform(chain.rows[i], q[i]);
    return f;
}

Eigen::Matrix4d forward_kinematics(const KinematicChain& chain, const JointAngles& q) {
    return chain_frames(chain, q)[6];
}

ChainSolution ik_position(const Eigen::Vector3d& target, double a2, double a3, int shoulder_branch,
                          int elbow_branch, double q1_fallback) {
    if (!(a2 > 0.0) || !(a3 > 0.0))
        throw ArgumentError("limb segment lengths must be positive");
    const double dist = target.norm();
    const double lo = std::abs(a2 - a3);
    const double hi = a2 + a3;
    if (!std::isfinite(dist) || dist < lo - reach_tol || dist > hi + reach_tol)
        throw ReachabilityError(dist, lo, hi);
    const double x = target.x(), y = target.y(), z = target.z();
    const double c3 = std::clamp((x * x + y * y + z * z - a2 * a2 - a3 * a3) / (2.0 * a2 * a3), -1.0, 1.0);
    const double s3 = (elbow_branch >= 0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, 1.0 - c3 * c3));
    double r = std::hypot(x, y);
    ChainSolution sol;
    sol.shoulder_branch = shoulder_branch >= 0 ? 1 : -1;
    sol.elbow_branch = elbow_branch >= 0 ? 1 : -1;
    double q1 = r > 0.0 ? std::atan2(y, x) : q1_fallback;
    if (sol.shoulder_branch < 0) {
        q1 += pi;
        r = -r;
    }
    sol.q[0] = q1;
    sol.q[2] = std::atan2(s3, c3);
    sol.q[1] = std::atan2(z, r) - std::atan2(a3 * s3, a2 + a3 * c3);
    return sol;
}

std::vector<ChainSolution> ik_position_all(const Eigen::Vector3d& target, double a2, double a3, double q1_fallback) {
    std::vector<ChainSolution> out;
    for (int sb : {1, -1})
        for (int eb : {1, -1})
            out.push_back(ik_position(target, a2, a3, sb, eb, q1_fallback));
    return out;
}

std::array<double, 3> ik_orientation(const Eigen::Matrix3d& R06, double q1, double q2, double q3,
                                     const KinematicChain& chain) {
    if ((R06 * R06.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw ArgumentError("target rotation is not orthonormal");
    const auto frames = chain_frames(chain, {q1, q2, q3, 0.0, 0.0, 0.0});
    const Eigen::Matrix3d R36 = frames[3].topLeftCorner<3, 3>().transpose() * R06;
    const double r33 = R36(2, 2);
    const double q5 = std::acos(std::clamp(-r33, -1.0, 1.0));
    if (1.0 - std::abs(r33) <= singular_tol)
        throw DegenerateOrientationError(q5);
    const double q4 = std::atan2(R36(1, 2), R36(0, 2));
    const double q6 = pi / 2 - std::atan2(R36(2, 1), R36(2, 0));
    return {q4, q5, q6};
}

std::vector<ChainSolution> inverse_kinematics(const KinematicChain& chain, const Eigen::Matrix4d& T06,
                                              double q1_fallback) {
    const Eigen::Vector3d p = T06.topRightCorner<3, 1>();
    const Eigen::Matrix3d R = T06.topLeftCorner<3, 3>();
    std::vector<ChainSolution> out;
    std::optional<DegenerateOrientationError> degenerate;
    for (auto sol : ik_position_all(p, chain.a2, chain.a3, q1_fallback)) {
        try {
            const auto w = ik_orientation(R, sol.q[0], sol.q[1], sol.q[2], chain);
            sol.q[3] = w[0];
            sol.q[4] = w[1];
            sol.q[5] = w[2];
            out.push_back(sol);
        } catch (const DegenerateOrientationError& e) {
            degenerate = e;
        }
    }
    if (out.empty() && degenerate)
        throw *degenerate;
    return out;
}

namespace {

double percentile_of(std::vector<double> v, double p) {
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

Eigen::Vector3d vec(const Joint3d& j) { return {j.x, j.y, j.z}; }

}  // namespace

LimbLengths estimate_limb_lengths(const std::vector<Pose3d>& reduced, double upper_ratio, double percentile) {
    if (!(upper_ratio > 0.0 && upper_ratio < 1.0))
        throw ArgumentError("upper ratio must lie in (0, 1)");
    const auto& sk = reduced10_skeleton();
    std::vector<double> arms, legs;
    auto add = [&](const Pose3d& p, const char* a, const char* b, std::vector<double>& out) {
        const auto& ja = p.joints.at(sk.index_of(a));
        const auto& jb = p.joints.at(sk.index_of(b));
        if (ja.has_z && jb.has_z)
            out.push_back((vec(ja) - vec(jb)).norm());
    };
    for (const auto& p : reduced) {
        if (p.joints.size() != 10)
            throw SchemaError("limb length estimation needs reduced10 poses");
        add(p, "r_shoulder", "r_wrist", arms);
        add(p, "l_shoulder", "l_wrist", arms);
        add(p, "r_hip", "r_ankle", legs);
        add(p, "l_hip", "l_ankle", legs);
    }
    if (arms.empty() || legs.empty())
        throw ArgumentError("no valid limbs to estimate lengths from");
    const double arm = percentile_of(arms, percentile);
    const double leg = percentile_of(legs, percentile);
    return {arm * upper_ratio, arm * (1.0 - upper_ratio), leg * upper_ratio, leg * (1.0 - upper_ratio)};
}

std::string_view to_string(BranchPolicy policy) {
    switch (policy) {
    case BranchPolicy::anatomical: return "anatomical";
    case BranchPolicy::previous_frame: return "previous_frame";
    case BranchPolicy::fixed: return "fixed";
    }
    return "anatomical";
}

BranchPolicy branch_policy_from_string(std::string_view text) {
    if (text == "anatomical")
        return BranchPolicy::anatomical;
    if (text == "previous_frame")
        return BranchPolicy::previous_frame;
    if (text == "fixed")
        return BranchPolicy::fixed;
    throw ConfigError("unknown branch policy: " + std::string(text));
}

CompletionResult complete_skeleton(const Pose3d& reduced, const LimbLengths& lengths,
                                   const CompletionOptions& options) {
    const auto& rsk = reduced10_skeleton();
    const auto& fsk = full14_skeleton();
    if (reduced.joints.size() != 10)
        throw SchemaError("complete_skeleton needs a reduced10 pose, got " + std::to_string(reduced.joints.size()) +
                          " joints");
    for (int i = 0; i < 10; ++i)
        if (reduced.joints[i].part_id != i)
            throw SchemaError("reduced pose joints must be ordered by part id");

    CompletionResult res;
    res.pose.skeleton_kind = SkeletonKind::full14;
    res.pose.joints.resize(14);
    for (int i = 0; i < 14; ++i)
        res.pose.joints[i].part_id = i;
    for (int i = 0; i < 10; ++i) {
        Joint3d j = reduced.joints[i];
        j.part_id = fsk.index_of(rsk.name(i));
        res.pose.joints[j.part_id] = j;
    }
    auto get = [&](const char* name) { return vec(reduced.joints[rsk.index_of(name)]); };

    const Eigen::Vector3d neck = get("neck");
    const Eigen::Vector3d mid_hip = 0.5 * (get("r_hip") + get("l_hip"));
    Eigen::Vector3d z0 = mid_hip - neck;
    if (z0.norm() == 0.0)
        throw ArgumentError("neck and mid-hip coincide; torso axis undefined");
    z0.normalize();

    struct Limb {
        const char* proximal;
        const char* middle;
        const char* distal;
        const char* right;
        const char* left;
        bool arm;
        double outward;  // -1 right side, +1 left side, along x0
    };
    const Limb limbs[4] = {{"r_shoulder", "r_elbow", "r_wrist", "r_shoulder", "l_shoulder", true, -1.0},
                           {"l_shoulder", "l_elbow", "l_wrist", "r_shoulder", "l_shoulder", true, 1.0},
                           {"r_hip", "r_knee", "r_ankle", "r_hip", "l_hip", false, -1.0},
                           {"l_hip", "l_knee", "l_ankle", "r_hip", "l_hip", false, 1.0}};

    for (int li = 0; li < 4; ++li) {
        const Limb& L = limbs[li];
        Eigen::Vector3d lat = get(L.left) - get(L.right);
        lat -= lat.dot(z0) * z0;
        if (lat.norm() < 1e-12) {
            lat = z0.unitOrthogonal();
        }
        const Eigen::Vector3d x0 = lat.normalized();
        const Eigen::Vector3d y0 = z0.cross(x0);
        Eigen::Matrix3d R;
        R.col(0) = x0;
        R.col(1) = y0;
        R.col(2) = z0;

        const double a2 = L.arm ? lengths.arm_upper : lengths.leg_upper;
        const double a3 = L.arm ? lengths.arm_lower : lengths.leg_lower;
        if (!(a2 > 0.0) || !(a3 > 0.0))
            throw ArgumentError("limb lengths must be positive");
        const Eigen::Vector3d origin = get(L.proximal);
        Eigen::Vector3d target = R.transpose() * (get(L.distal) - origin);
        const double dist = target.norm();
        const double lo = std::abs(a2 - a3);
        const double hi = a2 + a3;
        if (dist > hi) {
            target *= hi / dist;
            res.warnings.push_back(std::string(L.distal) + " out of reach (" + std::to_string(dist) +
                                   " > " + std::to_string(hi) + "); clamped");
        } else if (dist < lo) {
            target = dist > 0.0 ? Eigen::Vector3d(target * (lo / dist)) : Eigen::Vector3d(0.0, 0.0, lo);
            res.warnings.push_back(std::string(L.distal) + " closer than " + std::to_string(lo) + "; clamped");
        }

        const int middle_id = fsk.index_of(L.middle);
        std::optional<Eigen::Vector3d> prev;
        if (options.previous && options.previous->joints.size() == 14 && options.previous->joints[middle_id].has_z)
            prev = vec(options.previous->joints[middle_id]);
        double q1_fallback = 0.0;
        if (prev) {
            const Eigen::Vector3d pl = R.transpose() * (*prev - origin);
            if (std::hypot(pl.x(), pl.y()) > 0.0)
                q1_fallback = std::atan2(pl.y(), pl.x());
        }

        const KinematicChain chain = make_limb_chain(a2, a3);
        Eigen::Vector3d cand[2];
        const int branches[2] = {1, -1};
        for (int b = 0; b < 2; ++b) {
            const auto sol = ik_position(target, a2, a3, 1, branches[b], q1_fallback);
            const auto frames = chain_frames(chain, sol.q);
            cand[b] = origin + R * frames[3].topRightCorner<3, 1>();
        }

        int pick = 0;
        BranchPolicy policy = options.policy;
        if (policy == BranchPolicy::previous_frame && !prev)
            policy = BranchPolicy::anatomical;
        switch (policy) {
        case BranchPolicy::fixed:
            pick = options.fixed_branches[li] >= 0 ? 0 : 1;
            break;
        case BranchPolicy::previous_frame:
            pick = (cand[1] - *prev).norm() < (cand[0] - *prev).norm() ? 1 : 0;
            break;
        case BranchPolicy::anatomical: {
            // Elbows bend back and out, knees forward and out.
            const Eigen::Vector3d hint = (L.arm ? -y0 : y0) + L.outward * x0;
            const Eigen::Vector3d mid = origin + 0.5 * R * target;
            pick = hint.dot(cand[1] - mid) > hint.dot(cand[0] - mid) ? 1 : 0;
            break;
        }
        }
        res.branches[li] = branches[pick];
        Joint3d& j = res.pose.joints[middle_id];
        j.x = cand[pick].x();
        j.y = cand[pick].y();
        j.z = cand[pick].z();
        j.has_z = reduced.joints[rsk.index_of(L.proximal)].has_z && reduced.joints[rsk.index_of(L.distal)].has_z;
    }
    return res;
}

Pose3d lift_to_3d(const Pose& pose, const DepthImage& depth, int window) {
    if (window < 0)
        throw ArgumentError("lift window must be non-negative");
    Pose3d out;
    out.skeleton_kind = pose.skeleton_kind;
    std::vector<std::uint16_t> vals;
    for (const auto& j : pose.joints) {
        Joint3d o{j.part_id, j.x, j.y, 0.0, false};
        const int cx = static_cast<int>(std::lround(j.x));
        const int cy = static_cast<int>(std::lround(j.y));
        vals.clear();
        for (int y = cy - window; y <= cy + window; ++y)
            for (int x = cx - window; x <= cx + window; ++x)
                if (x >= 0 && y >= 0 && x < depth.width() && y < depth.height() && depth.at(x, y) != 0)
                    vals.push_back(depth.at(x, y));
        if (!vals.empty()) {
            std::sort(vals.begin(), vals.end());
            const std::size_t m = vals.size() / 2;
            o.z = vals.size() % 2 ? vals[m] : 0.5 * (static_cast<double>(vals[m - 1]) + vals[m]);
            o.has_z = true;
        }
        out.joints.push_back(o);
    }
    return out;
}

}  // namespace dpm4d
