#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpm4d/types.hpp"

namespace dpm4d {

using Pairing = std::vector<std::pair<int, int>>;

// Per-joint state is [x y vx vy ax ay]; joints are stacked in order.
Eigen::MatrixXd build_measurement_matrix(int n);
// Diagonal blocks A1 (constant acceleration), block (i, j) = A2 for every
// pair: joint i's position row takes `coupling` times j's velocity and its
// velocity row `coupling` times j's acceleration.
Eigen::MatrixXd build_transition_matrix(int n, const Pairing& pairing, double coupling = -1.0);

// The eight-joint coupling pattern of the reference transition matrix.
Pairing reference_pairing8();
// Wrists to shoulders and ankles to hips on the given skeleton.
Pairing default_pairing(const SkeletonDef& skeleton);

struct TrackerParams {
    double q_scale = 1.0;
    double r_scale = 4.0;           // position measurement variance, px^2
    double coupling = -1.0;
    double initial_variance = 100.0;  // prior variance of every state component

    void validate() const;
};

struct TrackState {
    Eigen::VectorXd x;
    Eigen::MatrixXd P;
    Eigen::MatrixXd A;
    Eigen::MatrixXd H;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
    Pairing pairing;

    int joints() const { return static_cast<int>(x.size() / 6); }
};

// Positions from `positions` (2n: x0 y0 x1 y1 ...), zero velocity/acceleration.
TrackState make_track_state(const Eigen::VectorXd& positions, const Pairing& pairing,
                            const TrackerParams& params = {});

TrackState kf_predict(const TrackState& state);
// z is 6n with positions filled in; joints whose x or y is not finite are
// treated as missing (their gain columns are zero).
TrackState kf_update(const TrackState& state, const Eigen::VectorXd& z);

// H x: the per-joint position read-out (6n, zeros off the position rows).
Eigen::VectorXd measurement_projection(const TrackState& state);
// Positions only, 2n.
Eigen::VectorXd positions_of(const Eigen::VectorXd& stacked6);
Eigen::VectorXd stack_positions(const Eigen::VectorXd& positions2);

// x_hat when |B - x_hat| <= |B - S_prev|, otherwise S_prev.
Eigen::VectorXd select_solution(const Eigen::VectorXd& detection, const Eigen::VectorXd& estimate,
                                const Eigen::VectorXd& previous);

struct TrackStep {
    Eigen::VectorXd output;      // 2n chosen positions
    Eigen::VectorXd estimate;    // 2n filter read-out
    bool used_filter = true;
    double innovation_norm = 0.0;
    double eps_filter = 0.0;
    double eps_previous = 0.0;
};

// Sequential tracker for one person: predict, update, arbitrate.
class JointTracker {
public:
    JointTracker(int joints, Pairing pairing, TrackerParams params = {});

    // `detection` holds 2n positions, NaN for a missing joint. The first
    // call initialises the filter and returns the detection.
    TrackStep step(const Eigen::VectorXd& detection);
    const TrackState& state() const { return state_; }
    bool started() const { return started_; }

private:
    int joints_;
    Pairing pairing_;
    TrackerParams params_;
    TrackState state_;
    Eigen::VectorXd previous_;
    bool started_ = false;
};

}  // namespace dpm4d
