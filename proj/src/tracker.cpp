#include "dpm4d/tracker.hpp"

#include <cmath>
#include <string>

namespace dpm4d {

namespace {

void check_joint_count(int n) {
    if (n < 1)
        throw ArgumentError("joint count must be >= 1, got " + std::to_string(n));
}

}  // namespace

Eigen::MatrixXd build_measurement_matrix(int n) {
    check_joint_count(n);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(6 * n, 6 * n);
    for (int j = 0; j < n; ++j) {
        H(6 * j, 6 * j) = 1.0;
        H(6 * j + 1, 6 * j + 1) = 1.0;
    }
    return H;
}

Eigen::MatrixXd build_transition_matrix(int n, const Pairing& pairing, double coupling) {
    check_joint_count(n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6 * n, 6 * n);
    for (int j = 0; j < n; ++j) {
        auto b = A.block<6, 6>(6 * j, 6 * j);
        b.setIdentity();
        for (int k = 0; k < 4; ++k)
            b(k, k + 2) = 1.0;
    }
    for (auto [i, j] : pairing) {
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw ArgumentError("pairing (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
        if (i == j)
            throw ArgumentError("joint " + std::to_string(i) + " paired with itself");
        auto b = A.block<6, 6>(6 * i, 6 * j);
        for (int k = 0; k < 4; ++k)
            b(k, k + 2) += coupling;
    }
    return A;
}

Pairing reference_pairing8() { return {{0, 1}, {1, 5}, {2, 6}, {3, 2}, {4, 5}, {7, 6}}; }

Pairing default_pairing(const SkeletonDef& skeleton) {
    Pairing out;
    const std::pair<const char*, const char*> links[] = {
        {"r_wrist", "r_shoulder"}, {"l_wrist", "l_shoulder"}, {"r_ankle", "r_hip"}, {"l_ankle", "l_hip"}};
    for (auto [a, b] : links) {
        auto i = skeleton.find(a);
        auto j = skeleton.find(b);
        if (i && j)
            out.emplace_back(*i, *j);
    }
    return out;
}

void TrackerParams::validate() const {
    if (!(q_scale >= 0.0) || !(r_scale >= 0.0) || !(initial_variance > 0.0))
        throw ConfigError("tracker noise scales must be non-negative and the prior variance positive");
    if (!std::isfinite(coupling))
        throw ConfigError("tracker coupling must be finite");
}

TrackState make_track_state(const Eigen::VectorXd& positions, const Pairing& pairing, const TrackerParams& params) {
    params.validate();
    if (positions.size() % 2 != 0 || positions.size() == 0)
        throw ArgumentError("expected 2n positions");
    const int n = static_cast<int>(positions.size() / 2);
    TrackState s;
    s.x = Eigen::VectorXd::Zero(6 * n);
    for (int j = 0; j < n; ++j) {
        s.x(6 * j) = std::isfinite(positions(2 * j)) ? positions(2 * j) : 0.0;
        s.x(6 * j + 1) = std::isfinite(positions(2 * j + 1)) ? positions(2 * j + 1) : 0.0;
    }
    s.P = params.initial_variance * Eigen::MatrixXd::Identity(6 * n, 6 * n);
    s.A = build_transition_matrix(n, pairing, params.coupling);
    s.H = build_measurement_matrix(n);
    s.Q = params.q_scale * Eigen::MatrixXd::Identity(6 * n, 6 * n);
    s.R = Eigen::MatrixXd::Zero(6 * n, 6 * n);
    for (int j = 0; j < n; ++j) {
        s.R(6 * j, 6 * j) = params.r_scale;
        s.R(6 * j + 1, 6 * j + 1) = params.r_scale;
    }
    s.pairing = pairing;
    return s;
}

TrackState kf_predict(const TrackState& state) {
    TrackState s = state;
    s.x = state.A * state.x;
    s.P = state.A * state.P * state.A.transpose() + state.Q;
    s.P = 0.5 * (s.P + s.P.transpose());
    return s;
}

TrackState kf_update(const TrackState& state, const Eigen::VectorXd& z) {
    const Eigen::Index dim = state.x.size();
    if (z.size() != dim)
        throw ArgumentError("measurement has " + std::to_string(z.size()) + " entries, expected " +
                            std::to_string(dim));
    // Observed rows: position rows of joints with a finite measurement.
    std::vector<Eigen::Index> obs;
    for (Eigen::Index j = 0; j < dim / 6; ++j) {
        if (!std::isfinite(z(6 * j)) || !std::isfinite(z(6 * j + 1)))
            continue;
        for (Eigen::Index r = 6 * j; r < 6 * j + 6; ++r)
            if (state.H.row(r).squaredNorm() > 0.0)
                obs.push_back(r);
    }
    TrackState s = state;
    if (obs.empty())
        return s;
    const auto m = static_cast<Eigen::Index>(obs.size());
    Eigen::MatrixXd Ho(m, dim);
    Eigen::MatrixXd Ro(m, m);
    Eigen::VectorXd zo(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        Ho.row(a) = state.H.row(obs[a]);
        zo(a) = z(obs[a]);
        for (Eigen::Index b = 0; b < m; ++b)
            Ro(a, b) = state.R(obs[a], obs[b]);
    }
    const Eigen::MatrixXd PHt = state.P * Ho.transpose();
    const Eigen::MatrixXd S = Ho * PHt + Ro;
    const Eigen::MatrixXd K = PHt * S.completeOrthogonalDecomposition().pseudoInverse();
    s.x = state.x + K * (zo - Ho * state.x);
    // Joseph form: same value as (I - K H) P for this gain, but stays PSD.
    const Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(dim, dim) - K * Ho;
    s.P = IKH * state.P * IKH.transpose() + K * Ro * K.transpose();
    s.P = 0.5 * (s.P + s.P.transpose());
    return s;
}

Eigen::VectorXd measurement_projection(const TrackState& state) { return state.H * state.x; }

Eigen::VectorXd positions_of(const Eigen::VectorXd& stacked6) {
    const Eigen::Index n = stacked6.size() / 6;
    Eigen::VectorXd out(2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out(2 * j) = stacked6(6 * j);
        out(2 * j + 1) = stacked6(6 * j + 1);
    }
    return out;
}

Eigen::VectorXd stack_positions(const Eigen::VectorXd& positions2) {
    const Eigen::Index n = positions2.size() / 2;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(6 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out(6 * j) = positions2(2 * j);
        out(6 * j + 1) = positions2(2 * j + 1);
    }
    return out;
}

Eigen::VectorXd select_solution(const Eigen::VectorXd& detection, const Eigen::VectorXd& estimate,
                                const Eigen::VectorXd& previous) {
    if (detection.size() != estimate.size() || detection.size() != previous.size())
        throw ArgumentError("select_solution needs vectors of equal length");
    const double e1 = (detection - estimate).norm();
    const double e2 = (detection - previous).norm();
    return e1 <= e2 ? estimate : previous;
}

JointTracker::JointTracker(int joints, Pairing pairing, TrackerParams params)
    : joints_(joints), pairing_(std::move(pairing)), params_(params) {
    check_joint_count(joints);
    params_.validate();
    build_transition_matrix(joints, pairing_, params_.coupling);  // validates the pairing
}

TrackStep JointTracker::step(const Eigen::VectorXd& detection) {
    if (detection.size() != 2 * joints_)
        throw ArgumentError("detection must hold " + std::to_string(2 * joints_) + " coordinates");
    TrackStep out;
    if (!started_) {
        state_ = make_track_state(detection, pairing_, params_);
        started_ = true;
        out.estimate = positions_of(measurement_projection(state_));
        out.output = detection;
        // Missing joints fall back to the filter's (zero) read-out.
        for (Eigen::Index k = 0; k < out.output.size(); ++k)
            if (!std::isfinite(out.output(k)))
                out.output(k) = out.estimate(k);
        previous_ = out.output;
        return out;
    }
    state_ = kf_predict(state_);
    const Eigen::VectorXd z = stack_positions(detection);
    Eigen::VectorXd innovation = positions_of(z - measurement_projection(state_));
    for (Eigen::Index k = 0; k < innovation.size(); ++k)
        if (!std::isfinite(innovation(k)))
            innovation(k) = 0.0;
    out.innovation_norm = innovation.norm();
    state_ = kf_update(state_, z);
    out.estimate = positions_of(measurement_projection(state_));

    // Missing detections compare against the estimate on those joints.
    Eigen::VectorXd b = detection;
    for (Eigen::Index k = 0; k < b.size(); ++k)
        if (!std::isfinite(b(k)))
            b(k) = out.estimate(k);
    out.eps_filter = (b - out.estimate).norm();
    out.eps_previous = (b - previous_).norm();
    out.output = select_solution(b, out.estimate, previous_);
    out.used_filter = out.eps_filter <= out.eps_previous;
    previous_ = out.output;
    return out;
}

}  // namespace dpm4d
