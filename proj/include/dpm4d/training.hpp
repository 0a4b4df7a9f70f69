#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpm4d/parts_model.hpp"

namespace dpm4d {

struct TrainConfig {
    double C = 0.5;
    int max_iterations = 200;       // mining rounds
    int solver_passes = 2000;       // dual sweeps over the cache per round, fewer if it settles
    double tolerance = 1e-3;        // stop once fresh mining beats the cache by no more than this
    double quadratic_bound = 1e-3;  // every dx^2, dy^2 weight is kept <= -quadratic_bound
    int negatives_per_image = 2;
    std::uint64_t seed = 7;

    void validate() const;
};

struct LabeledSample {
    FeatureGrid fm;
    FeatureGrid fd;
    Configuration config;
};

struct NegativeSample {
    FeatureGrid fm;
    FeatureGrid fd;
};

struct ObjectiveReport {
    double value = 0.0;
    double regularizer = 0.0;
    double loss = 0.0;  // sum of hinges, before the C factor
    int violations = 0;  // samples with positive hinge
    std::vector<double> positive_slack;
    std::vector<double> negative_slack;
};

// 1/2 |w|^2 + C * sum of hinges. Positives need w . Phi >= 1 at their
// labelled configuration, negatives need their best configuration <= -1.
ObjectiveReport svm_objective(const PartsModel& model, const std::vector<LabeledSample>& positives,
                              const std::vector<NegativeSample>& negatives, double C);

// Mixture types by k-means on parent-relative joint displacements; the
// root clusters on the concatenated displacements of its children.
// Returns [sample][part].
std::vector<std::vector<int>> assign_types(const SkeletonDef& skeleton,
                                           const std::vector<std::vector<Point2d>>& joints, int types,
                                           std::uint64_t seed);

struct TrainResult {
    PartsModel model;
    std::vector<double> objective_log;  // one entry per accepted iterate
    bool converged = false;
    double max_new_violation = 0.0;     // best mined score minus best cached score, worst negative
    std::vector<std::string> warnings;
    ObjectiveReport final_report;
};

// `initial` fixes the skeleton, type counts and filter shapes; its weights
// are the starting point (quadratic weights are pushed onto the bound).
TrainResult train_toy(const TrainConfig& config, PartsModel initial, const std::vector<LabeledSample>& positives,
                      const std::vector<NegativeSample>& negatives);

}  // namespace dpm4d
