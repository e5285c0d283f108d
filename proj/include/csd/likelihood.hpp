#pragma once

#include "csd/dataset.hpp"
#include "csd/mlp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace csd {

/// Name of the appended score column in the CSD view.
inline constexpr const char* kLikelihoodColumn = "OUTCOME_LIKELIHOOD";

struct LikelihoodConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 500;
    double accuracy_target = 0.90;
};

struct ClassWeights {
    double w0 = 1.0;
    double w1 = 1.0;
};

/// Balanced weights w_c = B / (2 * B_c); both classes must be present.
ClassWeights class_weights(const Eigen::VectorXd& labels);

/// -mean[w1*y*log(yhat) + w0*(1-y)*log(1-yhat)], with yhat clamped to
/// [eps, 1-eps], eps = 1e-7.
double weighted_bce(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double w0, double w1);

struct LikelihoodResult {
    Eigen::VectorXd scores; // sigmoid outputs in (0,1), all B samples
    std::vector<Eigen::Index> kept_indices;
    double w0 = 1.0;
    double w1 = 1.0;
    double train_accuracy = 0.0;
    int epochs_run = 0;
};

/// Indices where the 0.5-threshold prediction agrees with the label
/// (score >= 0.5 predicts 1).
std::vector<Eigen::Index> filter_correct(const Eigen::VectorXd& scores,
                                         const Eigen::VectorXd& labels);

/// Train the 4-hidden-layer classifier (64/32/16/8, rectifier hidden, sigmoid
/// output) with class-weighted BCE until full-train accuracy reaches the
/// target; returns scores for all rows and the correctly-classified index set.
/// Throws ConvergenceError (carrying the best accuracy) if the cap is hit.
std::pair<MlpParams, LikelihoodResult> train_likelihood_mlp(const Dataset& ds,
                                                            const LikelihoodConfig& cfg,
                                                            std::uint64_t seed);

/// Restrict to kept rows and append the score column for downstream CSD; the
/// binary target stays available on the returned Dataset for the importance
/// models but is not part of the predictor matrix.
Dataset augment_with_likelihood(const Dataset& ds, const LikelihoodResult& res);

} // namespace csd
