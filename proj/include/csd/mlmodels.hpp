#pragma once

#include "csd/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace csd {

struct LogRegConfig {
    double l2_penalty = 1.0; // on coefficients, not the intercept
    int max_iterations = 200;
    double gradient_tolerance = 1e-6;
};

struct LogRegModel {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    bool separation_flagged = false;
    int iterations = 0;
};

/// L2-regularized logistic regression by damped Newton (IRLS) iterations until
/// the gradient norm drops below tolerance. Perfect separation is capped by
/// the penalty and flagged rather than raised.
LogRegModel fit_logreg(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const LogRegConfig& cfg = {});

Eigen::VectorXd logreg_predict_proba(const LogRegModel& model, const Eigen::MatrixXd& x);

struct GbtConfig {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 5;
    double leaf_l2 = 1.0;
};

struct GbtNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf weight
    double gain = 0.0;  // loss reduction of this split
};

struct GbtTree {
    std::vector<GbtNode> nodes; // nodes[0] is the root
};

struct GbtModel {
    std::vector<GbtTree> trees;
    double learning_rate = 0.1;
    double base_score = 0.0; // prior log-odds
    Eigen::Index n_features = 0;
};

/// Boosted regression trees on the logistic-loss gradient (second-order leaf
/// weights, gain-based greedy splits).
GbtModel fit_gbt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& cfg = {});

Eigen::VectorXd gbt_predict_logit(const GbtModel& model, const Eigen::MatrixXd& x);
Eigen::VectorXd gbt_predict_proba(const GbtModel& model, const Eigen::MatrixXd& x);

/// Total split gain per feature, normalized to sum to 1 when any split exists.
Eigen::VectorXd gbt_importance(const GbtModel& model);

enum class ImportanceModel { Gbt, LogReg };
std::string to_string(ImportanceModel m);

struct ImportanceResult {
    Eigen::VectorXd scores; // per predictor, excluding the likelihood column
    std::vector<std::string> variables;
    ImportanceModel model = ImportanceModel::Gbt;
    int folds = 0; // outer repetitions
};

/// 10 repetitions of stratified 2-fold splitting; importances from all 20
/// fits are averaged. The likelihood column, when present, is excluded from
/// the predictors.
ImportanceResult cross_validated_importance(const Dataset& ds, ImportanceModel kind,
                                            std::uint64_t seed, const GbtConfig& gbt_cfg = {},
                                            const LogRegConfig& logreg_cfg = {},
                                            int repetitions = 10);

} // namespace csd
