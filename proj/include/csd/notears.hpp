#pragma once

#include "csd/mlp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace csd {

// One single-output regressor per variable; model j predicts column j from all
// columns, with the j-th row of its first-layer weights pinned to zero so a
// variable cannot explain itself.
struct RegressorBank {
    std::vector<MlpParams> models;

    Eigen::Index n_vars() const { return static_cast<Eigen::Index>(models.size()); }
    Eigen::Index hidden_width() const {
        return models.empty() ? 0 : models.front().layers.front().weights.cols();
    }
};

struct NotearsConfig {
    int hidden_width = 10;    // D
    double lambda1 = 2.0;     // L1 strength on first-layer weights
    double weight_decay = 2.0; // L2 on non-first-layer weights inside the fit;
                               // keeps layer rescaling from defeating the L1
    double omega = 0.45;      // edge threshold on the aggregated adjacency
    double alpha0 = 0.0;
    double rho0 = 1.0;
    double rho_growth = 10.0;
    double progress_factor = 0.25;
    double h_tol = 1e-8;
    double rho_max = 1e16;
    int max_dual_steps = 100;
    int inner_iterations = 200; // quasi-Newton steps per dual iteration
};

// N x N nonnegative causal-strength matrix ([k][j] = strength of k -> j);
// the support thresholded at omega is acyclic.
struct WeightedDigraph {
    Eigen::MatrixXd weights;
    std::vector<std::string> names;
    double omega = 0.0;
};

/// Fresh bank of N regressors (one hidden layer of width D, sigmoid hidden
/// activation, linear output) with masked diagonal rows.
RegressorBank make_regressor_bank(Eigen::Index n_vars, int hidden_width, Rng& rng);

/// W[k][j] = L2 norm of row k of model j's first-layer weights.
Eigen::MatrixXd aggregate_adjacency(const RegressorBank& bank);

/// h(W) = tr(exp(W∘W)) - N; zero exactly when the support of W is acyclic.
double acyclicity(const Eigen::MatrixXd& w);

/// dh/dW = exp(W∘W)^T ∘ 2W.
Eigen::MatrixXd acyclicity_gradient(const Eigen::MatrixXd& w);

/// alpha*h(W) + (rho/2)*h(W)^2.
double dag_penalty(const Eigen::MatrixXd& w, double alpha, double rho);

/// (1/N) * sum_j ||X_j - Xhat_j||^2 + lambda1*||theta1||_1 + dag_penalty.
double total_loss(const RegressorBank& bank, const Eigen::MatrixXd& x, double alpha, double rho,
                  double lambda1);

/// total_loss and its gradient with respect to every bank parameter; gradients
/// for masked first-layer rows are zeroed. Exposed for tests and used by the
/// inner optimizer.
double total_loss_with_gradients(const RegressorBank& bank, const Eigen::MatrixXd& x, double alpha,
                                 double rho, double lambda1, std::vector<MlpGradients>& grads);

/// Kahn check on the omega-thresholded support.
bool support_is_acyclic(const Eigen::MatrixXd& w, double omega);

/// One inner minimization phase at fixed multipliers. Adam proposes steps and
/// the best loss seen is the accepted iterate, so the returned accepted-loss
/// sequence is non-increasing; the bank is left at the accepted optimum.
std::vector<double> minimize_at_fixed_penalty(RegressorBank& bank, const Eigen::MatrixXd& x,
                                              double alpha, double rho, const NotearsConfig& cfg);

/// Augmented-Lagrangian fit of the full bank; thresholds the final adjacency
/// at cfg.omega, raising it in 0.01 steps until the support is acyclic.
WeightedDigraph fit_notears_mlp(const Eigen::MatrixXd& x, const std::vector<std::string>& names,
                                const NotearsConfig& cfg, std::uint64_t seed);

} // namespace csd
