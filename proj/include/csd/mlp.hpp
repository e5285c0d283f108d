#pragma once

#include "csd/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace csd {

enum class Activation { Linear, ReLU, Sigmoid, Tanh };

struct MlpLayer {
    Eigen::MatrixXd weights; // d_in x d_out
    Eigen::VectorXd bias;    // d_out
    Activation activation = Activation::Linear;
};

// Plain dense feed-forward parameters. Consecutive layer dimensions must
// chain; validate() checks that.
struct MlpParams {
    std::vector<MlpLayer> layers;

    Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().weights.rows(); }
    Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().weights.cols(); }
    void validate() const;
};

/// Glorot-uniform initialized network; dims = {d_in, d_h1, ..., d_out},
/// activations one per layer.
MlpParams make_mlp(const std::vector<Eigen::Index>& dims,
                   const std::vector<Activation>& activations, Rng& rng);

/// Forward pass for a batch (rows = samples). Returns B x d_out.
Eigen::MatrixXd mlp_forward(const MlpParams& mlp, const Eigen::MatrixXd& X);

/// Forward for single-output networks, returned as a column vector.
Eigen::VectorXd mlp_forward_vector(const MlpParams& mlp, const Eigen::MatrixXd& X);

struct MlpForwardCache {
    std::vector<Eigen::MatrixXd> pre;  // pre-activation per layer
    std::vector<Eigen::MatrixXd> post; // activation per layer
};

Eigen::MatrixXd mlp_forward_cached(const MlpParams& mlp, const Eigen::MatrixXd& X,
                                   MlpForwardCache& cache);

struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights; // same shapes as the layers
    std::vector<Eigen::VectorXd> bias;

    void init_zero(const MlpParams& mlp);
    void scale(double s);
};

/// Backpropagate dL/d(output) through the cached forward pass, accumulating
/// parameter gradients into `grads` (which must be shaped; see init_zero).
/// Returns dL/dX when `input_grad` is non-null.
void mlp_backward(const MlpParams& mlp, const Eigen::MatrixXd& X, const MlpForwardCache& cache,
                  const Eigen::MatrixXd& output_grad, MlpGradients& grads,
                  Eigen::MatrixXd* input_grad = nullptr);

// Adam with bias correction; one state per network.
struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void init(const MlpParams& mlp);
    void step(MlpParams& mlp, const MlpGradients& grads, double learning_rate);
};

} // namespace csd
