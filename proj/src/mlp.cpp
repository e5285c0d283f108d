#include "csd/mlp.hpp"

#include "csd/errors.hpp"

#include <cmath>

namespace csd {

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
    switch (a) {
        case Activation::Linear: return z;
        case Activation::ReLU: return z.cwiseMax(0.0);
        case Activation::Sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
        case Activation::Tanh: return z.array().tanh().matrix();
    }
    return z;
}

// Derivative expressed through pre-activation z and activation value s.
Eigen::MatrixXd activate_grad(Activation a, const Eigen::MatrixXd& z, const Eigen::MatrixXd& s) {
    switch (a) {
        case Activation::Linear: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
        case Activation::ReLU: return (z.array() > 0.0).cast<double>().matrix();
        case Activation::Sigmoid: return (s.array() * (1.0 - s.array())).matrix();
        case Activation::Tanh: return (1.0 - s.array().square()).matrix();
    }
    return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

} // namespace

void MlpParams::validate() const {
    if (layers.empty()) throw ShapeError("mlp: no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].bias.size() != layers[l].weights.cols()) {
            throw ShapeError("mlp: bias/weight mismatch at layer " + std::to_string(l));
        }
        if (l > 0 && layers[l].weights.rows() != layers[l - 1].weights.cols()) {
            throw ShapeError("mlp: dimension break between layers " + std::to_string(l - 1) +
                             " and " + std::to_string(l));
        }
    }
}

MlpParams make_mlp(const std::vector<Eigen::Index>& dims,
                   const std::vector<Activation>& activations, Rng& rng) {
    if (dims.size() < 2 || activations.size() != dims.size() - 1) {
        throw ShapeError("make_mlp: need dims.size()-1 activations");
    }
    MlpParams mlp;
    mlp.layers.resize(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const Eigen::Index d_in = dims[l];
        const Eigen::Index d_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
        MlpLayer& layer = mlp.layers[l];
        layer.weights.resize(d_in, d_out);
        for (Eigen::Index i = 0; i < d_in; ++i) {
            for (Eigen::Index j = 0; j < d_out; ++j) {
                layer.weights(i, j) = rng.uniform(-limit, limit);
            }
        }
        layer.bias = Eigen::VectorXd::Zero(d_out);
        layer.activation = activations[l];
    }
    return mlp;
}

Eigen::MatrixXd mlp_forward(const MlpParams& mlp, const Eigen::MatrixXd& X) {
    if (X.cols() != mlp.input_dim()) {
        throw ShapeError("mlp_forward: input has " + std::to_string(X.cols()) +
                         " columns, network expects " + std::to_string(mlp.input_dim()));
    }
    Eigen::MatrixXd h = X;
    for (const auto& layer : mlp.layers) {
        h = activate(layer.activation,
                     ((h * layer.weights).rowwise() + layer.bias.transpose()).eval());
    }
    return h;
}

Eigen::VectorXd mlp_forward_vector(const MlpParams& mlp, const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd out = mlp_forward(mlp, X);
    if (out.cols() != 1) throw ShapeError("mlp_forward_vector: network output is not scalar");
    return out.col(0);
}

Eigen::MatrixXd mlp_forward_cached(const MlpParams& mlp, const Eigen::MatrixXd& X,
                                   MlpForwardCache& cache) {
    if (X.cols() != mlp.input_dim()) throw ShapeError("mlp_forward_cached: input width mismatch");
    const std::size_t L = mlp.layers.size();
    cache.pre.resize(L);
    cache.post.resize(L);
    const Eigen::MatrixXd* h = &X;
    for (std::size_t l = 0; l < L; ++l) {
        const auto& layer = mlp.layers[l];
        cache.pre[l] = ((*h) * layer.weights).rowwise() + layer.bias.transpose();
        cache.post[l] = activate(layer.activation, cache.pre[l]);
        h = &cache.post[l];
    }
    return cache.post.back();
}

void MlpGradients::init_zero(const MlpParams& mlp) {
    weights.resize(mlp.layers.size());
    bias.resize(mlp.layers.size());
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        weights[l] = Eigen::MatrixXd::Zero(mlp.layers[l].weights.rows(), mlp.layers[l].weights.cols());
        bias[l] = Eigen::VectorXd::Zero(mlp.layers[l].bias.size());
    }
}

void MlpGradients::scale(double s) {
    for (auto& w : weights) w *= s;
    for (auto& b : bias) b *= s;
}

void mlp_backward(const MlpParams& mlp, const Eigen::MatrixXd& X, const MlpForwardCache& cache,
                  const Eigen::MatrixXd& output_grad, MlpGradients& grads,
                  Eigen::MatrixXd* input_grad) {
    const std::size_t L = mlp.layers.size();
    if (grads.weights.size() != L) throw ShapeError("mlp_backward: gradients not initialized");
    Eigen::MatrixXd delta = output_grad; // dL/d(post activation of layer l)
    for (std::size_t li = L; li-- > 0;) {
        const auto& layer = mlp.layers[li];
        delta = delta.cwiseProduct(activate_grad(layer.activation, cache.pre[li], cache.post[li]));
        const Eigen::MatrixXd& input = (li == 0) ? X : cache.post[li - 1];
        grads.weights[li] += input.transpose() * delta;
        grads.bias[li] += delta.colwise().sum().transpose();
        if (li > 0 || input_grad != nullptr) {
            delta = (delta * layer.weights.transpose()).eval();
        }
    }
    if (input_grad != nullptr) *input_grad = delta;
}

void AdamState::init(const MlpParams& mlp) {
    m_w.resize(mlp.layers.size());
    v_w.resize(mlp.layers.size());
    m_b.resize(mlp.layers.size());
    v_b.resize(mlp.layers.size());
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        m_w[l] = Eigen::MatrixXd::Zero(mlp.layers[l].weights.rows(), mlp.layers[l].weights.cols());
        v_w[l] = m_w[l];
        m_b[l] = Eigen::VectorXd::Zero(mlp.layers[l].bias.size());
        v_b[l] = m_b[l];
    }
    t = 0;
}

void AdamState::step(MlpParams& mlp, const MlpGradients& grads, double learning_rate) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * grads.weights[l];
        v_w[l] = (beta2 * v_w[l].array() + (1.0 - beta2) * grads.weights[l].array().square()).matrix();
        mlp.layers[l].weights.array() -=
            learning_rate * (m_w[l].array() / bc1) / ((v_w[l].array() / bc2).sqrt() + epsilon);

        m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * grads.bias[l];
        v_b[l] = (beta2 * v_b[l].array() + (1.0 - beta2) * grads.bias[l].array().square()).matrix();
        mlp.layers[l].bias.array() -=
            learning_rate * (m_b[l].array() / bc1) / ((v_b[l].array() / bc2).sqrt() + epsilon);
    }
}

} // namespace csd
