#include "csd/errors.hpp"
#include "csd/likelihood.hpp"
#include "csd/mlp.hpp"
#include "csd/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace csd;

namespace {

// Central finite differences over every parameter; returns the worst
// normwise-relative deviation from the analytic gradient.
double gradient_check(MlpParams& mlp, const Eigen::MatrixXd& x,
                      const std::function<double()>& loss_fn,
                      const std::function<MlpGradients()>& grad_fn, double step = 1e-5) {
    const MlpGradients analytic = grad_fn();
    double num2 = 0.0, den2 = 0.0;
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        for (Eigen::Index i = 0; i < mlp.layers[l].weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < mlp.layers[l].weights.cols(); ++j) {
                double& w = mlp.layers[l].weights(i, j);
                const double saved = w;
                w = saved + step;
                const double up = loss_fn();
                w = saved - step;
                const double down = loss_fn();
                w = saved;
                const double fd = (up - down) / (2.0 * step);
                const double diff = fd - analytic.weights[l](i, j);
                num2 += diff * diff;
                den2 += fd * fd;
            }
        }
        for (Eigen::Index j = 0; j < mlp.layers[l].bias.size(); ++j) {
            double& b = mlp.layers[l].bias(j);
            const double saved = b;
            b = saved + step;
            const double up = loss_fn();
            b = saved - step;
            const double down = loss_fn();
            b = saved;
            const double fd = (up - down) / (2.0 * step);
            const double diff = fd - analytic.bias[l](j);
            num2 += diff * diff;
            den2 += fd * fd;
        }
    }
    (void)x;
    return std::sqrt(num2) / std::max(std::sqrt(den2), 1e-12);
}

} // namespace

TEST_CASE("forward of an all-zero network returns the output bias") {
    Rng rng(1);
    MlpParams mlp = make_mlp({3, 4, 1}, {Activation::Sigmoid, Activation::Linear}, rng);
    for (auto& layer : mlp.layers) layer.weights.setZero();
    mlp.layers.back().bias(0) = 2.5;
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 3);
    const Eigen::VectorXd out = mlp_forward_vector(mlp, x);
    // sigmoid(0) = 0.5 feeds the linear layer with zero weights
    for (Eigen::Index r = 0; r < 6; ++r) CHECK(out(r) == 2.5);
}

TEST_CASE("a single linear layer is a dot product") {
    MlpParams mlp;
    mlp.layers.resize(1);
    mlp.layers[0].weights = Eigen::MatrixXd::Ones(2, 1);
    mlp.layers[0].bias = Eigen::VectorXd::Zero(1);
    mlp.layers[0].activation = Activation::Linear;
    Eigen::MatrixXd x(1, 2);
    x << 2.0, 3.0;
    CHECK(mlp_forward_vector(mlp, x)(0) == 5.0);
}

TEST_CASE("forward rejects mismatched input width") {
    Rng rng(2);
    MlpParams mlp = make_mlp({3, 2, 1}, {Activation::Tanh, Activation::Linear}, rng);
    CHECK_THROWS_AS(mlp_forward(mlp, Eigen::MatrixXd::Zero(4, 5)), ShapeError);
}

TEST_CASE("squared-error backprop matches finite differences on smooth nets") {
    Rng rng(42);
    for (int trial = 0; trial < 6; ++trial) {
        const Activation hidden = trial % 2 ? Activation::Sigmoid : Activation::Tanh;
        MlpParams mlp = make_mlp({4, 5, 3, 1}, {hidden, hidden, Activation::Linear}, rng);
        Eigen::MatrixXd x(7, 4);
        Eigen::VectorXd y(7);
        for (Eigen::Index r = 0; r < 7; ++r) {
            for (Eigen::Index c = 0; c < 4; ++c) x(r, c) = rng.normal();
            y(r) = rng.normal();
        }

        const auto loss_fn = [&]() {
            return (mlp_forward_vector(mlp, x) - y).squaredNorm();
        };
        const auto grad_fn = [&]() {
            MlpForwardCache cache;
            const Eigen::VectorXd pred = mlp_forward_cached(mlp, x, cache).col(0);
            MlpGradients grads;
            grads.init_zero(mlp);
            Eigen::MatrixXd og(7, 1);
            og.col(0) = 2.0 * (pred - y);
            mlp_backward(mlp, x, cache, og, grads);
            return grads;
        };
        CHECK(gradient_check(mlp, x, loss_fn, grad_fn) < 1e-4);
    }
}

TEST_CASE("weighted BCE through the classifier head matches finite differences") {
    Rng rng(77);
    for (int trial = 0; trial < 6; ++trial) {
        MlpParams mlp = make_mlp({3, 6, 4, 1},
                                 {Activation::Tanh, Activation::Sigmoid, Activation::Linear}, rng);
        Eigen::MatrixXd x(9, 3);
        Eigen::VectorXd y(9);
        for (Eigen::Index r = 0; r < 9; ++r) {
            for (Eigen::Index c = 0; c < 3; ++c) x(r, c) = rng.normal();
            y(r) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        }
        const double w0 = 0.7, w1 = 1.6;

        const auto loss_fn = [&]() {
            const Eigen::VectorXd logits = mlp_forward_vector(mlp, x);
            const Eigen::VectorXd p = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
            return weighted_bce(y, p, w0, w1);
        };
        const auto grad_fn = [&]() {
            MlpForwardCache cache;
            const Eigen::VectorXd logits = mlp_forward_cached(mlp, x, cache).col(0);
            const Eigen::ArrayXd p = 1.0 / (1.0 + (-logits.array()).exp());
            MlpGradients grads;
            grads.init_zero(mlp);
            Eigen::MatrixXd og(9, 1);
            og.col(0) = ((w1 * y.array() * (p - 1.0) + w0 * (1.0 - y.array()) * p) /
                         static_cast<double>(y.size()))
                            .matrix();
            mlp_backward(mlp, x, cache, og, grads);
            return grads;
        };
        CHECK(gradient_check(mlp, x, loss_fn, grad_fn) < 1e-4);
    }
}

TEST_CASE("relu backprop matches finite differences away from kinks") {
    Rng rng(123);
    MlpParams mlp = make_mlp({3, 8, 1}, {Activation::ReLU, Activation::Linear}, rng);
    // keep pre-activations clear of zero so the central difference is clean
    Eigen::MatrixXd x(5, 3);
    Eigen::VectorXd y(5);
    int attempts = 0;
    for (;;) {
        for (Eigen::Index r = 0; r < 5; ++r) {
            for (Eigen::Index c = 0; c < 3; ++c) x(r, c) = rng.normal();
            y(r) = rng.normal();
        }
        MlpForwardCache cache;
        mlp_forward_cached(mlp, x, cache);
        if (cache.pre[0].cwiseAbs().minCoeff() > 1e-2 || ++attempts > 50) break;
    }

    const auto loss_fn = [&]() { return (mlp_forward_vector(mlp, x) - y).squaredNorm(); };
    const auto grad_fn = [&]() {
        MlpForwardCache cache;
        const Eigen::VectorXd pred = mlp_forward_cached(mlp, x, cache).col(0);
        MlpGradients grads;
        grads.init_zero(mlp);
        Eigen::MatrixXd og(5, 1);
        og.col(0) = 2.0 * (pred - y);
        mlp_backward(mlp, x, cache, og, grads);
        return grads;
    };
    CHECK(gradient_check(mlp, x, loss_fn, grad_fn, 1e-6) < 1e-4);
}

TEST_CASE("make_mlp is deterministic given the generator state") {
    Rng a(5), b(5);
    const MlpParams m1 = make_mlp({4, 3, 1}, {Activation::Tanh, Activation::Linear}, a);
    const MlpParams m2 = make_mlp({4, 3, 1}, {Activation::Tanh, Activation::Linear}, b);
    CHECK(m1.layers[0].weights == m2.layers[0].weights);
    CHECK(m1.layers[1].weights == m2.layers[1].weights);
}
