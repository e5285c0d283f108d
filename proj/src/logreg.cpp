#include "csd/mlmodels.hpp"

#include "csd/errors.hpp"

#include <cmath>
#include <limits>

namespace csd {

namespace {

Eigen::VectorXd probabilities(const Eigen::MatrixXd& x, const Eigen::VectorXd& coef,
                              double intercept) {
    const Eigen::VectorXd z = (x * coef).array() + intercept;
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

double penalized_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& coef, double intercept, double l2) {
    const Eigen::ArrayXd p = probabilities(x, coef, intercept).array().max(1e-12).min(1.0 - 1e-12);
    const double ll = (y.array() * p.log() + (1.0 - y.array()) * (1.0 - p).log()).sum();
    return -ll + 0.5 * l2 * coef.squaredNorm();
}

} // namespace

LogRegModel fit_logreg(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const LogRegConfig& cfg) {
    if (x.rows() != y.size()) throw ShapeError("fit_logreg: row/label count mismatch");
    const double b1 = y.sum();
    if (b1 == 0.0 || b1 == static_cast<double>(y.size())) {
        throw DegenerateDataError("fit_logreg: labels contain a single class");
    }

    const Eigen::Index n = x.cols();
    LogRegModel model;
    model.coefficients = Eigen::VectorXd::Zero(n);
    model.intercept = 0.0;

    double loss = penalized_loss(x, y, model.coefficients, model.intercept, cfg.l2_penalty);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const Eigen::VectorXd p = probabilities(x, model.coefficients, model.intercept);
        Eigen::VectorXd grad(n + 1);
        grad.head(n) = x.transpose() * (p - y) + cfg.l2_penalty * model.coefficients;
        grad(n) = (p - y).sum();
        model.iterations = it;
        if (grad.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance) break;

        const Eigen::ArrayXd s = (p.array() * (1.0 - p.array())).max(1e-12);
        Eigen::MatrixXd hessian(n + 1, n + 1);
        hessian.topLeftCorner(n, n) =
            x.transpose() * s.matrix().asDiagonal() * x +
            cfg.l2_penalty * Eigen::MatrixXd::Identity(n, n);
        hessian.block(0, n, n, 1) = x.transpose() * s.matrix();
        hessian.block(n, 0, 1, n) = hessian.block(0, n, n, 1).transpose();
        hessian(n, n) = s.sum();

        const Eigen::VectorXd step = hessian.ldlt().solve(grad);

        // Halve the Newton step until the penalized loss improves.
        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            const Eigen::VectorXd cand_coef = model.coefficients - scale * step.head(n);
            const double cand_intercept = model.intercept - scale * step(n);
            const double cand_loss = penalized_loss(x, y, cand_coef, cand_intercept, cfg.l2_penalty);
            if (cand_loss <= loss) {
                model.coefficients = cand_coef;
                model.intercept = cand_intercept;
                loss = cand_loss;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }

    // Separation flag: a perceptron warm-started at the fitted direction
    // converges exactly when the classes are linearly separable; the update
    // cap bounds the cost on non-separable data.
    {
        Eigen::VectorXd w = model.coefficients;
        double b0 = model.intercept;
        long updates = 0;
        const long cap = 50000;
        bool clean = false;
        while (updates < cap) {
            clean = true;
            for (Eigen::Index r = 0; r < y.size() && updates < cap; ++r) {
                const double sign = y(r) == 1.0 ? 1.0 : -1.0;
                if (sign * (x.row(r).dot(w) + b0) <= 0.0) {
                    w += sign * x.row(r).transpose();
                    b0 += sign;
                    ++updates;
                    clean = false;
                }
            }
            if (clean) break;
        }
        model.separation_flagged = clean;
    }
    return model;
}

Eigen::VectorXd logreg_predict_proba(const LogRegModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.coefficients.size()) throw ShapeError("logreg_predict: feature mismatch");
    return probabilities(x, model.coefficients, model.intercept);
}

} // namespace csd
