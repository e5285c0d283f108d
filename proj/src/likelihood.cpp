#include "csd/likelihood.hpp"

#include "csd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace csd {

namespace {

constexpr double kScoreEps = 1e-7;

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

Eigen::VectorXd clamp_scores(const Eigen::VectorXd& s) {
    return s.array().max(kScoreEps).min(1.0 - kScoreEps).matrix();
}

double accuracy_at_half(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        const double pred = scores(i) >= 0.5 ? 1.0 : 0.0;
        if (pred == labels(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

} // namespace

ClassWeights class_weights(const Eigen::VectorXd& labels) {
    const double b = static_cast<double>(labels.size());
    const double b1 = labels.sum();
    const double b0 = b - b1;
    if (b0 == 0.0 || b1 == 0.0) {
        throw DegenerateDataError("class_weights: labels contain a single class");
    }
    return {b / (2.0 * b0), b / (2.0 * b1)};
}

double weighted_bce(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double w0, double w1) {
    if (y.size() != yhat.size()) throw ShapeError("weighted_bce: length mismatch");
    const Eigen::ArrayXd p = clamp_scores(yhat).array();
    const Eigen::ArrayXd ya = y.array();
    const double total = (w1 * ya * p.log() + w0 * (1.0 - ya) * (1.0 - p).log()).sum();
    return -total / static_cast<double>(y.size());
}

std::vector<Eigen::Index> filter_correct(const Eigen::VectorXd& scores,
                                         const Eigen::VectorXd& labels) {
    if (scores.size() != labels.size()) throw ShapeError("filter_correct: length mismatch");
    std::vector<Eigen::Index> kept;
    kept.reserve(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        const bool predicted_one = scores(i) >= 0.5;
        if ((predicted_one && labels(i) == 1.0) || (!predicted_one && labels(i) == 0.0)) {
            kept.push_back(i);
        }
    }
    return kept;
}

std::pair<MlpParams, LikelihoodResult> train_likelihood_mlp(const Dataset& ds,
                                                            const LikelihoodConfig& cfg,
                                                            std::uint64_t seed) {
    const Eigen::Index b = ds.row_count();
    const Eigen::Index n = ds.var_count();
    if (b == 0 || n == 0) throw ShapeError("train_likelihood_mlp: empty dataset");

    const ClassWeights weights = class_weights(ds.target);

    Rng rng = Rng(seed).derive("likelihood-mlp");
    MlpParams mlp = make_mlp({n, 64, 32, 16, 8, 1},
                             {Activation::ReLU, Activation::ReLU, Activation::ReLU,
                              Activation::ReLU, Activation::Linear},
                             rng);
    AdamState adam;
    adam.init(mlp);

    const int batch = std::max(1, std::min<int>(cfg.batch_size, static_cast<int>(b)));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(b));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    double best_accuracy = 0.0;
    LikelihoodResult res;
    res.w0 = weights.w0;
    res.w1 = weights.w1;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch));
            const Eigen::Index m = static_cast<Eigen::Index>(stop - start);
            Eigen::MatrixXd xb(m, n);
            Eigen::VectorXd yb(m);
            for (Eigen::Index r = 0; r < m; ++r) {
                xb.row(r) = ds.values.row(order[start + static_cast<std::size_t>(r)]);
                yb(r) = ds.target(order[start + static_cast<std::size_t>(r)]);
            }

            MlpForwardCache cache;
            const Eigen::VectorXd logits = mlp_forward_cached(mlp, xb, cache).col(0);
            const Eigen::VectorXd p = clamp_scores(sigmoid(logits));

            // dL/dlogit for the class-weighted BCE, averaged over the batch
            Eigen::MatrixXd out_grad(m, 1);
            out_grad.col(0) = ((weights.w1 * yb.array() * (p.array() - 1.0) +
                                weights.w0 * (1.0 - yb.array()) * p.array()) /
                               static_cast<double>(m))
                                  .matrix();

            MlpGradients grads;
            grads.init_zero(mlp);
            mlp_backward(mlp, xb, cache, out_grad, grads);
            adam.step(mlp, grads, cfg.learning_rate);
        }

        const Eigen::VectorXd scores = clamp_scores(sigmoid(mlp_forward_vector(mlp, ds.values)));
        const double acc = accuracy_at_half(scores, ds.target);
        if (acc > best_accuracy) best_accuracy = acc;
        if (acc >= cfg.accuracy_target) {
            res.scores = scores;
            res.train_accuracy = acc;
            res.epochs_run = epoch;
            res.kept_indices = filter_correct(scores, ds.target);
            return {std::move(mlp), std::move(res)};
        }
    }

    throw ConvergenceError("train_likelihood_mlp: accuracy target " +
                               std::to_string(cfg.accuracy_target) + " not reached in " +
                               std::to_string(cfg.max_epochs) + " epochs (best " +
                               std::to_string(best_accuracy) + ")",
                           best_accuracy);
}

Dataset augment_with_likelihood(const Dataset& ds, const LikelihoodResult& res) {
    if (res.kept_indices.empty()) {
        throw DegenerateDataError("augment_with_likelihood: no correctly classified samples");
    }
    if (res.scores.size() != ds.row_count()) {
        throw ShapeError("augment_with_likelihood: score/row count mismatch");
    }
    Dataset out;
    out.target_name = ds.target_name;
    out.schema.reserve(ds.schema.size() + 1);
    for (const auto& col : ds.schema) {
        if (col.kind != ColumnKind::Target) out.schema.push_back(col);
    }
    out.schema.push_back({kLikelihoodColumn, ColumnKind::Continuous});
    out.schema.push_back({ds.target_name, ColumnKind::Target});

    const Eigen::Index kept = static_cast<Eigen::Index>(res.kept_indices.size());
    out.values.resize(kept, ds.var_count() + 1);
    out.target.resize(kept);
    for (Eigen::Index r = 0; r < kept; ++r) {
        const Eigen::Index src = res.kept_indices[static_cast<std::size_t>(r)];
        out.values.row(r).head(ds.var_count()) = ds.values.row(src);
        out.values(r, ds.var_count()) = res.scores(src);
        out.target(r) = ds.target(src);
    }
    return out;
}

} // namespace csd
