#include "csd/mlmodels.hpp"

#include "csd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace csd {

namespace {

constexpr double kMinGain = 1e-12;

double clamp_prior(double p) { return std::clamp(p, 1e-6, 1.0 - 1e-6); }

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double leaf_objective(double g, double h, double l2) { return -0.5 * g * g / (h + l2); }

// Greedy exact split search over the samples in `rows`.
SplitChoice best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& grad,
                       const Eigen::VectorXd& hess, const std::vector<Eigen::Index>& rows,
                       const GbtConfig& cfg) {
    SplitChoice choice;
    double g_total = 0.0, h_total = 0.0;
    for (const Eigen::Index r : rows) {
        g_total += grad(r);
        h_total += hess(r);
    }
    const double parent_obj = leaf_objective(g_total, h_total, cfg.leaf_l2);

    std::vector<Eigen::Index> sorted = rows;
    for (int f = 0; f < x.cols(); ++f) {
        std::sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
            const double va = x(a, f), vb = x(b, f);
            if (va != vb) return va < vb;
            return a < b;
        });
        double g_left = 0.0, h_left = 0.0;
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            g_left += grad(sorted[k]);
            h_left += hess(sorted[k]);
            const double v = x(sorted[k], f);
            const double v_next = x(sorted[k + 1], f);
            if (v == v_next) continue;
            const std::size_t n_left = k + 1;
            const std::size_t n_right = sorted.size() - n_left;
            if (n_left < static_cast<std::size_t>(cfg.min_samples_leaf) ||
                n_right < static_cast<std::size_t>(cfg.min_samples_leaf)) {
                continue;
            }
            const double gain = leaf_objective(g_left, h_left, cfg.leaf_l2) +
                                leaf_objective(g_total - g_left, h_total - h_left, cfg.leaf_l2) -
                                parent_obj;
            // reduction in loss; larger is better
            if (-gain > choice.gain + kMinGain || !choice.found) {
                if (-gain > kMinGain) {
                    choice.found = true;
                    choice.feature = f;
                    choice.threshold = 0.5 * (v + v_next);
                    choice.gain = -gain;
                }
            }
        }
    }
    return choice;
}

int build_node(GbtTree& tree, const Eigen::MatrixXd& x, const Eigen::VectorXd& grad,
               const Eigen::VectorXd& hess, std::vector<Eigen::Index>& rows, int depth,
               const GbtConfig& cfg) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    double g = 0.0, h = 0.0;
    for (const Eigen::Index r : rows) {
        g += grad(r);
        h += hess(r);
    }

    SplitChoice choice;
    if (depth < cfg.max_depth && rows.size() >= 2 * static_cast<std::size_t>(cfg.min_samples_leaf)) {
        choice = best_split(x, grad, hess, rows, cfg);
    }
    if (!choice.found) {
        tree.nodes[id].value = -g / (h + cfg.leaf_l2);
        return id;
    }

    std::vector<Eigen::Index> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (const Eigen::Index r : rows) {
        (x(r, choice.feature) < choice.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[id].feature = choice.feature;
    tree.nodes[id].threshold = choice.threshold;
    tree.nodes[id].gain = choice.gain;
    const int left = build_node(tree, x, grad, hess, left_rows, depth + 1, cfg);
    const int right = build_node(tree, x, grad, hess, right_rows, depth + 1, cfg);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
}

double tree_value(const GbtTree& tree, const Eigen::MatrixXd& x, Eigen::Index row) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
        node = x(row, nd.feature) < nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].value;
}

} // namespace

GbtModel fit_gbt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& cfg) {
    if (x.rows() != y.size()) throw ShapeError("fit_gbt: row/label count mismatch");
    if (x.rows() == 0) throw ShapeError("fit_gbt: empty data");

    GbtModel model;
    model.learning_rate = cfg.learning_rate;
    model.n_features = x.cols();
    const double prior = clamp_prior(y.mean());
    model.base_score = std::log(prior / (1.0 - prior));

    Eigen::VectorXd logits = Eigen::VectorXd::Constant(x.rows(), model.base_score);
    Eigen::VectorXd grad(x.rows()), hess(x.rows());
    for (int round = 0; round < cfg.n_trees; ++round) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const double p = 1.0 / (1.0 + std::exp(-logits(r)));
            grad(r) = p - y(r);
            hess(r) = std::max(p * (1.0 - p), 1e-12);
        }
        GbtTree tree;
        std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
        std::iota(rows.begin(), rows.end(), Eigen::Index{0});
        build_node(tree, x, grad, hess, rows, 0, cfg);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            logits(r) += cfg.learning_rate * tree_value(tree, x, r);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

Eigen::VectorXd gbt_predict_logit(const GbtModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.n_features) throw ShapeError("gbt_predict: feature count mismatch");
    Eigen::VectorXd logits = Eigen::VectorXd::Constant(x.rows(), model.base_score);
    for (const auto& tree : model.trees) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            logits(r) += model.learning_rate * tree_value(tree, x, r);
        }
    }
    return logits;
}

Eigen::VectorXd gbt_predict_proba(const GbtModel& model, const Eigen::MatrixXd& x) {
    return (1.0 / (1.0 + (-gbt_predict_logit(model, x).array()).exp())).matrix();
}

Eigen::VectorXd gbt_importance(const GbtModel& model) {
    Eigen::VectorXd gain = Eigen::VectorXd::Zero(model.n_features);
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.feature >= 0) gain(node.feature) += node.gain;
        }
    }
    const double total = gain.sum();
    if (total > 0.0) gain /= total;
    return gain;
}

} // namespace csd
