#include "csd/notears.hpp"

#include "csd/errors.hpp"
#include "csd/expm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csd {

namespace {

void zero_masked_row(MlpParams& model, Eigen::Index j) {
    model.layers.front().weights.row(j).setZero();
}

void zero_masked_row(MlpGradients& grads, Eigen::Index j) {
    grads.weights.front().row(j).setZero();
}

} // namespace

RegressorBank make_regressor_bank(Eigen::Index n_vars, int hidden_width, Rng& rng) {
    if (n_vars < 2) throw ShapeError("make_regressor_bank: need at least 2 variables");
    if (hidden_width < 1) throw ShapeError("make_regressor_bank: hidden width must be positive");
    RegressorBank bank;
    bank.models.reserve(static_cast<std::size_t>(n_vars));
    for (Eigen::Index j = 0; j < n_vars; ++j) {
        MlpParams model = make_mlp({n_vars, hidden_width, 1},
                                   {Activation::Sigmoid, Activation::Linear}, rng);
        zero_masked_row(model, j);
        bank.models.push_back(std::move(model));
    }
    return bank;
}

Eigen::MatrixXd aggregate_adjacency(const RegressorBank& bank) {
    const Eigen::Index n = bank.n_vars();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::MatrixXd& first = bank.models[static_cast<std::size_t>(j)].layers.front().weights;
        for (Eigen::Index k = 0; k < n; ++k) {
            w(k, j) = first.row(k).norm();
        }
    }
    return w;
}

double acyclicity(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw ShapeError("acyclicity: matrix must be square");
    const Eigen::MatrixXd e = matrix_exponential(w.cwiseProduct(w));
    return e.trace() - static_cast<double>(w.rows());
}

Eigen::MatrixXd acyclicity_gradient(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw ShapeError("acyclicity_gradient: matrix must be square");
    const Eigen::MatrixXd e = matrix_exponential(w.cwiseProduct(w));
    return e.transpose().cwiseProduct(2.0 * w);
}

double dag_penalty(const Eigen::MatrixXd& w, double alpha, double rho) {
    const double h = acyclicity(w);
    return alpha * h + 0.5 * rho * h * h;
}

double total_loss(const RegressorBank& bank, const Eigen::MatrixXd& x, double alpha, double rho,
                  double lambda1) {
    const Eigen::Index n = bank.n_vars();
    if (x.cols() != n) throw ShapeError("total_loss: data width does not match bank");
    double recon = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::VectorXd pred = mlp_forward_vector(bank.models[static_cast<std::size_t>(j)], x);
        recon += (x.col(j) - pred).squaredNorm();
    }
    recon /= static_cast<double>(n);

    double l1 = 0.0;
    for (const auto& model : bank.models) {
        l1 += model.layers.front().weights.cwiseAbs().sum();
    }
    return recon + lambda1 * l1 + dag_penalty(aggregate_adjacency(bank), alpha, rho);
}

double total_loss_with_gradients(const RegressorBank& bank, const Eigen::MatrixXd& x, double alpha,
                                 double rho, double lambda1, std::vector<MlpGradients>& grads) {
    const Eigen::Index n = bank.n_vars();
    if (x.cols() != n) throw ShapeError("total_loss_with_gradients: data width does not match bank");
    grads.resize(static_cast<std::size_t>(n));

    double recon = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& model = bank.models[static_cast<std::size_t>(j)];
        MlpForwardCache cache;
        const Eigen::VectorXd pred = mlp_forward_cached(model, x, cache).col(0);
        const Eigen::VectorXd residual = pred - x.col(j);
        recon += residual.squaredNorm();

        grads[static_cast<std::size_t>(j)].init_zero(model);
        Eigen::MatrixXd out_grad(x.rows(), 1);
        out_grad.col(0) = (2.0 / static_cast<double>(n)) * residual;
        mlp_backward(model, x, cache, out_grad, grads[static_cast<std::size_t>(j)]);
    }
    recon /= static_cast<double>(n);

    double l1 = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::MatrixXd& first = bank.models[static_cast<std::size_t>(j)].layers.front().weights;
        l1 += first.cwiseAbs().sum();
        grads[static_cast<std::size_t>(j)].weights.front() +=
            lambda1 * first.array().sign().matrix();
    }

    const Eigen::MatrixXd w = aggregate_adjacency(bank);
    const Eigen::MatrixXd e_t = matrix_exponential(w.cwiseProduct(w)).transpose();
    const double h = e_t.trace() - static_cast<double>(n);
    const double pull = alpha + rho * h;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::MatrixXd& first = bank.models[static_cast<std::size_t>(j)].layers.front().weights;
        auto& g_first = grads[static_cast<std::size_t>(j)].weights.front();
        // d h / d theta1_j[k,d] = 2 * exp(W∘W)^T[k,j] * theta1_j[k,d]
        for (Eigen::Index k = 0; k < n; ++k) {
            g_first.row(k) += pull * 2.0 * e_t(k, j) * first.row(k);
        }
        zero_masked_row(grads[static_cast<std::size_t>(j)], j);
    }

    return recon + lambda1 * l1 + alpha * h + 0.5 * rho * h * h;
}

bool support_is_acyclic(const Eigen::MatrixXd& w, double omega) {
    const Eigen::Index n = w.rows();
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (k != j && w(k, j) > 0.0 && w(k, j) >= omega) ++indegree[static_cast<std::size_t>(j)];
        }
    }
    std::vector<Eigen::Index> queue;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (indegree[static_cast<std::size_t>(j)] == 0) queue.push_back(j);
    }
    Eigen::Index removed = 0;
    while (!queue.empty()) {
        const Eigen::Index k = queue.back();
        queue.pop_back();
        ++removed;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (k != j && w(k, j) > 0.0 && w(k, j) >= omega) {
                if (--indegree[static_cast<std::size_t>(j)] == 0) queue.push_back(j);
            }
        }
    }
    return removed == n;
}

namespace {

// Objective used by the inner solver: the spec loss with |w| smoothed to
// sqrt(w^2 + eps^2) so the line search sees a C1 function, plus a small ridge
// on non-first-layer weights. Without the ridge the optimizer defeats the
// first-layer L1 by rescaling theta1 down and the hidden layer up.
double inner_objective_with_gradients(const RegressorBank& bank, const Eigen::MatrixXd& x,
                                      double alpha, double rho, const NotearsConfig& cfg,
                                      std::vector<MlpGradients>& grads) {
    constexpr double kEps2 = 1e-16;
    const Eigen::Index n = bank.n_vars();
    grads.resize(static_cast<std::size_t>(n));

    double recon = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& model = bank.models[static_cast<std::size_t>(j)];
        MlpForwardCache cache;
        const Eigen::VectorXd pred = mlp_forward_cached(model, x, cache).col(0);
        const Eigen::VectorXd residual = pred - x.col(j);
        recon += residual.squaredNorm();

        grads[static_cast<std::size_t>(j)].init_zero(model);
        Eigen::MatrixXd out_grad(x.rows(), 1);
        out_grad.col(0) = (2.0 / static_cast<double>(n)) * residual;
        mlp_backward(model, x, cache, out_grad, grads[static_cast<std::size_t>(j)]);
    }
    recon /= static_cast<double>(n);

    double l1 = 0.0;
    double ridge = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& model = bank.models[static_cast<std::size_t>(j)];
        auto& g = grads[static_cast<std::size_t>(j)];
        const Eigen::ArrayXXd first = model.layers.front().weights.array();
        const Eigen::ArrayXXd smooth = (first.square() + kEps2).sqrt();
        l1 += smooth.sum();
        g.weights.front().array() += cfg.lambda1 * first / smooth;
        for (std::size_t l = 1; l < model.layers.size(); ++l) {
            ridge += model.layers[l].weights.squaredNorm();
            g.weights[l] += cfg.weight_decay * model.layers[l].weights;
        }
    }

    const Eigen::MatrixXd w = aggregate_adjacency(bank);
    const Eigen::MatrixXd e_t = matrix_exponential(w.cwiseProduct(w)).transpose();
    const double h = e_t.trace() - static_cast<double>(n);
    const double pull = alpha + rho * h;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::MatrixXd& first = bank.models[static_cast<std::size_t>(j)].layers.front().weights;
        auto& g_first = grads[static_cast<std::size_t>(j)].weights.front();
        for (Eigen::Index k = 0; k < n; ++k) {
            g_first.row(k) += pull * 2.0 * e_t(k, j) * first.row(k);
        }
        zero_masked_row(grads[static_cast<std::size_t>(j)], j);
    }

    return recon + cfg.lambda1 * l1 + 0.5 * cfg.weight_decay * ridge + alpha * h +
           0.5 * rho * h * h;
}

double inner_objective(const RegressorBank& bank, const Eigen::MatrixXd& x, double alpha,
                       double rho, const NotearsConfig& cfg) {
    constexpr double kEps2 = 1e-16;
    const Eigen::Index n = bank.n_vars();
    double recon = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::VectorXd pred = mlp_forward_vector(bank.models[static_cast<std::size_t>(j)], x);
        recon += (x.col(j) - pred).squaredNorm();
    }
    recon /= static_cast<double>(n);
    double l1 = 0.0;
    double ridge = 0.0;
    for (const auto& model : bank.models) {
        l1 += (model.layers.front().weights.array().square() + kEps2).sqrt().sum();
        for (std::size_t l = 1; l < model.layers.size(); ++l) {
            ridge += model.layers[l].weights.squaredNorm();
        }
    }
    const double h = acyclicity(aggregate_adjacency(bank));
    return recon + cfg.lambda1 * l1 + 0.5 * cfg.weight_decay * ridge + alpha * h +
           0.5 * rho * h * h;
}

Eigen::Index bank_param_count(const RegressorBank& bank) {
    Eigen::Index total = 0;
    for (const auto& model : bank.models) {
        for (const auto& layer : model.layers) {
            total += layer.weights.size() + layer.bias.size();
        }
    }
    return total;
}

Eigen::VectorXd flatten_bank(const RegressorBank& bank) {
    Eigen::VectorXd out(bank_param_count(bank));
    Eigen::Index at = 0;
    for (const auto& model : bank.models) {
        for (const auto& layer : model.layers) {
            out.segment(at, layer.weights.size()) =
                Eigen::Map<const Eigen::VectorXd>(layer.weights.data(), layer.weights.size());
            at += layer.weights.size();
            out.segment(at, layer.bias.size()) = layer.bias;
            at += layer.bias.size();
        }
    }
    return out;
}

void unflatten_bank(const Eigen::VectorXd& flat, RegressorBank& bank) {
    Eigen::Index at = 0;
    for (auto& model : bank.models) {
        for (auto& layer : model.layers) {
            Eigen::Map<Eigen::VectorXd>(layer.weights.data(), layer.weights.size()) =
                flat.segment(at, layer.weights.size());
            at += layer.weights.size();
            layer.bias = flat.segment(at, layer.bias.size());
            at += layer.bias.size();
        }
    }
}

Eigen::VectorXd flatten_gradients(const RegressorBank& bank, const std::vector<MlpGradients>& grads) {
    Eigen::VectorXd out(bank_param_count(bank));
    Eigen::Index at = 0;
    for (std::size_t m = 0; m < grads.size(); ++m) {
        for (std::size_t l = 0; l < grads[m].weights.size(); ++l) {
            out.segment(at, grads[m].weights[l].size()) = Eigen::Map<const Eigen::VectorXd>(
                grads[m].weights[l].data(), grads[m].weights[l].size());
            at += grads[m].weights[l].size();
            out.segment(at, grads[m].bias[l].size()) = grads[m].bias[l];
            at += grads[m].bias[l].size();
        }
    }
    return out;
}

} // namespace

std::vector<double> minimize_at_fixed_penalty(RegressorBank& bank, const Eigen::MatrixXd& x,
                                              double alpha, double rho, const NotearsConfig& cfg) {
    // L-BFGS (memory 10) with Armijo backtracking. Every accepted step passes
    // a sufficient-decrease test, so the accepted-loss sequence decreases.
    constexpr int kMemory = 10;
    constexpr double kArmijo = 1e-4;

    Eigen::VectorXd point = flatten_bank(bank);
    std::vector<MlpGradients> raw_grads;
    const auto evaluate = [&](const Eigen::VectorXd& at, Eigen::VectorXd* grad_out) {
        unflatten_bank(at, bank);
        if (grad_out == nullptr) return inner_objective(bank, x, alpha, rho, cfg);
        const double f = inner_objective_with_gradients(bank, x, alpha, rho, cfg, raw_grads);
        *grad_out = flatten_gradients(bank, raw_grads);
        return f;
    };

    Eigen::VectorXd grad;
    double f = evaluate(point, &grad);
    std::vector<double> accepted;
    accepted.push_back(f);

    std::vector<Eigen::VectorXd> s_hist, y_hist;
    std::vector<double> rho_hist;

    for (int it = 0; it < cfg.inner_iterations; ++it) {
        if (grad.lpNorm<Eigen::Infinity>() < 1e-10 * (1.0 + std::abs(f))) break;

        // two-loop recursion
        Eigen::VectorXd direction = -grad;
        std::vector<double> a(s_hist.size());
        for (std::size_t k = s_hist.size(); k-- > 0;) {
            a[k] = rho_hist[k] * s_hist[k].dot(direction);
            direction -= a[k] * y_hist[k];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            direction *= gamma;
        }
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double b = rho_hist[k] * y_hist[k].dot(direction);
            direction += (a[k] - b) * s_hist[k];
        }

        double slope = grad.dot(direction);
        if (slope >= 0.0) { // fall back to steepest descent
            direction = -grad;
            slope = -grad.squaredNorm();
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        double step = s_hist.empty() ? std::min(1.0, 1.0 / grad.lpNorm<Eigen::Infinity>()) : 1.0;
        bool moved = false;
        Eigen::VectorXd candidate;
        double f_new = f;
        for (int bt = 0; bt < 50; ++bt) {
            candidate = point + step * direction;
            f_new = evaluate(candidate, nullptr);
            if (std::isfinite(f_new) && f_new <= f + kArmijo * step * slope) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;

        Eigen::VectorXd grad_new;
        f_new = evaluate(candidate, &grad_new);
        const Eigen::VectorXd s = candidate - point;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > kMemory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
        point = candidate;
        f = f_new;
        grad = grad_new;
        accepted.push_back(f);
    }

    unflatten_bank(point, bank);
    for (Eigen::Index j = 0; j < bank.n_vars(); ++j) {
        zero_masked_row(bank.models[static_cast<std::size_t>(j)], j);
    }
    return accepted;
}

WeightedDigraph fit_notears_mlp(const Eigen::MatrixXd& x, const std::vector<std::string>& names,
                                const NotearsConfig& cfg, std::uint64_t seed) {
    const Eigen::Index n = x.cols();
    if (static_cast<Eigen::Index>(names.size()) != n) {
        throw ShapeError("fit_notears_mlp: name count does not match data width");
    }
    if (x.rows() <= n) throw ShapeError("fit_notears_mlp: need more samples than variables");

    Rng rng = Rng(seed).derive("notears-bank");
    RegressorBank bank = make_regressor_bank(n, cfg.hidden_width, rng);

    double alpha = cfg.alpha0;
    double rho = cfg.rho0;
    double h = std::numeric_limits<double>::infinity();

    for (int dual = 0; dual < cfg.max_dual_steps; ++dual) {
        // Raise rho until the subproblem delivers the progress target, then
        // take one multiplier step.
        double h_new = h;
        while (rho <= cfg.rho_max) {
            RegressorBank attempt = bank;
            minimize_at_fixed_penalty(attempt, x, alpha, rho, cfg);
            h_new = acyclicity(aggregate_adjacency(attempt));
            if (h_new > cfg.progress_factor * h) {
                rho *= cfg.rho_growth;
            } else {
                bank = std::move(attempt);
                break;
            }
        }
        h = h_new;
        if (h <= cfg.h_tol || rho > cfg.rho_max) break;
        alpha += rho * h;
    }

    if (h > cfg.h_tol) {
        throw ConvergenceError("fit_notears_mlp: acyclicity residual " + std::to_string(h) +
                                   " above tolerance with rho exhausted",
                               h);
    }

    WeightedDigraph graph;
    graph.weights = aggregate_adjacency(bank);
    graph.names = names;
    graph.omega = cfg.omega;
    while (!support_is_acyclic(graph.weights, graph.omega)) graph.omega += 0.01;
    return graph;
}

} // namespace csd
