#pragma once

#include <Eigen/Dense>

#include <vector>

namespace csd {

struct CausalOrder {
    std::vector<Eigen::Index> order; // permutation, most exogenous first
};

struct LingamResult {
    CausalOrder order;
    Eigen::MatrixXd adjacency; // [i][j] = strength of i -> j, pruned below tau
    bool ridge_fallback = false;
};

/// OLS residual of xi on xj: xi - (cov(xi,xj)/var(xj)) * xj.
Eigen::VectorXd residual(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj);

/// Pairwise dependence measure: Gaussian mutual information of the correlation
/// plus squared correlations of log-cosh and Gaussian-moment contrasts of the
/// standardized inputs. Near zero for independent samples, symmetric, and
/// sensitive to the higher-order dependence left in uncorrelated pairs.
double mi_estimate(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// argmin over j in active of sum_{i != j} mi_estimate(residual(X_i, X_j), X_j);
/// ties broken toward the lowest index.
Eigen::Index select_exogenous(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& active);

/// Iterated exogenous selection with residual replacement.
CausalOrder causal_order(const Eigen::MatrixXd& x);

/// OLS of each variable on its predecessors in the order; coefficients with
/// |b| < prune_threshold are zeroed. Rank-deficient blocks fall back to a
/// small ridge and set ridge_fallback.
LingamResult estimate_adjacency(const Eigen::MatrixXd& x, const CausalOrder& order,
                                double prune_threshold = 0.05);

} // namespace csd
