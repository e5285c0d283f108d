#include "csd/lingam.hpp"

#include "csd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace csd {

namespace {

Eigen::VectorXd standardized(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
    if (!(sd > 0.0) || !std::isfinite(sd)) throw DegenerateDataError("mi_estimate: constant input");
    return ((v.array() - mean) / sd).matrix();
}

// Correlation of two already-centered-ish transforms; plain product-moment
// form so that swapping arguments is bit-exact.
double contrast_corr(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    const double n = static_cast<double>(p.size());
    const double mp = p.sum() / n;
    const double mq = q.sum() / n;
    double spq = 0.0, spp = 0.0, sqq = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double dp = p(i) - mp;
        const double dq = q(i) - mq;
        spq += dp * dq;
        spp += dp * dp;
        sqq += dq * dq;
    }
    const double denom = std::sqrt(spp * sqq);
    if (!(denom > 0.0)) return 0.0;
    return spq / denom;
}

Eigen::VectorXd log_cosh(const Eigen::VectorXd& v) {
    // log(cosh(x)) = |x| + log1p(exp(-2|x|)) - log 2, stable for large |x|
    return (v.array().abs() + (-2.0 * v.array().abs()).exp().log1p() - std::log(2.0)).matrix();
}

Eigen::VectorXd gauss_moment(const Eigen::VectorXd& v) {
    return (v.array() * (-0.5 * v.array().square()).exp()).matrix();
}

} // namespace

Eigen::VectorXd residual(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
    if (xi.size() != xj.size()) throw ShapeError("residual: length mismatch");
    if (xi.size() < 3) throw ShapeError("residual: need at least 3 observations");
    const double n = static_cast<double>(xi.size());
    const double mi = xi.sum() / n;
    const double mj = xj.sum() / n;
    double sij = 0.0, sjj = 0.0;
    for (Eigen::Index r = 0; r < xi.size(); ++r) {
        const double di = xi(r) - mi;
        const double dj = xj(r) - mj;
        sij += di * dj;
        sjj += dj * dj;
    }
    if (!(sjj > 0.0)) throw DegenerateDataError("residual: regressor has zero variance");
    const double coef = sij / sjj;
    return xi - coef * xj;
}

double mi_estimate(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw ShapeError("mi_estimate: length mismatch");
    if (u.size() < 3) throw ShapeError("mi_estimate: need at least 3 observations");
    const Eigen::VectorXd us = standardized(u);
    const Eigen::VectorXd vs = standardized(v);

    double rho = 0.0;
    for (Eigen::Index i = 0; i < us.size(); ++i) rho += us(i) * vs(i);
    rho /= static_cast<double>(us.size());
    const double rho2 = std::min(rho * rho, 1.0 - 1e-12);
    const double gaussian_part = -0.5 * std::log(1.0 - rho2);

    const Eigen::VectorXd gu1 = log_cosh(us);
    const Eigen::VectorXd gu2 = gauss_moment(us);
    const Eigen::VectorXd gv1 = log_cosh(vs);
    const Eigen::VectorXd gv2 = gauss_moment(vs);

    const double c11 = contrast_corr(gu1, gv1);
    const double c22 = contrast_corr(gu2, gv2);
    const double c12 = contrast_corr(gu1, gv2);
    const double c21 = contrast_corr(gu2, gv1);
    // grouped so the value is bit-identical under argument swap
    return gaussian_part + c11 * c11 + c22 * c22 + (c12 * c12 + c21 * c21);
}

Eigen::Index select_exogenous(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& active) {
    if (active.size() < 2) throw ShapeError("select_exogenous: need at least 2 active variables");
    Eigen::Index best = -1;
    double best_total = std::numeric_limits<double>::infinity();
    for (const Eigen::Index j : active) {
        double total = 0.0;
        for (const Eigen::Index i : active) {
            if (i == j) continue;
            total += mi_estimate(residual(x.col(i), x.col(j)), x.col(j));
        }
        if (total < best_total) {
            best_total = total;
            best = j;
        }
    }
    return best;
}

CausalOrder causal_order(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.cols();
    if (n < 2) throw ShapeError("causal_order: need at least 2 variables");
    if (x.rows() <= n) throw ShapeError("causal_order: need more samples than variables");

    Eigen::MatrixXd work = x;
    std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
    std::iota(active.begin(), active.end(), Eigen::Index{0});

    CausalOrder result;
    result.order.reserve(static_cast<std::size_t>(n));
    while (active.size() > 1) {
        const Eigen::Index chosen = select_exogenous(work, active);
        result.order.push_back(chosen);
        for (const Eigen::Index i : active) {
            if (i != chosen) work.col(i) = residual(work.col(i), work.col(chosen));
        }
        active.erase(std::remove(active.begin(), active.end(), chosen), active.end());
    }
    result.order.push_back(active.front());
    return result;
}

LingamResult estimate_adjacency(const Eigen::MatrixXd& x, const CausalOrder& order,
                                double prune_threshold) {
    const Eigen::Index n = x.cols();
    if (static_cast<Eigen::Index>(order.order.size()) != n) {
        throw ShapeError("estimate_adjacency: order does not cover all variables");
    }
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const Eigen::Index v : order.order) {
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) {
            throw ValidationError("estimate_adjacency: order is not a permutation");
        }
        seen[static_cast<std::size_t>(v)] = true;
    }

    LingamResult result;
    result.order = order;
    result.adjacency = Eigen::MatrixXd::Zero(n, n);

    for (std::size_t pos = 1; pos < order.order.size(); ++pos) {
        const Eigen::Index target = order.order[pos];
        const Eigen::Index p = static_cast<Eigen::Index>(pos);
        Eigen::MatrixXd design(x.rows(), p + 1);
        design.col(0).setOnes();
        for (Eigen::Index k = 0; k < p; ++k) {
            design.col(k + 1) = x.col(order.order[static_cast<std::size_t>(k)]);
        }

        Eigen::VectorXd beta;
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < design.cols()) {
            const Eigen::MatrixXd gram =
                design.transpose() * design +
                1e-8 * Eigen::MatrixXd::Identity(design.cols(), design.cols());
            beta = gram.ldlt().solve(design.transpose() * x.col(target));
            result.ridge_fallback = true;
        } else {
            beta = qr.solve(x.col(target));
        }

        for (Eigen::Index k = 0; k < p; ++k) {
            const double b = beta(k + 1);
            if (std::abs(b) >= prune_threshold) {
                result.adjacency(order.order[static_cast<std::size_t>(k)], target) = b;
            }
        }
    }
    return result;
}

} // namespace csd
