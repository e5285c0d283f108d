#include "csd/errors.hpp"
#include "csd/rng.hpp"
#include "csd/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace csd;

namespace {

double ols_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double mx = x.mean(), my = y.mean();
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    const double sxx = (x.array() - mx).square().sum();
    return sxy / sxx;
}

double abs_pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double mx = x.mean(), my = y.mean();
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    const double sxx = (x.array() - mx).square().sum();
    const double syy = (y.array() - my).square().sum();
    return std::abs(sxy / std::sqrt(sxx * syy));
}

// Plain O(n^2) distance correlation.
double distance_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd a(n, n), b(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = std::abs(x(i) - x(j));
            b(i, j) = std::abs(y(i) - y(j));
        }
    }
    const auto center = [](Eigen::MatrixXd& m) {
        const Eigen::VectorXd row_mean = m.rowwise().mean();
        const double grand = m.mean();
        m.colwise() -= row_mean;
        m.rowwise() -= row_mean.transpose();
        m.array() += grand;
    };
    center(a);
    center(b);
    const double dcov2 = (a.array() * b.array()).mean();
    const double dvarx = (a.array() * a.array()).mean();
    const double dvary = (b.array() * b.array()).mean();
    if (dvarx <= 0.0 || dvary <= 0.0) return 0.0;
    return std::sqrt(dcov2 / std::sqrt(dvarx * dvary));
}

double auc(const Eigen::VectorXd& score, const Eigen::VectorXd& label) {
    double wins = 0.0, pairs = 0.0;
    for (Eigen::Index i = 0; i < score.size(); ++i) {
        for (Eigen::Index j = 0; j < score.size(); ++j) {
            if (label(i) == 1.0 && label(j) == 0.0) {
                pairs += 1.0;
                if (score(i) > score(j)) wins += 1.0;
                else if (score(i) == score(j)) wins += 0.5;
            }
        }
    }
    return wins / pairs;
}

SemSpec chain_spec(double w) {
    SemSpec spec;
    spec.dag = Eigen::MatrixXi::Zero(2, 2);
    spec.dag(0, 1) = 1;
    spec.weights = Eigen::MatrixXd::Zero(2, 2);
    spec.weights(0, 1) = w;
    spec.linear = true;
    spec.noise = NoiseKind::Uniform;
    return spec;
}

} // namespace

TEST_CASE("random_dag edge probability boundaries") {
    const Eigen::MatrixXi empty = random_dag(5, 0.0, 1);
    CHECK(empty.sum() == 0);

    const Eigen::MatrixXi full = random_dag(3, 1.0, 2);
    CHECK(full.sum() == 3); // n(n-1)/2 forward edges

    CHECK(random_dag(6, 0.5, 9) == random_dag(6, 0.5, 9));
    CHECK(random_dag(6, 0.5, 9) != random_dag(6, 0.5, 10));
}

TEST_CASE("random_dag is always acyclic") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SemSpec spec;
        spec.dag = random_dag(7, 0.5, seed);
        CHECK_NOTHROW(spec.topological_order()); // Kahn succeeds
    }
}

TEST_CASE("linear SEM sampling matches its oracles") {
    SUBCASE("empty graph gives independent columns") {
        SemSpec spec;
        spec.dag = Eigen::MatrixXi::Zero(4, 4);
        spec.weights = Eigen::MatrixXd::Zero(4, 4);
        spec.linear = true;
        const Eigen::MatrixXd x = sample_linear_sem(spec, 5000, 11);
        for (Eigen::Index a = 0; a < 4; ++a) {
            for (Eigen::Index b = a + 1; b < 4; ++b) {
                CHECK(abs_pearson(x.col(a), x.col(b)) < 0.05);
            }
        }
    }
    SUBCASE("chain with weight 2 recovers the slope") {
        const Eigen::MatrixXd x = sample_linear_sem(chain_spec(2.0), 5000, 21);
        CHECK(ols_slope(x.col(0), x.col(1)) == doctest::Approx(2.0).epsilon(0.05));
    }
    SUBCASE("zero-mean noise keeps sample means near zero") {
        const SemSpec spec = make_random_linear_sem(5, 0.4, NoiseKind::Uniform, 3);
        const Eigen::MatrixXd x = sample_linear_sem(spec, 5000, 4);
        for (Eigen::Index c = 0; c < 5; ++c) CHECK(std::abs(x.col(c).mean()) < 0.1);
    }
    SUBCASE("weight-2 chain covariance matches the analytic values at B=10000") {
        const Eigen::MatrixXd x = sample_linear_sem(chain_spec(2.0), 10000, 31);
        const double var0 = (x.col(0).array() - x.col(0).mean()).square().mean();
        const double var1 = (x.col(1).array() - x.col(1).mean()).square().mean();
        const double cov01 = ((x.col(0).array() - x.col(0).mean()) *
                              (x.col(1).array() - x.col(1).mean()))
                                 .mean();
        CHECK(var0 == doctest::Approx(1.0).epsilon(0.05));
        CHECK(var1 == doctest::Approx(5.0).epsilon(0.05));
        CHECK(cov01 == doctest::Approx(2.0).epsilon(0.05));
    }
    SUBCASE("fixed seed reproduces the sample") {
        const SemSpec spec = make_random_linear_sem(4, 0.5, NoiseKind::Laplace, 8);
        CHECK(sample_linear_sem(spec, 100, 5) == sample_linear_sem(spec, 100, 5));
    }
}

TEST_CASE("noise laws have the requested variance") {
    for (const NoiseKind kind : {NoiseKind::Uniform, NoiseKind::Laplace, NoiseKind::Gaussian}) {
        SemSpec spec;
        spec.dag = Eigen::MatrixXi::Zero(2, 2);
        spec.weights = Eigen::MatrixXd::Zero(2, 2);
        spec.linear = true;
        spec.noise = kind;
        spec.noise_scale = 1.5;
        const Eigen::MatrixXd x = sample_linear_sem(spec, 20000, 23);
        const double var = (x.col(0).array() - x.col(0).mean()).square().mean();
        CHECK(var == doctest::Approx(2.25).epsilon(0.08));
    }
    CHECK(linear_identifiability_warning(make_random_linear_sem(3, 0.5, NoiseKind::Gaussian, 1)));
    CHECK_FALSE(linear_identifiability_warning(make_random_linear_sem(3, 0.5, NoiseKind::Uniform, 1)));
}

TEST_CASE("nonlinear SEM sampling") {
    SemSpec spec;
    spec.dag = Eigen::MatrixXi::Zero(2, 2);
    spec.dag(0, 1) = 1;
    spec.linear = false;
    spec.mechanism_seed = 404;
    const Eigen::MatrixXd x = sample_nonlinear_sem(spec, 600, 12);

    SUBCASE("root node is pure noise with the configured variance") {
        const double var = (x.col(0).array() - x.col(0).mean()).square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(0.25));
    }
    SUBCASE("child depends on its parent beyond a permuted control") {
        const double observed = distance_correlation(x.col(0), x.col(1));
        Rng rng(9);
        double worst_control = 0.0;
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<Eigen::Index> perm(600);
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            rng.shuffle(perm);
            Eigen::VectorXd shuffled(600);
            for (Eigen::Index i = 0; i < 600; ++i) shuffled(i) = x(perm[static_cast<std::size_t>(i)], 1);
            worst_control = std::max(worst_control, distance_correlation(x.col(0), shuffled));
        }
        CHECK(observed > worst_control);
    }
    SUBCASE("fixed seed reproduces the sample") {
        CHECK(sample_nonlinear_sem(spec, 50, 3) == sample_nonlinear_sem(spec, 50, 3));
    }
}

TEST_CASE("attach_binary_outcome balances and tracks its parents") {
    const SemSpec spec = make_random_linear_sem(4, 0.3, NoiseKind::Uniform, 6);
    const Eigen::MatrixXd x = sample_linear_sem(spec, 5000, 7);

    SUBCASE("zero weights give a coin flip") {
        const Eigen::VectorXd y = attach_binary_outcome(x, {0}, {0.0}, 55);
        CHECK(std::abs(y.mean() - 0.5) < 0.03);
    }
    SUBCASE("a strong parent is highly predictive") {
        const Eigen::VectorXd y = attach_binary_outcome(x, {2}, {5.0}, 56);
        CHECK(auc(x.col(2), y) >= 0.9);
        CHECK(y.mean() > 0.35);
        CHECK(y.mean() < 0.65);
    }
    SUBCASE("deterministic under a fixed seed") {
        CHECK(attach_binary_outcome(x, {1}, {2.0}, 57) == attach_binary_outcome(x, {1}, {2.0}, 57));
    }
    SUBCASE("contract violations") {
        CHECK_THROWS_AS(attach_binary_outcome(x, {0, 1}, {1.0}, 58), ShapeError);
        CHECK_THROWS_AS(attach_binary_outcome(x, {9}, {1.0}, 58), ShapeError);
    }
}

TEST_CASE("structural_metrics counts missing, extra and reversed edges") {
    Eigen::MatrixXi truth = Eigen::MatrixXi::Zero(4, 4);
    truth(0, 1) = 1;
    truth(1, 2) = 1;
    truth(0, 3) = 1;

    SUBCASE("perfect recovery") {
        const RecoveryMetrics m = structural_metrics(truth, truth);
        CHECK(m.shd == 0);
        CHECK(m.edge_f1 == 1.0);
        CHECK(m.edge_precision == 1.0);
        CHECK(m.edge_recall == 1.0);
    }
    SUBCASE("a single reversed edge costs one") {
        Eigen::MatrixXi est = truth;
        est(0, 1) = 0;
        est(1, 0) = 1;
        const RecoveryMetrics m = structural_metrics(est, truth);
        CHECK(m.shd == 1);
        CHECK(m.edge_precision == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("empty estimate against k true edges") {
        const Eigen::MatrixXi est = Eigen::MatrixXi::Zero(4, 4);
        const RecoveryMetrics m = structural_metrics(est, truth);
        CHECK(m.shd == 3);
        CHECK(m.edge_recall == 0.0);
        CHECK(m.edge_f1 == 0.0);
    }
    SUBCASE("both empty counts as perfect") {
        const Eigen::MatrixXi none = Eigen::MatrixXi::Zero(4, 4);
        const RecoveryMetrics m = structural_metrics(none, none);
        CHECK(m.shd == 0);
        CHECK(m.edge_f1 == 1.0);
    }
    SUBCASE("swapping est and truth preserves SHD") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Eigen::MatrixXi a = random_dag(6, 0.4, seed);
            const Eigen::MatrixXi b = random_dag(6, 0.4, seed + 100);
            CHECK(structural_metrics(a, b).shd == structural_metrics(b, a).shd);
        }
    }
    SUBCASE("shape mismatch is rejected") {
        CHECK_THROWS_AS(structural_metrics(Eigen::MatrixXi::Zero(3, 3), truth), ShapeError);
    }
}
