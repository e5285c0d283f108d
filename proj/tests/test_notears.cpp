#include "csd/errors.hpp"
#include "csd/expm.hpp"
#include "csd/notears.hpp"
#include "csd/rng.hpp"
#include "csd/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace csd;

namespace {

Eigen::MatrixXd standardize_cols(Eigen::MatrixXd x) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double m = x.col(c).mean();
        const double sd = std::sqrt((x.col(c).array() - m).square().sum() /
                                    static_cast<double>(x.rows()));
        x.col(c) = (x.col(c).array() - m) / sd;
    }
    return x;
}

// 30-term Taylor series, the independent oracle for the matrix exponential.
Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a) {
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    Eigen::MatrixXd sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = (term * a) / static_cast<double>(k);
        sum += term;
    }
    return sum;
}

// in-degree-capped nonlinear SEM used by the recovery suites
SemSpec tree_sem(std::uint64_t seed) {
    SemSpec spec = make_random_nonlinear_sem(5, 0.4, NoiseKind::Uniform, seed);
    spec.noise_scale = 0.2;
    for (Eigen::Index j = 0; j < spec.dag.cols(); ++j) {
        bool seen = false;
        for (Eigen::Index i = 0; i < spec.dag.rows(); ++i) {
            if (spec.dag(i, j)) {
                if (seen) spec.dag(i, j) = 0;
                seen = true;
            }
        }
    }
    return spec;
}

} // namespace

TEST_CASE("regressor bank masks each model's own input row") {
    Rng rng(1);
    const RegressorBank bank = make_regressor_bank(4, 6, rng);
    REQUIRE(bank.n_vars() == 4);
    CHECK(bank.hidden_width() == 6);
    for (Eigen::Index j = 0; j < 4; ++j) {
        CHECK(bank.models[static_cast<std::size_t>(j)].layers.front().weights.row(j).norm() == 0.0);
    }
}

TEST_CASE("aggregate_adjacency takes first-layer row norms") {
    Rng rng(2);
    RegressorBank bank = make_regressor_bank(3, 2, rng);
    for (auto& model : bank.models) model.layers.front().weights.setZero();
    bank.models[1].layers.front().weights.row(0) << 3.0, 4.0;
    Eigen::MatrixXd w = aggregate_adjacency(bank);
    CHECK(w(0, 1) == 5.0); // 3-4-5
    CHECK(w(1, 0) == 0.0);
    CHECK(w.diagonal().cwiseAbs().maxCoeff() == 0.0);

    SUBCASE("hidden-layer weights do not enter") {
        const Eigen::MatrixXd before = aggregate_adjacency(bank);
        bank.models[1].layers.back().weights.setConstant(99.0);
        CHECK(aggregate_adjacency(bank) == before);
    }
    SUBCASE("width-1 models reduce to absolute weights") {
        Rng rng2(3);
        RegressorBank narrow = make_regressor_bank(3, 1, rng2);
        const Eigen::MatrixXd w1 = aggregate_adjacency(narrow);
        for (Eigen::Index j = 0; j < 3; ++j) {
            for (Eigen::Index k = 0; k < 3; ++k) {
                CHECK(w1(k, j) ==
                      std::abs(narrow.models[static_cast<std::size_t>(j)].layers.front().weights(k, 0)));
            }
        }
    }
    SUBCASE("all-zero bank gives the zero matrix") {
        for (auto& model : bank.models) model.layers.front().weights.setZero();
        CHECK(aggregate_adjacency(bank).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("acyclicity closed forms") {
    CHECK(std::abs(acyclicity(Eigen::MatrixXd::Zero(4, 4))) < 1e-12);

    Eigen::MatrixXd edge(2, 2);
    edge << 0, 1, 0, 0;
    CHECK(std::abs(acyclicity(edge)) < 1e-9); // nilpotent: trace(I + A) - 2

    Eigen::MatrixXd cycle(2, 2);
    cycle << 0, 1, 1, 0;
    CHECK(acyclicity(cycle) ==
          doctest::Approx(2.0 * std::cosh(1.0) - 2.0).epsilon(1e-9));

    CHECK_THROWS_AS(acyclicity(Eigen::MatrixXd::Zero(2, 3)), ShapeError);
}

TEST_CASE("acyclicity separates triangular matrices from cycles") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
        for (Eigen::Index i = 0; i < 5; ++i) {
            for (Eigen::Index j = i + 1; j < 5; ++j) w(i, j) = rng.normal();
        }
        CHECK(std::abs(acyclicity(w)) < 1e-9);

        Eigen::MatrixXd cyc = w;
        cyc(3, 1) = 0.5; // closes a 2-cycle with (1,3)
        cyc(1, 3) = 0.5;
        CHECK(acyclicity(cyc) > 1e-3);
    }
}

TEST_CASE("matrix exponential matches the truncated Taylor oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd w(4, 4);
        for (Eigen::Index i = 0; i < 4; ++i) {
            for (Eigen::Index j = 0; j < 4; ++j) w(i, j) = rng.uniform(-0.6, 0.6);
        }
        const Eigen::MatrixXd a = w.cwiseProduct(w);
        if (a.cwiseAbs().colwise().sum().maxCoeff() > 2.0) continue;
        const Eigen::MatrixXd diff = matrix_exponential(a) - expm_taylor(a);
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("acyclicity gradient") {
    CHECK(acyclicity_gradient(Eigen::MatrixXd::Zero(3, 3)).cwiseAbs().maxCoeff() == 0.0);

    Rng rng(9);
    Eigen::MatrixXd w(4, 4);
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) w(i, j) = i == j ? 0.0 : rng.uniform(-0.8, 0.8);
    }
    const Eigen::MatrixXd analytic = acyclicity_gradient(w);
    const double step = 1e-6;
    double num2 = 0.0, den2 = 0.0;
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            const double saved = w(i, j);
            w(i, j) = saved + step;
            const double up = acyclicity(w);
            w(i, j) = saved - step;
            const double down = acyclicity(w);
            w(i, j) = saved;
            const double fd = (up - down) / (2.0 * step);
            num2 += (fd - analytic(i, j)) * (fd - analytic(i, j));
            den2 += fd * fd;
        }
    }
    CHECK(std::sqrt(num2 / den2) < 1e-5);

    SUBCASE("gradient diagonal stays zero where W is masked to zero") {
        CHECK(std::isfinite(analytic.diagonal().sum()));
        CHECK(analytic.diagonal().cwiseAbs().maxCoeff() == 0.0); // 2W factor
    }
}

TEST_CASE("dag_penalty plugs h into the multiplier form") {
    Eigen::MatrixXd tri(3, 3);
    tri.setZero();
    tri(0, 1) = 2.0;
    tri(1, 2) = -1.0;
    CHECK(dag_penalty(tri, 3.0, 5.0) == doctest::Approx(0.0).epsilon(1e-9));

    Eigen::MatrixXd cycle(2, 2);
    cycle << 0, 1, 1, 0;
    const double h = 2.0 * std::cosh(1.0) - 2.0;
    CHECK(dag_penalty(cycle, 1.0, 2.0) == doctest::Approx(h + h * h).epsilon(1e-9));
    CHECK(dag_penalty(cycle, 1.0, 2.0) == doctest::Approx(2.2659).epsilon(1e-4));
    CHECK(dag_penalty(cycle, 0.0, 0.0) == 0.0);
}

TEST_CASE("total_loss of the zero bank is the data energy") {
    Rng rng(11);
    Eigen::MatrixXd x = standardize_cols(Eigen::MatrixXd::NullaryExpr(
        50, 3, [&rng](Eigen::Index, Eigen::Index) { return rng.normal(); }));
    Rng brng(12);
    RegressorBank bank = make_regressor_bank(3, 4, brng);
    for (auto& model : bank.models) {
        for (auto& layer : model.layers) {
            layer.weights.setZero();
            layer.bias.setZero();
        }
    }
    double energy = 0.0;
    for (Eigen::Index j = 0; j < 3; ++j) energy += x.col(j).squaredNorm();
    energy /= 3.0;
    CHECK(total_loss(bank, x, 1.0, 2.0, 0.5) == doctest::Approx(energy).epsilon(1e-12));
}

TEST_CASE("an exact-fit linear bank leaves only the noise energy") {
    // linear SEM x1 = 1.7*x0 + e with a linear-activation bank built from the
    // generating weight
    Rng rng(13);
    const Eigen::Index b = 300;
    Eigen::MatrixXd x(b, 2);
    Eigen::VectorXd noise(b);
    for (Eigen::Index r = 0; r < b; ++r) {
        x(r, 0) = rng.uniform_noise(1.0);
        noise(r) = rng.uniform_noise(0.3);
        x(r, 1) = 1.7 * x(r, 0) + noise(r);
    }

    RegressorBank bank;
    bank.models.resize(2);
    for (int j = 0; j < 2; ++j) {
        MlpParams model;
        model.layers.resize(2);
        model.layers[0].weights = Eigen::MatrixXd::Zero(2, 3);
        model.layers[0].bias = Eigen::VectorXd::Zero(3);
        model.layers[0].activation = Activation::Linear;
        model.layers[1].weights = Eigen::MatrixXd::Zero(3, 1);
        model.layers[1].bias = Eigen::VectorXd::Zero(1);
        model.layers[1].activation = Activation::Linear;
        bank.models[static_cast<std::size_t>(j)] = std::move(model);
    }
    bank.models[1].layers[0].weights(0, 0) = 1.7; // x0 feeds hidden unit 0
    bank.models[1].layers[1].weights(0, 0) = 1.0;

    // model 0 predicts nothing (exogenous), so its residual is x0 itself
    const double expected = (x.col(0).squaredNorm() + noise.squaredNorm()) / 2.0;
    CHECK(total_loss(bank, x, 1.0, 1.0, 0.0) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("total_loss gradients match finite differences on random banks") {
    Rng rng(15);
    for (int trial = 0; trial < 4; ++trial) {
        Rng brng(100 + static_cast<std::uint64_t>(trial));
        RegressorBank bank = make_regressor_bank(3, 3, brng);
        Eigen::MatrixXd x(12, 3);
        for (Eigen::Index r = 0; r < 12; ++r) {
            for (Eigen::Index c = 0; c < 3; ++c) x(r, c) = rng.normal();
        }
        const double alpha = 0.7, rho = 1.3, lambda1 = 0.05;

        std::vector<MlpGradients> grads;
        total_loss_with_gradients(bank, x, alpha, rho, lambda1, grads);

        const double step = 1e-5;
        double num2 = 0.0, den2 = 0.0;
        for (std::size_t m = 0; m < bank.models.size(); ++m) {
            auto& model = bank.models[m];
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                for (Eigen::Index i = 0; i < model.layers[l].weights.rows(); ++i) {
                    if (l == 0 && i == static_cast<Eigen::Index>(m)) continue; // masked row
                    for (Eigen::Index j = 0; j < model.layers[l].weights.cols(); ++j) {
                        double& p = model.layers[l].weights(i, j);
                        const double saved = p;
                        p = saved + step;
                        const double up = total_loss(bank, x, alpha, rho, lambda1);
                        p = saved - step;
                        const double down = total_loss(bank, x, alpha, rho, lambda1);
                        p = saved;
                        const double fd = (up - down) / (2.0 * step);
                        const double diff = fd - grads[m].weights[l](i, j);
                        num2 += diff * diff;
                        den2 += fd * fd;
                    }
                }
                for (Eigen::Index j = 0; j < model.layers[l].bias.size(); ++j) {
                    double& p = model.layers[l].bias(j);
                    const double saved = p;
                    p = saved + step;
                    const double up = total_loss(bank, x, alpha, rho, lambda1);
                    p = saved - step;
                    const double down = total_loss(bank, x, alpha, rho, lambda1);
                    p = saved;
                    const double fd = (up - down) / (2.0 * step);
                    const double diff = fd - grads[m].bias[l](j);
                    num2 += diff * diff;
                    den2 += fd * fd;
                }
            }
        }
        CHECK(std::sqrt(num2 / den2) < 1e-4);
    }
}

TEST_CASE("accepted losses are non-increasing and masked rows stay zero") {
    Rng rng(17);
    Eigen::MatrixXd x = standardize_cols(Eigen::MatrixXd::NullaryExpr(
        80, 3, [&rng](Eigen::Index, Eigen::Index) { return rng.normal(); }));
    Rng brng(18);
    RegressorBank bank = make_regressor_bank(3, 4, brng);
    NotearsConfig cfg;
    cfg.inner_iterations = 40;
    const std::vector<double> accepted = minimize_at_fixed_penalty(bank, x, 0.5, 2.0, cfg);
    REQUIRE(accepted.size() >= 2);
    for (std::size_t k = 1; k < accepted.size(); ++k) {
        CHECK(accepted[k] <= accepted[k - 1]);
    }
    CHECK(accepted.back() < accepted.front());
    for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(bank.models[static_cast<std::size_t>(j)].layers.front().weights.row(j).norm() == 0.0);
    }
}

TEST_CASE("independent columns yield an empty graph at the default threshold") {
    Rng rng(19);
    Eigen::MatrixXd x = standardize_cols(Eigen::MatrixXd::NullaryExpr(
        1000, 2, [&rng](Eigen::Index, Eigen::Index) { return rng.uniform_noise(1.0); }));
    NotearsConfig cfg;
    const WeightedDigraph g = fit_notears_mlp(x, {"u", "v"}, cfg, 21);
    CHECK(g.weights.maxCoeff() < g.omega);
    CHECK(support_is_acyclic(g.weights, g.omega));
}

TEST_CASE("fit is bit-reproducible under a fixed seed") {
    const SemSpec spec = tree_sem(104);
    const Eigen::MatrixXd x = standardize_cols(sample_nonlinear_sem(spec, 400, 204));
    NotearsConfig cfg;
    cfg.inner_iterations = 60; // smoke-scale
    const WeightedDigraph a = fit_notears_mlp(x, {"a", "b", "c", "d", "e"}, cfg, 304);
    const WeightedDigraph b = fit_notears_mlp(x, {"a", "b", "c", "d", "e"}, cfg, 304);
    CHECK(a.weights == b.weights);
    CHECK(a.omega == b.omega);
}

TEST_CASE("recovery smoke on one tree-structured nonlinear SEM") {
    const SemSpec spec = tree_sem(109);
    const Eigen::MatrixXd x = standardize_cols(sample_nonlinear_sem(spec, 1000, 209));
    NotearsConfig cfg;
    const WeightedDigraph g = fit_notears_mlp(x, {"a", "b", "c", "d", "e"}, cfg, 309);
    CHECK(support_is_acyclic(g.weights, g.omega));
    Eigen::MatrixXi est = Eigen::MatrixXi::Zero(5, 5);
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) {
            if (i != j && g.weights(i, j) >= g.omega) est(i, j) = 1;
        }
    }
    const RecoveryMetrics m = structural_metrics(est, spec.dag);
    CHECK(m.edge_f1 >= 0.6);
}

TEST_CASE("fit validates its input") {
    NotearsConfig cfg;
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4);
    CHECK_THROWS_AS(fit_notears_mlp(x, {"a", "b", "c", "d"}, cfg, 1), ShapeError);
    Eigen::MatrixXd ok = Eigen::MatrixXd::Random(30, 2);
    CHECK_THROWS_AS(fit_notears_mlp(ok, {"a"}, cfg, 1), ShapeError);
}
