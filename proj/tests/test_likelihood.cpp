#include "csd/errors.hpp"
#include "csd/likelihood.hpp"
#include "csd/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace csd;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (const double x : values) v(i++) = x;
    return v;
}

// Two well-separated point clouds; a linear rule already classifies them, so
// the trained network has to reach the target too.
Dataset separable_blobs(Eigen::Index per_class, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.schema = {{"f1", ColumnKind::Continuous},
                 {"f2", ColumnKind::Continuous},
                 {"y", ColumnKind::Target}};
    ds.target_name = "y";
    const Eigen::Index b = 2 * per_class;
    ds.values.resize(b, 2);
    ds.target.resize(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        const bool positive = i % 2 == 1;
        const double cx = positive ? 1.2 : -1.2;
        ds.values(i, 0) = rng.normal(cx, 0.45);
        ds.values(i, 1) = rng.normal(positive ? 1.0 : -1.0, 0.45);
        ds.target(i) = positive ? 1.0 : 0.0;
    }
    return ds;
}

double linear_rule_accuracy(const Dataset& ds) {
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < ds.row_count(); ++i) {
        const double pred = ds.values(i, 0) + ds.values(i, 1) > 0.0 ? 1.0 : 0.0;
        if (pred == ds.target(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.row_count());
}

} // namespace

TEST_CASE("class_weights balances the class masses") {
    const ClassWeights balanced = class_weights(vec({0, 1}));
    CHECK(balanced.w0 == 1.0);
    CHECK(balanced.w1 == 1.0);

    const ClassWeights skewed = class_weights(vec({0, 0, 0, 1}));
    CHECK(skewed.w0 == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
    CHECK(skewed.w1 == 2.0);
    // w0*B0 == w1*B1
    CHECK(skewed.w0 * 3.0 == doctest::Approx(skewed.w1 * 1.0).epsilon(1e-12));

    CHECK_THROWS_AS(class_weights(vec({1, 1, 1, 1})), DegenerateDataError);
}

TEST_CASE("weighted_bce closed forms") {
    CHECK(weighted_bce(vec({1}), vec({0.5}), 1.0, 1.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // unit weights reduce to the plain BCE
    const Eigen::VectorXd y = vec({1, 0, 1, 0, 1});
    const Eigen::VectorXd p = vec({0.8, 0.3, 0.6, 0.1, 0.99});
    double plain = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        plain += y(i) * std::log(p(i)) + (1.0 - y(i)) * std::log(1.0 - p(i));
    }
    plain = -plain / static_cast<double>(y.size());
    CHECK(weighted_bce(y, p, 1.0, 1.0) == doctest::Approx(plain).epsilon(1e-12));

    // perfect prediction limit
    CHECK(weighted_bce(vec({1}), vec({1.0 - 1e-9}), 1.0, 1.0) < 1e-6);
    CHECK_THROWS_AS(weighted_bce(vec({1, 0}), vec({0.5}), 1.0, 1.0), ShapeError);
}

TEST_CASE("filter_correct applies the half-threshold rule") {
    CHECK(filter_correct(vec({0.9, 0.2}), vec({1, 0})) ==
          std::vector<Eigen::Index>{0, 1});
    CHECK(filter_correct(vec({0.9, 0.2}), vec({0, 1})).empty());
    // score exactly at the boundary predicts class 1
    CHECK(filter_correct(vec({0.5}), vec({1})) == std::vector<Eigen::Index>{0});
    CHECK(filter_correct(vec({0.5}), vec({0})).empty());
}

TEST_CASE("training reaches the target on separable blobs") {
    const Dataset ds = separable_blobs(100, 2024);
    REQUIRE(linear_rule_accuracy(ds) >= 0.90); // oracle: the data is separable

    LikelihoodConfig cfg;
    const auto [mlp, res] = train_likelihood_mlp(ds, cfg, 7);
    CHECK(res.train_accuracy >= 0.90);
    CHECK(res.epochs_run >= 1);
    CHECK(res.scores.size() == ds.row_count());
    CHECK(res.scores.minCoeff() > 0.0);
    CHECK(res.scores.maxCoeff() < 1.0);
    CHECK(!res.kept_indices.empty());
    // every kept sample agrees with its label at the 0.5 rule
    for (const Eigen::Index i : res.kept_indices) {
        CHECK((res.scores(i) >= 0.5) == (ds.target(i) == 1.0));
    }
}

TEST_CASE("training fails cleanly on label noise") {
    Rng rng(99);
    Dataset ds = separable_blobs(60, 5);
    for (Eigen::Index i = 0; i < ds.row_count(); ++i) {
        ds.target(i) = rng.bernoulli(0.5) ? 1.0 : 0.0; // labels carry no signal
    }
    if (ds.target.sum() == 0.0 || ds.target.sum() == static_cast<double>(ds.row_count())) {
        ds.target(0) = 1.0 - ds.target(0);
    }
    LikelihoodConfig cfg;
    cfg.max_epochs = 8; // too few epochs to memorize noise
    try {
        train_likelihood_mlp(ds, cfg, 3);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_value() < 0.90);
        CHECK(e.best_value() > 0.0);
    }
}

TEST_CASE("training is bit-reproducible under a fixed seed") {
    const Dataset ds = separable_blobs(40, 31);
    LikelihoodConfig cfg;
    const auto [m1, r1] = train_likelihood_mlp(ds, cfg, 1234);
    const auto [m2, r2] = train_likelihood_mlp(ds, cfg, 1234);
    CHECK(r1.scores == r2.scores);
    CHECK(r1.kept_indices == r2.kept_indices);
    CHECK(r1.epochs_run == r2.epochs_run);
}

TEST_CASE("augment_with_likelihood restricts rows and appends the score column") {
    const Dataset ds = separable_blobs(50, 77); // B = 100
    LikelihoodResult res;
    res.scores = Eigen::VectorXd::Zero(100);
    for (Eigen::Index i = 0; i < 100; ++i) {
        res.scores(i) = ds.target(i) == 1.0 ? 0.8 : 0.2;
    }
    // make exactly 7 samples misclassified
    for (Eigen::Index i = 0; i < 7; ++i) res.scores(i * 3) = 1.0 - res.scores(i * 3);
    res.kept_indices = filter_correct(res.scores, ds.target);
    REQUIRE(res.kept_indices.size() == 93);

    const Eigen::MatrixXd before = ds.values;
    const Dataset out = augment_with_likelihood(ds, res);
    CHECK(out.row_count() == 93);
    CHECK(out.var_count() == ds.var_count() + 1);
    CHECK(out.predictor_names().back() == std::string(kLikelihoodColumn));
    for (Eigen::Index r = 0; r < out.row_count(); ++r) {
        const Eigen::Index src = res.kept_indices[static_cast<std::size_t>(r)];
        CHECK(out.values(r, out.var_count() - 1) == res.scores(src));
        CHECK(out.target(r) == ds.target(src));
    }
    CHECK(ds.values == before); // input untouched

    LikelihoodResult empty;
    empty.scores = res.scores;
    CHECK_THROWS_AS(augment_with_likelihood(ds, empty), DegenerateDataError);
}
