#include "csd/mlmodels.hpp"

#include "csd/errors.hpp"
#include "csd/likelihood.hpp"
#include "csd/rng.hpp"

#include <algorithm>

namespace csd {

namespace {

struct FoldSplit {
    std::vector<Eigen::Index> a;
    std::vector<Eigen::Index> b;
};

bool both_classes(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx) {
    bool zero = false, one = false;
    for (const Eigen::Index i : idx) {
        (y(i) == 1.0 ? one : zero) = true;
        if (zero && one) return true;
    }
    return false;
}

FoldSplit stratified_two_fold(const Eigen::VectorXd& y, Rng& rng) {
    std::vector<Eigen::Index> zeros, ones;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        (y(i) == 1.0 ? ones : zeros).push_back(i);
    }
    for (int attempt = 0; attempt < 20; ++attempt) {
        rng.shuffle(zeros);
        rng.shuffle(ones);
        FoldSplit split;
        for (std::size_t k = 0; k < zeros.size(); ++k) {
            (k < zeros.size() / 2 ? split.a : split.b).push_back(zeros[k]);
        }
        for (std::size_t k = 0; k < ones.size(); ++k) {
            (k < ones.size() / 2 ? split.a : split.b).push_back(ones[k]);
        }
        std::sort(split.a.begin(), split.a.end());
        std::sort(split.b.begin(), split.b.end());
        if (both_classes(y, split.a) && both_classes(y, split.b)) return split;
    }
    throw DegenerateDataError("cross_validated_importance: could not form a two-class fold in 20 draws");
}

Eigen::VectorXd fit_fold_importance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    ImportanceModel kind, const GbtConfig& gbt_cfg,
                                    const LogRegConfig& logreg_cfg) {
    if (kind == ImportanceModel::Gbt) {
        return gbt_importance(fit_gbt(x, y, gbt_cfg));
    }
    const LogRegModel model = fit_logreg(x, y, logreg_cfg);
    return model.coefficients.cwiseAbs();
}

} // namespace

std::string to_string(ImportanceModel m) {
    return m == ImportanceModel::Gbt ? "gbt" : "logreg";
}

ImportanceResult cross_validated_importance(const Dataset& ds, ImportanceModel kind,
                                            std::uint64_t seed, const GbtConfig& gbt_cfg,
                                            const LogRegConfig& logreg_cfg, int repetitions) {
    // Predictors exclude the appended likelihood column; the binary target is
    // the label.
    std::vector<Eigen::Index> cols;
    std::vector<std::string> names;
    {
        Eigen::Index c = 0;
        for (const auto& col : ds.schema) {
            if (col.kind == ColumnKind::Target) continue;
            if (col.name != kLikelihoodColumn) {
                cols.push_back(c);
                names.push_back(col.name);
            }
            ++c;
        }
    }
    if (cols.empty()) throw ShapeError("cross_validated_importance: no predictor columns");
    Eigen::MatrixXd x(ds.row_count(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        x.col(static_cast<Eigen::Index>(k)) = ds.values.col(cols[k]);
    }
    const Eigen::VectorXd& y = ds.target;
    const double ones = y.sum();
    if (ones < 2.0 || ones > static_cast<double>(y.size()) - 2.0) {
        throw DegenerateDataError("cross_validated_importance: need at least 2 samples per class");
    }

    Rng root = Rng(seed).derive("cv-importance");
    Eigen::VectorXd total = Eigen::VectorXd::Zero(x.cols());
    int fits = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
        Rng rep_rng = root.derive("rep", static_cast<std::uint64_t>(rep));
        const FoldSplit split = stratified_two_fold(y, rep_rng);
        for (const auto* fold : {&split.a, &split.b}) {
            Eigen::MatrixXd xf(static_cast<Eigen::Index>(fold->size()), x.cols());
            Eigen::VectorXd yf(static_cast<Eigen::Index>(fold->size()));
            for (std::size_t r = 0; r < fold->size(); ++r) {
                xf.row(static_cast<Eigen::Index>(r)) = x.row((*fold)[r]);
                yf(static_cast<Eigen::Index>(r)) = y((*fold)[r]);
            }
            total += fit_fold_importance(xf, yf, kind, gbt_cfg, logreg_cfg);
            ++fits;
        }
    }

    ImportanceResult result;
    result.scores = total / static_cast<double>(fits);
    result.variables = std::move(names);
    result.model = kind;
    result.folds = repetitions;
    return result;
}

} // namespace csd
