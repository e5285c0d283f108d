#include "csd/analysis.hpp"

#include "csd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace csd {

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double incbeta_cf(double x, double a, double b) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double f = d;
    for (int m = 1; m <= 300; ++m) {
        const double dm = static_cast<double>(m);
        double numer = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + numer * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + numer / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        f *= c * d;

        numer = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + numer * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + numer / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double mult = c * d;
        f *= mult;
        if (std::abs(mult - 1.0) < eps) break;
    }
    return f;
}

double pearson_of(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateDataError("constant input to correlation");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - log_beta);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * incbeta_cf(x, a, b) / a;
    }
    return 1.0 - regularized_incomplete_beta(1.0 - x, b, a);
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
    const double x = dof / (t * t + dof);
    const double half_tail = 0.5 * regularized_incomplete_beta(x, 0.5 * dof, 0.5);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw ShapeError("pearson: length mismatch");
    if (x.size() < 3) throw ShapeError("pearson: need at least 3 observations");
    std::vector<double> xv(x.data(), x.data() + x.size());
    std::vector<double> yv(y.data(), y.data() + y.size());
    return pearson_of(xv, yv);
}

std::vector<double> fractional_ranks(const Eigen::VectorXd& v) {
    const std::size_t n = static_cast<std::size_t>(v.size());
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v(static_cast<Eigen::Index>(a)) < v(static_cast<Eigen::Index>(b)); });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v(static_cast<Eigen::Index>(idx[j + 1])) == v(static_cast<Eigen::Index>(idx[i]))) ++j;
        const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
    const Eigen::Index n = x.size();
    if (n < 4) throw ShapeError("spearman: need at least 4 observations");
    const std::vector<double> rx = fractional_ranks(x);
    const std::vector<double> ry = fractional_ranks(y);
    double rho;
    try {
        rho = pearson_of(rx, ry);
    } catch (const DegenerateDataError&) {
        throw DegenerateDataError("spearman: all-tied input vector");
    }

    SpearmanResult out;
    out.rho = rho;
    const double nd = static_cast<double>(n);
    const double denom = 1.0 - rho * rho;
    if (denom <= 0.0) {
        out.p_value = 0.0;
    } else {
        const double t = rho * std::sqrt((nd - 2.0) / denom);
        out.p_value = 2.0 * (1.0 - student_t_cdf(std::abs(t), nd - 2.0));
        out.p_value = std::clamp(out.p_value, 0.0, 1.0);
    }
    return out;
}

double spearman_permutation_p(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.size();
    if (n != y.size()) throw ShapeError("spearman_permutation_p: length mismatch");
    if (n < 4 || n > 10) throw ShapeError("spearman_permutation_p: supported for 4 <= n <= 10");
    const std::vector<double> rx = fractional_ranks(x);
    std::vector<double> ry = fractional_ranks(y);
    const double observed = std::abs(pearson_of(rx, ry));

    // Mid-p: ties at the observed statistic count half, which is the standard
    // convention when a discrete permutation null is compared against a
    // continuous approximation.
    std::sort(ry.begin(), ry.end());
    std::size_t total = 0;
    std::size_t above = 0;
    std::size_t equal = 0;
    do {
        ++total;
        const double r = std::abs(pearson_of(rx, ry));
        if (r > observed + 1e-12) ++above;
        else if (r >= observed - 1e-12) ++equal;
    } while (std::next_permutation(ry.begin(), ry.end()));
    return (static_cast<double>(above) + 0.5 * static_cast<double>(equal)) /
           static_cast<double>(total);
}

std::string to_string(RankCase c) {
    switch (c) {
        case RankCase::Causal: return "causal";
        case RankCase::Effect: return "effect";
        case RankCase::GbtImp: return "gbt_imp";
        case RankCase::LrImp: return "lr_imp";
        case RankCase::FCorr: return "f_corr";
    }
    return "f_corr";
}

RankTable rank_by_score(RankCase kind, const std::string& method,
                        const std::map<std::string, double>& scores) {
    if (scores.empty()) throw ShapeError("rank_by_score: empty score map");
    RankTable table;
    table.kind = kind;
    table.method = method;
    table.entries.reserve(scores.size());
    for (const auto& [name, score] : scores) table.entries.push_back({name, score, 0});
    std::sort(table.entries.begin(), table.entries.end(), [](const RankEntry& a, const RankEntry& b) {
        const double ma = std::abs(a.score);
        const double mb = std::abs(b.score);
        if (ma != mb) return ma > mb;
        return a.variable < b.variable;
    });
    int rank = 1;
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        if (i > 0 && std::abs(table.entries[i].score) != std::abs(table.entries[i - 1].score)) {
            rank = static_cast<int>(i) + 1;
        }
        table.entries[i].rank = rank;
    }
    return table;
}

CauseEffectScores extract_cause_effect(const Eigen::MatrixXd& adjacency,
                                       const std::vector<std::string>& names,
                                       const std::string& target,
                                       double edge_threshold) {
    if (adjacency.rows() != adjacency.cols() ||
        adjacency.rows() != static_cast<Eigen::Index>(names.size())) {
        throw ShapeError("extract_cause_effect: adjacency/name size mismatch");
    }
    const auto it = std::find(names.begin(), names.end(), target);
    if (it == names.end()) throw SchemaError("target node '" + target + "' not present in graph");
    const Eigen::Index t = static_cast<Eigen::Index>(it - names.begin());

    CauseEffectScores out;
    for (Eigen::Index v = 0; v < adjacency.rows(); ++v) {
        if (v == t) continue;
        const double into = std::abs(adjacency(v, t));
        const double from = std::abs(adjacency(t, v));
        if (into > 0.0 && into >= edge_threshold) out.causal[names[static_cast<std::size_t>(v)]] = into;
        if (from > 0.0 && from >= edge_threshold) out.effect[names[static_cast<std::size_t>(v)]] = from;
    }
    return out;
}

ConcordancePair concordance_pair(const RankTable& x, const RankTable& y, double alpha) {
    std::map<std::string, double> sx;
    for (const auto& e : x.entries) sx[e.variable] = std::abs(e.score);
    std::vector<double> vx, vy;
    for (const auto& e : y.entries) {
        const auto it = sx.find(e.variable);
        if (it == sx.end()) continue;
        vx.push_back(it->second);
        vy.push_back(std::abs(e.score));
    }
    if (vx.size() < 4) {
        throw InsufficientOverlapError("rank tables " + to_string(x.kind) + " and " + to_string(y.kind) +
                                       " share only " + std::to_string(vx.size()) +
                                       " variables (need 4)");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(vx.size());
    const SpearmanResult s = spearman(Eigen::Map<const Eigen::VectorXd>(vx.data(), n),
                                      Eigen::Map<const Eigen::VectorXd>(vy.data(), n));
    ConcordancePair pair;
    pair.case_x = x.kind;
    pair.case_y = y.kind;
    pair.method = x.method.empty() ? y.method : x.method;
    pair.rho = s.rho;
    pair.p_value = s.p_value;
    pair.significant = s.p_value < alpha;
    pair.shared = static_cast<int>(vx.size());
    return pair;
}

ConcordanceReport concordance(const std::vector<RankTable>& tables, double alpha) {
    ConcordanceReport report;
    report.alpha = alpha;
    static const RankCase kGraphCases[] = {RankCase::Causal, RankCase::Effect};
    static const RankCase kScoreCases[] = {RankCase::FCorr, RankCase::GbtImp, RankCase::LrImp};
    for (const auto& x : tables) {
        if (std::find(std::begin(kGraphCases), std::end(kGraphCases), x.kind) == std::end(kGraphCases)) {
            continue;
        }
        for (const auto& y : tables) {
            if (std::find(std::begin(kScoreCases), std::end(kScoreCases), y.kind) == std::end(kScoreCases)) {
                continue;
            }
            ConcordancePair pair;
            try {
                pair = concordance_pair(x, y, alpha);
            } catch (const InsufficientOverlapError&) {
                pair.case_x = x.kind;
                pair.case_y = y.kind;
                pair.method = x.method;
                pair.rho = std::numeric_limits<double>::quiet_NaN();
                pair.p_value = std::numeric_limits<double>::quiet_NaN();
                pair.significant = false;
                pair.sufficient = false;
                int shared = 0;
                for (const auto& ex : x.entries) {
                    for (const auto& ey : y.entries) {
                        if (ex.variable == ey.variable) ++shared;
                    }
                }
                pair.shared = shared;
            }
            report.pairs.push_back(pair);
        }
    }
    return report;
}

} // namespace csd
