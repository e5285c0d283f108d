#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace csd {

/// Sample Pearson correlation. Inputs must have equal length >= 3 and be
/// non-constant.
double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Average (fractional) ranks, 1-based; ties share the mean of their positions.
std::vector<double> fractional_ranks(const Eigen::VectorXd& v);

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;
};

/// Spearman rank correlation with a two-sided p-value from the Student-t
/// approximation t = rho*sqrt((n-2)/(1-rho^2)) on n-2 degrees of freedom.
SpearmanResult spearman(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Exact two-sided permutation p-value for Spearman's rho (n <= 10).
double spearman_permutation_p(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double regularized_incomplete_beta(double x, double a, double b);
double student_t_cdf(double t, double dof);

enum class RankCase { Causal, Effect, GbtImp, LrImp, FCorr };
std::string to_string(RankCase c);

struct RankEntry {
    std::string variable;
    double score = 0.0; // signed as produced; ranking uses |score|
    int rank = 0;       // competition rank (ties share the minimal rank)
};

struct RankTable {
    RankCase kind = RankCase::FCorr;
    std::string method; // CSD method for causal/effect tables, empty otherwise
    std::vector<RankEntry> entries;
};

/// Order by descending |score| and assign competition ranks; ties broken by
/// variable name for display determinism.
RankTable rank_by_score(RankCase kind, const std::string& method,
                        const std::map<std::string, double>& scores);

struct CauseEffectScores {
    std::map<std::string, double> causal; // v -> |weight of v -> target|
    std::map<std::string, double> effect; // v -> |weight of target -> v|
};

/// Read cause/effect strengths for `target` off a weighted adjacency
/// (entry [i][j] = strength of i -> j). Entries with |w| < edge_threshold or
/// |w| == 0 are not edges.
CauseEffectScores extract_cause_effect(const Eigen::MatrixXd& adjacency,
                                       const std::vector<std::string>& names,
                                       const std::string& target,
                                       double edge_threshold);

struct ConcordancePair {
    RankCase case_x = RankCase::Causal;
    RankCase case_y = RankCase::FCorr;
    std::string method;
    double rho = 0.0;
    double p_value = 1.0;
    bool significant = false;
    bool sufficient = true; // false when the tables share fewer than 4 variables
    int shared = 0;
};

struct ConcordanceReport {
    double alpha = 0.05;
    std::vector<ConcordancePair> pairs;
};

/// Spearman concordance of two rank tables over their shared variables
/// (by |score|). Throws InsufficientOverlapError when fewer than 4 are shared.
ConcordancePair concordance_pair(const RankTable& x, const RankTable& y, double alpha);

/// All (causal|effect) x (f_corr|gbt_imp|lr_imp) pairs per CSD method found in
/// `tables`; pairs with insufficient overlap are reported with sufficient=false
/// instead of aborting the run.
ConcordanceReport concordance(const std::vector<RankTable>& tables, double alpha);

} // namespace csd
