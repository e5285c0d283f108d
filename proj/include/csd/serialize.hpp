#pragma once

#include "csd/analysis.hpp"
#include "csd/lingam.hpp"
#include "csd/notears.hpp"
#include "csd/synth.hpp"

#include <string>
#include <vector>

namespace csd {

std::string lingam_to_json(const LingamResult& result, const std::vector<std::string>& names);
std::string digraph_to_json(const WeightedDigraph& graph);

/// Estimated graph loaded back from either adjacency JSON layout. `weights`
/// keeps signed strengths; `threshold` is the edge rule that was stored
/// (omega for the nonlinear method, 0 for the pruned linear adjacency).
struct LoadedGraph {
    Eigen::MatrixXd weights;
    std::vector<std::string> names;
    double threshold = 0.0;
    std::string kind; // "lingam" or "notears"
};

LoadedGraph graph_from_json(const std::string& text);

/// Directed edges of the thresholded support, rendered as DOT with strengths
/// rounded to two decimals.
std::string graph_to_dot(const Eigen::MatrixXd& weights, const std::vector<std::string>& names,
                         double threshold, const std::string& graph_name);

std::string semspec_to_json(const SemSpec& spec, const std::vector<std::string>& names);

struct LoadedSemSpec {
    SemSpec spec;
    std::vector<std::string> names;
};

LoadedSemSpec semspec_from_json(const std::string& text);

std::string rank_table_to_csv(const RankTable& table);
std::string concordance_to_csv(const ConcordanceReport& report);
std::string pearson_table_to_csv(const std::vector<std::pair<std::string, double>>& correlations);
std::string metrics_to_csv(const std::vector<std::pair<std::string, RecoveryMetrics>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Shortest round-trip decimal rendering.
std::string format_number(double v);

} // namespace csd
