#include "csd/serialize.hpp"

#include "csd/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace csd {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw ParseError("graph JSON: matrix must be a nonempty array");
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != c) {
            throw ParseError("graph JSON: ragged matrix");
        }
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
        }
    }
    return m;
}

std::string quote_dot(const std::string& s) {
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"' || ch == '\\') out.push_back('\\');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string lingam_to_json(const LingamResult& result, const std::vector<std::string>& names) {
    json j;
    j["order"] = result.order.order;
    j["adjacency"] = matrix_to_json(result.adjacency);
    j["names"] = names;
    return j.dump(2) + "\n";
}

std::string digraph_to_json(const WeightedDigraph& graph) {
    json j;
    j["names"] = graph.names;
    j["W"] = matrix_to_json(graph.weights);
    j["omega"] = graph.omega;
    return j.dump(2) + "\n";
}

LoadedGraph graph_from_json(const std::string& text) {
    const json j = json::parse(text);
    LoadedGraph graph;
    if (j.contains("W")) {
        graph.kind = "notears";
        graph.weights = matrix_from_json(j.at("W"));
        graph.threshold = j.at("omega").get<double>();
    } else if (j.contains("adjacency")) {
        graph.kind = "lingam";
        graph.weights = matrix_from_json(j.at("adjacency"));
        graph.threshold = 0.0;
    } else {
        throw ParseError("graph JSON: expected a 'W' or 'adjacency' key");
    }
    graph.names = j.at("names").get<std::vector<std::string>>();
    if (static_cast<Eigen::Index>(graph.names.size()) != graph.weights.rows() ||
        graph.weights.rows() != graph.weights.cols()) {
        throw ParseError("graph JSON: names/matrix size mismatch");
    }
    return graph;
}

std::string graph_to_dot(const Eigen::MatrixXd& weights, const std::vector<std::string>& names,
                         double threshold, const std::string& graph_name) {
    std::ostringstream out;
    out << "digraph " << graph_name << " {\n";
    out << "  rankdir=LR;\n";
    for (const auto& name : names) out << "  " << quote_dot(name) << ";\n";
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < weights.cols(); ++j) {
            if (i == j) continue;
            const double w = weights(i, j);
            if (std::abs(w) > 0.0 && std::abs(w) >= threshold) {
                out << "  " << quote_dot(names[static_cast<std::size_t>(i)]) << " -> "
                    << quote_dot(names[static_cast<std::size_t>(j)]) << " [label="
                    << quote_dot(two_decimals(w)) << "];\n";
            }
        }
    }
    out << "}\n";
    return out.str();
}

std::string semspec_to_json(const SemSpec& spec, const std::vector<std::string>& names) {
    json j;
    j["names"] = names;
    json dag = json::array();
    for (Eigen::Index i = 0; i < spec.dag.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < spec.dag.cols(); ++k) row.push_back(spec.dag(i, k));
        dag.push_back(std::move(row));
    }
    j["dag"] = std::move(dag);
    j["linear"] = spec.linear;
    if (spec.linear) j["weights"] = matrix_to_json(spec.weights);
    j["mechanism_seed"] = spec.mechanism_seed;
    j["nonlinear_width"] = spec.nonlinear_width;
    j["noise"] = to_string(spec.noise);
    j["noise_scale"] = spec.noise_scale;
    j["outcome_parents"] = spec.outcome_parents;
    j["outcome_weights"] = spec.outcome_weights;
    return j.dump(2) + "\n";
}

LoadedSemSpec semspec_from_json(const std::string& text) {
    const json j = json::parse(text);
    LoadedSemSpec loaded;
    const auto& dag = j.at("dag");
    const Eigen::Index n = static_cast<Eigen::Index>(dag.size());
    loaded.spec.dag = Eigen::MatrixXi::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            loaded.spec.dag(i, k) = dag[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<int>();
        }
    }
    loaded.spec.linear = j.at("linear").get<bool>();
    if (loaded.spec.linear) loaded.spec.weights = matrix_from_json(j.at("weights"));
    loaded.spec.mechanism_seed = j.at("mechanism_seed").get<std::uint64_t>();
    loaded.spec.nonlinear_width = j.at("nonlinear_width").get<int>();
    loaded.spec.noise = noise_kind_from_string(j.at("noise").get<std::string>());
    loaded.spec.noise_scale = j.at("noise_scale").get<double>();
    for (const auto& p : j.at("outcome_parents")) {
        loaded.spec.outcome_parents.push_back(p.get<Eigen::Index>());
    }
    for (const auto& w : j.at("outcome_weights")) {
        loaded.spec.outcome_weights.push_back(w.get<double>());
    }
    loaded.names = j.at("names").get<std::vector<std::string>>();
    return loaded;
}

std::string rank_table_to_csv(const RankTable& table) {
    std::ostringstream out;
    out << "variable,score,rank\n";
    for (const auto& e : table.entries) {
        out << e.variable << "," << format_number(e.score) << "," << e.rank << "\n";
    }
    return out.str();
}

std::string concordance_to_csv(const ConcordanceReport& report) {
    std::ostringstream out;
    out << "X,Y,method,rho,p_value,significant\n";
    for (const auto& p : report.pairs) {
        out << to_string(p.case_x) << "," << to_string(p.case_y) << "," << p.method << ","
            << format_number(p.rho) << "," << format_number(p.p_value) << ","
            << (p.significant ? "true" : "false") << "\n";
    }
    return out.str();
}

std::string pearson_table_to_csv(const std::vector<std::pair<std::string, double>>& correlations) {
    std::ostringstream out;
    out << "variable,r\n";
    for (const auto& [name, r] : correlations) out << name << "," << format_number(r) << "\n";
    return out.str();
}

std::string metrics_to_csv(const std::vector<std::pair<std::string, RecoveryMetrics>>& rows) {
    std::ostringstream out;
    out << "method,shd,precision,recall,f1\n";
    for (const auto& [method, m] : rows) {
        out << method << "," << m.shd << "," << format_number(m.edge_precision) << ","
            << format_number(m.edge_recall) << "," << format_number(m.edge_f1) << "\n";
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file '" + path + "'");
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace csd
