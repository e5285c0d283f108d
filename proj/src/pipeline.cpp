#include "csd/pipeline.hpp"

#include "csd/analysis.hpp"
#include "csd/errors.hpp"
#include "csd/rng.hpp"
#include "csd/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace csd {

namespace {

namespace fs = std::filesystem;

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ValidationError("config: '" + key + "' expects a number, got '" + value + "'");
    }
    return out;
}

long long parse_int(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ValidationError("config: '" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ValidationError("config: '" + key + "' expects true/false, got '" + value + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Collects artifacts as they are produced so a failed run can still record
// what exists.
class ArtifactSink {
public:
    explicit ArtifactSink(std::string dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        if (!created_) {
            fs::create_directories(dir_);
            created_ = true;
        }
        write_text_file((fs::path(dir_) / name).string(), content);
        files_.push_back(name);
    }

    bool any_written() const { return !files_.empty(); }

    void write_manifest(const std::string& status, const std::string& error = "") {
        std::ostringstream out;
        out << "status=" << status << "\n";
        if (!error.empty()) out << "error=" << error << "\n";
        for (const auto& f : files_) out << "file=" << f << "\n";
        write("MANIFEST", out.str());
    }

private:
    std::string dir_;
    bool created_ = false;
    std::vector<std::string> files_;
};

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const EvalMismatchError*>(&e)) return 4;
    if (dynamic_cast<const DegenerateDataError*>(&e) || dynamic_cast<const ConvergenceError*>(&e)) {
        return 3;
    }
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
        dynamic_cast<const ValidationError*>(&e)) {
        return 2;
    }
    return 1;
}

std::string markdown_rank_table(const RankTable& table) {
    std::ostringstream out;
    out << "| variable | score | rank |\n|---|---|---|\n";
    for (const auto& e : table.entries) {
        out << "| " << e.variable << " | " << format_number(e.score) << " | " << e.rank << " |\n";
    }
    return out.str();
}

struct MethodOutputs {
    std::string method;            // "lingam" or "notears"
    Eigen::MatrixXd adjacency;     // signed strengths (lingam) or norms (notears)
    double edge_threshold = 0.0;   // 0 for lingam (pruned), omega for notears
};

} // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"data", "input CSV path (discover)"},
        {"schema", "schema sidecar path (discover)"},
        {"out", "output directory"},
        {"seed", "root random seed"},
        {"alpha", "significance level for rank concordance"},
        {"method", "CSD methods to run: lingam|notears|both"},
        {"importance", "importance models to run: gbt|logreg|both"},
        {"likelihood.learning_rate", "classifier learning rate"},
        {"likelihood.batch_size", "classifier mini-batch size"},
        {"likelihood.max_epochs", "classifier epoch cap"},
        {"likelihood.accuracy_target", "training-accuracy early-stop target"},
        {"likelihood.standardize_score", "standardize the appended score column"},
        {"lingam.prune_threshold", "zero adjacency entries below this magnitude"},
        {"notears.hidden_width", "regressor hidden width"},
        {"notears.lambda1", "L1 strength on first-layer weights"},
        {"notears.weight_decay", "L2 on non-first-layer weights inside the fit"},
        {"notears.omega", "edge threshold on the aggregated adjacency"},
        {"notears.h_tol", "acyclicity tolerance"},
        {"notears.rho_max", "penalty growth cap"},
        {"notears.max_dual_steps", "augmented-Lagrangian iteration cap"},
        {"notears.inner_iterations", "quasi-Newton steps per dual iteration"},
        {"gbt.n_trees", "boosting rounds"},
        {"gbt.max_depth", "tree depth cap"},
        {"gbt.learning_rate", "shrinkage"},
        {"gbt.min_samples_leaf", "minimum samples per leaf"},
        {"logreg.l2_penalty", "L2 strength on coefficients"},
        {"cv.repetitions", "outer repetitions of the 2-fold split"},
        {"synth.n", "synthetic node count"},
        {"synth.b", "synthetic sample count"},
        {"synth.edge_prob", "forward-edge probability"},
        {"synth.kind", "mechanisms: linear|nonlinear"},
        {"synth.noise", "noise law: uniform|laplace|gaussian"},
        {"synth.noise_scale", "noise scale"},
        {"synth.outcome_parents", "number of outcome parent variables"},
        {"synth.outcome_weight", "outcome logistic weight magnitude"},
        {"eval.truth", "ground-truth SEM spec JSON (eval)"},
        {"eval.graphs", "comma-separated estimated graph JSONs (eval)"},
    };
    return keys;
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "data") cfg.data_path = value;
    else if (key == "schema") cfg.schema_path = value;
    else if (key == "out") cfg.out_dir = value;
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "alpha") cfg.alpha = parse_double(key, value);
    else if (key == "method") {
        if (value == "lingam") { cfg.run_lingam = true; cfg.run_notears = false; }
        else if (value == "notears") { cfg.run_lingam = false; cfg.run_notears = true; }
        else if (value == "both") { cfg.run_lingam = true; cfg.run_notears = true; }
        else throw ValidationError("config: method must be lingam|notears|both");
    } else if (key == "importance") {
        if (value == "gbt") { cfg.run_gbt = true; cfg.run_logreg = false; }
        else if (value == "logreg") { cfg.run_gbt = false; cfg.run_logreg = true; }
        else if (value == "both") { cfg.run_gbt = true; cfg.run_logreg = true; }
        else throw ValidationError("config: importance must be gbt|logreg|both");
    } else if (key == "likelihood.learning_rate") cfg.likelihood.learning_rate = parse_double(key, value);
    else if (key == "likelihood.batch_size") cfg.likelihood.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "likelihood.max_epochs") cfg.likelihood.max_epochs = static_cast<int>(parse_int(key, value));
    else if (key == "likelihood.accuracy_target") cfg.likelihood.accuracy_target = parse_double(key, value);
    else if (key == "likelihood.standardize_score") cfg.standardize_likelihood = parse_bool(key, value);
    else if (key == "lingam.prune_threshold") cfg.lingam_prune_threshold = parse_double(key, value);
    else if (key == "notears.hidden_width") cfg.notears.hidden_width = static_cast<int>(parse_int(key, value));
    else if (key == "notears.lambda1") cfg.notears.lambda1 = parse_double(key, value);
    else if (key == "notears.weight_decay") cfg.notears.weight_decay = parse_double(key, value);
    else if (key == "notears.omega") cfg.notears.omega = parse_double(key, value);
    else if (key == "notears.h_tol") cfg.notears.h_tol = parse_double(key, value);
    else if (key == "notears.rho_max") cfg.notears.rho_max = parse_double(key, value);
    else if (key == "notears.max_dual_steps") cfg.notears.max_dual_steps = static_cast<int>(parse_int(key, value));
    else if (key == "notears.inner_iterations") cfg.notears.inner_iterations = static_cast<int>(parse_int(key, value));
    else if (key == "gbt.n_trees") cfg.gbt.n_trees = static_cast<int>(parse_int(key, value));
    else if (key == "gbt.max_depth") cfg.gbt.max_depth = static_cast<int>(parse_int(key, value));
    else if (key == "gbt.learning_rate") cfg.gbt.learning_rate = parse_double(key, value);
    else if (key == "gbt.min_samples_leaf") cfg.gbt.min_samples_leaf = static_cast<int>(parse_int(key, value));
    else if (key == "logreg.l2_penalty") cfg.logreg.l2_penalty = parse_double(key, value);
    else if (key == "cv.repetitions") cfg.cv_repetitions = static_cast<int>(parse_int(key, value));
    else if (key == "synth.n") cfg.synth.n_vars = static_cast<Eigen::Index>(parse_int(key, value));
    else if (key == "synth.b") cfg.synth.samples = static_cast<Eigen::Index>(parse_int(key, value));
    else if (key == "synth.edge_prob") cfg.synth.edge_prob = parse_double(key, value);
    else if (key == "synth.kind") {
        if (value == "linear") cfg.synth.linear = true;
        else if (value == "nonlinear") cfg.synth.linear = false;
        else throw ValidationError("config: synth.kind must be linear|nonlinear");
    } else if (key == "synth.noise") cfg.synth.noise = noise_kind_from_string(value);
    else if (key == "synth.noise_scale") cfg.synth.noise_scale = parse_double(key, value);
    else if (key == "synth.outcome_parents") cfg.synth.outcome_parent_count = static_cast<int>(parse_int(key, value));
    else if (key == "synth.outcome_weight") cfg.synth.outcome_weight = parse_double(key, value);
    else if (key == "eval.truth") cfg.eval_truth = value;
    else if (key == "eval.graphs") {
        cfg.eval_graphs.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!trim(item).empty()) cfg.eval_graphs.push_back(trim(item));
        }
    } else {
        throw ValidationError("config: unknown key '" + key + "'");
    }
}

void load_config_file(PipelineConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
    return Rng(root).derive(tag).next_u64();
}

namespace {

void run_discover(const PipelineConfig& cfg, ArtifactSink& sink) {
    if (!cfg.run_lingam && !cfg.run_notears) {
        throw ValidationError("discover: at least one CSD method must be selected");
    }
    if (!cfg.run_gbt && !cfg.run_logreg) {
        throw ValidationError("discover: at least one importance model must be selected");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw ValidationError("discover: alpha must lie in (0,1)");
    }
    if (cfg.data_path.empty() || cfg.schema_path.empty()) {
        throw ValidationError("discover: data and schema paths are required");
    }

    const std::vector<ColumnSchema> schema = load_schema(cfg.schema_path);
    const Dataset raw = load_csv(cfg.data_path, schema);
    const Dataset imputed = impute_median(raw);
    auto [standardized_ds, scaling] = standardize(imputed);

    const auto [mlp, likelihood_result] =
        train_likelihood_mlp(standardized_ds, cfg.likelihood, derive_seed(cfg.seed, "likelihood"));
    Dataset cohort = augment_with_likelihood(standardized_ds, likelihood_result);
    if (cfg.standardize_likelihood) {
        const Eigen::Index c = cohort.var_count() - 1;
        const double mean = cohort.values.col(c).mean();
        const double sd = std::sqrt((cohort.values.col(c).array() - mean).square().sum() /
                                    static_cast<double>(cohort.row_count()));
        if (!(sd > 0.0)) throw DegenerateDataError("likelihood column has zero variance");
        cohort.values.col(c) = (cohort.values.col(c).array() - mean) / sd;
    }

    const std::vector<std::string> node_names = cohort.predictor_names();

    std::vector<MethodOutputs> methods;
    if (cfg.run_lingam) {
        const CausalOrder order = causal_order(cohort.values);
        const LingamResult lingam =
            estimate_adjacency(cohort.values, order, cfg.lingam_prune_threshold);
        sink.write("adjacency.lingam.json", lingam_to_json(lingam, node_names));
        sink.write("graph.lingam.dot",
                   graph_to_dot(lingam.adjacency, node_names, 0.0, "lingam"));
        methods.push_back({"lingam", lingam.adjacency, 0.0});
    }
    if (cfg.run_notears) {
        const WeightedDigraph graph = fit_notears_mlp(cohort.values, node_names, cfg.notears,
                                                      derive_seed(cfg.seed, "notears"));
        sink.write("adjacency.notears.json", digraph_to_json(graph));
        sink.write("graph.notears.dot",
                   graph_to_dot(graph.weights, graph.names, graph.omega, "notears"));
        methods.push_back({"notears", graph.weights, graph.omega});
    }

    // Feature-likelihood correlations on the kept cohort (Pearson is
    // scale-invariant, so the standardized predictors are fine).
    const Eigen::VectorXd likelihood_column = cohort.values.col(cohort.var_count() - 1);
    std::map<std::string, double> f_corr_scores;
    std::vector<std::pair<std::string, double>> correlations;
    for (Eigen::Index c = 0; c + 1 < cohort.var_count(); ++c) {
        const std::string& name = node_names[static_cast<std::size_t>(c)];
        try {
            const double r = pearson(cohort.values.col(c), likelihood_column);
            f_corr_scores[name] = r;
        } catch (const DegenerateDataError&) {
            // a predictor can be constant within the kept cohort; it carries no
            // correlation signal and is left out of the table
        }
    }
    for (const auto& [name, r] : f_corr_scores) correlations.emplace_back(name, r);
    std::sort(correlations.begin(), correlations.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    sink.write("pearson.csv", pearson_table_to_csv(correlations));

    std::vector<RankTable> tables;
    for (const auto& method : methods) {
        const CauseEffectScores scores = extract_cause_effect(
            method.adjacency, node_names, kLikelihoodColumn, method.edge_threshold);
        for (const RankCase kind : {RankCase::Causal, RankCase::Effect}) {
            const auto& score_map = kind == RankCase::Causal ? scores.causal : scores.effect;
            const std::string file = "ranks." + to_string(kind) + "." + method.method + ".csv";
            if (score_map.empty()) {
                sink.write(file, "variable,score,rank\n");
                continue;
            }
            const RankTable table = rank_by_score(kind, method.method, score_map);
            sink.write(file, rank_table_to_csv(table));
            tables.push_back(table);
        }
    }

    if (cfg.run_gbt) {
        const ImportanceResult imp =
            cross_validated_importance(cohort, ImportanceModel::Gbt,
                                       derive_seed(cfg.seed, "importance-gbt"), cfg.gbt,
                                       cfg.logreg, cfg.cv_repetitions);
        std::map<std::string, double> scores;
        for (std::size_t k = 0; k < imp.variables.size(); ++k) {
            scores[imp.variables[k]] = imp.scores(static_cast<Eigen::Index>(k));
        }
        const RankTable table = rank_by_score(RankCase::GbtImp, "", scores);
        sink.write("ranks.gbt_imp.csv", rank_table_to_csv(table));
        tables.push_back(table);
    }
    if (cfg.run_logreg) {
        const ImportanceResult imp =
            cross_validated_importance(cohort, ImportanceModel::LogReg,
                                       derive_seed(cfg.seed, "importance-logreg"), cfg.gbt,
                                       cfg.logreg, cfg.cv_repetitions);
        std::map<std::string, double> scores;
        for (std::size_t k = 0; k < imp.variables.size(); ++k) {
            scores[imp.variables[k]] = imp.scores(static_cast<Eigen::Index>(k));
        }
        const RankTable table = rank_by_score(RankCase::LrImp, "", scores);
        sink.write("ranks.lr_imp.csv", rank_table_to_csv(table));
        tables.push_back(table);
    }

    if (!f_corr_scores.empty()) {
        const RankTable table = rank_by_score(RankCase::FCorr, "", f_corr_scores);
        sink.write("ranks.f_corr.csv", rank_table_to_csv(table));
        tables.push_back(table);
    } else {
        sink.write("ranks.f_corr.csv", "variable,score,rank\n");
    }

    const ConcordanceReport report = concordance(tables, cfg.alpha);
    sink.write("concordance.csv", concordance_to_csv(report));

    // report.md: one section per experimental case actually run, fixed order.
    std::ostringstream md;
    md << "# Causal discovery report\n\n";
    md << "Rows: " << raw.row_count() << ", predictors: " << raw.var_count()
       << ", kept after filtering: " << cohort.row_count() << "\n\n";
    md << "Likelihood classifier: training accuracy "
       << format_number(likelihood_result.train_accuracy) << " after "
       << likelihood_result.epochs_run << " epochs (class weights w0="
       << format_number(likelihood_result.w0) << ", w1=" << format_number(likelihood_result.w1)
       << ").\n\n";
    for (const RankCase kind :
         {RankCase::Causal, RankCase::Effect, RankCase::GbtImp, RankCase::LrImp, RankCase::FCorr}) {
        bool any = false;
        for (const auto& table : tables) {
            if (table.kind != kind) continue;
            if (!any) md << "## " << to_string(kind) << "\n\n";
            any = true;
            if (!table.method.empty()) md << "### " << table.method << "\n\n";
            md << markdown_rank_table(table) << "\n";
        }
    }
    md << "## concordance\n\n| X | Y | method | rho | p_value | significant |\n|---|---|---|---|---|---|\n";
    for (const auto& p : report.pairs) {
        md << "| " << to_string(p.case_x) << " | " << to_string(p.case_y) << " | " << p.method
           << " | " << format_number(p.rho) << " | " << format_number(p.p_value) << " | "
           << (p.significant ? "yes" : "no") << " |\n";
    }
    md << "\n## notes\n\n";
    md << "- The 90% early-stop criterion is evaluated on training accuracy; no held-out split.\n";
    md << "- The appended likelihood column is "
       << (cfg.standardize_likelihood ? "standardized" : "left on its (0,1) scale") << ".\n";
    for (const auto& method : methods) {
        if (method.method == "notears") {
            md << "- notears edge threshold in effect: " << format_number(method.edge_threshold)
               << "\n";
        }
    }
    sink.write("report.md", md.str());
    sink.write_manifest("complete");
}

} // namespace

int cmd_discover(const PipelineConfig& cfg) {
    ArtifactSink sink(cfg.out_dir);
    try {
        run_discover(cfg, sink);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "discover failed: " << e.what() << "\n";
        if (sink.any_written()) {
            sink.write_manifest("partial", e.what());
        }
        return exit_code_for(e);
    }
}

int cmd_synth(const PipelineConfig& cfg) {
    try {
        const SynthParams& sp = cfg.synth;
        if (sp.n_vars < 2) throw ValidationError("synth: need at least 2 nodes");
        if (sp.outcome_parent_count < 1 ||
            sp.outcome_parent_count > static_cast<int>(sp.n_vars)) {
            throw ValidationError("synth: outcome parent count out of range");
        }

        SemSpec spec = sp.linear
                           ? make_random_linear_sem(sp.n_vars, sp.edge_prob, sp.noise,
                                                    derive_seed(cfg.seed, "sem"))
                           : make_random_nonlinear_sem(sp.n_vars, sp.edge_prob, sp.noise,
                                                       derive_seed(cfg.seed, "sem"));
        spec.noise_scale = sp.noise_scale;

        Rng parent_rng = Rng(cfg.seed).derive("outcome-parents");
        const std::vector<std::size_t> perm = parent_rng.permutation(static_cast<std::size_t>(sp.n_vars));
        for (int k = 0; k < sp.outcome_parent_count; ++k) {
            spec.outcome_parents.push_back(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(k)]));
            spec.outcome_weights.push_back(parent_rng.bernoulli(0.5) ? sp.outcome_weight
                                                                     : -sp.outcome_weight);
        }
        std::sort(spec.outcome_parents.begin(), spec.outcome_parents.end());

        if (linear_identifiability_warning(spec)) {
            std::cerr << "warning: gaussian noise on a linear SEM is not identifiable for the "
                         "linear method\n";
        }

        const Eigen::MatrixXd x = spec.linear
                                      ? sample_linear_sem(spec, sp.samples, derive_seed(cfg.seed, "x"))
                                      : sample_nonlinear_sem(spec, sp.samples, derive_seed(cfg.seed, "x"));
        const Eigen::VectorXd y = attach_binary_outcome(x, spec.outcome_parents,
                                                        spec.outcome_weights,
                                                        derive_seed(cfg.seed, "y"));

        Dataset ds;
        std::vector<std::string> names;
        for (Eigen::Index j = 0; j < sp.n_vars; ++j) {
            names.push_back("x" + std::to_string(j));
            ds.schema.push_back({names.back(), ColumnKind::Continuous});
        }
        ds.schema.push_back({"outcome", ColumnKind::Target});
        ds.target_name = "outcome";
        ds.values = x;
        ds.target = y;

        fs::create_directories(cfg.out_dir);
        write_csv(ds, (fs::path(cfg.out_dir) / "data.csv").string());
        write_schema(ds.schema, (fs::path(cfg.out_dir) / "schema.csv").string());
        write_text_file((fs::path(cfg.out_dir) / "semspec.json").string(),
                        semspec_to_json(spec, names));
        std::cout << "synth: wrote " << sp.samples << " rows over " << sp.n_vars
                  << " variables (positive rate " << format_number(y.mean()) << ")\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "synth failed: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int cmd_eval(const PipelineConfig& cfg) {
    try {
        if (cfg.eval_truth.empty() || cfg.eval_graphs.empty()) {
            throw ValidationError("eval: eval.truth and eval.graphs are required");
        }
        const LoadedSemSpec truth = semspec_from_json(read_text_file(cfg.eval_truth));
        const Eigen::Index n = truth.spec.n_vars();

        std::vector<std::pair<std::string, RecoveryMetrics>> rows;
        std::ostringstream line;
        for (const auto& path : cfg.eval_graphs) {
            const LoadedGraph est = graph_from_json(read_text_file(path));
            Eigen::MatrixXi binary = Eigen::MatrixXi::Zero(n, n);
            std::vector<Eigen::Index> lookup(static_cast<std::size_t>(n));
            for (Eigen::Index t = 0; t < n; ++t) {
                const auto it = std::find(est.names.begin(), est.names.end(),
                                          truth.names[static_cast<std::size_t>(t)]);
                if (it == est.names.end()) {
                    throw EvalMismatchError("eval: variable '" + truth.names[static_cast<std::size_t>(t)] +
                                            "' missing from graph '" + path + "'");
                }
                lookup[static_cast<std::size_t>(t)] = static_cast<Eigen::Index>(it - est.names.begin());
            }
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const double w = est.weights(lookup[static_cast<std::size_t>(i)],
                                                 lookup[static_cast<std::size_t>(j)]);
                    if (std::abs(w) > 0.0 && std::abs(w) >= est.threshold) binary(i, j) = 1;
                }
            }
            const RecoveryMetrics m = structural_metrics(binary, truth.spec.dag);
            rows.emplace_back(est.kind, m);
            if (!line.str().empty()) line << " | ";
            line << est.kind << " shd=" << m.shd << " f1=" << format_number(m.edge_f1);
        }

        fs::create_directories(cfg.out_dir);
        write_text_file((fs::path(cfg.out_dir) / "metrics.csv").string(), metrics_to_csv(rows));
        std::cout << line.str() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "eval failed: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace csd
