#pragma once

#include "csd/dataset.hpp"
#include "csd/likelihood.hpp"
#include "csd/lingam.hpp"
#include "csd/mlmodels.hpp"
#include "csd/notears.hpp"
#include "csd/synth.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csd {

struct SynthParams {
    Eigen::Index n_vars = 8;
    Eigen::Index samples = 1000;
    double edge_prob = 0.3;
    bool linear = false;
    NoiseKind noise = NoiseKind::Uniform;
    double noise_scale = 1.0;
    int outcome_parent_count = 3;
    double outcome_weight = 4.0;
};

struct PipelineConfig {
    std::string data_path;
    std::string schema_path;
    std::string out_dir = ".";
    std::uint64_t seed = 42;
    double alpha = 0.05;
    bool run_lingam = true;
    bool run_notears = true;
    bool run_gbt = true;
    bool run_logreg = true;
    LikelihoodConfig likelihood;
    bool standardize_likelihood = false;
    double lingam_prune_threshold = 0.05;
    NotearsConfig notears;
    GbtConfig gbt;
    LogRegConfig logreg;
    int cv_repetitions = 10;
    SynthParams synth;
    std::string eval_truth;
    std::vector<std::string> eval_graphs;
};

/// Flat dotted config keys with one-line help, in declaration order; the same
/// names work in the config file and as CLI flags.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// Apply one `key=value` entry; unknown keys and malformed values throw
/// ValidationError.
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Read a flat key=value config file ('#' comments allowed).
void load_config_file(PipelineConfig& cfg, const std::string& path);

/// Deterministic per-module child seed of the root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag);

// Subcommand entry points. Errors are reported on stderr and mapped to the
// stable exit-code contract: 0 ok, 1 internal, 2 config/input, 3 data
// degeneracy, 4 evaluation mismatch.
int cmd_discover(const PipelineConfig& cfg);
int cmd_synth(const PipelineConfig& cfg);
int cmd_eval(const PipelineConfig& cfg);

} // namespace csd
