#include "csd/errors.hpp"
#include "csd/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

// Options land here in parse order so the file config stays overridable by
// explicit flags.
struct ParsedArgs {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_config_flags(CLI::App& app, ParsedArgs& parsed) {
    app.add_option_function<std::string>(
        "--config", [&parsed](const std::string& v) { parsed.config_path = v; },
        "flat key=value config file");
    for (const auto& [key, help] : csd::config_keys()) {
        app.add_option_function<std::string>(
            "--" + key,
            [&parsed, key = key](const std::string& v) { parsed.overrides.emplace_back(key, v); },
            help);
    }
}

csd::PipelineConfig build_config(const ParsedArgs& parsed) {
    csd::PipelineConfig cfg;
    if (!parsed.config_path.empty()) csd::load_config_file(cfg, parsed.config_path);
    for (const auto& [key, value] : parsed.overrides) csd::apply_config_entry(cfg, key, value);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal structure discovery for binary outcomes"};
    app.require_subcommand(1);

    ParsedArgs discover_args, synth_args, eval_args;
    CLI::App* discover = app.add_subcommand("discover", "run the full discovery pipeline");
    add_config_flags(*discover, discover_args);
    CLI::App* synth = app.add_subcommand("synth", "sample a synthetic benchmark dataset");
    add_config_flags(*synth, synth_args);
    CLI::App* eval = app.add_subcommand("eval", "score estimated graphs against a known SEM");
    add_config_flags(*eval, eval_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (discover->parsed()) return csd::cmd_discover(build_config(discover_args));
        if (synth->parsed()) return csd::cmd_synth(build_config(synth_args));
        if (eval->parsed()) return csd::cmd_eval(build_config(eval_args));
    } catch (const csd::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 2;
}
