#include "toponet/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_spec_arg(const std::string& arg) {
    // inline JSON or a path to a JSON file
    if (!arg.empty() && arg.front() == '{') return arg;
    std::ifstream in(arg);
    if (!in) throw std::runtime_error("cannot open topology spec " + arg);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"toponet: learn DAG connectivity with L1-sparse edge weights"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, topo_spec, out_path;
    toponet::CliOverrides overrides;
    std::string output_dir_flag;
    uint64_t seed_flag = 0;
    bool have_seed = false;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--output-dir", output_dir_flag, "Override the config output directory");
        cmd->add_option("--seed", seed_flag, "Override the config seed")
            ->each([&](const std::string&) { have_seed = true; });
    };

    auto* run = app.add_subcommand("run", "Run a full experiment from a config");
    run->add_option("config", config_path, "Experiment config JSON")->required();
    add_overrides(run);

    auto* analyze = app.add_subcommand("analyze", "Run analysis sweeps on a checkpoint");
    analyze->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
    analyze->add_option("config", config_path, "Experiment config JSON")->required();
    add_overrides(analyze);

    auto* inspect = app.add_subcommand("inspect", "Summarize a checkpoint");
    inspect->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();

    auto* gen = app.add_subcommand("gen-topology", "Generate a topology in the text format");
    gen->add_option("spec", topo_spec, "Topology spec JSON (inline or a file)")->required();
    gen->add_option("--out", out_path, "Write to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!output_dir_flag.empty()) overrides.output_dir = output_dir_flag;
        if (have_seed) overrides.seed = seed_flag;

        if (run->parsed()) {
            toponet::run_experiment(config_path, overrides);
        } else if (analyze->parsed()) {
            toponet::analyze_checkpoint(checkpoint_path, config_path, overrides);
        } else if (inspect->parsed()) {
            std::cout << toponet::inspect_checkpoint(checkpoint_path);
        } else if (gen->parsed()) {
            const std::string text = toponet::generate_topology(read_spec_arg(topo_spec));
            if (out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream os(out_path);
                if (!os) throw std::runtime_error("cannot write " + out_path);
                os << text;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
