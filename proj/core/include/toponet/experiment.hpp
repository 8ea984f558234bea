#pragma once

#include "toponet/config.hpp"

#include <optional>
#include <string>

namespace toponet {

struct CliOverrides {
    std::optional<std::string> output_dir;
    std::optional<uint64_t> seed;
};

// Full experiment: dataset, training with checkpoints at snapshot epochs,
// metrics.csv, configured analysis sweeps, topology exports and a manifest.
// Throws on any failure; never leaves a partial run silently.
void run_experiment(const std::string& config_path, const CliOverrides& overrides = {});

// Analysis sweeps against an existing checkpoint.
void analyze_checkpoint(const std::string& checkpoint_path, const std::string& config_path,
                        const CliOverrides& overrides = {});

std::string inspect_checkpoint(const std::string& checkpoint_path);

// Topology generation from a JSON spec, emitted in the graph text format.
std::string generate_topology(const std::string& spec_json);

} // namespace toponet
