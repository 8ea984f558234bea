#pragma once

#include "toponet/network.hpp"
#include "toponet/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace toponet {

enum class DataSource { Spirals, Blobs, Csv, Idx };

struct DataSpec {
    DataSource source = DataSource::Spirals;
    size_t n = 1000;       // synthetic sources
    double noise = 0.1;    // synthetic sources
    int clusters = 3;      // blobs
    std::string path;      // csv
    std::string images, labels; // idx
    double train_fraction = 0.8;
};

struct PruneSpec {
    bool enabled = false;
    std::vector<double> thresholds;
    bool retrain = false;
    int retrain_epochs = 50;
};

struct SnapshotRetrainSpec {
    bool enabled = false;
    int retrain_epochs = 50;
};

struct AnalysisSpec {
    bool node_ablation = false;
    int histogram_bins = 0; // 0 = off
    PruneSpec edge_pruning;
    SnapshotRetrainSpec snapshot_retrain;
};

struct ExperimentConfig {
    NetworkSpec arch; // seed filled from the experiment seed
    DataSpec data;
    TrainConfig train;
    AnalysisSpec analysis;
    std::string output_dir;
    uint64_t seed = 0;
    uint64_t hash = 0; // of the canonical config document, output_dir excluded
};

// Parses and validates a config document. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

} // namespace toponet
