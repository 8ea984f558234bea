#pragma once

#include "toponet/dataset.hpp"
#include "toponet/network.hpp"
#include "toponet/trainer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace toponet {

struct SweepPoint {
    double axis = 0;
    double metric = 0;
    double extra = 0; // pruned fraction for edge sweeps, else unused
};

struct SweepResult {
    std::string axis_name;
    std::string metric_name;
    std::string extra_name;
    double baseline = 0; // metric with nothing removed
    uint64_t seed = 0;
    uint64_t config_hash = 0;
    std::vector<SweepPoint> points;
};

// Evaluate accuracy with each internal node masked out (its outgoing alpha
// zeroed), one node at a time. Axis is a global node index across stages.
// The model is restored exactly afterward.
SweepResult node_ablation_sweep(Network& net, const Dataset& eval_set);

// Per ascending threshold: mask all edges with |alpha| < threshold,
// optionally rebuild and retrain the weights with alpha frozen, evaluate.
SweepResult edge_pruning_sweep(Network& net, const Dataset& eval_set,
                               const std::vector<double>& thresholds, bool retrain,
                               const TrainConfig* retrain_config = nullptr,
                               const Dataset* retrain_set = nullptr);

struct AlphaHistogram {
    std::vector<double> bin_edges;  // num_bins + 1, spanning [min, max]
    std::vector<size_t> counts;     // num_bins
    std::vector<AlphaMatrix> per_stage;
};

AlphaHistogram alpha_histogram(const Network& net, int num_bins);

// Retrain each snapshot's alpha from scratch (fresh weights from the spec
// seed, alpha frozen) and report final validation accuracy per epoch.
SweepResult snapshot_retrain_study(const NetworkSpec& spec,
                                   const std::vector<Snapshot>& snapshots,
                                   const Dataset& train_set, const Dataset& val_set,
                                   const TrainConfig& retrain_config);

void write_sweep_csv(std::ostream& os, const SweepResult& r);
void write_histogram_csv(std::ostream& os, const AlphaHistogram& h);

} // namespace toponet
