#pragma once

#include "toponet/dataset.hpp"
#include "toponet/network.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace toponet {

enum class Schedule { Step, Cosine };
enum class SparsityType { None, Uniform, Adaptive };

struct TrainConfig {
    int epochs = 100;
    int batch_size = 64;
    double lr = 0.1;
    Schedule schedule = Schedule::Cosine;
    std::vector<int> milestones; // Step
    double factor = 0.2;         // Step
    double momentum = 0.9;
    bool nesterov = true;
    double weight_decay = 0.0; // network weights only, never alpha
    double lambda = 1e-4;
    SparsityType sparsity = SparsityType::None;
    double label_smoothing = 0.0;
    uint64_t seed = 0;
    std::vector<int> snapshot_epochs; // 0 = initial state
    bool freeze_alpha = false;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0, task_loss = 0, l1_alpha = 0;
    double train_acc = 0, val_acc = 0, frac_alpha_small = 0, lr = 0;
};

struct Metrics {
    std::vector<EpochRecord> records;
};

// Frozen copy of per-stage (graph, alpha) at one epoch.
struct Snapshot {
    int epoch = 0;
    std::vector<Graph> graphs;
    std::vector<AlphaMatrix> alphas;
};

struct TrainResult {
    Metrics metrics;
    std::vector<Snapshot> snapshots;
};

// Task loss plus lambda * sum |alpha|. The L1 term enters gradients through
// sparsity_subgradient, not the tape.
Tensor total_loss(Tape& tape, const Tensor& task_loss, double l1_alpha, double lambda,
                  SparsityType type);

// Direct L1 subgradient: uniform lambda*sign(alpha), adaptive scaled by
// ln(in-degree) of the destination node. sign(0) = 0.
double sparsity_subgradient(double alpha_value, double lambda, SparsityType type, int in_degree);

// SGD with (Nesterov) momentum. Throws on non-finite gradients.
void sgd_step(const std::vector<Parameter*>& params, double lr, double momentum,
              bool nesterov, double weight_decay);

double lr_at(const TrainConfig& config, int epoch);

TrainResult train(Network& net, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& config,
                  const std::function<void(int)>& epoch_hook = {});

void write_metrics_csv(std::ostream& os, const Metrics& m);
std::string metrics_to_csv(const Metrics& m);

} // namespace toponet
