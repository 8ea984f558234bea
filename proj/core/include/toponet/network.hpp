#pragma once

#include "toponet/autodiff.hpp"
#include "toponet/graph.hpp"
#include "toponet/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace toponet {

enum class TopologyKind { Complete, Residual, RandomP, ER, BA, WS, Explicit };

struct StageTopoSpec {
    TopologyKind kind = TopologyKind::Complete;
    int interval = 1; // Residual
    double p = 0.5;   // RandomP, ER, WS
    int m = 2;        // BA
    int k = 4;        // WS
    std::vector<std::pair<int, int>> edges; // Explicit
};

struct NetworkSpec {
    std::vector<int> stage_sizes;
    std::vector<StageTopoSpec> topo; // one per stage
    int base_width = 16;
    int input_dim = 2;
    int num_classes = 2;
    uint64_t seed = 0;
};

// Per-internal-node transform parameters: ReLU -> Linear -> BatchNorm.
struct NodeParams {
    Parameter W, b, scale, shift;
    BatchNormState bn;
};

struct StageSpec {
    Graph graph;
    std::vector<Parameter> alpha;  // one scalar per edge, aligned with graph.edges
    std::vector<NodeParams> nodes; // graph.n_nodes - 2 entries
    int width_in = 0, width_out = 0;
    StageTopoSpec topo;

    AlphaMatrix alpha_matrix() const;
    void set_alpha(const AlphaMatrix& a);
};

struct Network {
    NetworkSpec spec;
    Parameter head_W, head_b;
    std::vector<StageSpec> stages;
    Parameter cls_W, cls_b;

    std::vector<Parameter*> parameters();
    std::vector<Parameter*> alpha_parameters();
    void zero_grad();
    std::vector<AlphaMatrix> alpha_matrices() const;
    void install_alpha(const std::vector<AlphaMatrix>& mats);
};

enum class Mode { Train, Eval };

// Aggregated pre-transform inputs x'_i per stage per node, for inspection.
struct ForwardTrace {
    std::vector<std::vector<Tensor>> agg; // [stage][node]; empty tensor when unused
};

// Alpha init 1 on edges, He-normal linear weights, norm scale 1 / shift 0.
// Deterministic given spec.seed.
Network build_network(const NetworkSpec& spec);

// Topological forward of Eq-style aggregation: node 0 distributes the stage
// input, internal node i computes ReLU->Linear->Norm of sum alpha_ji x_j,
// the output node aggregates only. When a stage widens, the stage input's
// contribution to width_out aggregations is zero-padded.
Tensor forward(Network& net, Tape& tape, const Tensor& batch, Mode mode,
               ForwardTrace* trace = nullptr);
Tensor forward(Network& net, const Tensor& batch, Mode mode);

// Reference residual implementation: explicit running sum over blocks,
// reusing the same node parameters. Requires every stage to be a residual
// topology with all alpha equal to 1. Never touches running stats.
Tensor natural_residual_forward(Network& net, const Tensor& batch, Mode mode = Mode::Eval);

// Double-precision loss evaluation over the same math, used as the
// finite-difference oracle for gradient checking. Running stats untouched
// in either mode.
double forward_loss_fp64(const Network& net, const Tensor& batch,
                         const std::vector<int>& labels, float smoothing,
                         Mode mode = Mode::Train);

std::vector<int> predict(Network& net, const Tensor& batch);
double accuracy(Network& net, const Tensor& X, const std::vector<int>& y);

// Hash of all parameter values and running stats (not gradients).
uint64_t state_hash(const Network& net);

} // namespace toponet
