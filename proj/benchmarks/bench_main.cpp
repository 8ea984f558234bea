#include "toponet/dataset.hpp"
#include "toponet/network.hpp"
#include "toponet/trainer.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace toponet;

NetworkSpec bench_spec(int n_nodes, TopologyKind kind) {
    NetworkSpec spec;
    spec.stage_sizes = {n_nodes, n_nodes};
    spec.topo = {{kind, 1, 0.4, 2, 2}, {kind, 1, 0.4, 2, 2}};
    spec.base_width = 16;
    spec.input_dim = 2;
    spec.num_classes = 2;
    spec.seed = 7;
    return spec;
}

void BM_ForwardEval(benchmark::State& state) {
    Network net = build_network(bench_spec(int(state.range(0)), TopologyKind::Complete));
    Dataset data = make_spirals(256, 0.1, 7);
    for (auto _ : state) {
        Tape tape;
        Tensor logits = forward(net, tape, data.X, Mode::Eval);
        benchmark::DoNotOptimize(logits.val()[0]);
    }
}
BENCHMARK(BM_ForwardEval)->Arg(6)->Arg(10)->Arg(14);

void BM_TrainStep(benchmark::State& state) {
    Network net = build_network(bench_spec(int(state.range(0)), TopologyKind::Complete));
    Dataset data = make_spirals(64, 0.1, 7);
    auto params = net.parameters();
    for (auto _ : state) {
        Tape tape;
        Tensor logits = forward(net, tape, data.X, Mode::Train);
        Tensor loss = softmax_cross_entropy(tape, logits, data.y, 0.1f);
        net.zero_grad();
        backward(tape, loss);
        sgd_step(params, 0.01, 0.9, true, 0.0);
        benchmark::DoNotOptimize(loss.val()[0]);
    }
}
BENCHMARK(BM_TrainStep)->Arg(6)->Arg(10);

void BM_GraphGeneration(benchmark::State& state) {
    uint64_t seed = 0;
    for (auto _ : state) {
        Graph g = random_graph(int(state.range(0)), 0.4, seed++);
        benchmark::DoNotOptimize(g.edges.size());
    }
}
BENCHMARK(BM_GraphGeneration)->Arg(16)->Arg(64)->Arg(256);

void BM_TopologyMetrics(benchmark::State& state) {
    Graph g = complete_graph(int(state.range(0)));
    for (auto _ : state) {
        TopologyMetrics m = topology_metrics(g);
        benchmark::DoNotOptimize(m.input_output_path_count);
    }
}
BENCHMARK(BM_TopologyMetrics)->Arg(8)->Arg(16)->Arg(32);

} // namespace

BENCHMARK_MAIN();
