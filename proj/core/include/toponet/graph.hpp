#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace toponet {

// One stage's topology. Node index doubles as topological order, so every
// edge (j, i) satisfies j < i and the graph is acyclic by construction.
// Node 0 is the input node; node n_nodes-1 is the output node.
struct Graph {
    int n_nodes = 0;
    // Edges (j, i), deduplicated, sorted by (i, j).
    std::vector<std::pair<int, int>> edges;

    int edge_count() const { return int(edges.size()); }
    bool has_edge(int j, int i) const;
    std::vector<int> in_degrees() const;
    std::vector<int> out_degrees() const;
};

// Continuous edge weights for one stage, stored as a strictly
// lower-triangular matrix: at(i, j) holds the weight of edge j -> i.
// Entries without an edge are exactly 0.
struct AlphaMatrix {
    int n_nodes = 0;
    std::vector<float> values; // row-major n x n

    AlphaMatrix() = default;
    explicit AlphaMatrix(int n) : n_nodes(n), values(size_t(n) * n, 0.0f) {}

    float at(int i, int j) const { return values[size_t(i) * n_nodes + j]; }
    void set(int i, int j, float v);

    // All-ones weights on the edges of g, zero elsewhere.
    static AlphaMatrix ones_on(const Graph& g);
    bool conforms_to(const Graph& g) const;
    double l1_norm() const;
};

struct TopologyMetrics {
    std::vector<int> in_degrees;
    std::vector<int> out_degrees;
    int edge_count = 0;
    unsigned long long input_output_path_count = 0;
};

Graph build_graph(int n_nodes, const std::vector<std::pair<int, int>>& edge_list);
Graph complete_graph(int n);

// Residual topology with the given interval. Internal nodes form
// (n-2)/interval consecutive blocks of `interval` chained nodes; each block
// start receives the input node and every earlier block end, and the output
// node receives the input node and every block end. interval=1 yields the
// complete graph.
Graph residual_graph(int n, int interval);

// Each internal pair (j, i) linked independently with probability p, then
// repaired: internal nodes with in-degree 0 attach to the input node and
// internal nodes with out-degree 0 attach to the output node.
Graph random_graph(int n, double p, uint64_t seed);

enum class ClassicKind { ER, BA, WS };
struct ClassicParams {
    ClassicKind kind = ClassicKind::ER;
    double p = 0.0; // ER, WS
    int m = 0;      // BA
    int k = 0;      // WS
};

// Classical undirected generator on n_internal nodes, randomly ordered and
// oriented low-to-high, wrapped with input/output nodes and repaired as in
// random_graph.
Graph classic_random_graph(const ClassicParams& params, int n_internal, uint64_t seed);

TopologyMetrics topology_metrics(const Graph& g);

// Base-2 log of the discrete search-space cardinality, sum over stages of
// N(N-1)/2.
double search_space_log2(const std::vector<int>& stage_sizes);

// Keep exactly the edges with |alpha| >= threshold. Removed entries are
// zeroed. Unreachable nodes are not repaired here.
std::pair<Graph, AlphaMatrix> prune_edges(const Graph& g, const AlphaMatrix& a, double threshold);

// Iteratively remove internal nodes with in-degree 0 or out-degree 0 until
// fixpoint, then reindex survivors. Returns removed original indices.
std::pair<Graph, std::vector<int>> eliminate_dead_nodes(const Graph& g);

// Delete one internal node and its incident edges, compacting indices.
Graph remove_node(const Graph& g, int idx);

// Text form: "n=<int>" then one "j i alpha" line per edge in (i, j) order.
// Round-trips exactly.
void write_graph_text(std::ostream& os, const Graph& g, const AlphaMatrix& a);
std::string graph_to_text(const Graph& g, const AlphaMatrix& a);
std::pair<Graph, AlphaMatrix> parse_graph_text(std::istream& is);
std::pair<Graph, AlphaMatrix> parse_graph_text(const std::string& text);

} // namespace toponet
