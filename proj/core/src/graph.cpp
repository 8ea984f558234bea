#include "toponet/graph.hpp"

#include "toponet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace toponet {

namespace {

// Canonical edge order: by destination, then source.
void canonicalize(std::vector<std::pair<int, int>>& edges) {
    std::sort(edges.begin(), edges.end(),
              [](const auto& a, const auto& b) {
                  return a.second != b.second ? a.second < b.second : a.first < b.first;
              });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
    canonicalize(edges);
    Graph g;
    g.n_nodes = n;
    g.edges = std::move(edges);
    return g;
}

// Attach orphan internal nodes to the input/output nodes so every node can
// contribute to the output.
void repair_connectivity(int n, std::vector<std::pair<int, int>>& edges) {
    std::vector<int> in(n, 0), out(n, 0);
    for (auto& [j, i] : edges) {
        ++out[j];
        ++in[i];
    }
    for (int i = 1; i <= n - 2; ++i) {
        if (in[i] == 0) edges.emplace_back(0, i);
        if (out[i] == 0) edges.emplace_back(i, n - 1);
    }
}

} // namespace

bool Graph::has_edge(int j, int i) const {
    return std::find(edges.begin(), edges.end(), std::make_pair(j, i)) != edges.end();
}

std::vector<int> Graph::in_degrees() const {
    std::vector<int> d(n_nodes, 0);
    for (auto& [j, i] : edges) ++d[i];
    return d;
}

std::vector<int> Graph::out_degrees() const {
    std::vector<int> d(n_nodes, 0);
    for (auto& [j, i] : edges) ++d[j];
    return d;
}

void AlphaMatrix::set(int i, int j, float v) {
    if (j >= i) throw std::invalid_argument("alpha entry must be strictly lower-triangular");
    values[size_t(i) * n_nodes + j] = v;
}

AlphaMatrix AlphaMatrix::ones_on(const Graph& g) {
    AlphaMatrix a(g.n_nodes);
    for (auto& [j, i] : g.edges) a.set(i, j, 1.0f);
    return a;
}

bool AlphaMatrix::conforms_to(const Graph& g) const {
    if (n_nodes != g.n_nodes) return false;
    for (int i = 0; i < n_nodes; ++i)
        for (int j = 0; j < n_nodes; ++j) {
            if (j >= i && at(i, j) != 0.0f) return false;
            if (j < i && at(i, j) != 0.0f && !g.has_edge(j, i)) return false;
        }
    return true;
}

double AlphaMatrix::l1_norm() const {
    double s = 0.0;
    for (float v : values) s += std::fabs(double(v));
    return s;
}

Graph build_graph(int n_nodes, const std::vector<std::pair<int, int>>& edge_list) {
    if (n_nodes < 2) throw std::invalid_argument("graph needs at least 2 nodes");
    for (auto& [j, i] : edge_list) {
        if (j < 0 || i >= n_nodes) throw std::invalid_argument("edge index out of range");
        if (j >= i) throw std::invalid_argument("edge violates topological order");
    }
    return make_graph(n_nodes, edge_list);
}

Graph complete_graph(int n) {
    if (n < 2) throw std::invalid_argument("complete_graph: n must be >= 2");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(size_t(n) * (n - 1) / 2);
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) edges.emplace_back(j, i);
    return make_graph(n, std::move(edges));
}

Graph residual_graph(int n, int interval) {
    if (n < 3) throw std::invalid_argument("residual_graph: n must be >= 3");
    if (interval < 1) throw std::invalid_argument("residual_graph: interval must be >= 1");
    if ((n - 2) % interval != 0)
        throw std::invalid_argument("residual_graph: interval must divide n-2");
    const int blocks = (n - 2) / interval;
    std::vector<std::pair<int, int>> edges;
    auto block_start = [&](int b) { return 1 + b * interval; };
    auto block_end = [&](int b) { return (b + 1) * interval; };
    for (int b = 0; b < blocks; ++b) {
        for (int m = block_start(b); m < block_end(b); ++m) edges.emplace_back(m, m + 1);
        edges.emplace_back(0, block_start(b));
        for (int c = 0; c < b; ++c) edges.emplace_back(block_end(c), block_start(b));
    }
    edges.emplace_back(0, n - 1);
    for (int b = 0; b < blocks; ++b) edges.emplace_back(block_end(b), n - 1);
    return make_graph(n, std::move(edges));
}

Graph random_graph(int n, double p, uint64_t seed) {
    if (n < 3) throw std::invalid_argument("random_graph: n must be >= 3");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("random_graph: p must be in [0,1]");
    Rng rng(seed);
    std::vector<std::pair<int, int>> edges;
    for (int j = 1; j <= n - 3; ++j)
        for (int i = j + 1; i <= n - 2; ++i)
            if (rng.uniform() < p) edges.emplace_back(j, i);
    repair_connectivity(n, edges);
    return make_graph(n, std::move(edges));
}

Graph classic_random_graph(const ClassicParams& params, int n_internal, uint64_t seed) {
    if (n_internal < 2) throw std::invalid_argument("classic_random_graph: need >= 2 internal nodes");
    Rng rng(seed);
    const int n = n_internal;
    std::vector<std::set<int>> adj(n);
    auto add = [&](int u, int v) {
        adj[u].insert(v);
        adj[v].insert(u);
    };

    switch (params.kind) {
    case ClassicKind::ER: {
        if (params.p < 0.0 || params.p > 1.0)
            throw std::invalid_argument("ER: p must be in [0,1]");
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (rng.uniform() < params.p) add(u, v);
        break;
    }
    case ClassicKind::BA: {
        const int m = params.m;
        if (m < 1 || m >= n) throw std::invalid_argument("BA: need 1 <= m < n_internal");
        std::vector<int> repeated;
        std::vector<int> targets(m);
        for (int i = 0; i < m; ++i) targets[i] = i;
        for (int u = m; u < n; ++u) {
            for (int t : targets) {
                add(u, t);
                repeated.push_back(t);
                repeated.push_back(u);
            }
            // preferential attachment: sample m distinct nodes from the
            // degree-weighted multiset
            std::set<int> chosen;
            while (int(chosen.size()) < m)
                chosen.insert(repeated[rng.uniform_int(repeated.size())]);
            targets.assign(chosen.begin(), chosen.end());
        }
        break;
    }
    case ClassicKind::WS: {
        const int k = params.k;
        if (k < 2 || k % 2 != 0 || k >= n)
            throw std::invalid_argument("WS: need k even, 2 <= k < n_internal");
        if (params.p < 0.0 || params.p > 1.0)
            throw std::invalid_argument("WS: p must be in [0,1]");
        for (int d = 1; d <= k / 2; ++d)
            for (int u = 0; u < n; ++u) add(u, (u + d) % n);
        for (int d = 1; d <= k / 2; ++d) {
            for (int u = 0; u < n; ++u) {
                if (rng.uniform() >= params.p) continue;
                int v = (u + d) % n;
                if (int(adj[u].size()) >= n - 1) continue; // saturated
                int w;
                do {
                    w = int(rng.uniform_int(n));
                } while (w == u || adj[u].count(w));
                adj[u].erase(v);
                adj[v].erase(u);
                add(u, w);
            }
        }
        break;
    }
    }

    // Random topological ordering of the internal nodes.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<int> rank(n);
    for (int i = 0; i < n; ++i) rank[order[i]] = i;

    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v : adj[u])
            if (rank[u] < rank[v]) edges.emplace_back(rank[u] + 1, rank[v] + 1);
    const int total = n + 2;
    repair_connectivity(total, edges);
    return make_graph(total, std::move(edges));
}

TopologyMetrics topology_metrics(const Graph& g) {
    TopologyMetrics m;
    m.in_degrees = g.in_degrees();
    m.out_degrees = g.out_degrees();
    m.edge_count = g.edge_count();
    std::vector<unsigned long long> paths(g.n_nodes, 0);
    paths[0] = 1;
    for (auto& [j, i] : g.edges) paths[i] += paths[j]; // edges sorted by destination
    m.input_output_path_count = paths[g.n_nodes - 1];
    return m;
}

double search_space_log2(const std::vector<int>& stage_sizes) {
    double total = 0.0;
    for (int n : stage_sizes) {
        if (n < 2) throw std::invalid_argument("search_space_log2: stage size must be >= 2");
        total += double(n) * (n - 1) / 2.0;
    }
    return total;
}

std::pair<Graph, AlphaMatrix> prune_edges(const Graph& g, const AlphaMatrix& a, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("prune_edges: threshold must be nonnegative");
    if (a.n_nodes != g.n_nodes) throw std::invalid_argument("prune_edges: alpha does not conform");
    Graph out;
    out.n_nodes = g.n_nodes;
    AlphaMatrix oa(g.n_nodes);
    for (auto& [j, i] : g.edges) {
        float v = a.at(i, j);
        if (std::fabs(double(v)) >= threshold) {
            out.edges.emplace_back(j, i);
            oa.set(i, j, v);
        }
    }
    return {std::move(out), std::move(oa)};
}

std::pair<Graph, std::vector<int>> eliminate_dead_nodes(const Graph& g) {
    const int n = g.n_nodes;
    std::vector<bool> alive(n, true);
    auto edges = g.edges;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<int> in(n, 0), out(n, 0);
        for (auto& [j, i] : edges) {
            ++out[j];
            ++in[i];
        }
        for (int i = 1; i < n - 1; ++i) {
            if (alive[i] && (in[i] == 0 || out[i] == 0)) {
                alive[i] = false;
                changed = true;
            }
        }
        if (changed) {
            std::erase_if(edges, [&](const auto& e) { return !alive[e.first] || !alive[e.second]; });
        }
    }
    std::vector<int> removed, remap(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (alive[i])
            remap[i] = next++;
        else
            removed.push_back(i);
    }
    Graph out;
    out.n_nodes = next;
    for (auto& [j, i] : edges) out.edges.emplace_back(remap[j], remap[i]);
    canonicalize(out.edges);
    return {std::move(out), std::move(removed)};
}

Graph remove_node(const Graph& g, int idx) {
    if (idx <= 0 || idx >= g.n_nodes - 1)
        throw std::invalid_argument("remove_node: only internal nodes may be removed");
    Graph out;
    out.n_nodes = g.n_nodes - 1;
    for (auto& [j, i] : g.edges) {
        if (j == idx || i == idx) continue;
        out.edges.emplace_back(j > idx ? j - 1 : j, i > idx ? i - 1 : i);
    }
    canonicalize(out.edges);
    return out;
}

void write_graph_text(std::ostream& os, const Graph& g, const AlphaMatrix& a) {
    os << "n=" << g.n_nodes << "\n";
    char buf[64];
    for (auto& [j, i] : g.edges) {
        std::snprintf(buf, sizeof(buf), "%d %d %.9g\n", j, i, double(a.at(i, j)));
        os << buf;
    }
}

std::string graph_to_text(const Graph& g, const AlphaMatrix& a) {
    std::ostringstream ss;
    write_graph_text(ss, g, a);
    return ss.str();
}

std::pair<Graph, AlphaMatrix> parse_graph_text(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("n=", 0) != 0)
        throw std::runtime_error("graph text: expected 'n=<int>' header");
    int n = std::stoi(line.substr(2));
    if (n < 2) throw std::runtime_error("graph text: invalid node count");
    std::vector<std::pair<int, int>> edges;
    AlphaMatrix a(n);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        int j, i;
        double v;
        if (std::sscanf(line.c_str(), "%d %d %lg", &j, &i, &v) != 3)
            throw std::runtime_error("graph text: malformed edge line");
        edges.emplace_back(j, i);
        if (j < 0 || i >= n || j >= i) throw std::runtime_error("graph text: invalid edge");
        a.set(i, j, float(v));
    }
    Graph g = build_graph(n, edges);
    return {std::move(g), std::move(a)};
}

std::pair<Graph, AlphaMatrix> parse_graph_text(const std::string& text) {
    std::istringstream ss(text);
    return parse_graph_text(ss);
}

} // namespace toponet
