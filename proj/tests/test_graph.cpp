#include "toponet/graph.hpp"

#include "toponet/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace toponet;

namespace {

using EdgeSet = std::set<std::pair<int, int>>;

EdgeSet edge_set(const Graph& g) { return EdgeSet(g.edges.begin(), g.edges.end()); }

// Brute-force path enumeration, the oracle for the DP count.
unsigned long long count_paths_dfs(const Graph& g, int from) {
    if (from == g.n_nodes - 1) return 1;
    unsigned long long total = 0;
    for (auto& [j, i] : g.edges)
        if (j == from) total += count_paths_dfs(g, i);
    return total;
}

unsigned long long choose2(unsigned long long n) { return n * (n - 1) / 2; }

} // namespace

TEST_CASE("build_graph basics") {
    Graph chain = build_graph(3, {{0, 1}, {1, 2}});
    CHECK(chain.n_nodes == 3);
    CHECK(chain.edge_count() == 2);

    CHECK_THROWS_WITH_AS(build_graph(3, {{1, 0}}),
                         doctest::Contains("edge violates topological order"),
                         std::invalid_argument);
    CHECK_THROWS_AS(build_graph(3, {{1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(3, {{0, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(1, {}), std::invalid_argument);

    Graph dedup = build_graph(4, {{0, 1}, {0, 1}, {1, 3}});
    CHECK(dedup.edge_count() == 2);
}

TEST_CASE("build_graph sorts edges by (i, j)") {
    Graph g = build_graph(4, {{1, 3}, {0, 3}, {0, 1}, {2, 3}});
    std::vector<std::pair<int, int>> want = {{0, 1}, {0, 3}, {1, 3}, {2, 3}};
    CHECK(g.edges == want);
}

TEST_CASE("complete_graph counts") {
    CHECK(complete_graph(4).edge_count() == 6);
    CHECK(complete_graph(14).edge_count() == 91);
    Graph g2 = complete_graph(2);
    CHECK(g2.edge_count() == 1);
    CHECK(g2.edges[0] == std::pair<int, int>{0, 1});
    CHECK_THROWS_AS(complete_graph(1), std::invalid_argument);

    for (int n = 2; n <= 64; ++n)
        CHECK(complete_graph(n).edge_count() == n * (n - 1) / 2);
}

TEST_CASE("residual_graph(6,2) exact edge set") {
    Graph g = residual_graph(6, 2);
    EdgeSet want = {{1, 2}, {3, 4}, {0, 1}, {0, 3}, {2, 3}, {0, 5}, {2, 5}, {4, 5}};
    CHECK(edge_set(g) == want);
    CHECK(g.edge_count() == 8);
}

TEST_CASE("residual interval 1 degenerates to complete") {
    for (int n : {3, 4, 6, 10, 14, 22})
        CHECK(edge_set(residual_graph(n, 1)) == edge_set(complete_graph(n)));
    CHECK(residual_graph(6, 1).edge_count() == 15);
}

TEST_CASE("residual errors") {
    CHECK_THROWS_WITH_AS(residual_graph(7, 2), doctest::Contains("interval must divide n-2"),
                         std::invalid_argument);
    CHECK_THROWS_AS(residual_graph(2, 1), std::invalid_argument);
    CHECK_THROWS_AS(residual_graph(6, 0), std::invalid_argument);
}

TEST_CASE("residual(n,2) matches the closed-form edge count") {
    // (N-2)/l + C((N-2)/l + 2, 2) with l = 2
    auto formula = [](int n) {
        const unsigned long long b = (n - 2) / 2;
        return int(b + choose2(b + 2));
    };
    for (int n = 6; n - 2 <= 40; n += 2) CHECK(residual_graph(n, 2).edge_count() == formula(n));
    for (int n : {6, 10, 14, 22, 42}) CHECK(residual_graph(n, 2).edge_count() == formula(n));
}

TEST_CASE("random_graph extremes and determinism") {
    Graph all = random_graph(10, 1.0, 3);
    // 28 internal pairs, plus repair attaches node 1 (in-degree 0) to the
    // input and node 8 (out-degree 0) to the output, plus nothing else --
    // every other internal node already has both directions covered.
    for (int j = 1; j <= 8; ++j)
        for (int i = j + 1; i <= 8; ++i) CHECK(all.has_edge(j, i));

    Graph none = random_graph(10, 0.0, 3);
    CHECK(none.edge_count() == 16);
    for (int i = 1; i <= 8; ++i) {
        CHECK(none.has_edge(0, i));
        CHECK(none.has_edge(i, 9));
    }

    CHECK(edge_set(random_graph(10, 0.4, 7)) == edge_set(random_graph(10, 0.4, 7)));
    CHECK_THROWS_AS(random_graph(10, -0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(random_graph(10, 1.5, 0), std::invalid_argument);
}

TEST_CASE("random_graph repair leaves no dead internal nodes") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
        Graph g = random_graph(12, 0.15, seed);
        auto in = g.in_degrees();
        auto out = g.out_degrees();
        for (int i = 1; i < g.n_nodes - 1; ++i) {
            CHECK(in[i] > 0);
            CHECK(out[i] > 0);
        }
    }
}

TEST_CASE("classic generators") {
    // BA adds m edges per node beyond the seed clique of m nodes.
    Graph ba = classic_random_graph({ClassicKind::BA, 0.0, 2, 0}, 5, 11);
    auto internal_edges = [](const Graph& g) {
        int c = 0;
        for (auto& [j, i] : g.edges)
            if (j != 0 && i != g.n_nodes - 1) ++c;
        return c;
    };
    CHECK(internal_edges(ba) == 6);

    Graph ws = classic_random_graph({ClassicKind::WS, 0.0, 0, 4}, 10, 5);
    CHECK(internal_edges(ws) == 20);

    Graph er1 = classic_random_graph({ClassicKind::ER, 0.2, 0, 0}, 20, 9);
    Graph er2 = classic_random_graph({ClassicKind::ER, 0.2, 0, 0}, 20, 9);
    CHECK(edge_set(er1) == edge_set(er2));

    CHECK_THROWS_AS(classic_random_graph({ClassicKind::BA, 0.0, 0, 0}, 5, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(classic_random_graph({ClassicKind::BA, 0.0, 5, 0}, 5, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(classic_random_graph({ClassicKind::WS, 0.0, 0, 3}, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(classic_random_graph({ClassicKind::WS, 0.0, 0, 10}, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("classic generators repaired like random_graph") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        for (const ClassicParams& p :
             {ClassicParams{ClassicKind::ER, 0.2, 0, 0}, ClassicParams{ClassicKind::BA, 0.0, 2, 0},
              ClassicParams{ClassicKind::WS, 0.3, 0, 4}}) {
            Graph g = classic_random_graph(p, 8, seed);
            auto in = g.in_degrees();
            auto out = g.out_degrees();
            for (int i = 1; i < g.n_nodes - 1; ++i) {
                CHECK(in[i] > 0);
                CHECK(out[i] > 0);
            }
            for (auto& [j, i] : g.edges) CHECK(j < i);
        }
    }
}

TEST_CASE("topology_metrics degrees and path counts") {
    TopologyMetrics m4 = topology_metrics(complete_graph(4));
    CHECK(m4.in_degrees[3] == 3);
    CHECK(m4.out_degrees[0] == 3);
    CHECK(m4.edge_count == 6);

    CHECK(topology_metrics(complete_graph(5)).input_output_path_count == 8);
    CHECK(topology_metrics(build_graph(4, {{0, 1}, {1, 2}, {2, 3}})).input_output_path_count == 1);
}

TEST_CASE("path count DP matches brute force and the 2^(n-2) law") {
    for (int n = 2; n <= 12; ++n) {
        Graph g = complete_graph(n);
        const auto dp = topology_metrics(g).input_output_path_count;
        CHECK(dp == count_paths_dfs(g, 0));
        CHECK(dp == 1ULL << (n - 2));
    }
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Graph g = random_graph(10, 0.3, seed);
        CHECK(topology_metrics(g).input_output_path_count == count_paths_dfs(g, 0));
    }
}

TEST_CASE("search_space_log2") {
    CHECK(search_space_log2({14, 20, 26, 14}) == 697.0);
    CHECK(search_space_log2({2}) == 1);
    CHECK(search_space_log2({4, 4}) == 12);
    CHECK_THROWS_AS(search_space_log2({4, 1}), std::invalid_argument);
}

TEST_CASE("prune_edges") {
    Graph g = build_graph(3, {{0, 1}, {0, 2}});
    AlphaMatrix a(3);
    a.set(1, 0, 0.05f);
    a.set(2, 0, 0.2f);

    auto [pg, pa] = prune_edges(g, a, 0.1);
    CHECK(pg.edge_count() == 1);
    CHECK(pg.has_edge(0, 2));
    CHECK(pa.at(1, 0) == 0.0f);
    CHECK(pa.at(2, 0) == 0.2f);

    auto [pg0, pa0] = prune_edges(g, a, 0.0);
    CHECK(edge_set(pg0) == edge_set(g));

    CHECK_THROWS_AS(prune_edges(g, a, -1.0), std::invalid_argument);
}

TEST_CASE("prune threshold monotonicity") {
    Rng rng(21);
    Graph g = random_graph(12, 0.5, 4);
    AlphaMatrix a(12);
    for (auto& [j, i] : g.edges) a.set(i, j, float(rng.uniform(-1, 1)));
    EdgeSet prev = edge_set(g);
    for (double t : {0.0, 0.1, 0.3, 0.5, 0.8, 1.2}) {
        EdgeSet cur = edge_set(prune_edges(g, a, t).first);
        CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
        prev = cur;
    }
}

TEST_CASE("eliminate_dead_nodes") {
    auto [g1, removed1] = eliminate_dead_nodes(build_graph(3, {{0, 2}}));
    CHECK(removed1 == std::vector<int>{1});
    CHECK(g1.n_nodes == 2);
    CHECK(g1.edges == std::vector<std::pair<int, int>>{{0, 1}});

    auto [g2, removed2] = eliminate_dead_nodes(complete_graph(5));
    CHECK(removed2.empty());
    CHECK(g2.edge_count() == 10);

    // node 3 starts dead (in-degree 0); its removal kills node 2's successor
    // chain? No: chain 0->1->2 then dangles, node 2 loses out-degree... walk
    // the fixpoint: {(0,1),(1,2),(3,4)} on 5 nodes.
    auto [g3, removed3] = eliminate_dead_nodes(build_graph(5, {{0, 1}, {1, 2}, {3, 4}}));
    CHECK(std::find(removed3.begin(), removed3.end(), 3) != removed3.end());
    // node 2 has out-degree 0 once considered, so the surviving chain
    // collapses to whatever still reaches the output
    for (auto& [j, i] : g3.edges) CHECK(j < i);
    auto in = g3.in_degrees();
    auto out = g3.out_degrees();
    for (int i = 1; i < g3.n_nodes - 1; ++i) {
        CHECK(in[i] > 0);
        CHECK(out[i] > 0);
    }
}

TEST_CASE("remove_node") {
    Graph g = remove_node(complete_graph(5), 2);
    CHECK(edge_set(g) == edge_set(complete_graph(4)));

    Graph chain = build_graph(4, {{0, 1}, {1, 2}, {2, 3}});
    Graph cut = remove_node(chain, 1);
    CHECK(topology_metrics(cut).input_output_path_count == 0);

    CHECK_THROWS_AS(remove_node(complete_graph(5), 0), std::invalid_argument);
    CHECK_THROWS_AS(remove_node(complete_graph(5), 4), std::invalid_argument);
}

TEST_CASE("alpha matrix helpers") {
    Graph g = complete_graph(4);
    AlphaMatrix a = AlphaMatrix::ones_on(g);
    CHECK(a.conforms_to(g));
    CHECK(a.l1_norm() == doctest::Approx(6.0));
    a.set(2, 1, 0.0f);
    CHECK(a.conforms_to(g));
    AlphaMatrix b(4);
    b.set(3, 1, 0.5f);
    CHECK(b.conforms_to(g));
    Graph chain = build_graph(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK_FALSE(b.conforms_to(chain));
}

TEST_CASE("graph text round-trip") {
    Rng rng(77);
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Graph g = random_graph(9, 0.4, seed);
        AlphaMatrix a(9);
        for (auto& [j, i] : g.edges) a.set(i, j, float(rng.uniform(-2, 2)));
        const std::string text = graph_to_text(g, a);
        auto [g2, a2] = parse_graph_text(text);
        CHECK(g2.n_nodes == g.n_nodes);
        CHECK(g2.edges == g.edges);
        CHECK(a2.values == a.values);
        CHECK(graph_to_text(g2, a2) == text);
    }
}

TEST_CASE("graph text format shape") {
    Graph g = build_graph(3, {{0, 1}, {1, 2}});
    AlphaMatrix a = AlphaMatrix::ones_on(g);
    std::string text = graph_to_text(g, a);
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    CHECK(line == "n=3");
    std::getline(is, line);
    CHECK(line.substr(0, 4) == "0 1 ");
    std::getline(is, line);
    CHECK(line.substr(0, 4) == "1 2 ");
}

TEST_CASE("generators are pure in their inputs") {
    CHECK(graph_to_text(complete_graph(9), AlphaMatrix::ones_on(complete_graph(9))) ==
          graph_to_text(complete_graph(9), AlphaMatrix::ones_on(complete_graph(9))));
    for (uint64_t s : {1ULL, 99ULL}) {
        Graph a = classic_random_graph({ClassicKind::WS, 0.5, 0, 4}, 12, s);
        Graph b = classic_random_graph({ClassicKind::WS, 0.5, 0, 4}, 12, s);
        CHECK(a.edges == b.edges);
    }
}
