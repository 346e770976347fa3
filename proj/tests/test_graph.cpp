#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <queue>

#include "tmpdir.hpp"

#include "riskgraph/graph.hpp"
#include "riskgraph/ingest.hpp"
#include "riskgraph/rng.hpp"

using namespace riskgraph;
using riskgraph::testing::TempDir;

namespace {

std::vector<int> bfs_distances(const graph::RoadGraph& g, std::size_t src) {
    std::vector<int> dist(g.num_nodes(), -1);
    std::queue<std::size_t> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (const std::size_t v : g.adjacency_lists()[u])
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    return dist;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("construction validates and normalizes") {
    CHECK_THROWS_AS(graph::build_graph({"a", "a"}, {}), std::invalid_argument);
    CHECK_THROWS_AS(graph::build_graph({"a"}, {{"a", "b"}}), std::invalid_argument);

    // self-loops and duplicates in the edge list are dropped, orientation ignored
    const auto g = graph::build_graph({"a", "b", "c"},
                                      {{"a", "a"}, {"b", "a"}, {"a", "b"}, {"c", "b"}});
    CHECK(g.num_edges() == 2);
    for (const auto& [u, v] : g.edges()) CHECK(u < v);
}

TEST_CASE("node order and lookup") {
    const auto g = graph::build_graph({"x9", "x1", "x5"}, {{"x9", "x5"}});
    CHECK(g.node_ids() == std::vector<std::string>{"x9", "x1", "x5"});
    CHECK(g.index_of("x1") == 1);
    CHECK(g.node_id(2) == "x5");
    CHECK_THROWS_AS(g.index_of("nope"), std::invalid_argument);
}

TEST_CASE("adjacency lists are sorted and symmetric") {
    const auto g = ingest::generate_synthetic_graph(30, ingest::GraphModel::random_geometric, 3);
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
        const auto& nb = g.adjacency_lists()[u];
        CHECK(std::is_sorted(nb.begin(), nb.end()));
        for (const auto v : nb) {
            const auto& back = g.adjacency_lists()[v];
            CHECK(std::binary_search(back.begin(), back.end(), u));
        }
    }
}

TEST_CASE("neighbors_k equals the BFS distance set on random graphs") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto g =
            ingest::generate_synthetic_graph(40, ingest::GraphModel::random_geometric, seed);
        for (std::size_t src = 0; src < g.num_nodes(); src += 7) {
            const auto dist = bfs_distances(g, src);
            for (int order = 1; order <= 2; ++order) {
                std::vector<std::size_t> want;
                for (std::size_t v = 0; v < g.num_nodes(); ++v)
                    if (dist[v] == order) want.push_back(v);
                CHECK(graph::neighbors_k(g, src, order) == want);
            }
        }
    }
}

TEST_CASE("neighbors_k rejects bad arguments") {
    const auto g = graph::build_graph({"a", "b"}, {{"a", "b"}});
    CHECK_THROWS_AS(graph::neighbors_k(g, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(graph::neighbors_k(g, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(graph::neighbors_k(g, 0, -1), std::invalid_argument);
}

TEST_CASE("adjacency matrix is symmetric with degree row sums") {
    const auto g = ingest::generate_synthetic_graph(25, ingest::GraphModel::grid, 1);
    for (const bool self : {false, true}) {
        const auto A = graph::adjacency(g, self);
        REQUIRE(A.n == g.num_nodes());
        for (std::size_t i = 0; i < A.n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < A.n; ++j) {
                CHECK(A.at(i, j) == A.at(j, i));
                row += A.at(i, j);
            }
            const double degree = static_cast<double>(g.adjacency_lists()[i].size());
            CHECK(row == degree + (self ? 1.0 : 0.0));
            CHECK(A.at(i, i) == (self ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("save/load round-trips nodes, edges, coords and hash") {
    const auto g = ingest::generate_synthetic_graph(18, ingest::GraphModel::random_geometric, 9);
    REQUIRE(g.has_coords());
    TempDir dir;
    graph::save_graph(g, dir.file("n.csv"), dir.file("e.csv"));
    const auto r = graph::load_graph(dir.file("n.csv"), dir.file("e.csv"));
    CHECK(r.node_ids() == g.node_ids());
    CHECK(r.edges() == g.edges());
    CHECK(r.node_order_hash() == g.node_order_hash());
    REQUIRE(r.has_coords());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        CHECK(r.coords()[i].x == doctest::Approx(g.coords()[i].x).epsilon(1e-12));
        CHECK(r.coords()[i].y == doctest::Approx(g.coords()[i].y).epsilon(1e-12));
    }
}

TEST_CASE("graph without coords round-trips with empty coordinate fields") {
    const auto g = graph::build_graph({"a", "b"}, {{"a", "b"}});
    CHECK_FALSE(g.has_coords());
    CHECK_THROWS_AS(g.coords(), std::logic_error);
    TempDir dir;
    graph::save_graph(g, dir.file("n.csv"), dir.file("e.csv"));
    const auto r = graph::load_graph(dir.file("n.csv"), dir.file("e.csv"));
    CHECK_FALSE(r.has_coords());
    CHECK(r.node_ids() == g.node_ids());
}

TEST_CASE("node order hash distinguishes orderings") {
    const auto a = graph::build_graph({"a", "b", "c"}, {});
    const auto b = graph::build_graph({"b", "a", "c"}, {});
    CHECK(a.node_order_hash() != b.node_order_hash());
}

TEST_CASE("load errors") {
    TempDir dir;
    CHECK_THROWS_AS(graph::load_graph(dir.file("no.csv"), dir.file("no2.csv")),
                    std::runtime_error);
    testing::write_file(dir.file("n.csv"), "road_id,x,y\na,0,0\n");
    testing::write_file(dir.file("bad_edges.csv"), "road_id_a,road_id_b\na,zz\n");
    CHECK_THROWS_AS(graph::load_graph(dir.file("n.csv"), dir.file("bad_edges.csv")),
                    std::invalid_argument);
}

}
