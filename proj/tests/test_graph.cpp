#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "ivdag/errors.hpp"
#include "ivdag/graph.hpp"
#include "ivdag/rng.hpp"

using namespace ivdag;

namespace {

// independent reachability oracle: boolean closure by repeated squaring-free
// relaxation, no shared code with the DFS implementation
std::vector<std::vector<bool>> reach_oracle(const DirectedGraph& g) {
    const int p = g.p;
    std::vector<std::vector<bool>> reach(p, std::vector<bool>(p, false));
    for (const auto& [k, j] : g.edges.items()) reach[k][j] = true;
    for (int pass = 0; pass < p; ++pass) {
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) {
                if (!reach[a][b]) continue;
                for (int c = 0; c < p; ++c) {
                    if (reach[b][c]) reach[a][c] = true;
                }
            }
        }
    }
    return reach;
}

bool cycle_oracle(const DirectedGraph& g) {
    const auto reach = reach_oracle(g);
    for (int a = 0; a < g.p; ++a) {
        if (reach[a][a]) return true;
    }
    return false;
}

int longest_path_oracle(const DirectedGraph& g, int node) {
    int best = 0;
    for (const auto& [k, j] : g.edges.items()) {
        if (k == node) best = std::max(best, 1 + longest_path_oracle(g, j));
    }
    return best;
}

DirectedGraph random_dag(int p, double edge_prob, RngStream& rng) {
    // random upper-triangular support under a random node relabeling
    std::vector<int> perm(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = p - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    DirectedGraph g(p);
    for (int k = 0; k < p; ++k) {
        for (int j = k + 1; j < p; ++j) {
            if (rng.next_bernoulli(edge_prob))
                g.edges.insert(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(j)]);
        }
    }
    return g;
}

// the worked five-node example's ancestral set, 0-based
const std::vector<std::pair<int, int>> kExampleAncestral = {{0, 1}, {1, 2}, {2, 3},
                                                            {0, 2}, {0, 3}, {1, 3}};

SuperGraph example_supergraph() {
    SuperGraph s(5, 5);
    for (const auto& [k, j] : kExampleAncestral) s.ancestral.insert(k, j);
    s.heights = {3, 2, 1, 0, 0};
    return s;
}

}  // namespace

TEST_CASE("has_cycle detects two-cycles, chains, empty graphs") {
    CHECK(has_cycle(DirectedGraph(2, {{0, 1}, {1, 0}})));
    CHECK_FALSE(has_cycle(DirectedGraph(3, {{0, 1}, {1, 2}})));
    CHECK_FALSE(has_cycle(DirectedGraph(3, {})));
}

TEST_CASE("has_cycle on longer cycles and self-reaching structures") {
    CHECK(has_cycle(DirectedGraph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})));
    CHECK_FALSE(has_cycle(DirectedGraph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}})));
}

TEST_CASE("directed graph rejects self-loops and out-of-range edges") {
    CHECK_THROWS_AS(DirectedGraph(3, {{1, 1}}), DimensionMismatch);
    CHECK_THROWS_AS(DirectedGraph(3, {{0, 3}}), DimensionMismatch);
}

TEST_CASE("ancestral_closure adds transitive pairs") {
    const auto closure = ancestral_closure(DirectedGraph(3, {{0, 1}, {1, 2}}));
    CHECK(closure.size() == 3);
    CHECK(closure.contains(0, 2));
}

TEST_CASE("ancestral_closure matches the worked five-node example") {
    const auto closure = ancestral_closure(DirectedGraph(5, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}));
    CHECK(closure.size() == kExampleAncestral.size());
    for (const auto& [k, j] : kExampleAncestral) CHECK(closure.contains(k, j));
}

TEST_CASE("ancestral_closure of the empty graph is empty, cyclic input throws") {
    CHECK(ancestral_closure(DirectedGraph(4, {})).empty());
    CHECK_THROWS_AS(ancestral_closure(DirectedGraph(2, {{0, 1}, {1, 0}})), CyclicInput);
}

TEST_CASE("topological_heights on the worked example and simple graphs") {
    const auto h = topological_heights(DirectedGraph(5, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}));
    CHECK(h == std::vector<int>{3, 2, 1, 0, 0});
    CHECK(topological_heights(DirectedGraph(3, {})) == std::vector<int>{0, 0, 0});
    CHECK(topological_heights(DirectedGraph(2, {{0, 1}})) == std::vector<int>{1, 0});
    CHECK_THROWS_AS(topological_heights(DirectedGraph(2, {{0, 1}, {1, 0}})), CyclicInput);
}

TEST_CASE("classify_hypothesis: reverse of an ancestral pair is degenerate") {
    const auto cls = classify_hypothesis({{{1, 0}}, TestMode::edges}, example_supergraph());
    CHECK(cls.is_degenerate);
    CHECK(cls.nondegenerate.empty());
}

TEST_CASE("classify_hypothesis: unrelated pair is nondegenerate and regular") {
    const auto cls = classify_hypothesis({{{0, 4}}, TestMode::edges}, example_supergraph());
    CHECK_FALSE(cls.is_degenerate);
    CHECK(cls.is_regular);
    REQUIRE(cls.nondegenerate.size() == 1);
    CHECK(cls.nondegenerate[0] == std::pair<int, int>{0, 4});
    CHECK(cls.per_node_d.at(4) == std::vector<int>{0});
}

TEST_CASE("classify_hypothesis: symmetric pair on the empty graph is irregular") {
    SuperGraph s(6, 6);
    const auto cls = classify_hypothesis({{{3, 4}, {4, 3}}, TestMode::edges}, s);
    CHECK(cls.nondegenerate.size() == 2);
    CHECK_FALSE(cls.is_degenerate);
    CHECK_FALSE(cls.is_regular);
}

TEST_CASE("hypothesis validation rejects duplicates, self-loops, empties") {
    const HypothesisSpec empty{{}, TestMode::edges};
    const HypothesisSpec duplicated{{{0, 1}, {0, 1}}, TestMode::edges};
    const HypothesisSpec self_loop{{{2, 2}}, TestMode::edges};
    CHECK_THROWS_AS(empty.validate(3), DimensionMismatch);
    CHECK_THROWS_AS(duplicated.validate(3), DimensionMismatch);
    CHECK_THROWS_AS(self_loop.validate(3), DimensionMismatch);
}

TEST_CASE("property: closure is idempotent") {
    RngStream rng(1234, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const DirectedGraph g = random_dag(7, 0.3, rng);
        const PairSet closure = ancestral_closure(g);
        DirectedGraph as_graph(g.p);
        for (const auto& [k, j] : closure.items()) as_graph.edges.insert(k, j);
        CHECK(ancestral_closure(as_graph) == closure);
    }
}

TEST_CASE("property: ancestral pairs strictly decrease in height") {
    RngStream rng(99, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const DirectedGraph g = random_dag(8, 0.25, rng);
        const auto closure = ancestral_closure(g);
        const auto heights = topological_heights(g);
        for (const auto& [k, j] : closure.items()) {
            CHECK(heights[static_cast<std::size_t>(k)] > heights[static_cast<std::size_t>(j)]);
        }
    }
}

TEST_CASE("property: cycle detection agrees with the reachability oracle") {
    RngStream rng(7, 0);
    for (int trial = 0; trial < 60; ++trial) {
        DirectedGraph g = random_dag(6, 0.3, rng);
        // occasionally sprinkle in a back edge so both outcomes occur
        if (trial % 3 == 0 && !g.edges.items().empty()) {
            const auto [k, j] = g.edges.items().front();
            g.edges.insert(j, k);
        }
        CHECK(has_cycle(g) == cycle_oracle(g));
    }
}

TEST_CASE("property: heights equal brute-force longest paths") {
    RngStream rng(41, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const DirectedGraph g = random_dag(8, 0.3, rng);
        const auto heights = topological_heights(g);
        for (int node = 0; node < g.p; ++node) {
            CHECK(heights[static_cast<std::size_t>(node)] == longest_path_oracle(g, node));
        }
    }
}

TEST_CASE("property: classification regularity matches brute-force cycle check") {
    RngStream rng(1717, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const DirectedGraph g = random_dag(6, 0.25, rng);
        SuperGraph s(6, 3);
        s.ancestral = ancestral_closure(g);
        s.heights = topological_heights(g);
        HypothesisSpec hyp;
        hyp.edges = {{static_cast<int>(rng.next_u64() % 6), static_cast<int>(rng.next_u64() % 6)}};
        if (hyp.edges[0].first == hyp.edges[0].second) continue;
        hyp.edges.emplace_back(hyp.edges[0].second, hyp.edges[0].first);
        const auto cls = classify_hypothesis(hyp, s);
        DirectedGraph combined(6);
        for (const auto& [k, j] : s.ancestral.items()) combined.edges.insert(k, j);
        for (const auto& [k, j] : cls.nondegenerate) combined.edges.insert(k, j);
        CHECK(cls.is_regular == !cycle_oracle(combined));
    }
}

TEST_CASE("topological_order puts ancestors before descendants") {
    RngStream rng(5, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const DirectedGraph g = random_dag(7, 0.3, rng);
        const auto order = topological_order(g);
        std::vector<int> position(7);
        for (int i = 0; i < 7; ++i) position[static_cast<std::size_t>(order[i])] = i;
        for (const auto& [k, j] : g.edges.items()) {
            CHECK(position[static_cast<std::size_t>(k)] < position[static_cast<std::size_t>(j)]);
        }
    }
}
