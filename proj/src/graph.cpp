#include "ivdag/graph.hpp"

#include <algorithm>
#include <string>

#include "ivdag/errors.hpp"

namespace ivdag {

std::vector<std::pair<int, int>> PairSet::sorted() const {
    auto out = items_;
    std::sort(out.begin(), out.end());
    return out;
}

bool PairSet::contains_all(const PairSet& other) const {
    for (const auto& [a, b] : other.items_) {
        if (!contains(a, b)) return false;
    }
    return true;
}

bool PairSet::operator==(const PairSet& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && size() == other.size() &&
           contains_all(other);
}

DirectedGraph::DirectedGraph(int p_, const std::vector<std::pair<int, int>>& edge_list)
    : p(p_), edges(p_, p_) {
    for (const auto& [k, j] : edge_list) {
        if (k < 0 || j < 0 || k >= p || j >= p)
            throw DimensionMismatch("edge (" + std::to_string(k + 1) + "," + std::to_string(j + 1) +
                                    ") out of range for p=" + std::to_string(p));
        if (k == j)
            throw DimensionMismatch("self-loop at node " + std::to_string(k + 1));
        edges.insert(k, j);
    }
}

std::vector<std::vector<int>> DirectedGraph::adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(p));
    for (const auto& [k, j] : edges.items()) adj[static_cast<std::size_t>(k)].push_back(j);
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
}

std::vector<int> SuperGraph::ancestors_of(int j) const {
    std::vector<int> out;
    for (const auto& [k, jj] : ancestral.items()) {
        if (jj == j) out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> SuperGraph::interventions_on(int j) const {
    std::vector<int> out;
    for (const auto& [l, jj] : interventions.items()) {
        if (jj == j) out.push_back(l);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void HypothesisSpec::validate(int p) const {
    if (edges.empty()) throw DimensionMismatch("hypothesis edge set is empty");
    PairSet seen(p, p);
    for (const auto& [k, j] : edges) {
        if (k < 0 || j < 0 || k >= p || j >= p)
            throw DimensionMismatch("hypothesis edge (" + std::to_string(k + 1) + "," +
                                    std::to_string(j + 1) + ") out of range for p=" + std::to_string(p));
        if (k == j) throw DimensionMismatch("hypothesis contains a self-loop");
        if (seen.contains(k, j)) throw DimensionMismatch("duplicate hypothesis edge");
        seen.insert(k, j);
    }
}

namespace {

// Iterative three-color DFS; explicit stack so large p cannot overflow the
// call stack.
bool has_cycle_adj(int p, const std::vector<std::vector<int>>& adj) {
    enum : std::uint8_t { white, gray, black };
    std::vector<std::uint8_t> color(static_cast<std::size_t>(p), white);
    std::vector<std::pair<int, std::size_t>> stack;  // (node, next child index)
    for (int root = 0; root < p; ++root) {
        if (color[static_cast<std::size_t>(root)] != white) continue;
        stack.emplace_back(root, 0);
        color[static_cast<std::size_t>(root)] = gray;
        while (!stack.empty()) {
            auto& [node, child_idx] = stack.back();
            const auto& children = adj[static_cast<std::size_t>(node)];
            if (child_idx < children.size()) {
                const int child = children[child_idx++];
                if (color[static_cast<std::size_t>(child)] == gray) return true;
                if (color[static_cast<std::size_t>(child)] == white) {
                    color[static_cast<std::size_t>(child)] = gray;
                    stack.emplace_back(child, 0);
                }
            } else {
                color[static_cast<std::size_t>(node)] = black;
                stack.pop_back();
            }
        }
    }
    return false;
}

}  // namespace

bool has_cycle(const DirectedGraph& g) { return has_cycle_adj(g.p, g.adjacency()); }

PairSet ancestral_closure(const DirectedGraph& g) {
    if (has_cycle(g)) throw CyclicInput("ancestral_closure requires an acyclic graph");
    const auto adj = g.adjacency();
    PairSet closure(g.p, g.p);
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(g.p));
    std::vector<int> stack;
    for (int k = 0; k < g.p; ++k) {
        std::fill(visited.begin(), visited.end(), 0);
        stack.assign(1, k);
        visited[static_cast<std::size_t>(k)] = 1;
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            for (const int child : adj[static_cast<std::size_t>(node)]) {
                if (!visited[static_cast<std::size_t>(child)]) {
                    visited[static_cast<std::size_t>(child)] = 1;
                    closure.insert(k, child);
                    stack.push_back(child);
                }
            }
        }
    }
    return closure;
}

std::vector<int> topological_heights(const DirectedGraph& g) {
    if (has_cycle(g)) throw CyclicInput("topological_heights requires an acyclic graph");
    const auto adj = g.adjacency();
    std::vector<int> heights(static_cast<std::size_t>(g.p), -1);
    // process nodes in reverse topological order so children are done first
    const auto order = topological_order(g);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int h = 0;
        for (const int child : adj[static_cast<std::size_t>(*it)]) {
            h = std::max(h, heights[static_cast<std::size_t>(child)] + 1);
        }
        heights[static_cast<std::size_t>(*it)] = h;
    }
    return heights;
}

std::vector<int> topological_order(const DirectedGraph& g) {
    if (has_cycle(g)) throw CyclicInput("topological_order requires an acyclic graph");
    const auto adj = g.adjacency();
    std::vector<int> indegree(static_cast<std::size_t>(g.p), 0);
    for (const auto& [k, j] : g.edges.items()) {
        (void)k;
        ++indegree[static_cast<std::size_t>(j)];
    }
    std::vector<int> ready;
    for (int j = g.p - 1; j >= 0; --j) {
        if (indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
    }
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(g.p));
    while (!ready.empty()) {
        // pop the smallest index for a deterministic order
        std::sort(ready.begin(), ready.end(), std::greater<>());
        const int node = ready.back();
        ready.pop_back();
        order.push_back(node);
        for (const int child : adj[static_cast<std::size_t>(node)]) {
            if (--indegree[static_cast<std::size_t>(child)] == 0) ready.push_back(child);
        }
    }
    return order;
}

HypothesisClassification classify_hypothesis(const HypothesisSpec& h, const SuperGraph& s) {
    h.validate(s.p);
    HypothesisClassification cls;
    cls.hypothesis = h.edges;
    for (const auto& [k, j] : h.edges) {
        if (!s.ancestral.contains(j, k)) {
            cls.nondegenerate.emplace_back(k, j);
            cls.per_node_d[j].push_back(k);
        }
    }
    for (auto& [j, ks] : cls.per_node_d) std::sort(ks.begin(), ks.end());
    cls.is_degenerate = cls.nondegenerate.empty();

    DirectedGraph with_d(s.p);
    for (const auto& [k, j] : s.ancestral.items()) with_d.edges.insert(k, j);
    for (const auto& [k, j] : cls.nondegenerate) with_d.edges.insert(k, j);
    cls.is_regular = !has_cycle(with_d);
    return cls;
}

}  // namespace ivdag
