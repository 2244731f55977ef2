#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace ivdag {

// Set of ordered index pairs with O(1) membership and deterministic
// (insertion-ordered) iteration. Backed by a dense row*cols mask, which is
// the right trade at desk scale.
class PairSet {
public:
    PairSet() = default;
    PairSet(int rows, int cols) : rows_(rows), cols_(cols), mask_(static_cast<std::size_t>(rows) * cols, 0) {}

    bool contains(int a, int b) const {
        if (a < 0 || b < 0 || a >= rows_ || b >= cols_) return false;
        return mask_[index(a, b)] != 0;
    }

    // no-op on duplicates
    void insert(int a, int b) {
        if (!mask_[index(a, b)]) {
            mask_[index(a, b)] = 1;
            items_.emplace_back(a, b);
        }
    }

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<std::pair<int, int>>& items() const { return items_; }

    // lexicographically sorted copy, for stable serialization and comparison
    std::vector<std::pair<int, int>> sorted() const;

    bool contains_all(const PairSet& other) const;
    bool operator==(const PairSet& other) const;

private:
    std::size_t index(int a, int b) const { return static_cast<std::size_t>(a) * cols_ + b; }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> mask_;
    std::vector<std::pair<int, int>> items_;
};

/// Directed graph over p primary nodes; edge (k, j) reads "k -> j".
/// Indices are 0-based in memory, 1-based only at I/O boundaries.
struct DirectedGraph {
    int p = 0;
    PairSet edges;

    DirectedGraph() = default;
    explicit DirectedGraph(int p_) : p(p_), edges(p_, p_) {}
    DirectedGraph(int p_, const std::vector<std::pair<int, int>>& edge_list);

    std::vector<std::vector<int>> adjacency() const;  // children per node
};

/// Super-graph S = (ancestral relations, candidate interventional relations)
/// plus the topological heights recovered by peeling.
struct SuperGraph {
    int p = 0;
    int q = 0;
    PairSet ancestral;      // pairs over primary nodes
    PairSet interventions;  // (intervention l, primary j)
    std::vector<int> heights;

    SuperGraph() = default;
    SuperGraph(int p_, int q_) : p(p_), q(q_), ancestral(p_, p_), interventions(q_, p_), heights(p_, 0) {}

    std::vector<int> ancestors_of(int j) const;      // sorted
    std::vector<int> interventions_on(int j) const;  // sorted
};

enum class TestMode { edges, pathway };

/// A hypothesized edge set H with its test mode.
struct HypothesisSpec {
    std::vector<std::pair<int, int>> edges;
    TestMode mode = TestMode::edges;

    // Throws on empty set, duplicates, self-loops, or out-of-range indices.
    void validate(int p) const;
};

/// Nondegeneracy/regularity classification of a hypothesis against a
/// super-graph: D = {(k,j) in H : (j,k) not in A}; regular iff D u A acyclic.
struct HypothesisClassification {
    std::vector<std::pair<int, int>> hypothesis;
    std::vector<std::pair<int, int>> nondegenerate;  // the set D, in H order
    bool is_degenerate = true;
    bool is_regular = true;
    std::map<int, std::vector<int>> per_node_d;  // j -> sorted {k : (k,j) in D}
};

bool has_cycle(const DirectedGraph& g);

// All pairs (k, j) with a directed path k -> ... -> j. Throws CyclicInput.
PairSet ancestral_closure(const DirectedGraph& g);

// h(j) = length of the longest directed path from j to a leaf. Throws CyclicInput.
std::vector<int> topological_heights(const DirectedGraph& g);

// Node order in which every node appears before its children (ancestors first).
std::vector<int> topological_order(const DirectedGraph& g);

HypothesisClassification classify_hypothesis(const HypothesisSpec& h, const SuperGraph& s);

}  // namespace ivdag
