#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "driveloc/keypoints.hpp"

namespace driveloc {

// Dense symmetric Euclidean distance matrix with zero diagonal.
struct DistanceMatrix {
    std::size_t n = 0;
    std::vector<double> d;  // row-major n*n

    double operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }
};

// Pairwise Euclidean distances between feature vectors (all 2S coordinates).
// Requires at least 2 vectors of equal dimensionality.
DistanceMatrix pairwise_distances(std::span<const FeatureVector> vectors);

// Same, over the rows of a flat row-major matrix.
DistanceMatrix pairwise_distances(std::span<const double> row_major, std::size_t n,
                                  std::size_t dim);

struct Edge {
    std::int32_t a = 0;  // a < b
    std::int32_t b = 0;

    bool operator==(const Edge&) const = default;
};

// Union of k successive minimum spanning trees: T1 is the MST of the complete
// graph, each later tree is the MST (minimum spanning forest, if the remaining
// graph is disconnected) of what is left after removing its predecessors.
struct SimilarityGraph {
    std::int32_t n = 0;
    int k = 0;
    // Set when some round could not produce a full spanning tree because the
    // remaining graph was disconnected; the partial forest is still included.
    bool truncated = false;
    std::vector<Edge> edges;                 // unique, a < b, grouped by round
    std::vector<std::int32_t> tree_sizes;    // edges taken per round

    std::int64_t edge_count() const { return static_cast<std::int64_t>(edges.size()); }
};

// Builds the k-MST similarity graph. Ties in edge weight are broken by
// lexicographic (a, b) order, so the result is deterministic. Requires k >= 1
// and n >= 2.
SimilarityGraph kmst(const DistanceMatrix& dm, int k);

struct GraphStats {
    std::int64_t m = 0;                    // edge count
    std::vector<std::int32_t> degrees;     // per node
    std::int64_t shared_pairs = 0;         // unordered edge pairs sharing a node
};

GraphStats graph_stats(const SimilarityGraph& g);

// Debug dump of the edge list as "i,j" rows (0-based).
void dump_edges_csv(const SimilarityGraph& g, std::ostream& out);

}  // namespace driveloc
