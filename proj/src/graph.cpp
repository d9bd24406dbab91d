#include "driveloc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "driveloc/errors.hpp"

namespace driveloc {

namespace {

DistanceMatrix distances_impl(const double* rows, std::size_t n, std::size_t dim) {
    DistanceMatrix dm;
    dm.n = n;
    dm.d.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = rows + i * dim;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* rj = rows + j * dim;
            double sum = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                double diff = ri[c] - rj[c];
                sum += diff * diff;
            }
            double dist = std::sqrt(sum);
            dm.at(i, j) = dist;
            dm.at(j, i) = dist;
        }
    }
    return dm;
}

// Union-find with path halving.
struct DisjointSets {
    std::vector<std::int32_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::int32_t find(std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

}  // namespace

DistanceMatrix pairwise_distances(std::span<const FeatureVector> vectors) {
    if (vectors.size() < 2) throw DimensionMismatch("need at least 2 vectors");
    const std::size_t dim = vectors.front().values.size();
    std::vector<double> flat;
    flat.reserve(vectors.size() * dim);
    for (const auto& v : vectors) {
        if (v.values.size() != dim)
            throw DimensionMismatch("feature vectors have differing dimensionality");
        flat.insert(flat.end(), v.values.begin(), v.values.end());
    }
    return distances_impl(flat.data(), vectors.size(), dim);
}

DistanceMatrix pairwise_distances(std::span<const double> row_major, std::size_t n,
                                  std::size_t dim) {
    if (n < 2) throw DimensionMismatch("need at least 2 rows");
    if (dim == 0 || row_major.size() != n * dim)
        throw DimensionMismatch("row-major buffer does not match n*dim");
    return distances_impl(row_major.data(), n, dim);
}

SimilarityGraph kmst(const DistanceMatrix& dm, int k) {
    if (k < 1) throw ConfigError("k must be >= 1");
    const std::size_t n = dm.n;
    if (n < 2) throw ConfigError("k-MST needs at least 2 nodes");

    struct WeightedEdge {
        double w;
        std::int32_t a, b;
    };
    std::vector<WeightedEdge> all;
    all.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            all.push_back({dm(i, j), static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
    std::sort(all.begin(), all.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
        if (x.w != y.w) return x.w < y.w;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });

    SimilarityGraph g;
    g.n = static_cast<std::int32_t>(n);
    g.k = k;
    g.edges.reserve(std::min<std::size_t>(all.size(), static_cast<std::size_t>(k) * (n - 1)));

    std::vector<char> used(all.size(), 0);
    std::size_t remaining = all.size();
    for (int round = 0; round < k && remaining > 0; ++round) {
        DisjointSets sets(n);
        std::int32_t taken = 0;
        for (std::size_t e = 0; e < all.size() && taken + 1 < static_cast<std::int32_t>(n); ++e) {
            if (used[e]) continue;
            if (sets.unite(all[e].a, all[e].b)) {
                used[e] = 1;
                --remaining;
                g.edges.push_back({all[e].a, all[e].b});
                ++taken;
            }
        }
        g.tree_sizes.push_back(taken);
        if (taken + 1 < static_cast<std::int32_t>(n)) g.truncated = true;
    }
    return g;
}

GraphStats graph_stats(const SimilarityGraph& g) {
    GraphStats gs;
    gs.m = g.edge_count();
    gs.degrees.assign(static_cast<std::size_t>(g.n), 0);
    for (const Edge& e : g.edges) {
        ++gs.degrees[static_cast<std::size_t>(e.a)];
        ++gs.degrees[static_cast<std::size_t>(e.b)];
    }
    for (std::int64_t d : gs.degrees) gs.shared_pairs += d * (d - 1) / 2;
    return gs;
}

void dump_edges_csv(const SimilarityGraph& g, std::ostream& out) {
    out << "i,j\n";
    for (const Edge& e : g.edges) out << e.a << ',' << e.b << '\n';
}

}  // namespace driveloc
