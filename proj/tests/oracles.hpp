#pragma once

// Independent test oracles: brute-force enumeration and Monte Carlo
// estimators used to validate the incremental/analytic implementations.
// Everything here recomputes from first principles; none of it shares the
// production scan path.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "driveloc/graph.hpp"
#include "driveloc/rng.hpp"
#include "driveloc/scan.hpp"

namespace oracles {

using namespace driveloc;

// Brute-force changed-interval scan: every candidate recounts all edges from
// scratch. Iteration order (t1 ascending, then length ascending) and the
// strict ">" update mirror the documented tie-breaking rule.
inline std::array<std::optional<ScanResult>, 4> naive_scan_all(const SimilarityGraph& g, int l0,
                                                               int l1) {
    const int n = g.n;
    const GraphStats gs = graph_stats(g);
    constexpr StatKind kinds[4] = {StatKind::Original, StatKind::Weighted, StatKind::Generalized,
                                   StatKind::MaxType};
    std::array<std::optional<ScanResult>, 4> best{};

    for (int t1 = 0; t1 + l0 <= n; ++t1) {
        const int t2_max = std::min(n, t1 + l1);
        for (int t2 = t1 + l0; t2 <= t2_max; ++t2) {
            std::int64_t r1 = 0, r2 = 0;
            for (const Edge& e : g.edges) {
                const bool a_in = e.a >= t1 && e.a < t2;
                const bool b_in = e.b >= t1 && e.b < t2;
                if (a_in && b_in)
                    ++r1;
                else if (!a_in && !b_in)
                    ++r2;
            }
            const NullMoments mo = null_moments(gs, n, t2 - t1);
            for (int ki = 0; ki < 4; ++ki) {
                auto value = stat_from_counts(mo, r1, r2, kinds[ki]);
                if (!value) continue;
                if (!best[ki] || *value > best[ki]->value) {
                    ScanResult r;
                    r.t1 = t1;
                    r.t2 = t2;
                    r.kind = kinds[ki];
                    r.value = *value;
                    best[ki] = r;
                }
            }
        }
    }
    return best;
}

inline std::optional<ScanResult> naive_scan(const SimilarityGraph& g, int l0, int l1,
                                            StatKind kind) {
    auto all = naive_scan_all(g, l0, l1);
    switch (kind) {
        case StatKind::Original: return all[0];
        case StatKind::Weighted: return all[1];
        case StatKind::Generalized: return all[2];
        case StatKind::MaxType: return all[3];
    }
    return std::nullopt;
}

// Monte Carlo estimates of the permutation-null moments of (r1, r2) for a
// random inside-group of size n1, with standard errors for each estimate.
struct McMoments {
    double mean_r1 = 0, mean_r2 = 0;
    double var_r1 = 0, var_r2 = 0;
    double cov_r12 = 0;
    double se_mean_r1 = 0, se_mean_r2 = 0;
    double se_var_r1 = 0, se_var_r2 = 0;
    double se_cov = 0;
};

inline McMoments mc_null_moments(const SimilarityGraph& g, int n1, int draws,
                                 std::uint64_t seed) {
    const int n = g.n;
    Rng rng(seed);
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::vector<char> inside(static_cast<std::size_t>(n), 0);
    std::vector<double> r1s(static_cast<std::size_t>(draws));
    std::vector<double> r2s(static_cast<std::size_t>(draws));

    for (int d = 0; d < draws; ++d) {
        std::iota(idx.begin(), idx.end(), 0);
        std::fill(inside.begin(), inside.end(), 0);
        for (int j = 0; j < n1; ++j) {
            const std::size_t pick =
                static_cast<std::size_t>(j) +
                static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - j)));
            std::swap(idx[static_cast<std::size_t>(j)], idx[pick]);
            inside[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] = 1;
        }
        std::int64_t r1 = 0, r2 = 0;
        for (const Edge& e : g.edges) {
            const bool a_in = inside[static_cast<std::size_t>(e.a)] != 0;
            const bool b_in = inside[static_cast<std::size_t>(e.b)] != 0;
            if (a_in && b_in)
                ++r1;
            else if (!a_in && !b_in)
                ++r2;
        }
        r1s[static_cast<std::size_t>(d)] = static_cast<double>(r1);
        r2s[static_cast<std::size_t>(d)] = static_cast<double>(r2);
    }

    const double nd = static_cast<double>(draws);
    McMoments mc;
    for (int d = 0; d < draws; ++d) {
        mc.mean_r1 += r1s[static_cast<std::size_t>(d)];
        mc.mean_r2 += r2s[static_cast<std::size_t>(d)];
    }
    mc.mean_r1 /= nd;
    mc.mean_r2 /= nd;

    double ssq1 = 0, ssq2 = 0, scov = 0;
    double s4_1 = 0, s4_2 = 0, s2_cov = 0;
    for (int d = 0; d < draws; ++d) {
        const double d1 = r1s[static_cast<std::size_t>(d)] - mc.mean_r1;
        const double d2 = r2s[static_cast<std::size_t>(d)] - mc.mean_r2;
        ssq1 += d1 * d1;
        ssq2 += d2 * d2;
        scov += d1 * d2;
        s4_1 += d1 * d1 * d1 * d1;
        s4_2 += d2 * d2 * d2 * d2;
        s2_cov += d1 * d2 * d1 * d2;
    }
    mc.var_r1 = ssq1 / nd;
    mc.var_r2 = ssq2 / nd;
    mc.cov_r12 = scov / nd;
    mc.se_mean_r1 = std::sqrt(mc.var_r1 / nd);
    mc.se_mean_r2 = std::sqrt(mc.var_r2 / nd);
    // SE of a plug-in variance/covariance: sd of the per-draw products.
    mc.se_var_r1 = std::sqrt(std::max(0.0, s4_1 / nd - mc.var_r1 * mc.var_r1) / nd);
    mc.se_var_r2 = std::sqrt(std::max(0.0, s4_2 / nd - mc.var_r2 * mc.var_r2) / nd);
    mc.se_cov = std::sqrt(std::max(0.0, s2_cov / nd - mc.cov_r12 * mc.cov_r12) / nd);
    return mc;
}

// ---------------------------------------------------------------------------
// spanning-tree helpers for small-n exhaustive verification

inline bool is_acyclic(std::span<const Edge> edges, int n) {
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    for (const Edge& e : edges) {
        int a = find(e.a), b = find(e.b);
        if (a == b) return false;
        parent[static_cast<std::size_t>(b)] = a;
    }
    return true;
}

inline bool is_spanning_tree(std::span<const Edge> edges, int n) {
    if (static_cast<int>(edges.size()) != n - 1) return false;
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    for (const Edge& e : edges) {
        int a = find(e.a), b = find(e.b);
        if (a == b) return false;  // cycle
        parent[static_cast<std::size_t>(b)] = a;
    }
    return true;
}

// Minimum spanning-tree weight by enumerating all (n-1)-edge subsets of the
// complete graph. Feasible for n <= 8 (C(28,7) ~ 1.2M subsets).
inline double min_spanning_weight_exhaustive(const DistanceMatrix& dm) {
    const int n = static_cast<int>(dm.n);
    std::vector<Edge> all;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) all.push_back({i, j});
    const int e_total = static_cast<int>(all.size());
    const int pick = n - 1;

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> comb(static_cast<std::size_t>(pick));
    std::iota(comb.begin(), comb.end(), 0);
    std::vector<Edge> subset(static_cast<std::size_t>(pick));
    while (true) {
        double weight = 0;
        for (int i = 0; i < pick; ++i) {
            const Edge& e = all[static_cast<std::size_t>(comb[static_cast<std::size_t>(i)])];
            subset[static_cast<std::size_t>(i)] = e;
            weight += dm(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b));
        }
        if (weight < best && is_spanning_tree(subset, n)) best = weight;

        // next combination
        int i = pick - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == e_total - pick + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < pick; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best;
}

// ---------------------------------------------------------------------------
// random test instances

inline SimilarityGraph kmst_of_random_points(int n, int dim, int k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> rows(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim));
    for (double& v : rows) v = rng.normal();
    auto dm = pairwise_distances(rows, static_cast<std::size_t>(n), static_cast<std::size_t>(dim));
    return kmst(dm, k);
}

// Erdos-Renyi-style graph with a spanning backbone so no node is isolated.
inline SimilarityGraph random_graph(int n, int extra_edges, std::uint64_t seed) {
    Rng rng(seed);
    SimilarityGraph g;
    g.n = n;
    g.k = 0;
    std::vector<std::vector<char>> used(static_cast<std::size_t>(n),
                                        std::vector<char>(static_cast<std::size_t>(n), 0));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int i = 1; i < n; ++i) {
        int a = order[static_cast<std::size_t>(i)];
        int b = order[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i)))];
        if (a > b) std::swap(a, b);
        used[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
        g.edges.push_back({a, b});
    }
    for (int i = 0; i < extra_edges; ++i) {
        int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (used[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) continue;
        used[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
        g.edges.push_back({a, b});
    }
    g.tree_sizes.push_back(static_cast<std::int32_t>(g.edges.size()));
    return g;
}

}  // namespace oracles
