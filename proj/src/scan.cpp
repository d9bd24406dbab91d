#include "driveloc/scan.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "driveloc/errors.hpp"
#include "driveloc/parallel.hpp"
#include "driveloc/rng.hpp"

namespace driveloc {

std::string_view to_string(StatKind k) {
    switch (k) {
        case StatKind::Original: return "o";
        case StatKind::Weighted: return "w";
        case StatKind::Generalized: return "g";
        case StatKind::MaxType: return "m";
    }
    return "?";
}

std::optional<StatKind> stat_kind_from_string(std::string_view s) {
    if (s == "o") return StatKind::Original;
    if (s == "w") return StatKind::Weighted;
    if (s == "g") return StatKind::Generalized;
    if (s == "m") return StatKind::MaxType;
    return std::nullopt;
}

EdgeCounts edge_counts(const SimilarityGraph& g, int t1, int t2) {
    if (t1 < 0 || t1 >= t2 || t2 > g.n) throw ConfigError("edge_counts: need 0 <= t1 < t2 <= n");
    EdgeCounts c;
    for (const Edge& e : g.edges) {
        bool a_in = e.a >= t1 && e.a < t2;
        bool b_in = e.b >= t1 && e.b < t2;
        if (a_in && b_in)
            ++c.r1;
        else if (!a_in && !b_in)
            ++c.r2;
        else
            ++c.r0;
    }
    return c;
}

NullMoments null_moments(const GraphStats& gs, int n, int n1) {
    const int n0 = n - n1;
    if (n1 < 2 || n0 < 2)
        throw DegenerateGroup("null moments need 2 <= n1 <= n - 2 (n=" + std::to_string(n) +
                              ", n1=" + std::to_string(n1) + ")");

    const double nd = n;
    const double m = static_cast<double>(gs.m);
    const double shared2 = 2.0 * static_cast<double>(gs.shared_pairs);  // ordered pairs sharing a node
    const double disjoint = m * (m - 1.0) - shared2;                    // ordered disjoint pairs

    // Probability that 2, 3 or 4 specific distinct nodes all land in a group
    // of the given size, when the group is drawn without replacement.
    auto p2 = [&](double g2) { return g2 * (g2 - 1.0) / (nd * (nd - 1.0)); };
    auto p3 = [&](double g3) { return p2(g3) * (g3 - 2.0) / (nd - 2.0); };
    auto p4 = [&](double g4) { return p3(g4) * (g4 - 3.0) / (nd - 3.0); };

    NullMoments mo;
    mo.n = n;
    mo.n1 = n1;
    mo.m = m;

    const double s1 = n1;  // inside-group size
    const double s0 = n0;

    mo.mean_r1 = m * p2(s1);
    mo.mean_r2 = m * p2(s0);

    const double e_r1_sq = m * p2(s1) + shared2 * p3(s1) + disjoint * p4(s1);
    const double e_r2_sq = m * p2(s0) + shared2 * p3(s0) + disjoint * p4(s0);
    mo.var_r1 = e_r1_sq - mo.mean_r1 * mo.mean_r1;
    mo.var_r2 = e_r2_sq - mo.mean_r2 * mo.mean_r2;

    // Identical or node-sharing edge pairs cannot split across the two groups.
    const double e_r1_r2 =
        disjoint * (s1 * (s1 - 1.0) * s0 * (s0 - 1.0)) / (nd * (nd - 1.0) * (nd - 2.0) * (nd - 3.0));
    mo.cov_r12 = e_r1_r2 - mo.mean_r1 * mo.mean_r2;
    return mo;
}

std::optional<StatValues> statistics(const EdgeCounts& c, const NullMoments& mo) {
    auto p = detail::standardized_parts(mo, c.r1, c.r2);
    if (!p.ok0 || !p.okw || !p.okd) return std::nullopt;
    StatValues v;
    v.z0 = p.z0;
    v.zw = p.zw;
    v.zd = p.zd;
    v.s = p.zw * p.zw + p.zd * p.zd;
    v.mstat = std::max(p.zw, std::fabs(p.zd));
    return v;
}

namespace {

// Shared, read-only scan context: node-space adjacency plus the per-length
// moment table. The moments depend only on the graph's degree structure and
// the group size, so one table serves the observed scan and every
// permutation replicate.
struct ScanContext {
    int n = 0;
    std::int64_t m = 0;
    int l0 = 0, l1 = 0;
    std::vector<std::int32_t> adj_off;  // CSR offsets, size n+1
    std::vector<std::int32_t> adj;      // neighbor node ids, size 2m
    std::vector<NullMoments> table;     // index len - l0

    ScanContext(const SimilarityGraph& g, int l0_, int l1_) : n(g.n), l0(l0_), l1(l1_) {
        if (n < 4) throw ConfigError("scan needs at least 4 observations");
        if (l0 < 2 || l0 > l1 || l1 > n - 2)
            throw ConfigError("scan needs 2 <= l0 <= l1 <= n - 2");
        GraphStats gs = graph_stats(g);
        m = gs.m;
        adj_off.assign(static_cast<std::size_t>(n) + 1, 0);
        for (const Edge& e : g.edges) {
            ++adj_off[static_cast<std::size_t>(e.a) + 1];
            ++adj_off[static_cast<std::size_t>(e.b) + 1];
        }
        for (std::size_t i = 1; i < adj_off.size(); ++i) adj_off[i] += adj_off[i - 1];
        adj.resize(2 * static_cast<std::size_t>(m));
        std::vector<std::int32_t> cursor(adj_off.begin(), adj_off.end() - 1);
        for (const Edge& e : g.edges) {
            adj[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.a)]++)] = e.b;
            adj[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.b)]++)] = e.a;
        }
        table.reserve(static_cast<std::size_t>(l1 - l0 + 1));
        for (int len = l0; len <= l1; ++len) table.push_back(null_moments(gs, n, len));
    }
};

struct BestCandidate {
    bool found = false;
    int t1 = 0, t2 = 0;
    double value = 0;
};

// One pass over all candidate intervals for a given node relabeling.
// pos[v] is the observation position of node v; order is its inverse.
//
// For fixed t1 the inside set grows one position at a time. The node entering
// at position p contributes lt_self[p] - cnt_before_t1[p] new inside-inside
// edges, where lt_self[p] counts its neighbors at positions < p (fixed per
// relabeling) and cnt_before_t1[p] counts its neighbors at positions < t1
// (maintained incrementally as t1 advances). This keeps the whole scan at
// O(n * (l1 - l0)) statistic evaluations plus O(m) bookkeeping.
BestCandidate scan_pass(const ScanContext& ctx, std::span<const int> pos,
                        std::span<const int> order, StatKind kind) {
    const int n = ctx.n;
    std::vector<std::int32_t> lt_self(static_cast<std::size_t>(n), 0);
    std::vector<std::int32_t> deg_at(static_cast<std::size_t>(n), 0);
    std::vector<std::int32_t> cnt_before_t1(static_cast<std::size_t>(n), 0);

    for (int v = 0; v < n; ++v) {
        const int p = pos[static_cast<std::size_t>(v)];
        const auto begin = ctx.adj_off[static_cast<std::size_t>(v)];
        const auto end = ctx.adj_off[static_cast<std::size_t>(v) + 1];
        deg_at[static_cast<std::size_t>(p)] = end - begin;
        std::int32_t lt = 0;
        for (auto i = begin; i < end; ++i)
            if (pos[static_cast<std::size_t>(ctx.adj[static_cast<std::size_t>(i)])] < p) ++lt;
        lt_self[static_cast<std::size_t>(p)] = lt;
    }

    BestCandidate best;
    for (int t1 = 0; t1 + ctx.l0 <= n; ++t1) {
        if (t1 > 0) {
            const int leaving = order[static_cast<std::size_t>(t1 - 1)];
            const auto begin = ctx.adj_off[static_cast<std::size_t>(leaving)];
            const auto end = ctx.adj_off[static_cast<std::size_t>(leaving) + 1];
            for (auto i = begin; i < end; ++i)
                ++cnt_before_t1[static_cast<std::size_t>(
                    pos[static_cast<std::size_t>(ctx.adj[static_cast<std::size_t>(i)])])];
        }

        std::int64_t r1 = 0;
        std::int64_t r2 = ctx.m;
        const int t2_max = std::min(n, t1 + ctx.l1);
        for (int t2 = t1 + 1; t2 <= t2_max; ++t2) {
            const std::size_t p = static_cast<std::size_t>(t2 - 1);
            const std::int64_t entering_inside = lt_self[p] - cnt_before_t1[p];
            r1 += entering_inside;
            r2 -= deg_at[p] - entering_inside;
            assert(r1 >= 0 && r2 >= 0 && r1 + r2 <= ctx.m);

            const int len = t2 - t1;
            if (len < ctx.l0) continue;
            auto value = stat_from_counts(ctx.table[static_cast<std::size_t>(len - ctx.l0)], r1,
                                          r2, kind);
            if (value && (!best.found || *value > best.value)) {
                best.found = true;
                best.t1 = t1;
                best.t2 = t2;
                best.value = *value;
            }
        }
    }
    return best;
}

std::vector<int> identity_positions(int n) {
    std::vector<int> pos(static_cast<std::size_t>(n));
    std::iota(pos.begin(), pos.end(), 0);
    return pos;
}

std::vector<int> invert(std::span<const int> pos) {
    std::vector<int> order(pos.size());
    for (std::size_t v = 0; v < pos.size(); ++v)
        order[static_cast<std::size_t>(pos[v])] = static_cast<int>(v);
    return order;
}

}  // namespace

ScanResult scan_relabeled(const SimilarityGraph& g, std::span<const int> position_of_node, int l0,
                          int l1, StatKind kind) {
    ScanContext ctx(g, l0, l1);
    if (position_of_node.size() != static_cast<std::size_t>(g.n))
        throw ConfigError("relabeling size does not match node count");
    auto order = invert(position_of_node);
    BestCandidate best = scan_pass(ctx, position_of_node, order, kind);
    if (!best.found) throw NoValidCandidate();
    ScanResult res;
    res.t1 = best.t1;
    res.t2 = best.t2;
    res.kind = kind;
    res.value = best.value;
    return res;
}

ScanResult scan(const SimilarityGraph& g, int l0, int l1, StatKind kind) {
    auto pos = identity_positions(g.n);
    return scan_relabeled(g, pos, l0, l1, kind);
}

double permutation_pvalue(const SimilarityGraph& g, int l0, int l1, StatKind kind, int B,
                          std::uint64_t seed, int threads) {
    if (B < 1) throw ConfigError("permutation count B must be >= 1");
    ScanContext ctx(g, l0, l1);

    auto identity = identity_positions(g.n);
    BestCandidate observed = scan_pass(ctx, identity, identity, kind);
    if (!observed.found) throw NoValidCandidate();

    // Candidate validity depends only on (graph stats, length), so every
    // replicate shares the observed scan's admissible lengths and always
    // produces a maximum.
    std::vector<std::uint8_t> exceeds(static_cast<std::size_t>(B), 0);
    parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
        Rng rng(mix_seed(seed, b));
        std::vector<int> pos = identity_positions(ctx.n);
        rng.shuffle(pos);
        auto order = invert(pos);
        BestCandidate perm = scan_pass(ctx, pos, order, kind);
        exceeds[b] = perm.found && perm.value >= observed.value;
    });

    std::int64_t count = std::accumulate(exceeds.begin(), exceeds.end(), std::int64_t{0});
    return (1.0 + static_cast<double>(count)) / (static_cast<double>(B) + 1.0);
}

std::pair<int, int> DetectionConfig::interval_bounds(std::size_t n) const {
    const int ni = static_cast<int>(n);
    int l0 = std::max(2, static_cast<int>(std::floor(l0_frac * static_cast<double>(n))));
    int l1 = static_cast<int>(std::floor(l1_frac * static_cast<double>(n)));
    l0 = std::min(l0, ni - 2);
    l1 = std::clamp(l1, l0, ni - 2);
    return {l0, l1};
}

bool DetectionConfig::window_admissible(std::size_t n) const {
    if (n < 20) return false;
    auto [l0, l1] = interval_bounds(n);
    return static_cast<int>(n) >= l0 + 4 && l0 >= 2 && l0 <= l1;
}

void DetectionConfig::validate() const {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (!(l0_frac > 0 && l0_frac < 1)) throw ConfigError("l0_frac must lie in (0, 1)");
    if (!(l1_frac > 0 && l1_frac < 1)) throw ConfigError("l1_frac must lie in (0, 1)");
    if (l0_frac > l1_frac) throw ConfigError("l0_frac must not exceed l1_frac");
    if (perm_B < 1) throw ConfigError("perm_B must be >= 1");
    if (!(alpha > 0 && alpha <= 1)) throw ConfigError("alpha must lie in (0, 1]");
    if (sample_hz <= 0) throw ConfigError("sample_hz must be positive");
    if (window_secs <= 0) throw ConfigError("window_secs must be positive");
    if (offset_secs < 0 || offset_secs >= window_secs)
        throw ConfigError("offset_secs must satisfy 0 <= offset < window");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::optional<ActivityInterval> detect(const KeypointSeries& window, const DetectionConfig& cfg) {
    cfg.validate();
    const std::size_t n = window.vectors.size();
    if (!cfg.window_admissible(n))
        throw ConfigError("window too short for detection (" + std::to_string(n) +
                          " observations)");

    auto [l0, l1] = cfg.interval_bounds(n);
    DistanceMatrix dm = pairwise_distances(window.vectors);
    SimilarityGraph g = kmst(dm, cfg.k);

    ScanResult res;
    try {
        res = scan(g, l0, l1, cfg.stat);
    } catch (const NoValidCandidate&) {
        return std::nullopt;
    }

    const std::uint64_t window_seed =
        mix_seed(mix_seed(cfg.seed, hash_string(window.video_id)),
                 (static_cast<std::uint64_t>(window.view) << 32) ^
                     static_cast<std::uint64_t>(std::llround(window.start_s * 1000.0)));
    res.p_value = permutation_pvalue(g, l0, l1, cfg.stat, cfg.perm_B, window_seed, cfg.threads);
    if (*res.p_value > cfg.alpha) return std::nullopt;

    ActivityInterval iv;
    iv.video_id = window.video_id;
    iv.view = window.view;
    iv.start_s = window.start_s + static_cast<double>(res.t1) / window.sample_hz;
    iv.end_s = window.start_s + static_cast<double>(res.t2) / window.sample_hz;
    iv.stat_value = res.value;
    iv.p_value = res.p_value;
    return iv;
}

}  // namespace driveloc
