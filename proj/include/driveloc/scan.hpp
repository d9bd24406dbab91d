#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "driveloc/graph.hpp"
#include "driveloc/types.hpp"

namespace driveloc {

// The four edge-count scan statistics: original (sign-flipped between-group
// count), weighted, generalized and max-type.
enum class StatKind { Original, Weighted, Generalized, MaxType };

std::string_view to_string(StatKind k);                          // "o","w","g","m"
std::optional<StatKind> stat_kind_from_string(std::string_view s);

// Edge classification for one candidate interval. Nodes are observation
// indices; the interval (t1, t2] covers nodes t1..t2-1, so n1 = t2 - t1.
struct EdgeCounts {
    std::int64_t r0 = 0;  // one endpoint inside, one outside
    std::int64_t r1 = 0;  // both endpoints inside
    std::int64_t r2 = 0;  // both endpoints outside
};

EdgeCounts edge_counts(const SimilarityGraph& g, int t1, int t2);

// First and second moments of (r1, r2) when n1 of the n nodes are assigned to
// the inside group uniformly at random. Computed combinatorially from the
// degree structure; validated against a Monte Carlo oracle in the test suite.
struct NullMoments {
    int n = 0;
    int n1 = 0;
    double mean_r1 = 0, mean_r2 = 0;
    double var_r1 = 0, var_r2 = 0;
    double cov_r12 = 0;
    double m = 0;  // total edges

    double mean_r0() const { return m - mean_r1 - mean_r2; }
    double var_r0() const { return var_r1 + var_r2 + 2.0 * cov_r12; }
};

// Requires 2 <= n1 <= n - 2 (throws DegenerateGroup otherwise) and n >= 4.
NullMoments null_moments(const GraphStats& gs, int n, int n1);

struct StatValues {
    double z0 = 0;     // standardized between-count, sign flipped
    double zw = 0;     // standardized weighted within-count
    double zd = 0;     // standardized within-count difference
    double s = 0;      // generalized: zw^2 + zd^2
    double mstat = 0;  // max-type: max(zw, |zd|)

    double value(StatKind k) const {
        switch (k) {
            case StatKind::Original: return z0;
            case StatKind::Weighted: return zw;
            case StatKind::Generalized: return s;
            case StatKind::MaxType: return mstat;
        }
        return 0;
    }
};

namespace detail {

// A variance is usable when it is positive beyond the cancellation noise of
// the mean-square subtraction that produced it.
inline bool variance_ok(double var, double mean) {
    double floor = 1e-12 * std::max(1.0, mean * mean);
    return var > floor;
}

struct StandardizedParts {
    double z0 = 0, zw = 0, zd = 0;
    bool ok0 = false, okw = false, okd = false;
};

// Shared arithmetic for every statistic evaluation. The incremental scan, the
// one-shot statistics() call and the brute-force test oracle all standardize
// through this exact sequence of operations, so equal integer counts always
// produce bitwise-equal statistic values.
inline StandardizedParts standardized_parts(const NullMoments& mo, std::int64_t r1,
                                            std::int64_t r2) {
    StandardizedParts out;
    const double n0 = static_cast<double>(mo.n - mo.n1);
    const double n1 = static_cast<double>(mo.n1);
    const double denom = static_cast<double>(mo.n - 2);

    const double r0 = mo.m - static_cast<double>(r1) - static_cast<double>(r2);
    const double var0 = mo.var_r0();
    out.ok0 = variance_ok(var0, mo.mean_r0());
    if (out.ok0) out.z0 = -(r0 - mo.mean_r0()) / std::sqrt(var0);

    const double w1 = (n0 - 1.0) / denom;
    const double w2 = (n1 - 1.0) / denom;
    const double rw = w1 * static_cast<double>(r1) + w2 * static_cast<double>(r2);
    const double mean_w = w1 * mo.mean_r1 + w2 * mo.mean_r2;
    const double var_w =
        w1 * w1 * mo.var_r1 + w2 * w2 * mo.var_r2 + 2.0 * w1 * w2 * mo.cov_r12;
    out.okw = variance_ok(var_w, mean_w);
    if (out.okw) out.zw = (rw - mean_w) / std::sqrt(var_w);

    const double rd = static_cast<double>(r1) - static_cast<double>(r2);
    const double mean_d = mo.mean_r1 - mo.mean_r2;
    const double var_d = mo.var_r1 + mo.var_r2 - 2.0 * mo.cov_r12;
    out.okd = variance_ok(var_d, mean_d);
    if (out.okd) out.zd = (rd - mean_d) / std::sqrt(var_d);

    return out;
}

}  // namespace detail

// Value of one statistic for the given counts, or nullopt when any variance
// the statistic depends on is (numerically) zero.
inline std::optional<double> stat_from_counts(const NullMoments& mo, std::int64_t r1,
                                              std::int64_t r2, StatKind kind) {
    auto p = detail::standardized_parts(mo, r1, r2);
    switch (kind) {
        case StatKind::Original:
            if (!p.ok0) return std::nullopt;
            return p.z0;
        case StatKind::Weighted:
            if (!p.okw) return std::nullopt;
            return p.zw;
        case StatKind::Generalized:
            if (!p.okw || !p.okd) return std::nullopt;
            return p.zw * p.zw + p.zd * p.zd;
        case StatKind::MaxType:
            if (!p.okw || !p.okd) return std::nullopt;
            return std::max(p.zw, std::fabs(p.zd));
    }
    return std::nullopt;
}

// All five standardized quantities, or nullopt if any variance is zero.
std::optional<StatValues> statistics(const EdgeCounts& c, const NullMoments& mo);

struct ScanResult {
    int t1 = 0;  // interval is (t1, t2]: nodes t1..t2-1
    int t2 = 0;
    StatKind kind = StatKind::MaxType;
    double value = 0;
    std::optional<double> p_value;
};

// Maximizes the chosen statistic over all intervals with l0 <= t2 - t1 <= l1.
// Ties go to the smaller t1, then the smaller length. Requires
// 2 <= l0 <= l1 <= n - 2; throws NoValidCandidate if every candidate had zero
// variance. Implemented incrementally; equals brute-force enumeration exactly.
ScanResult scan(const SimilarityGraph& g, int l0, int l1, StatKind kind);

// Same scan after relabeling: node v is treated as observation
// position_of_node[v]. scan() is the identity relabeling; permutation
// replicates use random relabelings.
ScanResult scan_relabeled(const SimilarityGraph& g, std::span<const int> position_of_node,
                          int l0, int l1, StatKind kind);

// p = (1 + #{b : permuted max >= observed max}) / (B + 1). The replicate
// streams depend only on (seed, b), so the result is reproducible for any
// thread count.
double permutation_pvalue(const SimilarityGraph& g, int l0, int l1, StatKind kind, int B,
                          std::uint64_t seed, int threads = 1);

struct DetectionConfig {
    int k = 26;
    double l0_frac = 0.1;
    double l1_frac = 0.9;
    StatKind stat = StatKind::MaxType;
    int perm_B = 100;
    double alpha = 0.05;  // significance gate; 1 disables gating
    double sample_hz = 10.0;
    double window_secs = 60.0;
    double offset_secs = 30.0;
    std::uint64_t seed = 0;
    int threads = 1;

    // (l0, l1) for a window of n observations: floor of the fractions, clamped
    // into [2, n-2].
    std::pair<int, int> interval_bounds(std::size_t n) const;

    // True when a window of n observations satisfies detect()'s precondition
    // n >= max(20, l0 + 4).
    bool window_admissible(std::size_t n) const;

    void validate() const;  // throws ConfigError
};

// Runs the full per-window detection: pairwise distances -> k-MST -> scan ->
// permutation p-value. Returns the interval in seconds (window start plus
// index / sample rate) when p <= alpha, nullopt otherwise. The permutation
// stream is derived from (cfg.seed, video_id, view, window start), so results
// are reproducible and windows are independent.
std::optional<ActivityInterval> detect(const KeypointSeries& window, const DetectionConfig& cfg);

}  // namespace driveloc
