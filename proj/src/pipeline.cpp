#include "driveloc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "driveloc/errors.hpp"
#include "driveloc/evaluate.hpp"
#include "driveloc/parallel.hpp"

namespace driveloc {

std::vector<ActivityInterval> sweep(const KeypointSeries& series, const DetectionConfig& cfg) {
    cfg.validate();
    auto slices = window(series, cfg.window_secs, cfg.offset_secs);
    // Drop windows detect() could not process (trailing partials shorter than
    // the minimum interval support).
    std::erase_if(slices, [&](const WindowSlice& s) {
        return !cfg.window_admissible(s.series.vectors.size());
    });

    std::vector<std::optional<ActivityInterval>> results(slices.size());
    // Windows are independent; permutations already parallelize inside
    // detect(), so split the budget rather than oversubscribing.
    DetectionConfig per_window = cfg;
    per_window.threads = 1;
    parallel_for(slices.size(), cfg.threads,
                 [&](std::size_t i) { results[i] = detect(slices[i].series, per_window); });

    std::vector<ActivityInterval> out;
    for (auto& r : results)
        if (r) out.push_back(std::move(*r));
    return out;
}

double temporal_iou(const ActivityInterval& a, const ActivityInterval& b) {
    return overlap_score(a.start_s, a.end_s, b.start_s, b.end_s);
}

namespace {

// Smaller p-value wins; ties by larger statistic, then earlier start.
bool better_representative(const ActivityInterval& a, const ActivityInterval& b) {
    const double pa = a.p_value.value_or(std::numeric_limits<double>::infinity());
    const double pb = b.p_value.value_or(std::numeric_limits<double>::infinity());
    if (pa != pb) return pa < pb;
    if (a.stat_value != b.stat_value) return a.stat_value > b.stat_value;
    return a.start_s < b.start_s;
}

}  // namespace

std::vector<ActivityInterval> merge_proposals(std::vector<ActivityInterval> proposals,
                                              double iou_min) {
    for (const auto& p : proposals)
        if (p.view != proposals.front().view)
            throw ConfigError("merge_proposals expects proposals from a single view");
    if (proposals.size() < 2) return proposals;

    const std::size_t n = proposals.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (temporal_iou(proposals[i], proposals[j]) >= iou_min) {
                std::size_t a = find(i), b = find(j);
                if (a != b) parent[b] = a;
            }

    std::vector<const ActivityInterval*> representative(n, nullptr);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t root = find(i);
        if (!representative[root] || better_representative(proposals[i], *representative[root]))
            representative[root] = &proposals[i];
    }

    std::vector<ActivityInterval> out;
    for (std::size_t i = 0; i < n; ++i)
        if (representative[i]) out.push_back(*representative[i]);
    std::sort(out.begin(), out.end(), [](const ActivityInterval& a, const ActivityInterval& b) {
        if (a.start_s != b.start_s) return a.start_s < b.start_s;
        return a.end_s < b.end_s;
    });
    return out;
}

std::vector<ActivityInterval> fuse_views(
    const std::map<View, std::vector<ActivityInterval>>& per_view, double start_tol_s,
    double end_tol_s, int min_views) {
    if (min_views < 1) throw ConfigError("min_views must be >= 1");
    if (per_view.size() > 3 || per_view.contains(View::Fused))
        throw ConfigError("fuse_views takes up to 3 camera views");

    struct Tagged {
        ActivityInterval iv;
        bool consumed = false;
    };
    std::vector<Tagged> pool;
    for (const auto& [view, list] : per_view)
        for (const auto& iv : list) pool.push_back({iv, false});

    // Canonical processing order, independent of map iteration/view order.
    std::sort(pool.begin(), pool.end(), [](const Tagged& a, const Tagged& b) {
        if (a.iv.start_s != b.iv.start_s) return a.iv.start_s < b.iv.start_s;
        if (a.iv.end_s != b.iv.end_s) return a.iv.end_s < b.iv.end_s;
        return static_cast<int>(a.iv.view) < static_cast<int>(b.iv.view);
    });

    std::vector<ActivityInterval> fused;
    for (std::size_t seed = 0; seed < pool.size(); ++seed) {
        if (pool[seed].consumed) continue;
        const ActivityInterval& anchor = pool[seed].iv;

        // Best agreeing proposal per view (the anchor represents its own view).
        std::map<View, std::size_t> members;
        members[anchor.view] = seed;
        for (std::size_t j = 0; j < pool.size(); ++j) {
            if (pool[j].consumed || j == seed) continue;
            const ActivityInterval& cand = pool[j].iv;
            if (cand.view == anchor.view) continue;
            if (std::fabs(cand.start_s - anchor.start_s) > start_tol_s) continue;
            if (std::fabs(cand.end_s - anchor.end_s) > end_tol_s) continue;
            auto it = members.find(cand.view);
            if (it == members.end()) {
                members[cand.view] = j;
            } else {
                const ActivityInterval& cur = pool[it->second].iv;
                double cand_gap = std::fabs(cand.start_s - anchor.start_s) +
                                  std::fabs(cand.end_s - anchor.end_s);
                double cur_gap = std::fabs(cur.start_s - anchor.start_s) +
                                 std::fabs(cur.end_s - anchor.end_s);
                if (cand_gap < cur_gap) members[cand.view] = j;
            }
        }

        pool[seed].consumed = true;
        if (static_cast<int>(members.size()) < min_views) continue;

        ActivityInterval out;
        out.video_id = anchor.video_id;
        out.view = View::Fused;
        double start_sum = 0, end_sum = 0, stat_sum = 0;
        std::optional<double> best_p;
        for (const auto& [view, idx] : members) {
            pool[idx].consumed = true;
            const ActivityInterval& member = pool[idx].iv;
            start_sum += member.start_s;
            end_sum += member.end_s;
            stat_sum += member.stat_value;
            if (member.p_value && (!best_p || *member.p_value < *best_p)) best_p = member.p_value;
        }
        const double count = static_cast<double>(members.size());
        out.start_s = start_sum / count;
        out.end_s = end_sum / count;
        out.stat_value = stat_sum / count;
        out.p_value = best_p;
        fused.push_back(std::move(out));
    }
    return fused;
}

void to_json(nlohmann::json& j, const ActivityInterval& iv) {
    j = nlohmann::json{{"video_id", iv.video_id},
                       {"view", std::string(to_string(iv.view))},
                       {"start_s", iv.start_s},
                       {"end_s", iv.end_s},
                       {"stat_value", iv.stat_value}};
    if (iv.p_value) j["p_value"] = *iv.p_value;
    if (iv.class_id) j["class_id"] = *iv.class_id;
    if (!iv.label.empty()) j["label"] = iv.label;
    if (!iv.error.empty()) j["error"] = iv.error;
}

void from_json(const nlohmann::json& j, ActivityInterval& iv) {
    iv = ActivityInterval{};
    iv.video_id = j.at("video_id").get<std::string>();
    auto view = view_from_string(j.at("view").get<std::string>());
    if (!view) throw ConfigError("unknown view '" + j.at("view").get<std::string>() + "'");
    iv.view = *view;
    iv.start_s = j.at("start_s").get<double>();
    iv.end_s = j.at("end_s").get<double>();
    if (!(iv.start_s < iv.end_s))
        throw ConfigError("interval must satisfy start_s < end_s");
    iv.stat_value = j.value("stat_value", 0.0);
    if (j.contains("p_value")) iv.p_value = j.at("p_value").get<double>();
    if (j.contains("class_id")) {
        iv.class_id = j.at("class_id").get<int>();
        if (*iv.class_id < 1 || *iv.class_id > 16)
            throw ConfigError("class_id must lie in 1..16");
    }
    iv.label = j.value("label", std::string{});
    iv.error = j.value("error", std::string{});
}

void write_proposals_json(std::ostream& out, const nlohmann::json& config,
                          std::span<const ActivityInterval> proposals) {
    nlohmann::json j;
    j["config"] = config;
    j["proposals"] = nlohmann::json::array();
    for (const auto& iv : proposals) j["proposals"].push_back(iv);
    out << j.dump(2) << '\n';
}

std::vector<ActivityInterval> read_proposals_json(std::istream& in, nlohmann::json* config_out) {
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw IoError("invalid proposals JSON");
    if (config_out && j.contains("config")) *config_out = j["config"];
    std::vector<ActivityInterval> out;
    const nlohmann::json& arr = j.is_array() ? j : j.at("proposals");
    for (const auto& item : arr) out.push_back(item.get<ActivityInterval>());
    return out;
}

void write_proposals_csv(std::ostream& out, std::span<const ActivityInterval> proposals) {
    out << "video_id,view,start_s,end_s,stat,p,class_id\n";
    char buf[512];
    for (const auto& iv : proposals) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,", iv.video_id.c_str(),
                      std::string(to_string(iv.view)).c_str(), iv.start_s, iv.end_s,
                      iv.stat_value);
        out << buf;
        if (iv.p_value) {
            std::snprintf(buf, sizeof(buf), "%.17g", *iv.p_value);
            out << buf;
        }
        out << ',';
        if (iv.class_id) out << *iv.class_id;
        out << '\n';
    }
}

}  // namespace driveloc
