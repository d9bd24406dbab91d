#include "driveloc/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>

#include "driveloc/errors.hpp"

namespace driveloc {

std::string_view to_string(EvalMode m) {
    return m == EvalMode::Proposal ? "proposal" : "classified";
}

std::optional<EvalMode> eval_mode_from_string(std::string_view s) {
    if (s == "proposal") return EvalMode::Proposal;
    if (s == "classified") return EvalMode::Classified;
    return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(begin, i - begin)));
            begin = i + 1;
        }
    }
    return fields;
}

double to_double(std::string_view s, std::int64_t line_no) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw IoError("ground truth line " + std::to_string(line_no) + ": bad number '" +
                      std::string(s) + "'");
    return v;
}

}  // namespace

std::vector<GroundTruth> load_ground_truth_csv(std::istream& in) {
    std::vector<GroundTruth> out;
    std::string line;
    std::int64_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (sv.substr(0, 8) != "video_id")
                throw IoError("ground truth CSV is missing its header row");
            continue;
        }
        auto fields = split_csv(sv);
        if (fields.size() != 4)
            throw IoError("ground truth line " + std::to_string(line_no) + ": expected 4 columns");
        GroundTruthActivity act;
        act.class_id = static_cast<int>(to_double(fields[1], line_no));
        act.start_s = to_double(fields[2], line_no);
        act.end_s = to_double(fields[3], line_no);
        if (act.class_id < 1 || act.class_id > 16)
            throw IoError("ground truth line " + std::to_string(line_no) + ": class id out of range");
        if (!(act.start_s < act.end_s))
            throw IoError("ground truth line " + std::to_string(line_no) + ": start must precede end");

        std::string video(fields[0]);
        if (out.empty() || out.back().video_id != video) {
            auto existing = std::find_if(out.begin(), out.end(),
                                         [&](const GroundTruth& g) { return g.video_id == video; });
            if (existing != out.end()) {
                existing->activities.push_back(act);
                continue;
            }
            out.push_back({video, {}});
        }
        out.back().activities.push_back(act);
    }
    return out;
}

void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruth> truths) {
    out << "video_id,class_id,start_s,end_s\n";
    char buf[128];
    for (const auto& gt : truths)
        for (const auto& act : gt.activities) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g", act.class_id, act.start_s, act.end_s);
            out << gt.video_id << ',' << buf << '\n';
        }
}

double overlap_score(double gs, double ge, double ps, double pe) {
    const double intersection = std::min(ge, pe) - std::max(gs, ps);
    if (intersection <= 0) return 0.0;
    const double unions = std::max(ge, pe) - std::min(gs, ps);
    return intersection / unions;
}

bool within_tolerance(double gs, double ge, double ps, double pe, double tol_s) {
    return std::fabs(ps - gs) <= tol_s && std::fabs(pe - ge) <= tol_s;
}

EvaluationReport match_and_score(const GroundTruth& gt, std::span<const ActivityInterval> preds,
                                 EvalMode mode, double tol_s) {
    EvaluationReport report;
    report.mode = mode;
    report.total = static_cast<std::int64_t>(gt.activities.size());

    const std::size_t n_gt = gt.activities.size();
    // Candidate lists: predictions passing the tolerance gate (and class
    // equality in classified mode), with their overlap scores.
    struct Candidate {
        std::size_t pred;
        double os;
    };
    std::vector<std::vector<Candidate>> candidates(n_gt);
    for (std::size_t gi = 0; gi < n_gt; ++gi) {
        const auto& act = gt.activities[gi];
        report.per_class[act.class_id].second += 1;
        for (std::size_t pi = 0; pi < preds.size(); ++pi) {
            const auto& p = preds[pi];
            if (mode == EvalMode::Classified && (!p.class_id || *p.class_id != act.class_id))
                continue;
            if (!within_tolerance(act.start_s, act.end_s, p.start_s, p.end_s, tol_s)) continue;
            candidates[gi].push_back({pi, overlap_score(act.start_s, act.end_s, p.start_s, p.end_s)});
        }
        std::sort(candidates[gi].begin(), candidates[gi].end(), [](const Candidate& a, const Candidate& b) {
            if (a.os != b.os) return a.os > b.os;
            return a.pred < b.pred;
        });
    }

    // Greedy one-to-one resolution over ground truths in descending
    // best-candidate order.
    std::vector<std::size_t> gt_order(n_gt);
    for (std::size_t i = 0; i < n_gt; ++i) gt_order[i] = i;
    std::sort(gt_order.begin(), gt_order.end(), [&](std::size_t a, std::size_t b) {
        const double osa = candidates[a].empty() ? -1.0 : candidates[a].front().os;
        const double osb = candidates[b].empty() ? -1.0 : candidates[b].front().os;
        if (osa != osb) return osa > osb;
        return a < b;
    });

    std::vector<char> pred_used(preds.size(), 0);
    double overlap_sum = 0;
    for (std::size_t gi : gt_order) {
        for (const Candidate& c : candidates[gi]) {
            if (pred_used[c.pred]) continue;
            pred_used[c.pred] = 1;
            report.matched += 1;
            report.per_class[gt.activities[gi].class_id].first += 1;
            overlap_sum += c.os;
            break;
        }
    }

    report.accuracy = report.total > 0
                          ? static_cast<double>(report.matched) / static_cast<double>(report.total)
                          : 0.0;
    report.mean_overlap =
        report.matched > 0 ? overlap_sum / static_cast<double>(report.matched) : 0.0;
    return report;
}

EvaluationReport combine_reports(std::span<const EvaluationReport> reports) {
    EvaluationReport out;
    double overlap_sum = 0;
    for (const auto& r : reports) {
        out.mode = r.mode;
        out.matched += r.matched;
        out.total += r.total;
        overlap_sum += r.mean_overlap * static_cast<double>(r.matched);
        for (const auto& [cls, counts] : r.per_class) {
            out.per_class[cls].first += counts.first;
            out.per_class[cls].second += counts.second;
        }
    }
    out.accuracy =
        out.total > 0 ? static_cast<double>(out.matched) / static_cast<double>(out.total) : 0.0;
    out.mean_overlap = out.matched > 0 ? overlap_sum / static_cast<double>(out.matched) : 0.0;
    return out;
}

nlohmann::json report_to_json(const EvaluationReport& r) {
    nlohmann::json j;
    j["mode"] = std::string(to_string(r.mode));
    j["matched"] = r.matched;
    j["total"] = r.total;
    j["accuracy"] = r.accuracy;
    j["mean_overlap"] = r.mean_overlap;
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& [cls, counts] : r.per_class)
        per_class[std::to_string(cls)] = {{"matched", counts.first}, {"total", counts.second}};
    j["per_class"] = per_class;
    return j;
}

void print_report_table(std::ostream& out, const EvaluationReport& r) {
    out << "mode        matched  total  accuracy%  mean_overlap\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-11s %7lld %6lld %10.1f %13.3f\n",
                  std::string(to_string(r.mode)).c_str(), static_cast<long long>(r.matched),
                  static_cast<long long>(r.total), 100.0 * r.accuracy, r.mean_overlap);
    out << buf;
    if (r.per_class.empty()) return;
    out << "class  matched  total\n";
    for (const auto& [cls, counts] : r.per_class) {
        std::snprintf(buf, sizeof(buf), "%5d %8lld %6lld\n", cls,
                      static_cast<long long>(counts.first), static_cast<long long>(counts.second));
        out << buf;
    }
}

}  // namespace driveloc
