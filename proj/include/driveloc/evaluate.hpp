#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "driveloc/types.hpp"

namespace driveloc {

struct GroundTruthActivity {
    int class_id = 0;
    double start_s = 0.0;
    double end_s = 0.0;
};

struct GroundTruth {
    std::string video_id;
    std::vector<GroundTruthActivity> activities;
};

// CSV format: video_id,class_id,start_s,end_s with a header row. Rows are
// grouped by video_id (one GroundTruth per video, file order preserved).
std::vector<GroundTruth> load_ground_truth_csv(std::istream& in);
void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruth> truths);

// Temporal intersection over union of [gs, ge] and [ps, pe].
double overlap_score(double gs, double ge, double ps, double pe);

// True when ps is within tol_s of gs and pe is within tol_s of ge.
bool within_tolerance(double gs, double ge, double ps, double pe, double tol_s = 10.0);

enum class EvalMode { Proposal, Classified };

std::string_view to_string(EvalMode m);
std::optional<EvalMode> eval_mode_from_string(std::string_view s);

struct EvaluationReport {
    EvalMode mode = EvalMode::Proposal;
    std::int64_t matched = 0;
    std::int64_t total = 0;  // ground-truth activity count
    double accuracy = 0.0;   // matched / total
    double mean_overlap = 0.0;  // mean overlap score across matched pairs
    std::map<int, std::pair<std::int64_t, std::int64_t>> per_class;  // id -> (matched, total)
};

// Matches each ground-truth activity to its best prediction: candidates must
// pass within_tolerance (and class equality in Classified mode); the highest
// overlap score wins. Matching is one-to-one, resolved greedily over ground
// truths in descending best-overlap order.
EvaluationReport match_and_score(const GroundTruth& gt, std::span<const ActivityInterval> preds,
                                 EvalMode mode, double tol_s = 10.0);

// Sums matched/total and per-class tallies across per-video reports;
// mean_overlap is weighted by matched counts.
EvaluationReport combine_reports(std::span<const EvaluationReport> reports);

nlohmann::json report_to_json(const EvaluationReport& r);

// Aligned text table: one summary row plus one row per class.
void print_report_table(std::ostream& out, const EvaluationReport& r);

}  // namespace driveloc
