#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "json.hpp"

#include "driveloc/keypoints.hpp"
#include "driveloc/scan.hpp"
#include "driveloc/types.hpp"

namespace driveloc {

// Runs detect() on every window of the series (both the aligned pass and the
// offset pass) and concatenates the detections, ordered by window start.
// Windows run in parallel up to cfg.threads; output order does not depend on
// scheduling.
std::vector<ActivityInterval> sweep(const KeypointSeries& series, const DetectionConfig& cfg);

// Temporal IoU of two intervals.
double temporal_iou(const ActivityInterval& a, const ActivityInterval& b);

// Deduplicates proposals from overlapping window passes: single-link clusters
// under IoU >= iou_min, each cluster reduced to its best member (smallest
// p-value, then largest statistic, then earliest start). Output is sorted by
// start time; any two survivors have IoU < iou_min. Idempotent.
std::vector<ActivityInterval> merge_proposals(std::vector<ActivityInterval> proposals,
                                              double iou_min);

// Cross-view fusion: an event is emitted when at least min_views views hold
// proposals whose starts agree within start_tol_s and ends within end_tol_s.
// The fused interval averages the agreeing members' endpoints and carries
// view = Fused. Symmetric in view order; members are consumed so each proposal
// contributes to at most one event.
std::vector<ActivityInterval> fuse_views(const std::map<View, std::vector<ActivityInterval>>& per_view,
                                         double start_tol_s, double end_tol_s, int min_views);

// JSON proposal files: {"config": {...}, "proposals": [...]}.
void to_json(nlohmann::json& j, const ActivityInterval& iv);
void from_json(const nlohmann::json& j, ActivityInterval& iv);

void write_proposals_json(std::ostream& out, const nlohmann::json& config,
                          std::span<const ActivityInterval> proposals);
std::vector<ActivityInterval> read_proposals_json(std::istream& in,
                                                  nlohmann::json* config_out = nullptr);

// CSV alternative: video_id,view,start_s,end_s,stat,p,class_id.
void write_proposals_csv(std::ostream& out, std::span<const ActivityInterval> proposals);

}  // namespace driveloc
