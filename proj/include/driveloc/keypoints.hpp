#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driveloc/types.hpp"

namespace driveloc {

// COCO-17 order: 0 nose, 1/2 eyes, 3/4 ears, 5/6 shoulders, 7/8 elbows,
// 9/10 wrists, 11/12 hips, 13/14 knees, 15/16 ankles.
inline constexpr int kCocoKeypoints = 17;

// Indices 0..10: everything from the nose down to the wrists. This is the
// minimal COCO subset covering head and hand motion.
const std::vector<int>& head_hands_subset();

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;
};

struct RawKeypointFrame {
    std::int64_t frame_index = 0;
    double timestamp_s = 0.0;  // frame_index / fps
    int person_id = 0;
    std::array<Keypoint, kCocoKeypoints> keypoints{};

    double mean_confidence() const;
};

struct ParseOptions {
    double fps = 30.0;
    // Keep only rows for this person. When unset, frames with several person
    // rows keep the row with the highest mean keypoint confidence.
    std::optional<int> person_id;
};

// Reads per-frame keypoint records from CSV (header row required) or
// JSON-lines, auto-detected from the first non-blank byte. Returns one frame
// per frame_index, strictly increasing. Throws MalformedRow on a bad row and
// NonMonotonicFrames if frame_index ever decreases.
std::vector<RawKeypointFrame> parse_keypoints(std::istream& source, const ParseOptions& opts);

// One observation: normalized (x, y) for each selected keypoint, flattened as
// x0,y0,x1,y1,... All values lie in [0,1]. mask[i] records whether keypoint i
// was observed (confidence above threshold) or imputed.
struct FeatureVector {
    std::vector<double> values;
    std::vector<std::uint8_t> mask;

    bool operator==(const FeatureVector&) const = default;
};

struct NormalizeOptions {
    double frame_width = 1920.0;
    double frame_height = 1080.0;
    double conf_threshold = 0.5;
    std::vector<int> subset = head_hands_subset();
};

// Selects opts.subset keypoints from the frame. A keypoint with confidence
// strictly above opts.conf_threshold contributes its clamped, frame-normalized
// coordinates and is marked observed; otherwise the entry is copied from
// `previous` (forward fill) or set to (0,0) when there is no history yet.
FeatureVector select_and_normalize(const RawKeypointFrame& frame, const NormalizeOptions& opts,
                                   const FeatureVector* previous);

struct KeypointSeries {
    std::string video_id;
    View view = View::Dashboard;
    double sample_hz = 0.0;
    double start_s = 0.0;  // timestamp of vectors[0]
    std::vector<FeatureVector> vectors;

    std::size_t dim() const { return vectors.empty() ? 0 : vectors.front().values.size(); }
    double duration_s() const {
        return sample_hz > 0 ? static_cast<double>(vectors.size()) / sample_hz : 0.0;
    }
};

// Normalizes frames into a uniformly spaced series at the capture rate.
// Missing frame indices are filled by repeating the previous vector with an
// all-imputed mask, so spacing is exactly 1/fps throughout.
KeypointSeries build_series(std::span<const RawKeypointFrame> frames, std::string video_id,
                            View view, double fps, const NormalizeOptions& opts);

// Convenience: open + parse + build in one step. Throws IoError if the file
// cannot be read.
KeypointSeries load_keypoint_series(const std::string& path, std::string video_id, View view,
                                    const ParseOptions& parse_opts, const NormalizeOptions& norm_opts);

// Decimates to ~target_hz by keeping every floor(sample_hz/target_hz)-th
// vector. The output rate is sample_hz/stride, which equals target_hz exactly
// when the rates divide evenly. Throws UpsampleRequested if target_hz exceeds
// the source rate.
KeypointSeries resample(const KeypointSeries& series, double target_hz);

struct WindowSlice {
    double start_s = 0.0;
    KeypointSeries series;
};

// Cuts the series into back-to-back windows of window_s seconds starting at 0
// and, when offset_s > 0, a second pass starting at offset_s. Trailing partial
// windows with fewer than min_obs observations are dropped. Output is sorted
// by start time. Throws EmptySeries on an empty input.
std::vector<WindowSlice> window(const KeypointSeries& series, double window_s, double offset_s,
                                std::size_t min_obs = 20);

}  // namespace driveloc
