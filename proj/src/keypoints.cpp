#include "driveloc/keypoints.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "json.hpp"

#include "driveloc/errors.hpp"

namespace driveloc {

std::string_view to_string(View v) {
    switch (v) {
        case View::Dashboard: return "Dashboard";
        case View::Rearview: return "Rearview";
        case View::RightWindow: return "RightWindow";
        case View::Fused: return "Fused";
    }
    return "?";
}

std::optional<View> view_from_string(std::string_view s) {
    if (s == "Dashboard") return View::Dashboard;
    if (s == "Rearview") return View::Rearview;
    if (s == "RightWindow") return View::RightWindow;
    if (s == "Fused") return View::Fused;
    return std::nullopt;
}

const std::vector<int>& head_hands_subset() {
    static const std::vector<int> subset = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return subset;
}

double RawKeypointFrame::mean_confidence() const {
    double sum = 0;
    for (const auto& kp : keypoints) sum += kp.confidence;
    return sum / kCocoKeypoints;
}

namespace {

constexpr int kCsvColumns = 2 + 3 * kCocoKeypoints;  // frame_index, person_id, 17 triples

double parse_double(std::string_view field, std::int64_t line_no) {
    double out = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw MalformedRow(line_no, "non-numeric field '" + std::string(field) + "'");
    return out;
}

std::int64_t parse_int(std::string_view field, std::int64_t line_no) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw MalformedRow(line_no, "non-integer field '" + std::string(field) + "'");
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

RawKeypointFrame parse_csv_row(std::string_view line, std::int64_t line_no, double fps) {
    RawKeypointFrame frame;
    std::array<std::string_view, kCsvColumns> fields;
    std::size_t count = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            if (count >= fields.size())
                throw MalformedRow(line_no, "expected " + std::to_string(kCsvColumns) + " columns");
            fields[count++] = trim(line.substr(begin, i - begin));
            begin = i + 1;
        }
    }
    if (count != kCsvColumns)
        throw MalformedRow(line_no, "expected " + std::to_string(kCsvColumns) + " columns, got " +
                                        std::to_string(count));

    frame.frame_index = parse_int(fields[0], line_no);
    if (frame.frame_index < 0) throw MalformedRow(line_no, "negative frame_index");
    frame.person_id = static_cast<int>(parse_int(fields[1], line_no));
    for (int kp = 0; kp < kCocoKeypoints; ++kp) {
        frame.keypoints[kp].x = parse_double(fields[2 + 3 * kp], line_no);
        frame.keypoints[kp].y = parse_double(fields[3 + 3 * kp], line_no);
        frame.keypoints[kp].confidence =
            std::clamp(parse_double(fields[4 + 3 * kp], line_no), 0.0, 1.0);
    }
    frame.timestamp_s = static_cast<double>(frame.frame_index) / fps;
    return frame;
}

RawKeypointFrame parse_jsonl_row(std::string_view line, std::int64_t line_no, double fps) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedRow(line_no, "invalid JSON object");
    RawKeypointFrame frame;
    try {
        frame.frame_index = j.at("frame").get<std::int64_t>();
        frame.person_id = j.value("person", 0);
        const auto& kps = j.at("keypoints");
        if (!kps.is_array() || kps.size() != kCocoKeypoints)
            throw MalformedRow(line_no, "keypoints must hold exactly 17 [x,y,c] triples");
        for (int kp = 0; kp < kCocoKeypoints; ++kp) {
            const auto& triple = kps[kp];
            if (!triple.is_array() || triple.size() != 3)
                throw MalformedRow(line_no, "keypoint " + std::to_string(kp) + " is not [x,y,c]");
            frame.keypoints[kp].x = triple[0].get<double>();
            frame.keypoints[kp].y = triple[1].get<double>();
            frame.keypoints[kp].confidence = std::clamp(triple[2].get<double>(), 0.0, 1.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRow(line_no, e.what());
    }
    if (frame.frame_index < 0) throw MalformedRow(line_no, "negative frame index");
    frame.timestamp_s = static_cast<double>(frame.frame_index) / fps;
    return frame;
}

}  // namespace

std::vector<RawKeypointFrame> parse_keypoints(std::istream& source, const ParseOptions& opts) {
    if (opts.fps <= 0) throw ConfigError("fps must be positive");

    std::vector<RawKeypointFrame> frames;
    std::string line;
    std::int64_t line_no = 0;
    bool format_known = false;
    bool jsonl = false;
    bool header_seen = false;

    // Rows for the frame_index currently being read; collapsed to one frame
    // when the index advances.
    std::vector<RawKeypointFrame> pending;
    auto flush_pending = [&] {
        if (pending.empty()) return;
        const RawKeypointFrame* best = nullptr;
        for (const auto& f : pending) {
            if (opts.person_id && f.person_id != *opts.person_id) continue;
            if (!best || f.mean_confidence() > best->mean_confidence()) best = &f;
        }
        if (best) frames.push_back(*best);
        pending.clear();
    };

    while (std::getline(source, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;

        if (!format_known) {
            jsonl = sv.front() == '{';
            format_known = true;
        }
        if (!jsonl && !header_seen) {
            header_seen = true;
            if (sv.substr(0, 11) != "frame_index")
                throw MalformedRow(line_no, "missing header row (expected 'frame_index,person_id,...')");
            continue;
        }

        RawKeypointFrame frame =
            jsonl ? parse_jsonl_row(sv, line_no, opts.fps) : parse_csv_row(sv, line_no, opts.fps);

        if (!pending.empty()) {
            std::int64_t prev = pending.back().frame_index;
            if (frame.frame_index < prev) throw NonMonotonicFrames(line_no, prev, frame.frame_index);
            if (frame.frame_index > prev) flush_pending();
        }
        pending.push_back(std::move(frame));
    }
    flush_pending();
    return frames;
}

FeatureVector select_and_normalize(const RawKeypointFrame& frame, const NormalizeOptions& opts,
                                   const FeatureVector* previous) {
    const std::size_t s = opts.subset.size();
    FeatureVector out;
    out.values.resize(2 * s, 0.0);
    out.mask.resize(s, 0);
    for (std::size_t i = 0; i < s; ++i) {
        const Keypoint& kp = frame.keypoints.at(static_cast<std::size_t>(opts.subset[i]));
        if (kp.confidence > opts.conf_threshold) {
            double x = std::clamp(kp.x, 0.0, opts.frame_width);
            double y = std::clamp(kp.y, 0.0, opts.frame_height);
            out.values[2 * i] = x / opts.frame_width;
            out.values[2 * i + 1] = y / opts.frame_height;
            out.mask[i] = 1;
        } else if (previous) {
            out.values[2 * i] = previous->values[2 * i];
            out.values[2 * i + 1] = previous->values[2 * i + 1];
        }
        // else: stays (0,0), imputed
    }
    return out;
}

KeypointSeries build_series(std::span<const RawKeypointFrame> frames, std::string video_id,
                            View view, double fps, const NormalizeOptions& opts) {
    if (fps <= 0) throw ConfigError("fps must be positive");
    KeypointSeries series;
    series.video_id = std::move(video_id);
    series.view = view;
    series.sample_hz = fps;
    if (frames.empty()) return series;

    series.start_s = static_cast<double>(frames.front().frame_index) / fps;
    series.vectors.reserve(frames.size());

    const FeatureVector* previous = nullptr;
    std::int64_t next_index = frames.front().frame_index;
    for (const auto& frame : frames) {
        // Fill dropped frames by carrying the last vector forward, all-imputed.
        while (next_index < frame.frame_index) {
            FeatureVector fill = *previous;
            std::fill(fill.mask.begin(), fill.mask.end(), std::uint8_t{0});
            series.vectors.push_back(std::move(fill));
            previous = &series.vectors.back();
            ++next_index;
        }
        series.vectors.push_back(select_and_normalize(frame, opts, previous));
        previous = &series.vectors.back();
        ++next_index;
    }
    return series;
}

KeypointSeries load_keypoint_series(const std::string& path, std::string video_id, View view,
                                    const ParseOptions& parse_opts,
                                    const NormalizeOptions& norm_opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open keypoint file: " + path);
    auto frames = parse_keypoints(in, parse_opts);
    return build_series(frames, std::move(video_id), view, parse_opts.fps, norm_opts);
}

KeypointSeries resample(const KeypointSeries& series, double target_hz) {
    if (target_hz <= 0) throw ConfigError("target rate must be positive");
    if (target_hz > series.sample_hz) throw UpsampleRequested(series.sample_hz, target_hz);

    const std::size_t stride = static_cast<std::size_t>(series.sample_hz / target_hz);
    KeypointSeries out;
    out.video_id = series.video_id;
    out.view = series.view;
    out.start_s = series.start_s;
    out.sample_hz = series.sample_hz / static_cast<double>(stride);
    out.vectors.reserve(series.vectors.size() / stride + 1);
    for (std::size_t i = 0; i < series.vectors.size(); i += stride)
        out.vectors.push_back(series.vectors[i]);
    return out;
}

std::vector<WindowSlice> window(const KeypointSeries& series, double window_s, double offset_s,
                                std::size_t min_obs) {
    if (series.vectors.empty()) throw EmptySeries();
    if (window_s <= 0) throw ConfigError("window length must be positive");
    if (offset_s < 0 || offset_s >= window_s)
        throw ConfigError("offset must satisfy 0 <= offset < window length");

    const std::size_t n = series.vectors.size();
    const std::size_t win_len = static_cast<std::size_t>(std::floor(window_s * series.sample_hz));
    if (win_len == 0) throw ConfigError("window shorter than one sample");

    std::vector<WindowSlice> out;
    auto emit_pass = [&](double pass_offset_s) {
        std::size_t first =
            static_cast<std::size_t>(std::llround(pass_offset_s * series.sample_hz));
        for (std::size_t begin = first; begin < n; begin += win_len) {
            std::size_t len = std::min(win_len, n - begin);
            if (len < std::max<std::size_t>(min_obs, 1)) break;  // trailing partial too short
            WindowSlice slice;
            slice.start_s = series.start_s + static_cast<double>(begin) / series.sample_hz;
            slice.series.video_id = series.video_id;
            slice.series.view = series.view;
            slice.series.sample_hz = series.sample_hz;
            slice.series.start_s = slice.start_s;
            slice.series.vectors.assign(series.vectors.begin() + static_cast<std::ptrdiff_t>(begin),
                                        series.vectors.begin() + static_cast<std::ptrdiff_t>(begin + len));
            out.push_back(std::move(slice));
        }
    };

    emit_pass(0.0);
    if (offset_s > 0) emit_pass(offset_s);
    std::stable_sort(out.begin(), out.end(),
                     [](const WindowSlice& a, const WindowSlice& b) { return a.start_s < b.start_s; });
    return out;
}

}  // namespace driveloc
