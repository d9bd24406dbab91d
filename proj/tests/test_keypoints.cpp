#include <cmath>
#include <sstream>

#include "doctest.h"

#include "driveloc/errors.hpp"
#include "driveloc/keypoints.hpp"
#include "driveloc/rng.hpp"

using namespace driveloc;

namespace {

std::string csv_header() {
    std::string h = "frame_index,person_id";
    for (int kp = 0; kp < kCocoKeypoints; ++kp) {
        h += ",kp" + std::to_string(kp) + "_x,kp" + std::to_string(kp) + "_y,kp" +
             std::to_string(kp) + "_c";
    }
    return h + "\n";
}

std::string row(std::int64_t frame, int person, double x, double y, double c,
                int triples = kCocoKeypoints) {
    std::string r = std::to_string(frame) + "," + std::to_string(person);
    for (int kp = 0; kp < triples; ++kp) {
        r += "," + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(c);
    }
    return r + "\n";
}

RawKeypointFrame make_frame(double x, double y, double conf) {
    RawKeypointFrame f;
    for (auto& kp : f.keypoints) kp = {x, y, conf};
    return f;
}

}  // namespace

TEST_CASE("csv rows map fields directly") {
    std::string text = csv_header() + "0,0,960,540,0.9";
    for (int kp = 1; kp < kCocoKeypoints; ++kp) text += ",1,2,0.5";
    text += "\n";
    std::istringstream in(text);
    auto frames = parse_keypoints(in, {});
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].frame_index == 0);
    CHECK(frames[0].keypoints[0].x == doctest::Approx(960));
    CHECK(frames[0].keypoints[0].y == doctest::Approx(540));
    CHECK(frames[0].keypoints[0].confidence == doctest::Approx(0.9));
}

TEST_CASE("a row with 16 triples is rejected with its line number") {
    std::istringstream in(csv_header() + row(0, 0, 1, 1, 1, 16));
    CHECK_THROWS_AS(parse_keypoints(in, {}), MalformedRow);
    std::istringstream in2(csv_header() + row(0, 0, 1, 1, 1, 16));
    try {
        parse_keypoints(in2, {});
        FAIL("expected MalformedRow");
    } catch (const MalformedRow& e) {
        CHECK(e.line_no == 2);
    }
}

TEST_CASE("non-numeric fields and missing header are rejected") {
    std::string mangled = row(0, 0, 1, 2, 0.5);
    mangled.replace(mangled.find("1.000000"), 8, "x");
    std::istringstream in(csv_header() + mangled);
    CHECK_THROWS_AS(parse_keypoints(in, {}), MalformedRow);

    std::istringstream headerless(row(0, 0, 1, 2, 0.5));
    CHECK_THROWS_AS(parse_keypoints(headerless, {}), MalformedRow);
}

TEST_CASE("timestamps follow frame_index / fps") {
    std::string text = csv_header();
    for (int i = 0; i < 1800; ++i) text += row(i, 0, 1, 2, 0.9);
    std::istringstream in(text);
    auto frames = parse_keypoints(in, {.fps = 30.0, .person_id = {}});
    REQUIRE(frames.size() == 1800);
    CHECK(frames.front().timestamp_s == doctest::Approx(0.0));
    CHECK(frames.back().timestamp_s == doctest::Approx(1799.0 / 30.0).epsilon(1e-9));
}

TEST_CASE("decreasing frame_index raises NonMonotonicFrames") {
    std::istringstream in(csv_header() + row(5, 0, 1, 2, 0.9) + row(4, 0, 1, 2, 0.9));
    CHECK_THROWS_AS(parse_keypoints(in, {}), NonMonotonicFrames);
}

TEST_CASE("multi-person frames keep the highest mean confidence row") {
    std::istringstream in(csv_header() + row(0, 0, 1, 1, 0.3) + row(0, 1, 9, 9, 0.8) +
                          row(1, 0, 2, 2, 0.9) + row(1, 1, 8, 8, 0.1));
    auto frames = parse_keypoints(in, {});
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].person_id == 1);
    CHECK(frames[1].person_id == 0);

    std::istringstream in2(csv_header() + row(0, 0, 1, 1, 0.3) + row(0, 1, 9, 9, 0.8));
    auto filtered = parse_keypoints(in2, {.fps = 30.0, .person_id = 0});
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].person_id == 0);
}

TEST_CASE("json-lines input is accepted") {
    std::string line = R"({"frame": 3, "person": 0, "keypoints": [)";
    for (int kp = 0; kp < kCocoKeypoints; ++kp) {
        if (kp) line += ",";
        line += "[100, 200, 0.7]";
    }
    line += "]}\n";
    std::istringstream in(line);
    auto frames = parse_keypoints(in, {});
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].frame_index == 3);
    CHECK(frames[0].keypoints[16].y == doctest::Approx(200));
}

TEST_CASE("frame midpoint normalizes to (0.5, 0.5)") {
    auto frame = make_frame(960, 540, 0.9);
    NormalizeOptions opts;
    auto fv = select_and_normalize(frame, opts, nullptr);
    REQUIRE(fv.values.size() == 2 * opts.subset.size());
    CHECK(fv.values[0] == doctest::Approx(0.5));
    CHECK(fv.values[1] == doctest::Approx(0.5));
    CHECK(fv.mask[0] == 1);
}

TEST_CASE("low-confidence keypoints are forward-filled from the previous vector") {
    NormalizeOptions opts;
    auto first = select_and_normalize(make_frame(192, 108, 0.9), opts, nullptr);
    auto second = select_and_normalize(make_frame(500, 500, 0.49), opts, &first);
    CHECK(second.values == first.values);
    for (auto m : second.mask) CHECK(m == 0);
    // the threshold is strict: exactly 0.5 does not pass
    auto at_threshold = select_and_normalize(make_frame(500, 500, 0.5), opts, &first);
    CHECK(at_threshold.values == first.values);
}

TEST_CASE("first frame with zero confidence yields an all-zero, all-imputed vector") {
    NormalizeOptions opts;
    auto fv = select_and_normalize(make_frame(10, 10, 0.0), opts, nullptr);
    for (double v : fv.values) CHECK(v == 0.0);
    for (auto m : fv.mask) CHECK(m == 0);
}

TEST_CASE("coordinates outside the frame are clamped into [0,1]") {
    NormalizeOptions opts;
    auto fv = select_and_normalize(make_frame(-50, 2000, 0.9), opts, nullptr);
    CHECK(fv.values[0] == 0.0);
    CHECK(fv.values[1] == 1.0);
}

TEST_CASE("build_series forward-fills missing frame indices") {
    std::vector<RawKeypointFrame> frames;
    auto f0 = make_frame(192, 108, 0.9);
    f0.frame_index = 0;
    auto f3 = make_frame(384, 216, 0.9);
    f3.frame_index = 3;
    frames.push_back(f0);
    frames.push_back(f3);
    auto series = build_series(frames, "v", View::Dashboard, 30.0, {});
    REQUIRE(series.vectors.size() == 4);
    CHECK(series.vectors[1].values == series.vectors[0].values);
    CHECK(series.vectors[2].values == series.vectors[0].values);
    for (auto m : series.vectors[1].mask) CHECK(m == 0);
    CHECK(series.vectors[3].values[0] == doctest::Approx(0.2));
}

namespace {

KeypointSeries noise_series(std::size_t count, double hz, std::uint64_t seed) {
    KeypointSeries s;
    s.video_id = "v";
    s.sample_hz = hz;
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        FeatureVector fv;
        fv.values = {rng.uniform01(), rng.uniform01()};
        fv.mask = {1};
        s.vectors.push_back(fv);
    }
    return s;
}

}  // namespace

TEST_CASE("resample keeps every stride-th vector") {
    auto s = noise_series(1800, 30.0, 1);
    auto r = resample(s, 10.0);
    CHECK(r.vectors.size() == 600);
    CHECK(r.sample_hz == doctest::Approx(10.0));
    CHECK(r.vectors[1] == s.vectors[3]);

    auto same = resample(s, 30.0);
    CHECK(same.vectors.size() == s.vectors.size());

    CHECK_THROWS_AS(resample(s, 60.0), UpsampleRequested);
}

TEST_CASE("window grid covers both passes") {
    auto s = noise_series(2400, 10.0, 2);  // 240 s
    auto slices = window(s, 60.0, 30.0);
    std::vector<double> starts;
    for (const auto& w : slices) starts.push_back(w.start_s);
    CHECK(starts == std::vector<double>{0, 30, 60, 90, 120, 150, 180, 210});
    CHECK(slices.front().series.vectors.size() == 600);
    CHECK(slices.back().series.vectors.size() == 300);  // trailing partial kept

    auto whole = window(s, 500.0, 0.0);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].series.vectors.size() == 2400);

    auto one_pass = window(s, 60.0, 0.0);
    CHECK(one_pass.size() == 4);

    CHECK_THROWS_AS(window(KeypointSeries{}, 60.0, 30.0), EmptySeries);
    CHECK_THROWS_AS(window(s, 60.0, 60.0), ConfigError);
}

TEST_CASE("trailing partials below min_obs are dropped") {
    auto s = noise_series(130, 10.0, 3);  // 13 s
    auto slices = window(s, 6.0, 3.0, 20);
    // pass 1: 0 and 6 are full, the 12 s start holds only 10 obs; pass 2: 3, 9
    std::vector<double> starts;
    for (const auto& w : slices) starts.push_back(w.start_s);
    CHECK(starts == std::vector<double>{0, 3, 6, 9});
}

TEST_CASE("resample and window commute on aligned grids") {
    auto s = noise_series(3600, 30.0, 4);  // 120 s at 30 Hz
    const double window_s = 30.0;          // multiple of both sampling periods

    auto resample_then_window = window(resample(s, 10.0), window_s, 0.0);
    auto window_then_resample = window(s, window_s, 0.0);
    REQUIRE(resample_then_window.size() == window_then_resample.size());
    for (std::size_t i = 0; i < window_then_resample.size(); ++i) {
        auto rw = resample(window_then_resample[i].series, 10.0);
        CHECK(rw.vectors == resample_then_window[i].series.vectors);
    }
}

TEST_CASE("feature values stay in [0,1] for in-frame coordinates") {
    Rng rng(9);
    NormalizeOptions opts;
    FeatureVector prev;
    for (int t = 0; t < 50; ++t) {
        RawKeypointFrame f;
        f.frame_index = t;
        for (auto& kp : f.keypoints)
            kp = {1920.0 * rng.uniform01(), 1080.0 * rng.uniform01(), rng.uniform01()};
        auto fv = select_and_normalize(f, opts, t == 0 ? nullptr : &prev);
        REQUIRE(fv.values.size() == 2 * opts.subset.size());
        REQUIRE(fv.mask.size() == opts.subset.size());
        for (double v : fv.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        prev = fv;
    }
}
