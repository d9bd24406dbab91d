#include <cmath>
#include <sstream>

#include "doctest.h"

#include "driveloc/errors.hpp"
#include "driveloc/evaluate.hpp"
#include "driveloc/rng.hpp"

using namespace driveloc;

namespace {

ActivityInterval pred(double start, double end, std::optional<int> cls = std::nullopt) {
    ActivityInterval p;
    p.video_id = "vid";
    p.view = View::Fused;
    p.start_s = start;
    p.end_s = end;
    p.class_id = cls;
    return p;
}

}  // namespace

TEST_CASE("overlap score basics") {
    CHECK(overlap_score(10, 20, 10, 20) == 1.0);
    CHECK(overlap_score(10, 20, 25, 30) == 0.0);
    CHECK(overlap_score(10, 20, 20, 30) == 0.0);  // touching intervals share no time
    CHECK(overlap_score(236, 241, 237.3, 240) == doctest::Approx(0.54).epsilon(1e-9));
    CHECK(overlap_score(236, 241, 233.9, 236.067) == doctest::Approx(0.00944).epsilon(1e-2));
    CHECK(std::fabs(overlap_score(236, 241, 233.9, 236.067) - 0.00944) < 1e-4);
}

TEST_CASE("overlap score is symmetric and translation invariant") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        double gs = 50 * rng.uniform01();
        double ge = gs + 1 + 20 * rng.uniform01();
        double ps = 50 * rng.uniform01();
        double pe = ps + 1 + 20 * rng.uniform01();
        double os = overlap_score(gs, ge, ps, pe);
        CHECK(os >= 0.0);
        CHECK(os <= 1.0);
        CHECK(os == overlap_score(ps, pe, gs, ge));
        double shift = 100 * rng.uniform01() - 50;
        CHECK(overlap_score(gs + shift, ge + shift, ps + shift, pe + shift) ==
              doctest::Approx(os).epsilon(1e-12));
        CHECK(within_tolerance(gs, ge, ps, pe) ==
              within_tolerance(gs + shift, ge + shift, ps + shift, pe + shift));
    }
}

TEST_CASE("the ten-second tolerance rule") {
    CHECK(within_tolerance(236, 241, 233.9, 236.067));
    CHECK(within_tolerance(236, 241, 236, 241));
    CHECK_FALSE(within_tolerance(236, 241, 225, 241));   // start 11 s early
    CHECK(within_tolerance(236, 241, 226, 241));          // exactly at the bound
    CHECK_FALSE(within_tolerance(236, 241, 236, 252.1));  // end too late
}

TEST_CASE("ground truth CSV round-trips bit-exactly") {
    Rng rng(5);
    std::vector<GroundTruth> truths(2);
    truths[0].video_id = "vid-a";
    truths[1].video_id = "vid-b";
    for (auto& gt : truths)
        for (int i = 0; i < 5; ++i) {
            double s = 500 * rng.uniform01();
            gt.activities.push_back(
                {1 + static_cast<int>(rng.below(16)), s, s + 30 * rng.uniform01() + 0.001});
        }

    std::ostringstream out;
    write_ground_truth_csv(out, truths);
    std::istringstream in(out.str());
    auto loaded = load_ground_truth_csv(in);
    REQUIRE(loaded.size() == 2);
    for (std::size_t v = 0; v < 2; ++v) {
        REQUIRE(loaded[v].activities.size() == truths[v].activities.size());
        CHECK(loaded[v].video_id == truths[v].video_id);
        for (std::size_t i = 0; i < truths[v].activities.size(); ++i) {
            CHECK(loaded[v].activities[i].class_id == truths[v].activities[i].class_id);
            CHECK(loaded[v].activities[i].start_s == truths[v].activities[i].start_s);
            CHECK(loaded[v].activities[i].end_s == truths[v].activities[i].end_s);
        }
    }
}

TEST_CASE("ground truth CSV validates its input") {
    std::istringstream missing_header("vid,2,1,5\n");
    CHECK_THROWS_AS(load_ground_truth_csv(missing_header), IoError);
    std::istringstream bad_class("video_id,class_id,start_s,end_s\nvid,99,1,5\n");
    CHECK_THROWS_AS(load_ground_truth_csv(bad_class), IoError);
    std::istringstream reversed("video_id,class_id,start_s,end_s\nvid,2,9,5\n");
    CHECK_THROWS_AS(load_ground_truth_csv(reversed), IoError);
}

TEST_CASE("perfect predictions score 1.0 in both modes") {
    GroundTruth gt;
    gt.video_id = "vid";
    gt.activities = {{2, 100, 112}, {14, 150, 165}, {7, 200, 220}};
    std::vector<ActivityInterval> preds;
    for (const auto& a : gt.activities) preds.push_back(pred(a.start_s, a.end_s, a.class_id));

    for (EvalMode mode : {EvalMode::Proposal, EvalMode::Classified}) {
        auto report = match_and_score(gt, preds, mode);
        CHECK(report.matched == 3);
        CHECK(report.total == 3);
        CHECK(report.accuracy == 1.0);
        CHECK(report.mean_overlap == doctest::Approx(1.0));
    }
}

TEST_CASE("accuracy is matched over total") {
    GroundTruth gt;
    gt.video_id = "vid";
    for (int i = 0; i < 450; ++i) {
        double s = 30.0 * i;
        gt.activities.push_back({1 + (i % 16), s, s + 12});
    }
    std::vector<ActivityInterval> preds;
    for (int i = 0; i < 242; ++i) {
        const auto& a = gt.activities[static_cast<std::size_t>(i)];
        preds.push_back(pred(a.start_s + 1, a.end_s - 1, a.class_id));
    }
    auto report = match_and_score(gt, preds, EvalMode::Proposal);
    CHECK(report.matched == 242);
    CHECK(report.total == 450);
    CHECK(report.accuracy == doctest::Approx(242.0 / 450.0).epsilon(1e-12));
    CHECK(100.0 * report.accuracy == doctest::Approx(53.8).epsilon(1e-2));
}

TEST_CASE("each prediction matches at most one ground truth") {
    GroundTruth gt;
    gt.video_id = "vid";
    gt.activities = {{2, 100, 112}, {2, 114, 126}};
    // one prediction inside the tolerance band of both activities
    auto p = pred(106, 119, 2);
    auto report = match_and_score(gt, {&p, 1}, EvalMode::Classified);
    CHECK(report.matched == 1);
    CHECK(report.total == 2);
}

TEST_CASE("classified mode requires class equality") {
    GroundTruth gt;
    gt.video_id = "vid";
    gt.activities = {{2, 100, 112}};
    auto right = pred(100, 112, 2);
    auto wrong = pred(100, 112, 3);
    auto none = pred(100, 112);
    CHECK(match_and_score(gt, {&right, 1}, EvalMode::Classified).matched == 1);
    CHECK(match_and_score(gt, {&wrong, 1}, EvalMode::Classified).matched == 0);
    CHECK(match_and_score(gt, {&none, 1}, EvalMode::Classified).matched == 0);
    CHECK(match_and_score(gt, {&wrong, 1}, EvalMode::Proposal).matched == 1);
}

TEST_CASE("removing a prediction never increases the matched count") {
    Rng rng(9);
    GroundTruth gt;
    gt.video_id = "vid";
    for (int i = 0; i < 12; ++i) {
        double s = 40.0 * i + 5 * rng.uniform01();
        gt.activities.push_back({1 + static_cast<int>(rng.below(16)), s, s + 14});
    }
    std::vector<ActivityInterval> preds;
    for (int i = 0; i < 20; ++i) {
        double s = 480 * rng.uniform01();
        preds.push_back(pred(s, s + 10 + 8 * rng.uniform01(),
                             1 + static_cast<int>(rng.below(16))));
    }
    auto full = match_and_score(gt, preds, EvalMode::Proposal);
    for (std::size_t drop = 0; drop < preds.size(); ++drop) {
        auto reduced = preds;
        reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(drop));
        auto report = match_and_score(gt, reduced, EvalMode::Proposal);
        CHECK(report.matched <= full.matched);
    }
}

TEST_CASE("closest match wins by overlap score") {
    GroundTruth gt;
    gt.video_id = "vid";
    gt.activities = {{2, 100, 120}};
    auto loose = pred(95, 125, 2);   // os = 20/30
    auto tight = pred(101, 119, 2);  // os = 18/20
    auto report = match_and_score(gt, std::vector<ActivityInterval>{loose, tight},
                                  EvalMode::Classified);
    CHECK(report.matched == 1);
    CHECK(report.mean_overlap == doctest::Approx(18.0 / 20.0));
}

TEST_CASE("reports combine across videos") {
    EvaluationReport a;
    a.mode = EvalMode::Proposal;
    a.matched = 3;
    a.total = 5;
    a.mean_overlap = 0.8;
    a.per_class[2] = {1, 2};
    EvaluationReport b;
    b.mode = EvalMode::Proposal;
    b.matched = 1;
    b.total = 5;
    b.mean_overlap = 0.5;
    b.per_class[2] = {1, 1};
    auto combined = combine_reports(std::vector<EvaluationReport>{a, b});
    CHECK(combined.matched == 4);
    CHECK(combined.total == 10);
    CHECK(combined.accuracy == doctest::Approx(0.4));
    CHECK(combined.mean_overlap == doctest::Approx((3 * 0.8 + 1 * 0.5) / 4));
    CHECK(combined.per_class[2] == std::pair<std::int64_t, std::int64_t>{2, 3});

    auto j = report_to_json(combined);
    CHECK(j["matched"] == 4);
    CHECK(j["per_class"]["2"]["total"] == 3);
}
