#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "driveloc/evaluate.hpp"
#include "driveloc/keypoints.hpp"

namespace driveloc {

// Row-major observation matrix (rows = time, cols = dimensions).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> flat() const { return data; }
};

// i.i.d. standard Gaussian rows; identical output for identical (n, dim, seed).
Matrix gen_null(std::size_t n, std::size_t dim, std::uint64_t seed);

// gen_null with `shift` added to rows t1..t2-1 (the interval (t1, t2]).
Matrix gen_planted(std::size_t n, std::size_t dim, std::size_t t1, std::size_t t2,
                   std::span<const double> shift, std::uint64_t seed);

struct SyntheticActivity {
    int class_id = 1;
    double start_s = 0.0;
    double end_s = 0.0;
    // Mean shift applied inside the interval, before squashing. When `shift`
    // is empty, a unit direction is derived from (spec.seed, class_id) and
    // scaled by shift_mag.
    std::vector<double> shift;
    double shift_mag = 0.8;
    // Noise variance multiplier inside the interval (covariance alternative).
    double cov_scale = 1.0;
};

struct ScenarioSpec {
    std::string video_id = "synthetic";
    double n_seconds = 300.0;
    double sample_hz = 10.0;
    int dim = 22;
    double noise_sd = 0.12;
    std::uint64_t seed = 0;
    std::vector<SyntheticActivity> activities;

    // Throws OverlappingActivities / ConfigError on bad specs.
    void validate() const;
};

void to_json(nlohmann::json& j, const ScenarioSpec& spec);
void from_json(const nlohmann::json& j, ScenarioSpec& spec);

// Convenience spec: n_activities distinct classes (max 16) with durations in
// [12, 20] s and gaps in [15, 25] s, sized so everything fits.
ScenarioSpec random_scenario_spec(int n_activities, std::uint64_t seed);

struct Scenario {
    std::vector<KeypointSeries> views;  // Dashboard, Rearview, RightWindow
    GroundTruth truth;
};

// Three synchronized series sharing the activity signal, each with its own
// noise, squashed into [0,1] through a logistic map so they satisfy every
// KeypointSeries invariant. Pure function of the spec.
Scenario gen_scenario(const ScenarioSpec& spec);

// Writes a series in the keypoint CSV format (frame i at time i / sample_hz,
// confidence 1 for the first dim/2 keypoints, 0 for the rest), so synthetic
// data flows through the exact same ingest path as real keypoint files.
void write_keypoint_csv(std::ostream& out, const KeypointSeries& series,
                        double frame_width = 1920.0, double frame_height = 1080.0);

}  // namespace driveloc
