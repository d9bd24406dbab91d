#include "driveloc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "driveloc/errors.hpp"
#include "driveloc/rng.hpp"

namespace driveloc {

Matrix gen_null(std::size_t n, std::size_t dim, std::uint64_t seed) {
    if (n < 4) throw ConfigError("need at least 4 observations");
    if (dim == 0) throw ConfigError("dimension must be positive");
    Matrix m;
    m.rows = n;
    m.cols = dim;
    m.data.resize(n * dim);
    Rng rng(mix_seed(seed, 0x6e756c6c));
    for (double& v : m.data) v = rng.normal();
    return m;
}

Matrix gen_planted(std::size_t n, std::size_t dim, std::size_t t1, std::size_t t2,
                   std::span<const double> shift, std::uint64_t seed) {
    if (t1 >= t2 || t2 > n) throw ConfigError("planted interval must satisfy 0 <= t1 < t2 <= n");
    if (shift.size() != dim) throw DimensionMismatch("shift dimension does not match");
    Matrix m = gen_null(n, dim, seed);
    for (std::size_t r = t1; r < t2; ++r)
        for (std::size_t c = 0; c < dim; ++c) m.at(r, c) += shift[c];
    return m;
}

void ScenarioSpec::validate() const {
    if (n_seconds <= 0 || sample_hz <= 0) throw ConfigError("scenario needs positive duration and rate");
    if (dim < 1) throw ConfigError("scenario dimension must be >= 1");
    if (noise_sd < 0) throw ConfigError("noise_sd must be non-negative");

    auto sorted = activities;
    std::sort(sorted.begin(), sorted.end(),
              [](const SyntheticActivity& a, const SyntheticActivity& b) {
                  return a.start_s < b.start_s;
              });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& act = sorted[i];
        if (!(act.start_s < act.end_s)) throw ConfigError("activity must have start < end");
        if (act.start_s < 0 || act.end_s > n_seconds)
            throw ConfigError("activity exceeds scenario bounds");
        if (act.class_id < 1 || act.class_id > 16) throw ConfigError("class id must be 1..16");
        if (!act.shift.empty() && static_cast<int>(act.shift.size()) != dim)
            throw ConfigError("activity shift dimension does not match scenario");
        if (act.cov_scale <= 0) throw ConfigError("cov_scale must be positive");
        if (i > 0 && sorted[i - 1].end_s > act.start_s)
            throw OverlappingActivities("activities overlap near " + std::to_string(act.start_s) + " s");
    }
}

void to_json(nlohmann::json& j, const ScenarioSpec& spec) {
    j = nlohmann::json{{"video_id", spec.video_id}, {"n_seconds", spec.n_seconds},
                       {"sample_hz", spec.sample_hz}, {"dim", spec.dim},
                       {"noise_sd", spec.noise_sd},   {"seed", spec.seed}};
    j["activities"] = nlohmann::json::array();
    for (const auto& act : spec.activities) {
        nlohmann::json a{{"class_id", act.class_id},
                         {"start_s", act.start_s},
                         {"end_s", act.end_s},
                         {"shift_mag", act.shift_mag},
                         {"cov_scale", act.cov_scale}};
        if (!act.shift.empty()) a["shift"] = act.shift;
        j["activities"].push_back(a);
    }
}

void from_json(const nlohmann::json& j, ScenarioSpec& spec) {
    spec = ScenarioSpec{};
    spec.video_id = j.value("video_id", spec.video_id);
    spec.n_seconds = j.value("n_seconds", spec.n_seconds);
    spec.sample_hz = j.value("sample_hz", spec.sample_hz);
    spec.dim = j.value("dim", spec.dim);
    spec.noise_sd = j.value("noise_sd", spec.noise_sd);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("activities"))
        for (const auto& a : j.at("activities")) {
            SyntheticActivity act;
            act.class_id = a.at("class_id").get<int>();
            act.start_s = a.at("start_s").get<double>();
            act.end_s = a.at("end_s").get<double>();
            act.shift_mag = a.value("shift_mag", act.shift_mag);
            act.cov_scale = a.value("cov_scale", act.cov_scale);
            if (a.contains("shift")) act.shift = a.at("shift").get<std::vector<double>>();
            spec.activities.push_back(std::move(act));
        }
}

ScenarioSpec random_scenario_spec(int n_activities, std::uint64_t seed) {
    if (n_activities < 0 || n_activities > 16)
        throw ConfigError("scenario supports 0..16 activities");
    ScenarioSpec spec;
    spec.seed = seed;
    spec.video_id = "synthetic-" + std::to_string(seed);

    Rng rng(mix_seed(seed, 0x73636e));
    std::vector<int> classes(16);
    std::iota(classes.begin(), classes.end(), 1);
    rng.shuffle(classes);

    double cursor = 20.0;  // lead-in
    for (int i = 0; i < n_activities; ++i) {
        SyntheticActivity act;
        act.class_id = classes[static_cast<std::size_t>(i)];
        double duration = 12.0 + 8.0 * rng.uniform01();
        act.start_s = cursor;
        act.end_s = cursor + duration;
        spec.activities.push_back(act);
        cursor = act.end_s + 15.0 + 10.0 * rng.uniform01();  // gap
    }
    spec.n_seconds = std::ceil(cursor + 5.0);
    return spec;
}

namespace {

// Unit direction in R^dim derived from (seed, class_id); shared by all views
// so the three series carry the same activity signal.
std::vector<double> class_direction(std::uint64_t seed, int class_id, int dim) {
    Rng rng(mix_seed(mix_seed(seed, 0xd173), static_cast<std::uint64_t>(class_id)));
    std::vector<double> dir(static_cast<std::size_t>(dim));
    double norm_sq = 0;
    for (double& v : dir) {
        v = rng.normal();
        norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > 0)
        for (double& v : dir) v /= norm;
    return dir;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Scenario gen_scenario(const ScenarioSpec& spec) {
    spec.validate();

    const std::size_t n = static_cast<std::size_t>(std::llround(spec.n_seconds * spec.sample_hz));
    if (n < 4) throw ConfigError("scenario too short");
    const std::size_t dim = static_cast<std::size_t>(spec.dim);

    // Per-activity shift vectors (explicit or class-seeded direction).
    std::vector<std::vector<double>> shifts;
    shifts.reserve(spec.activities.size());
    for (const auto& act : spec.activities) {
        if (!act.shift.empty()) {
            shifts.push_back(act.shift);
        } else {
            auto dir = class_direction(spec.seed, act.class_id, spec.dim);
            for (double& v : dir) v *= act.shift_mag;
            shifts.push_back(std::move(dir));
        }
    }

    // Which activity (if any) covers each sample.
    std::vector<std::int32_t> active(n, -1);
    for (std::size_t ai = 0; ai < spec.activities.size(); ++ai) {
        const auto& act = spec.activities[ai];
        const std::size_t first = static_cast<std::size_t>(std::llround(act.start_s * spec.sample_hz));
        const std::size_t last =
            std::min(n, static_cast<std::size_t>(std::llround(act.end_s * spec.sample_hz)));
        for (std::size_t t = first; t < last; ++t) active[t] = static_cast<std::int32_t>(ai);
    }

    Scenario scenario;
    const View views[3] = {View::Dashboard, View::Rearview, View::RightWindow};
    for (int vi = 0; vi < 3; ++vi) {
        KeypointSeries series;
        series.video_id = spec.video_id;
        series.view = views[vi];
        series.sample_hz = spec.sample_hz;
        series.start_s = 0;
        series.vectors.reserve(n);

        Rng noise(mix_seed(mix_seed(spec.seed, 0xa01e), static_cast<std::uint64_t>(vi)));
        for (std::size_t t = 0; t < n; ++t) {
            FeatureVector fv;
            fv.values.resize(dim);
            fv.mask.assign((dim + 1) / 2, 1);
            const std::int32_t ai = active[t];
            const double sd =
                spec.noise_sd *
                (ai >= 0 ? std::sqrt(spec.activities[static_cast<std::size_t>(ai)].cov_scale) : 1.0);
            for (std::size_t c = 0; c < dim; ++c) {
                double x = sd * noise.normal();
                if (ai >= 0) x += shifts[static_cast<std::size_t>(ai)][c];
                fv.values[c] = sigmoid(x);
            }
            series.vectors.push_back(std::move(fv));
        }
        scenario.views.push_back(std::move(series));
    }

    scenario.truth.video_id = spec.video_id;
    for (const auto& act : spec.activities)
        scenario.truth.activities.push_back({act.class_id, act.start_s, act.end_s});
    return scenario;
}

void write_keypoint_csv(std::ostream& out, const KeypointSeries& series, double frame_width,
                        double frame_height) {
    const std::size_t dim = series.dim();
    if (dim == 0) throw EmptySeries();
    const std::size_t points = (dim + 1) / 2;
    if (points > kCocoKeypoints)
        throw DimensionMismatch("series dimension exceeds the 17-keypoint format");

    out << "frame_index,person_id";
    for (int kp = 0; kp < kCocoKeypoints; ++kp)
        out << ",kp" << kp << "_x,kp" << kp << "_y,kp" << kp << "_c";
    out << '\n';

    char buf[128];
    for (std::size_t t = 0; t < series.vectors.size(); ++t) {
        const auto& values = series.vectors[t].values;
        out << t << ",0";
        for (int kp = 0; kp < kCocoKeypoints; ++kp) {
            const std::size_t xi = 2 * static_cast<std::size_t>(kp);
            const std::size_t yi = xi + 1;
            double x = xi < dim ? values[xi] * frame_width : 0.0;
            double y = yi < dim ? values[yi] * frame_height : 0.0;
            double conf = xi < dim ? 1.0 : 0.0;
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g", x, y, conf);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace driveloc
