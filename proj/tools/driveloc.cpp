// driveloc: temporal localization of driver activities from pose-keypoint
// time series, with pluggable classification and overlap-based evaluation.
//
// Subcommands: synth, detect, sweep, fuse, classify, evaluate, run.
// Exit codes: 0 success, 2 I/O failure, 3 configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "driveloc/classify.hpp"
#include "driveloc/errors.hpp"
#include "driveloc/evaluate.hpp"
#include "driveloc/graph.hpp"
#include "driveloc/keypoints.hpp"
#include "driveloc/parallel.hpp"
#include "driveloc/pipeline.hpp"
#include "driveloc/scan.hpp"
#include "driveloc/synthetic.hpp"
#include "driveloc/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace driveloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;

// ---------------------------------------------------------------------------
// option bundles

struct IngestOptions {
    double fps = 30.0;
    double frame_width = 1920.0;
    double frame_height = 1080.0;
    double conf_threshold = 0.5;
    std::optional<int> person_id;
};

struct DetectOptions {
    IngestOptions ingest;
    DetectionConfig cfg;
    std::string stat = "m";
    double merge_iou = 0.3;
    bool no_merge = false;
};

struct FuseOptions {
    double start_tol = 2.0;
    double end_tol = 2.0;
    int min_views = 0;  // 0 = auto: min(2, view count)
};

struct ClassifyOptions {
    std::string kind = "mock";  // mock | http
    std::string ground_truth;   // mock source
    double error_rate = 0.0;
    int template_id = kDefaultPromptTemplate;
    std::string clip;
    HttpClassifierOptions http;
};

void add_ingest_options(CLI::App* cmd, IngestOptions& o) {
    cmd->add_option("--fps", o.fps, "Capture rate of the keypoint file");
    cmd->add_option("--frame-width", o.frame_width, "Frame width in pixels");
    cmd->add_option("--frame-height", o.frame_height, "Frame height in pixels");
    cmd->add_option("--conf-threshold", o.conf_threshold,
                    "Keypoints at or below this confidence are imputed");
    cmd->add_option("--person-id", o.person_id, "Keep only rows for this person id");
}

void add_detection_options(CLI::App* cmd, DetectOptions& o) {
    add_ingest_options(cmd, o.ingest);
    cmd->add_option("--k", o.cfg.k, "Number of successive spanning trees");
    cmd->add_option("--l0-frac", o.cfg.l0_frac, "Minimum interval length as a fraction of n");
    cmd->add_option("--l1-frac", o.cfg.l1_frac, "Maximum interval length as a fraction of n");
    cmd->add_option("--stat", o.stat, "Scan statistic: o, w, g or m");
    cmd->add_option("--perm-b", o.cfg.perm_B, "Permutation replicates per window");
    cmd->add_option("--alpha", o.cfg.alpha, "Significance gate (1 disables gating)");
    cmd->add_option("--sample-hz", o.cfg.sample_hz, "Detection sampling rate");
    cmd->add_option("--window-secs", o.cfg.window_secs, "Window length in seconds");
    cmd->add_option("--offset-secs", o.cfg.offset_secs, "Second-pass window offset in seconds");
    cmd->add_option("--merge-iou", o.merge_iou, "IoU threshold for deduplicating proposals");
    cmd->add_flag("--no-merge", o.no_merge, "Keep raw per-window detections");
}

void resolve_detection(DetectOptions& o, std::uint64_t seed, int threads) {
    auto kind = stat_kind_from_string(o.stat);
    if (!kind) throw ConfigError("unknown statistic '" + o.stat + "' (use o, w, g or m)");
    o.cfg.stat = *kind;
    o.cfg.seed = seed;
    o.cfg.threads = threads;
    o.cfg.validate();
    if (o.ingest.fps < o.cfg.sample_hz)
        throw ConfigError("sample_hz must not exceed the capture fps");
    if (o.merge_iou < 0 || o.merge_iou > 1) throw ConfigError("merge IoU must lie in [0, 1]");
}

json ingest_config_json(const IngestOptions& o) {
    json j{{"fps", o.fps},
           {"frame_width", o.frame_width},
           {"frame_height", o.frame_height},
           {"conf_threshold", o.conf_threshold}};
    if (o.person_id) j["person_id"] = *o.person_id;
    return j;
}

json detection_config_json(const DetectOptions& o) {
    json j = ingest_config_json(o.ingest);
    j["k"] = o.cfg.k;
    j["l0_frac"] = o.cfg.l0_frac;
    j["l1_frac"] = o.cfg.l1_frac;
    j["stat"] = std::string(to_string(o.cfg.stat));
    j["perm_B"] = o.cfg.perm_B;
    j["alpha"] = o.cfg.alpha;
    j["sample_hz"] = o.cfg.sample_hz;
    j["window_secs"] = o.cfg.window_secs;
    j["offset_secs"] = o.cfg.offset_secs;
    j["seed"] = o.cfg.seed;
    j["merge_iou"] = o.merge_iou;
    j["merge"] = !o.no_merge;
    return j;
}

// ---------------------------------------------------------------------------
// small I/O helpers

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::vector<GroundTruth> load_truths(const fs::path& path) {
    auto in = open_input(path);
    return load_ground_truth_csv(in);
}

const GroundTruth& truth_for_video(const std::vector<GroundTruth>& truths,
                                   const std::string& video_id) {
    for (const auto& gt : truths)
        if (gt.video_id == video_id) return gt;
    throw ConfigError("ground truth has no entries for video '" + video_id + "'");
}

KeypointSeries load_view(const fs::path& path, const std::string& video_id, View view,
                         const DetectOptions& o) {
    ParseOptions popts;
    popts.fps = o.ingest.fps;
    popts.person_id = o.ingest.person_id;
    NormalizeOptions nopts;
    nopts.frame_width = o.ingest.frame_width;
    nopts.frame_height = o.ingest.frame_height;
    nopts.conf_threshold = o.ingest.conf_threshold;
    KeypointSeries series = load_keypoint_series(path.string(), video_id, view, popts, nopts);
    if (series.sample_hz > o.cfg.sample_hz) series = resample(series, o.cfg.sample_hz);
    return series;
}

std::vector<ActivityInterval> detect_view(const KeypointSeries& series, const DetectOptions& o) {
    auto proposals = sweep(series, o.cfg);
    if (!o.no_merge) proposals = merge_proposals(std::move(proposals), o.merge_iou);
    return proposals;
}

std::unique_ptr<Classifier> make_classifier(const ClassifyOptions& o, std::uint64_t seed) {
    if (o.kind == "mock") {
        if (o.ground_truth.empty())
            throw ConfigError("mock classifier requires --ground-truth");
        if (o.error_rate < 0 || o.error_rate > 1)
            throw ConfigError("error rate must lie in [0, 1]");
        return std::make_unique<MockClassifier>(load_truths(o.ground_truth), o.error_rate, seed);
    }
    if (o.kind == "http") return std::make_unique<HttpClassifier>(o.http);
    throw ConfigError("unknown classifier '" + o.kind + "' (use mock or http)");
}

json classify_config_json(const ClassifyOptions& o) {
    json j{{"classifier", o.kind}, {"template", o.template_id}};
    if (!o.clip.empty()) j["clip"] = o.clip;
    if (o.kind == "mock") {
        j["ground_truth"] = o.ground_truth;
        j["error_rate"] = o.error_rate;
    } else {
        j["host"] = o.http.host;
        j["port"] = o.http.port;
        j["path"] = o.http.path;
        j["timeout_s"] = o.http.timeout_s;
        j["retries"] = o.http.retries;
    }
    return j;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_synth(const std::string& spec_path, int activities, std::uint64_t seed,
              const std::string& video_id, const fs::path& out_dir) {
    ScenarioSpec spec;
    if (!spec_path.empty()) {
        auto in = open_input(spec_path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw IoError("invalid scenario spec JSON: " + spec_path);
        spec = j.get<ScenarioSpec>();
    } else {
        spec = random_scenario_spec(activities, seed);
    }
    if (!video_id.empty()) spec.video_id = video_id;

    Scenario scenario = gen_scenario(spec);

    fs::create_directories(out_dir);
    const char* names[3] = {"dashboard.csv", "rearview.csv", "right_window.csv"};
    for (int v = 0; v < 3; ++v) {
        auto out = open_output(out_dir / names[v]);
        write_keypoint_csv(out, scenario.views[static_cast<std::size_t>(v)]);
    }
    {
        auto out = open_output(out_dir / "ground_truth.csv");
        write_ground_truth_csv(out, std::span(&scenario.truth, 1));
    }
    {
        json j = spec;
        j["command"] = "synth";
        auto out = open_output(out_dir / "scenario.json");
        out << j.dump(2) << '\n';
    }
    std::cout << "wrote scenario '" << spec.video_id << "' (" << spec.activities.size()
              << " activities, " << spec.n_seconds << " s) to " << out_dir.string() << '\n';
    return kExitOk;
}

int cmd_detect(const fs::path& keypoints, const std::string& view_name,
               const std::string& video_id, DetectOptions& o, std::uint64_t seed, int threads,
               const fs::path& out_path, const std::string& format,
               const std::string& dump_edges) {
    resolve_detection(o, seed, threads);
    auto view = view_from_string(view_name);
    if (!view || *view == View::Fused)
        throw ConfigError("view must be Dashboard, Rearview or RightWindow");

    KeypointSeries series = load_view(keypoints, video_id, *view, o);
    auto proposals = detect_view(series, o);

    if (!dump_edges.empty()) {
        // Edge list of the first admissible window's similarity graph.
        auto slices = window(series, o.cfg.window_secs, o.cfg.offset_secs);
        for (const auto& slice : slices) {
            if (!o.cfg.window_admissible(slice.series.vectors.size())) continue;
            auto dm = pairwise_distances(slice.series.vectors);
            auto g = kmst(dm, o.cfg.k);
            auto out = open_output(dump_edges);
            dump_edges_csv(g, out);
            break;
        }
    }

    json config = detection_config_json(o);
    config["command"] = "detect";
    config["keypoints"] = keypoints.string();
    config["video_id"] = video_id;
    config["view"] = view_name;

    auto out = open_output(out_path);
    if (format == "csv") {
        out << "# config: " << config.dump() << '\n';
        write_proposals_csv(out, proposals);
    } else if (format == "json") {
        write_proposals_json(out, config, proposals);
    } else {
        throw ConfigError("unknown output format '" + format + "'");
    }
    std::cout << proposals.size() << " proposal(s) -> " << out_path.string() << '\n';
    return kExitOk;
}

int cmd_sweep(const fs::path& keypoints, const std::string& view_name,
              const std::string& video_id, DetectOptions& o, std::uint64_t seed, int threads,
              const std::string& param, std::vector<double> values,
              const std::string& ground_truth, const fs::path& out_path) {
    resolve_detection(o, seed, threads);
    if (values.empty()) throw ConfigError("sweep needs a non-empty --values list");
    auto view = view_from_string(view_name);
    if (!view || *view == View::Fused)
        throw ConfigError("view must be Dashboard, Rearview or RightWindow");

    KeypointSeries series = load_view(keypoints, video_id, *view, o);

    json config = detection_config_json(o);
    config["command"] = "sweep";
    config["param"] = param;
    config["values"] = values;
    config["keypoints"] = keypoints.string();

    auto out = open_output(out_path);
    char buf[256];
    if (param == "k") {
        out << "# config: " << config.dump() << '\n';
        out << "k,p_start,p_end\n";
        for (double value : values) {
            DetectOptions run = o;
            run.cfg.k = static_cast<int>(value);
            if (run.cfg.k < 1) throw ConfigError("k values must be >= 1");
            for (const auto& iv : detect_view(series, run)) {
                std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g\n", run.cfg.k, iv.start_s,
                              iv.end_s);
                out << buf;
            }
        }
    } else if (param == "window") {
        if (ground_truth.empty())
            throw ConfigError("window sweeps need --ground-truth to report accuracy");
        auto truths = load_truths(ground_truth);
        const GroundTruth& gt = truth_for_video(truths, series.video_id);
        out << "# config: " << config.dump() << '\n';
        out << "window_secs,accurate_predictions,total,accuracy_pct,l0_frac,l1_frac\n";
        for (double value : values) {
            DetectOptions run = o;
            run.cfg.window_secs = value;
            if (run.cfg.offset_secs >= value) run.cfg.offset_secs = value / 2.0;
            run.cfg.validate();
            auto report = match_and_score(gt, detect_view(series, run), EvalMode::Proposal);
            std::snprintf(buf, sizeof(buf), "%.10g,%lld,%lld,%.1f,%.10g,%.10g\n", value,
                          static_cast<long long>(report.matched),
                          static_cast<long long>(report.total), 100.0 * report.accuracy,
                          run.cfg.l0_frac, run.cfg.l1_frac);
            out << buf;
        }
    } else {
        throw ConfigError("sweep parameter must be 'k' or 'window'");
    }
    std::cout << "sweep table -> " << out_path.string() << '\n';
    return kExitOk;
}

int cmd_fuse(const std::vector<std::string>& inputs, double merge_iou, FuseOptions& fo,
             const fs::path& out_path) {
    if (inputs.empty() || inputs.size() > 3)
        throw ConfigError("fuse takes 1..3 per-view proposal files");

    std::map<View, std::vector<ActivityInterval>> per_view;
    json sources = json::array();
    for (const auto& path : inputs) {
        auto in = open_input(path);
        json cfg;
        for (auto& iv : read_proposals_json(in, &cfg)) per_view[iv.view].push_back(std::move(iv));
        sources.push_back(path);
    }
    for (auto& [view, list] : per_view) list = merge_proposals(std::move(list), merge_iou);

    int min_views = fo.min_views > 0 ? fo.min_views
                                     : std::min<int>(2, static_cast<int>(per_view.size()));
    std::vector<ActivityInterval> fused;
    if (min_views <= 1) {
        for (auto& [view, list] : per_view)
            for (auto& iv : list) fused.push_back(iv);
        std::sort(fused.begin(), fused.end(),
                  [](const ActivityInterval& a, const ActivityInterval& b) {
                      return a.start_s < b.start_s;
                  });
    } else {
        fused = fuse_views(per_view, fo.start_tol, fo.end_tol, min_views);
    }

    json config{{"command", "fuse"},      {"inputs", sources},
                {"merge_iou", merge_iou}, {"start_tol_s", fo.start_tol},
                {"end_tol_s", fo.end_tol}, {"min_views", min_views}};
    auto out = open_output(out_path);
    write_proposals_json(out, config, fused);
    std::cout << fused.size() << " fused interval(s) -> " << out_path.string() << '\n';
    return kExitOk;
}

int cmd_classify(const fs::path& proposals_path, ClassifyOptions& co, std::uint64_t seed,
                 const fs::path& out_path) {
    auto in = open_input(proposals_path);
    json upstream_cfg;
    auto proposals = read_proposals_json(in, &upstream_cfg);

    auto classifier = make_classifier(co, seed);
    auto classified = classify_intervals(std::move(proposals), *classifier, co.template_id, co.clip);

    json config = classify_config_json(co);
    config["command"] = "classify";
    config["proposals"] = proposals_path.string();
    config["seed"] = seed;
    if (!upstream_cfg.is_null()) config["upstream"] = upstream_cfg;

    auto out = open_output(out_path);
    write_proposals_json(out, config, classified);
    std::cout << classified.size() << " classified interval(s) -> " << out_path.string() << '\n';
    return kExitOk;
}

int cmd_evaluate(const fs::path& predictions, const std::string& ground_truth,
                 const std::string& mode_name, double tol, const fs::path& out_path) {
    auto mode = eval_mode_from_string(mode_name);
    if (!mode) throw ConfigError("mode must be 'proposal' or 'classified'");
    if (tol <= 0) throw ConfigError("tolerance must be positive");

    auto in = open_input(predictions);
    auto preds = read_proposals_json(in);
    auto truths = load_truths(ground_truth);

    std::vector<EvaluationReport> reports;
    for (const auto& gt : truths) {
        std::vector<ActivityInterval> for_video;
        for (const auto& p : preds)
            if (p.video_id == gt.video_id) for_video.push_back(p);
        reports.push_back(match_and_score(gt, for_video, *mode, tol));
    }
    EvaluationReport combined = combine_reports(reports);

    json j = report_to_json(combined);
    j["config"] = json{{"command", "evaluate"},
                       {"predictions", predictions.string()},
                       {"ground_truth", ground_truth},
                       {"mode", mode_name},
                       {"tol_s", tol}};
    if (!out_path.empty()) {
        auto out = open_output(out_path);
        out << j.dump(2) << '\n';
    }
    print_report_table(std::cout, combined);
    return kExitOk;
}

int cmd_run(const std::map<View, fs::path>& view_paths, const std::string& ground_truth,
            const std::string& video_id_flag, DetectOptions& o, FuseOptions& fo,
            ClassifyOptions& co, std::uint64_t seed, int threads, const fs::path& out_dir) {
    resolve_detection(o, seed, threads);
    if (view_paths.empty()) throw ConfigError("run needs at least one view");

    auto truths = load_truths(ground_truth);
    std::string video_id = video_id_flag;
    if (video_id.empty()) {
        if (truths.size() != 1)
            throw ConfigError("--video-id is required when the ground truth covers several videos");
        video_id = truths.front().video_id;
    }
    const GroundTruth& gt = truth_for_video(truths, video_id);

    fs::create_directories(out_dir);
    json config = detection_config_json(o);
    config["command"] = "run";
    config["video_id"] = video_id;
    config["ground_truth"] = ground_truth;
    config["start_tol_s"] = fo.start_tol;
    config["end_tol_s"] = fo.end_tol;
    config["classify"] = classify_config_json(co);

    // Detection per view, merged per view.
    std::map<View, std::vector<ActivityInterval>> per_view;
    for (const auto& [view, path] : view_paths) {
        KeypointSeries series = load_view(path, video_id, view, o);
        per_view[view] = detect_view(series, o);

        json view_cfg = config;
        view_cfg["view"] = std::string(to_string(view));
        view_cfg["keypoints"] = path.string();
        std::string name = "proposals_" + std::string(to_string(view)) + ".json";
        auto out = open_output(out_dir / name);
        write_proposals_json(out, view_cfg, per_view[view]);
    }

    int min_views = fo.min_views > 0 ? fo.min_views
                                     : std::min<int>(2, static_cast<int>(per_view.size()));
    config["min_views"] = min_views;

    std::vector<ActivityInterval> fused;
    if (min_views <= 1) {
        for (auto& [view, list] : per_view)
            for (auto& iv : list) fused.push_back(iv);
        std::sort(fused.begin(), fused.end(),
                  [](const ActivityInterval& a, const ActivityInterval& b) {
                      return a.start_s < b.start_s;
                  });
    } else {
        fused = fuse_views(per_view, fo.start_tol, fo.end_tol, min_views);
    }
    {
        auto out = open_output(out_dir / "fused.json");
        write_proposals_json(out, config, fused);
    }

    // Classification; service failures degrade to NoActivity, never abort.
    co.ground_truth = co.ground_truth.empty() ? ground_truth : co.ground_truth;
    auto classifier = make_classifier(co, seed);
    auto classified = classify_intervals(fused, *classifier, co.template_id, co.clip);
    {
        auto out = open_output(out_dir / "classified.json");
        write_proposals_json(out, config, classified);
    }

    // Evaluation in both modes.
    EvaluationReport proposal_report = match_and_score(gt, fused, EvalMode::Proposal);
    EvaluationReport classified_report = match_and_score(gt, classified, EvalMode::Classified);
    for (const auto& [name, report] :
         {std::pair{"report_proposal.json", &proposal_report},
          std::pair{"report_classified.json", &classified_report}}) {
        json j = report_to_json(*report);
        j["config"] = config;
        auto out = open_output(out_dir / name);
        out << j.dump(2) << '\n';
    }
    print_report_table(std::cout, proposal_report);
    print_report_table(std::cout, classified_report);
    std::cout << "artifacts -> " << out_dir.string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driver-activity temporal localization toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // --seed/--threads may follow the subcommand name

    std::uint64_t seed = 0;
    int threads = default_threads();
    app.add_option("--seed", seed, "Base seed for every random stream")->capture_default_str();
    app.add_option("--threads", threads, "Worker thread cap")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic three-view scenario");
    std::string synth_spec;
    int synth_activities = 10;
    std::string synth_video;
    std::string synth_out;
    synth->add_option("--spec", synth_spec, "Scenario spec JSON (overrides --activities)");
    synth->add_option("--activities", synth_activities, "Number of planted activities (0..16)");
    synth->add_option("--video-id", synth_video, "Override the scenario video id");
    synth->add_option("--out-dir", synth_out, "Output directory")->required();

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Detect activity intervals in one view");
    std::string det_keypoints, det_view = "Dashboard", det_video = "video", det_out;
    std::string det_format = "json", det_dump;
    DetectOptions det_opts;
    detect_cmd->add_option("--keypoints", det_keypoints, "Keypoint CSV/JSONL file")->required();
    detect_cmd->add_option("--view", det_view, "Dashboard, Rearview or RightWindow");
    detect_cmd->add_option("--video-id", det_video, "Video id for the output records");
    add_detection_options(detect_cmd, det_opts);
    detect_cmd->add_option("--out", det_out, "Proposals output file")->required();
    detect_cmd->add_option("--format", det_format, "json or csv");
    detect_cmd->add_option("--dump-edges", det_dump,
                           "Write the first window's similarity-graph edge list to this CSV");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Run detection across a parameter grid");
    std::string sw_keypoints, sw_view = "Dashboard", sw_video = "video", sw_param, sw_gt, sw_out;
    std::vector<double> sw_values;
    DetectOptions sw_opts;
    sweep_cmd->add_option("--keypoints", sw_keypoints, "Keypoint CSV/JSONL file")->required();
    sweep_cmd->add_option("--view", sw_view, "Dashboard, Rearview or RightWindow");
    sweep_cmd->add_option("--video-id", sw_video, "Video id for evaluation");
    sweep_cmd->add_option("--param", sw_param, "Swept parameter: k or window")->required();
    sweep_cmd->add_option("--values", sw_values, "Comma-separated grid values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--ground-truth", sw_gt, "Ground-truth CSV (required for window sweeps)");
    add_detection_options(sweep_cmd, sw_opts);
    sweep_cmd->add_option("--out", sw_out, "Output CSV")->required();

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse per-view proposal files");
    std::vector<std::string> fu_inputs;
    double fu_merge_iou = 0.3;
    FuseOptions fu_opts;
    std::string fu_out;
    fuse_cmd->add_option("--input", fu_inputs, "Per-view proposal JSON (repeat up to 3x)")
        ->required();
    fuse_cmd->add_option("--merge-iou", fu_merge_iou, "Per-view dedup IoU threshold");
    fuse_cmd->add_option("--start-tol", fu_opts.start_tol, "Start agreement tolerance (s)");
    fuse_cmd->add_option("--end-tol", fu_opts.end_tol, "End agreement tolerance (s)");
    fuse_cmd->add_option("--min-views", fu_opts.min_views, "Views required per event (0 = auto)");
    fuse_cmd->add_option("--out", fu_out, "Fused proposals output")->required();

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "Classify detected intervals");
    std::string cl_proposals, cl_out;
    ClassifyOptions cl_opts;
    classify_cmd->add_option("--proposals", cl_proposals, "Proposals JSON")->required();
    classify_cmd->add_option("--classifier", cl_opts.kind, "mock or http");
    classify_cmd->add_option("--ground-truth", cl_opts.ground_truth, "Mock oracle ground truth");
    classify_cmd->add_option("--error-rate", cl_opts.error_rate, "Mock wrong-answer probability");
    classify_cmd->add_option("--template", cl_opts.template_id, "Prompt template id (1..3)");
    classify_cmd->add_option("--clip", cl_opts.clip, "Clip reference sent to the service");
    classify_cmd->add_option("--host", cl_opts.http.host, "Classifier service host");
    classify_cmd->add_option("--port", cl_opts.http.port, "Classifier service port");
    classify_cmd->add_option("--path", cl_opts.http.path, "Classifier service path");
    classify_cmd->add_option("--timeout", cl_opts.http.timeout_s, "Request timeout (s)");
    classify_cmd->add_option("--retries", cl_opts.http.retries, "Retries after a failure");
    classify_cmd->add_option("--out", cl_out, "Classified proposals output")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
    std::string ev_pred, ev_gt, ev_mode = "proposal", ev_out;
    double ev_tol = 10.0;
    eval_cmd->add_option("--predictions", ev_pred, "Predictions JSON")->required();
    eval_cmd->add_option("--ground-truth", ev_gt, "Ground-truth CSV")->required();
    eval_cmd->add_option("--mode", ev_mode, "proposal or classified");
    eval_cmd->add_option("--tol", ev_tol, "Endpoint tolerance in seconds");
    eval_cmd->add_option("--out", ev_out, "Report JSON output");

    // run
    auto* run_cmd = app.add_subcommand("run", "Full pipeline: detect, fuse, classify, evaluate");
    std::string rn_dash, rn_rear, rn_right, rn_gt, rn_video, rn_out;
    DetectOptions rn_opts;
    FuseOptions rn_fuse;
    ClassifyOptions rn_classify;
    run_cmd->add_option("--dashboard", rn_dash, "Dashboard keypoint file");
    run_cmd->add_option("--rearview", rn_rear, "Rearview keypoint file");
    run_cmd->add_option("--right-window", rn_right, "Right-window keypoint file");
    run_cmd->add_option("--ground-truth", rn_gt, "Ground-truth CSV")->required();
    run_cmd->add_option("--video-id", rn_video, "Video id (defaults to the single GT video)");
    add_detection_options(run_cmd, rn_opts);
    run_cmd->add_option("--start-tol", rn_fuse.start_tol, "Fusion start tolerance (s)");
    run_cmd->add_option("--end-tol", rn_fuse.end_tol, "Fusion end tolerance (s)");
    run_cmd->add_option("--min-views", rn_fuse.min_views, "Views required per event (0 = auto)");
    run_cmd->add_option("--classifier", rn_classify.kind, "mock or http");
    run_cmd->add_option("--error-rate", rn_classify.error_rate, "Mock wrong-answer probability");
    run_cmd->add_option("--template", rn_classify.template_id, "Prompt template id (1..3)");
    run_cmd->add_option("--clip", rn_classify.clip, "Clip reference sent to the service");
    run_cmd->add_option("--host", rn_classify.http.host, "Classifier service host");
    run_cmd->add_option("--port", rn_classify.http.port, "Classifier service port");
    run_cmd->add_option("--path", rn_classify.http.path, "Classifier service path");
    run_cmd->add_option("--timeout", rn_classify.http.timeout_s, "Request timeout (s)");
    run_cmd->add_option("--retries", rn_classify.http.retries, "Retries after a failure");
    run_cmd->add_option("--out-dir", rn_out, "Artifact directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*synth) return cmd_synth(synth_spec, synth_activities, seed, synth_video, synth_out);
        if (*detect_cmd)
            return cmd_detect(det_keypoints, det_view, det_video, det_opts, seed, threads,
                              det_out, det_format, det_dump);
        if (*sweep_cmd)
            return cmd_sweep(sw_keypoints, sw_view, sw_video, sw_opts, seed, threads, sw_param,
                             sw_values, sw_gt, sw_out);
        if (*fuse_cmd) return cmd_fuse(fu_inputs, fu_merge_iou, fu_opts, fu_out);
        if (*classify_cmd) return cmd_classify(cl_proposals, cl_opts, seed, cl_out);
        if (*eval_cmd) return cmd_evaluate(ev_pred, ev_gt, ev_mode, ev_tol, ev_out);
        if (*run_cmd) {
            std::map<View, fs::path> views;
            if (!rn_dash.empty()) views[View::Dashboard] = rn_dash;
            if (!rn_rear.empty()) views[View::Rearview] = rn_rear;
            if (!rn_right.empty()) views[View::RightWindow] = rn_right;
            return cmd_run(views, rn_gt, rn_video, rn_opts, rn_fuse, rn_classify, seed, threads,
                           rn_out);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
