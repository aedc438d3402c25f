// ivsum: end-to-end pipeline driver.
//
// Subcommands: synth, pseudo-gen, train, infer, baseline, gt-build, eval.
// Every run writes its outputs plus a run.json (resolved config, input
// digests, artifact version, wall time) into --out. Exit codes: 0 success,
// 1 validation error, 2 runtime failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ivsum/baselines.hpp"
#include "ivsum/checkpoint.hpp"
#include "ivsum/common.hpp"
#include "ivsum/evaluation.hpp"
#include "ivsum/gt_builder.hpp"
#include "ivsum/manifest.hpp"
#include "ivsum/pseudo_summary.hpp"
#include "ivsum/score_track.hpp"
#include "ivsum/scorer.hpp"
#include "ivsum/synthgen.hpp"
#include "ivsum/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ivsum;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

std::string fnv1a_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(strcat("cannot open input for digest: ", path.string()));
    uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

struct RunMeta {
    std::string command;
    json config = json::object();
    std::vector<fs::path> inputs;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
};

void write_run_json(const fs::path& out_dir, const RunMeta& meta) {
    json inputs = json::object();
    for (const auto& p : meta.inputs) inputs[p.string()] = fnv1a_digest(p);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - meta.t0).count();
    json doc = {{"command", meta.command},
                {"config", meta.config},
                {"inputs", inputs},
                {"artifact_version", kArtifactVersion},
                {"wall_time_s", wall}};
    std::ofstream out(out_dir / "run.json", std::ios::trunc);
    if (!out) throw RuntimeError(strcat("cannot write run.json under ", out_dir.string()));
    out << doc.dump(2) << '\n';
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ValidationError(strcat("cannot open config file: ", path));
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw ValidationError(strcat("bad config file ", path, ": ", e.what()));
    }
    // a previous run's run.json works directly as a config file
    if (cfg.contains("artifact_version") && cfg.contains("config")) return cfg.at("config");
    return cfg;
}

// config-file value wins over the default, an explicit flag wins over both
template <typename T>
void merge_opt(CLI::App* cmd, const std::string& flag, const json& cfg, const std::string& key,
               T& value) {
    if (cmd->count(flag) == 0 && cfg.contains(key)) {
        try {
            value = cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(strcat("config key '", key, "': ", e.what()));
        }
    }
}

fs::path prepare_out_dir(const std::string& out) {
    if (out.empty()) throw ValidationError("--out is required");
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

std::vector<const EmbeddedVideo*> flatten(const std::vector<TaskGroup>& tasks) {
    std::vector<const EmbeddedVideo*> videos;
    for (const auto& t : tasks)
        for (const auto& v : t.videos) videos.push_back(&v);
    return videos;
}

std::map<std::string, ScoreTrack> read_track_dir(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ValidationError(strcat("not a directory: ", dir.string()));
    std::map<std::string, ScoreTrack> tracks;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 11 && name.substr(name.size() - 11) == ".track.json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        ScoreTrack t = read_score_track(f);
        tracks.emplace(t.video_id, std::move(t));
    }
    if (tracks.empty()) throw ValidationError(strcat("no .track.json files in ", dir.string()));
    return tracks;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
    std::string out, config;
    SynthConfig cfg;
    bool no_frames = false;
};

void run_synth(CLI::App* cmd, SynthArgs& a) {
    RunMeta meta;
    meta.command = "synth";
    const json file_cfg = load_config_file(a.config);
    merge_opt(cmd, "--seed", file_cfg, "seed", a.cfg.seed);
    merge_opt(cmd, "--tasks", file_cfg, "tasks", a.cfg.n_tasks);
    merge_opt(cmd, "--videos-per-task", file_cfg, "videos_per_task", a.cfg.videos_per_task);
    merge_opt(cmd, "--segments", file_cfg, "segments", a.cfg.segments_per_video);
    merge_opt(cmd, "--dim", file_cfg, "dim", a.cfg.dim);
    merge_opt(cmd, "--shared-steps", file_cfg, "shared_steps", a.cfg.shared_steps_per_task);
    merge_opt(cmd, "--distractors", file_cfg, "distractors", a.cfg.distractors_per_video);
    merge_opt(cmd, "--mention-prob", file_cfg, "mention_prob", a.cfg.mention_prob);
    merge_opt(cmd, "--noise-sigma", file_cfg, "noise_sigma", a.cfg.noise_sigma);
    merge_opt(cmd, "--segment-len", file_cfg, "segment_len", a.cfg.segment_len);
    merge_opt(cmd, "--fps", file_cfg, "fps", a.cfg.fps);
    merge_opt(cmd, "--frame-noise-sigma", file_cfg, "frame_noise_sigma", a.cfg.frame_noise_sigma);
    a.cfg.with_frame_features = !a.no_frames;
    a.cfg.validate();

    const fs::path out = prepare_out_dir(a.out);
    const SynthCorpus corpus = generate(a.cfg);
    write_corpus(out, corpus.tasks, a.cfg.dim, /*normalized=*/true);
    write_truth_json(out / "truth.json", corpus.truth);

    meta.config = {{"seed", a.cfg.seed},
                   {"tasks", a.cfg.n_tasks},
                   {"videos_per_task", a.cfg.videos_per_task},
                   {"segments", a.cfg.segments_per_video},
                   {"dim", a.cfg.dim},
                   {"shared_steps", a.cfg.shared_steps_per_task},
                   {"distractors", a.cfg.distractors_per_video},
                   {"mention_prob", a.cfg.mention_prob},
                   {"noise_sigma", a.cfg.noise_sigma},
                   {"segment_len", a.cfg.segment_len},
                   {"fps", a.cfg.fps},
                   {"frame_noise_sigma", a.cfg.frame_noise_sigma},
                   {"with_frames", a.cfg.with_frame_features}};
    write_run_json(out, meta);
    log_info("synth: wrote ", corpus.truth.videos.size(), " videos to ", out.string());
}

// ---- pseudo-gen -----------------------------------------------------------

struct PseudoArgs {
    std::string manifest, out, config;
    double t = 55.0;
    std::string merge_mode = "running_mean";
    int threads = 1;
};

void run_pseudo_gen(CLI::App* cmd, PseudoArgs& a) {
    RunMeta meta;
    meta.command = "pseudo-gen";
    const json file_cfg = load_config_file(a.config);
    merge_opt(cmd, "--t", file_cfg, "t", a.t);
    merge_opt(cmd, "--merge-mode", file_cfg, "merge_mode", a.merge_mode);
    merge_opt(cmd, "--threads", file_cfg, "threads", a.threads);

    PseudoConfig cfg;
    cfg.selection.t_percent = a.t;
    cfg.selection.validate();
    cfg.merge_mode = parse_merge_mode(a.merge_mode);
    if (a.threads < 1) throw ValidationError("--threads must be >= 1");

    const fs::path out = prepare_out_dir(a.out);
    meta.inputs.push_back(a.manifest);
    const auto tasks = read_corpus(a.manifest);

    std::vector<std::vector<VideoPseudoSummary>> per_task(tasks.size());
    parallel_for(tasks.size(), a.threads,
                 [&](std::size_t t) { per_task[t] = pseudo_summaries(tasks[t], cfg); });

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        json videos = json::array();
        for (const auto& r : per_task[t]) {
            write_score_track(r.track, out / (r.video_id + ".track.json"));
            json steps = json::array();
            for (std::size_t s = 0; s < r.steps.size(); ++s)
                steps.push_back({{"step_id", r.steps[s].step_id},
                                 {"segment_indices", r.steps[s].segment_indices},
                                 {"trs", r.scores[s].trs},
                                 {"cms", r.scores[s].cms},
                                 {"importance", r.scores[s].importance},
                                 {"selected", bool(r.selected[s])}});
            videos.push_back({{"video_id", r.video_id},
                              {"no_transcript", r.no_transcript},
                              {"steps", steps}});
        }
        json report = {{"task_id", tasks[t].task_id}, {"videos", videos}};
        std::ofstream rep(out / ("task_" + tasks[t].task_id + ".report.json"), std::ios::trunc);
        rep << report.dump(2) << '\n';
    }

    meta.config = {{"t", a.t}, {"merge_mode", a.merge_mode}, {"threads", a.threads}};
    write_run_json(out, meta);
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    std::string manifest, scores, out, config;
    int layers = 2, heads = 4, d_model = 64, max_segments = 28;
    double dropout = 0.1, window_s = 5.0;
    std::string text_mode = "windowed";
    double lr = 1e-3, weight_decay = 1e-4, t = 55.0;
    int epochs = 300, batch_size = 24, threads = 1;
    uint64_t seed = 0;
};

void run_train(CLI::App* cmd, TrainArgs& a) {
    RunMeta meta;
    meta.command = "train";
    const json file_cfg = load_config_file(a.config);
    merge_opt(cmd, "--layers", file_cfg, "layers", a.layers);
    merge_opt(cmd, "--heads", file_cfg, "heads", a.heads);
    merge_opt(cmd, "--d-model", file_cfg, "d_model", a.d_model);
    merge_opt(cmd, "--max-segments", file_cfg, "max_segments", a.max_segments);
    merge_opt(cmd, "--dropout", file_cfg, "dropout", a.dropout);
    merge_opt(cmd, "--window-s", file_cfg, "window_s", a.window_s);
    merge_opt(cmd, "--text-mode", file_cfg, "text_mode", a.text_mode);
    merge_opt(cmd, "--lr", file_cfg, "lr", a.lr);
    merge_opt(cmd, "--weight-decay", file_cfg, "weight_decay", a.weight_decay);
    merge_opt(cmd, "--epochs", file_cfg, "epochs", a.epochs);
    merge_opt(cmd, "--batch-size", file_cfg, "batch_size", a.batch_size);
    merge_opt(cmd, "--t", file_cfg, "t", a.t);
    merge_opt(cmd, "--seed", file_cfg, "seed", a.seed);
    merge_opt(cmd, "--threads", file_cfg, "threads", a.threads);

    const Manifest manifest = read_manifest(a.manifest);

    ScorerConfig mc;
    mc.embed_dim = manifest.dim;
    mc.d_model = a.d_model;
    mc.n_layers = a.layers;
    mc.n_heads = a.heads;
    mc.dropout = a.dropout;
    mc.max_segments = a.max_segments;
    mc.text_window_s = a.window_s;
    mc.text_mode = parse_text_mode(a.text_mode);
    mc.seed = a.seed;
    mc.validate();

    TrainConfig tc;
    tc.lr = a.lr;
    tc.weight_decay = a.weight_decay;
    tc.batch_size = a.batch_size;
    tc.epochs = a.epochs;
    tc.t_percent = a.t;
    tc.seed = a.seed;
    tc.threads = a.threads;
    tc.validate();

    const fs::path out = prepare_out_dir(a.out);
    meta.inputs.push_back(a.manifest);
    const auto tasks = read_corpus(a.manifest);
    const auto videos = flatten(tasks);

    std::vector<ScoreTrack> pseudo;
    pseudo.reserve(videos.size());
    for (const auto* v : videos) {
        const fs::path track_path = fs::path(a.scores) / (v->video_id + ".track.json");
        if (!fs::exists(track_path))
            throw ValidationError(strcat("no pseudo track for video ", v->video_id, " under ",
                                         a.scores));
        pseudo.push_back(read_score_track(track_path));
    }
    std::vector<TrainItem> items;
    for (std::size_t i = 0; i < videos.size(); ++i) items.push_back({videos[i], &pseudo[i]});

    const TrainResult result = train(items, mc, tc);
    save_checkpoint(out / "params.ivsp", result.params);
    json curve = {{"loss_per_epoch", result.loss_curve}};
    std::ofstream(out / "loss_curve.json", std::ios::trunc) << curve.dump(2) << '\n';

    meta.config = {{"layers", a.layers},       {"heads", a.heads},
                   {"d_model", a.d_model},     {"max_segments", a.max_segments},
                   {"dropout", a.dropout},     {"window_s", a.window_s},
                   {"text_mode", a.text_mode}, {"lr", a.lr},
                   {"weight_decay", a.weight_decay}, {"epochs", a.epochs},
                   {"batch_size", a.batch_size},     {"t", a.t},
                   {"seed", a.seed},           {"threads", a.threads},
                   {"embed_dim", manifest.dim}};
    write_run_json(out, meta);
    log_info("train: final loss ", result.loss_curve.back());
}

// ---- infer ----------------------------------------------------------------

struct InferArgs {
    std::string manifest, params, out, config;
    double t = 55.0;
    int threads = 1;
};

void run_infer(CLI::App* cmd, InferArgs& a) {
    RunMeta meta;
    meta.command = "infer";
    const json file_cfg = load_config_file(a.config);
    merge_opt(cmd, "--t", file_cfg, "t", a.t);
    merge_opt(cmd, "--threads", file_cfg, "threads", a.threads);
    if (a.threads < 1) throw ValidationError("--threads must be >= 1");

    const fs::path out = prepare_out_dir(a.out);
    meta.inputs.push_back(a.manifest);
    meta.inputs.push_back(a.params);
    const ScorerParams params = load_checkpoint(a.params);
    const auto tasks = read_corpus(a.manifest);
    const auto videos = flatten(tasks);

    std::vector<ScoreTrack> tracks(videos.size());
    parallel_for(videos.size(), a.threads,
                 [&](std::size_t i) { tracks[i] = infer(params, *videos[i], a.t); });
    for (const auto& t : tracks) write_score_track(t, out / (t.video_id + ".track.json"));

    meta.config = {{"t", a.t}, {"threads", a.threads}};
    write_run_json(out, meta);
}

// ---- baseline ---------------------------------------------------------------

struct BaselineArgs {
    std::string manifest, method = "step", out, config;
    double t = 55.0;
    std::string merge_mode = "running_mean";
    int threads = 1;
};

void run_baseline(CLI::App* cmd, BaselineArgs& a) {
    RunMeta meta;
    meta.command = "baseline";
    const json file_cfg = load_config_file(a.config);
    merge_opt(cmd, "--t", file_cfg, "t", a.t);
    merge_opt(cmd, "--merge-mode", file_cfg, "merge_mode", a.merge_mode);
    merge_opt(cmd, "--threads", file_cfg, "threads", a.threads);
    if (a.method != "frame" && a.method != "segment" && a.method != "step")
        throw ValidationError(strcat("unknown baseline method: ", a.method));
    const MergeMode merge_mode = parse_merge_mode(a.merge_mode);
    if (a.threads < 1) throw ValidationError("--threads must be >= 1");

    const fs::path out = prepare_out_dir(a.out);
    meta.inputs.push_back(a.manifest);
    const auto tasks = read_corpus(a.manifest);
    const auto videos = flatten(tasks);

    std::vector<BaselineResult> results(videos.size());
    parallel_for(videos.size(), a.threads, [&](std::size_t i) {
        if (a.method == "frame")
            results[i] = frame_cross_modal(*videos[i], a.t);
        else if (a.method == "segment")
            results[i] = segment_cross_modal(*videos[i], a.t);
        else
            results[i] = step_cross_modal(*videos[i], a.t, merge_mode);
    });

    json report_videos = json::array();
    for (const auto& r : results) {
        write_score_track(r.track, out / (r.track.video_id + ".track.json"));
        report_videos.push_back(
            {{"video_id", r.track.video_id}, {"no_transcript", r.no_transcript}});
    }
    json report = {{"baseline", a.method}, {"videos", report_videos}};
    std::ofstream(out / "report.json", std::ios::trunc) << report.dump(2) << '\n';

    meta.config = {{"method", a.method}, {"t", a.t}, {"merge_mode", a.merge_mode},
                   {"threads", a.threads}};
    write_run_json(out, meta);
}

// ---- gt-build ---------------------------------------------------------------

struct GtArgs {
    std::string manifest, assets, out, config;
};

void run_gt_build(CLI::App*, GtArgs& a) {
    RunMeta meta;
    meta.command = "gt-build";
    const fs::path out = prepare_out_dir(a.out);
    meta.inputs.push_back(a.manifest);
    meta.inputs.push_back(a.assets);

    const auto tasks = read_corpus(a.manifest);
    std::map<std::string, const EmbeddedVideo*> by_id;
    for (const auto& t : tasks)
        for (const auto& v : t.videos) by_id[v.video_id] = &v;

    std::ifstream in(a.assets);
    if (!in) throw ValidationError(strcat("cannot open assets manifest: ", a.assets));
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError(strcat("bad assets manifest ", a.assets, ": ", e.what()));
    }

    const fs::path assets_base = fs::path(a.assets).parent_path();
    json verification = json::array();
    for (const auto& jv : doc.at("videos")) {
        const std::string video_id = jv.at("video_id").get<std::string>();
        auto it = by_id.find(video_id);
        if (it == by_id.end())
            throw ValidationError(strcat("assets manifest names unknown video ", video_id));
        const EmbeddedVideo& video = *it->second;

        fs::path feat_path(jv.at("features_file").get<std::string>());
        if (!feat_path.is_absolute()) feat_path = assets_base / feat_path;
        const Matrix features = read_emb(feat_path);

        std::vector<StepAsset> assets;
        for (const auto& js : jv.at("steps")) {
            StepAsset asset;
            asset.step_id = js.at("step_id").get<int>();
            const std::string kind = js.at("kind").get<std::string>();
            if (kind == "image")
                asset.kind = StepAsset::Kind::image;
            else if (kind == "clip")
                asset.kind = StepAsset::Kind::clip;
            else
                throw ValidationError(strcat("asset kind must be image or clip, got ", kind));
            if (asset.kind == StepAsset::Kind::clip)
                asset.clip_len_s = js.at("clip_len_s").get<double>();
            asset.description = js.value("description", "");
            const long row = js.at("feature_row").get<long>();
            if (row < 0 || row >= long(features.rows))
                throw ValidationError(strcat("feature_row ", row, " outside [0,", features.rows,
                                             ") for video ", video_id));
            asset.feature.assign(features.row(row), features.row(row) + features.cols);
            assets.push_back(std::move(asset));
        }

        const GroundTruth gt = build_ground_truth(video, assets);
        ScoreTrack track;
        track.video_id = video_id;
        track.n_frames = video.n_frames;
        track.segment_len = video.segment_len;
        track.segment_scores = gt.segment_scores;
        track.frame_labels = gt.frame_labels;
        write_score_track(track, out / (video_id + ".track.json"));

        json intervals = json::array();
        for (std::size_t s = 0; s < assets.size(); ++s) {
            if (!gt.step_intervals[s]) continue;
            intervals.push_back({{"step_id", assets[s].step_id},
                                 {"start", gt.step_intervals[s]->start},
                                 {"end", gt.step_intervals[s]->end}});
        }
        json ivdoc = {{"video_id", video_id}, {"steps", intervals}};
        std::ofstream(out / (video_id + ".intervals.json"), std::ios::trunc)
            << ivdoc.dump(2) << '\n';

        const LengthFlags flags = verify_lengths(gt);
        json flag_list = json::array();
        if (flags.too_short) flag_list.push_back("too_short");
        if (flags.too_long) flag_list.push_back("too_long");
        if (gt.empty_summary) flag_list.push_back("empty_summary");
        verification.push_back({{"video_id", video_id},
                                {"coverage", flags.coverage},
                                {"flags", flag_list},
                                {"unlocalized_steps", gt.unlocalized_steps}});
    }

    json flagged = json::array();
    for (const auto& v : verification)
        if (!v.at("flags").empty()) flagged.push_back(v.at("video_id"));
    json report = {{"videos", verification}, {"flagged", flagged}};
    std::ofstream(out / "verification_report.json", std::ios::trunc) << report.dump(2) << '\n';

    meta.config = json::object();
    write_run_json(out, meta);
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string pred, gt, intervals, out, config;
    std::string step_recall_mode = "count";
};

void run_eval(CLI::App* cmd, EvalArgs& a) {
    RunMeta meta;
    meta.command = "eval";
    const json file_cfg = load_config_file(a.config);
    merge_opt(cmd, "--step-recall-mode", file_cfg, "step_recall_mode", a.step_recall_mode);
    StepRecallMode mode;
    if (a.step_recall_mode == "count")
        mode = StepRecallMode::count;
    else if (a.step_recall_mode == "duration")
        mode = StepRecallMode::duration;
    else
        throw ValidationError(strcat("step recall mode must be count or duration, got ",
                                     a.step_recall_mode));

    const auto pred_map = read_track_dir(a.pred);
    const auto gt_map = read_track_dir(a.gt);
    std::vector<ScoreTrack> pred, gt;
    for (const auto& [id, t] : pred_map) pred.push_back(t);
    for (const auto& [id, t] : gt_map) gt.push_back(t);

    std::map<std::string, std::vector<FrameInterval>> intervals;
    if (!a.intervals.empty()) {
        for (const auto& entry : fs::directory_iterator(a.intervals)) {
            const std::string name = entry.path().filename().string();
            if (name.size() <= 15 || name.substr(name.size() - 15) != ".intervals.json") continue;
            std::ifstream in(entry.path());
            json doc;
            in >> doc;
            std::vector<FrameInterval> list;
            for (const auto& js : doc.at("steps"))
                list.push_back({js.at("start").get<long>(), js.at("end").get<long>()});
            intervals[doc.at("video_id").get<std::string>()] = std::move(list);
        }
    }

    const EvalReport report =
        evaluate_corpus(pred, gt, intervals.empty() ? nullptr : &intervals, mode);
    std::fputs(format_table(report).c_str(), stdout);

    json videos = json::array();
    for (const auto& v : report.videos) {
        json jv = {{"video_id", v.video_id},
                   {"precision", v.frames.precision},
                   {"recall", v.frames.recall},
                   {"f_score", v.frames.f_score},
                   {"tau", v.tau},
                   {"rho", v.rho},
                   {"tau_degenerate", v.tau_degenerate},
                   {"rho_degenerate", v.rho_degenerate}};
        if (v.step_recall) jv["step_recall"] = *v.step_recall;
        videos.push_back(std::move(jv));
    }
    json jreport = {{"videos", videos},
                    {"mean_precision", report.mean_precision},
                    {"mean_recall", report.mean_recall},
                    {"mean_f_score", report.mean_f_score},
                    {"mean_tau", report.mean_tau},
                    {"mean_rho", report.mean_rho},
                    {"degenerate_count", report.degenerate_count}};
    if (report.mean_step_recall) jreport["mean_step_recall"] = *report.mean_step_recall;

    if (!a.out.empty()) {
        const fs::path out = prepare_out_dir(a.out);
        std::ofstream(out / "report.json", std::ios::trunc) << jreport.dump(2) << '\n';
        meta.config = {{"step_recall_mode", a.step_recall_mode}};
        write_run_json(out, meta);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"instructional video summarization pipeline (ivsum)"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--out", synth_args.out, "output directory")->required();
    synth_cmd->add_option("--seed", synth_args.cfg.seed, "rng seed");
    synth_cmd->add_option("--tasks", synth_args.cfg.n_tasks, "number of tasks");
    synth_cmd->add_option("--videos-per-task", synth_args.cfg.videos_per_task, "videos per task");
    synth_cmd->add_option("--segments", synth_args.cfg.segments_per_video, "segments per video");
    synth_cmd->add_option("--dim", synth_args.cfg.dim, "embedding dimension");
    synth_cmd->add_option("--shared-steps", synth_args.cfg.shared_steps_per_task,
                          "shared steps per task");
    synth_cmd->add_option("--distractors", synth_args.cfg.distractors_per_video,
                          "distractor steps per video");
    synth_cmd->add_option("--mention-prob", synth_args.cfg.mention_prob,
                          "probability a shared step is mentioned");
    synth_cmd->add_option("--noise-sigma", synth_args.cfg.noise_sigma, "embedding noise sigma");
    synth_cmd->add_option("--segment-len", synth_args.cfg.segment_len, "frames per segment");
    synth_cmd->add_option("--fps", synth_args.cfg.fps, "frames per second");
    synth_cmd->add_option("--frame-noise-sigma", synth_args.cfg.frame_noise_sigma,
                          "frame feature noise sigma (defaults to noise-sigma)");
    synth_cmd->add_flag("--no-frames", synth_args.no_frames, "skip frame features");
    synth_cmd->add_option("--config", synth_args.config, "JSON config file");
    synth_cmd->callback([&] { run_synth(synth_cmd, synth_args); });

    PseudoArgs pseudo_args;
    CLI::App* pseudo_cmd = app.add_subcommand("pseudo-gen", "generate pseudo summaries");
    pseudo_cmd->add_option("--manifest", pseudo_args.manifest, "corpus manifest")->required();
    pseudo_cmd->add_option("--out", pseudo_args.out, "output directory")->required();
    pseudo_cmd->add_option("--t", pseudo_args.t, "summary budget percent");
    pseudo_cmd->add_option("--merge-mode", pseudo_args.merge_mode,
                           "running_mean or prev_segment");
    pseudo_cmd->add_option("--threads", pseudo_args.threads, "worker threads");
    pseudo_cmd->add_option("--config", pseudo_args.config, "JSON config file");
    pseudo_cmd->callback([&] { run_pseudo_gen(pseudo_cmd, pseudo_args); });

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "train the segment scorer");
    train_cmd->add_option("--manifest", train_args.manifest, "corpus manifest")->required();
    train_cmd->add_option("--scores", train_args.scores, "directory of pseudo tracks")->required();
    train_cmd->add_option("--out", train_args.out, "output directory")->required();
    train_cmd->add_option("--layers", train_args.layers, "encoder layers");
    train_cmd->add_option("--heads", train_args.heads, "attention heads");
    train_cmd->add_option("--d-model", train_args.d_model, "model width");
    train_cmd->add_option("--max-segments", train_args.max_segments, "positional table size");
    train_cmd->add_option("--dropout", train_args.dropout, "dropout probability");
    train_cmd->add_option("--window-s", train_args.window_s, "text context window seconds");
    train_cmd->add_option("--text-mode", train_args.text_mode, "windowed or global");
    train_cmd->add_option("--lr", train_args.lr, "learning rate");
    train_cmd->add_option("--weight-decay", train_args.weight_decay, "decoupled weight decay");
    train_cmd->add_option("--epochs", train_args.epochs, "training epochs");
    train_cmd->add_option("--batch-size", train_args.batch_size, "videos per batch");
    train_cmd->add_option("--t", train_args.t, "inference budget percent");
    train_cmd->add_option("--seed", train_args.seed, "rng seed");
    train_cmd->add_option("--threads", train_args.threads, "worker threads");
    train_cmd->add_option("--config", train_args.config, "JSON config file");
    train_cmd->callback([&] { run_train(train_cmd, train_args); });

    InferArgs infer_args;
    CLI::App* infer_cmd = app.add_subcommand("infer", "score a corpus with a trained model");
    infer_cmd->add_option("--manifest", infer_args.manifest, "corpus manifest")->required();
    infer_cmd->add_option("--params", infer_args.params, "checkpoint file")->required();
    infer_cmd->add_option("--out", infer_args.out, "output directory")->required();
    infer_cmd->add_option("--t", infer_args.t, "summary budget percent");
    infer_cmd->add_option("--threads", infer_args.threads, "worker threads");
    infer_cmd->add_option("--config", infer_args.config, "JSON config file");
    infer_cmd->callback([&] { run_infer(infer_cmd, infer_args); });

    BaselineArgs baseline_args;
    CLI::App* baseline_cmd = app.add_subcommand("baseline", "run an unsupervised baseline");
    baseline_cmd->add_option("--manifest", baseline_args.manifest, "corpus manifest")->required();
    baseline_cmd->add_option("--method", baseline_args.method, "frame, segment or step")
        ->required();
    baseline_cmd->add_option("--out", baseline_args.out, "output directory")->required();
    baseline_cmd->add_option("--t", baseline_args.t, "summary budget percent");
    baseline_cmd->add_option("--merge-mode", baseline_args.merge_mode,
                             "running_mean or prev_segment");
    baseline_cmd->add_option("--threads", baseline_args.threads, "worker threads");
    baseline_cmd->add_option("--config", baseline_args.config, "JSON config file");
    baseline_cmd->callback([&] { run_baseline(baseline_cmd, baseline_args); });

    GtArgs gt_args;
    CLI::App* gt_cmd = app.add_subcommand("gt-build", "build ground truth from step assets");
    gt_cmd->add_option("--manifest", gt_args.manifest, "corpus manifest")->required();
    gt_cmd->add_option("--assets", gt_args.assets, "assets manifest JSON")->required();
    gt_cmd->add_option("--out", gt_args.out, "output directory")->required();
    gt_cmd->add_option("--config", gt_args.config, "JSON config file");
    gt_cmd->callback([&] { run_gt_build(gt_cmd, gt_args); });

    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate predictions against ground truth");
    eval_cmd->add_option("--pred", eval_args.pred, "predicted track directory")->required();
    eval_cmd->add_option("--gt", eval_args.gt, "ground-truth track directory")->required();
    eval_cmd->add_option("--intervals", eval_args.intervals, "gt step intervals directory");
    eval_cmd->add_option("--out", eval_args.out, "report output directory");
    eval_cmd->add_option("--step-recall-mode", eval_args.step_recall_mode, "count or duration");
    eval_cmd->add_option("--config", eval_args.config, "JSON config file");
    eval_cmd->callback([&] { run_eval(eval_cmd, eval_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
    return 0;
}
