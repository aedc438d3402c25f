#include "ivsum/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "ivsum/common.hpp"
#include "ivsum/vec_math.hpp"

namespace ivsum {

namespace {

constexpr double kProtoCosLimit = 0.3;
constexpr int kMaxProtoAttempts = 100000;

enum StreamKind : uint64_t {
    kSharedProtos = 1,
    kVideoLayout = 2,
    kSegmentNoise = 3,
    kFrameNoise = 4,
    kTranscript = 5,
};

std::mt19937_64 stream(uint64_t seed, uint64_t kind, uint64_t task, uint64_t video = 0) {
    return std::mt19937_64(mix_seed(mix_seed(mix_seed(seed, kind), task), video));
}

Vec to_float(const std::vector<double>& v) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
    return out;
}

Vec draw_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(dim);
    for (double& x : v) x = gauss(rng);
    const double n = l2_norm(v);
    for (double& x : v) x /= n;
    return to_float(v);
}

// Rejection sampling keeps every pair of prototypes that can co-occur in a
// video below the cosine limit, measured on the stored float values.
Vec draw_prototype(std::mt19937_64& rng, int dim, const std::vector<const Vec*>& against) {
    for (int attempt = 0; attempt < kMaxProtoAttempts; ++attempt) {
        Vec cand = draw_unit(rng, dim);
        const auto cu = try_normalized(cand);
        bool ok = true;
        for (const Vec* other : against) {
            if (std::abs(dot(cu, try_normalized(*other))) >= kProtoCosLimit) {
                ok = false;
                break;
            }
        }
        if (ok) return cand;
    }
    throw ValidationError(strcat("synthgen: cannot draw ", against.size() + 1,
                                 " near-orthogonal prototypes in dimension ", dim,
                                 "; increase dim or reduce step counts"));
}

Vec noisy_copy(const Vec& proto, double sigma, std::mt19937_64& rng) {
    if (sigma == 0.0) return proto;
    std::normal_distribution<double> gauss(0.0, sigma);
    std::vector<double> v(proto.size());
    for (std::size_t i = 0; i < proto.size(); ++i) v[i] = double(proto[i]) + gauss(rng);
    const double n = l2_norm(v);
    if (n >= kZeroNormEps)
        for (double& x : v) x /= n;
    return to_float(v);
}

std::string zero_pad(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

// Uniform composition of `total` into `parts` runs of length >= min_len:
// give every run min_len, then split the surplus by stars and bars.
std::vector<int> run_lengths(int total, int parts, int min_len, std::mt19937_64& rng) {
    const int extra = total - parts * min_len;
    const int slots = extra + parts - 1;
    std::vector<int> bars(slots);
    for (int i = 0; i < slots; ++i) bars[i] = i;
    for (int i = 0; i < parts - 1; ++i) {
        std::uniform_int_distribution<int> pick(i, slots - 1);
        std::swap(bars[i], bars[pick(rng)]);
    }
    bars.resize(parts - 1);
    std::sort(bars.begin(), bars.end());
    std::vector<int> lengths;
    int prev = -1;
    for (int b : bars) {
        lengths.push_back(min_len + (b - prev - 1));
        prev = b;
    }
    lengths.push_back(min_len + (slots - prev - 1));
    return lengths;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_tasks < 1) throw ValidationError("synthgen: n_tasks must be >= 1");
    if (videos_per_task < 1) throw ValidationError("synthgen: videos_per_task must be >= 1");
    if (segments_per_video < 1) throw ValidationError("synthgen: segments_per_video must be >= 1");
    if (dim < 8) throw ValidationError("synthgen: dim must be >= 8");
    if (shared_steps_per_task < 0 || distractors_per_video < 0)
        throw ValidationError("synthgen: step counts must be non-negative");
    if (shared_steps_per_task + distractors_per_video < 1)
        throw ValidationError("synthgen: need at least one step per video");
    if (shared_steps_per_task + distractors_per_video > segments_per_video)
        throw ValidationError(strcat("synthgen: ", shared_steps_per_task, " shared + ",
                                     distractors_per_video, " distractor steps do not fit in ",
                                     segments_per_video, " segments"));
    if (mention_prob < 0.0 || mention_prob > 1.0)
        throw ValidationError("synthgen: mention_prob must lie in [0,1]");
    if (noise_sigma < 0.0) throw ValidationError("synthgen: noise_sigma must be >= 0");
    if (segment_len < 1) throw ValidationError("synthgen: segment_len must be >= 1");
    if (fps <= 0.0) throw ValidationError("synthgen: fps must be positive");
    if (min_run_segments < 1) throw ValidationError("synthgen: min_run_segments must be >= 1");
}

const PlantedVideo& PlantedTruth::find(const std::string& video_id) const {
    for (const auto& v : videos)
        if (v.video_id == video_id) return v;
    throw ValidationError(strcat("planted truth has no video ", video_id));
}

SynthCorpus generate(const SynthConfig& config) {
    config.validate();
    const double frame_sigma =
        config.frame_noise_sigma < 0.0 ? config.noise_sigma : config.frame_noise_sigma;

    SynthCorpus corpus;
    for (int t = 0; t < config.n_tasks; ++t) {
        const std::string task_id = "t" + zero_pad(t);
        TaskGroup group;
        group.task_id = task_id;

        auto proto_rng = stream(config.seed, kSharedProtos, t);
        std::vector<Vec> shared;
        for (int s = 0; s < config.shared_steps_per_task; ++s) {
            std::vector<const Vec*> against;
            for (const auto& p : shared) against.push_back(&p);
            shared.push_back(draw_prototype(proto_rng, config.dim, against));
        }

        for (int v = 0; v < config.videos_per_task; ++v) {
            auto layout_rng = stream(config.seed, kVideoLayout, t, v);
            auto seg_rng = stream(config.seed, kSegmentNoise, t, v);
            auto frame_rng = stream(config.seed, kFrameNoise, t, v);
            auto text_rng = stream(config.seed, kTranscript, t, v);

            std::vector<Vec> distractors;
            for (int d = 0; d < config.distractors_per_video; ++d) {
                std::vector<const Vec*> against;
                for (const auto& p : shared) against.push_back(&p);
                for (const auto& p : distractors) against.push_back(&p);
                distractors.push_back(draw_prototype(layout_rng, config.dim, against));
            }

            const int n_steps = config.shared_steps_per_task + config.distractors_per_video;
            const int min_run =
                std::max(1, std::min(config.min_run_segments, config.segments_per_video / n_steps));
            const auto lengths =
                run_lengths(config.segments_per_video, n_steps, min_run, layout_rng);

            // prototype k < shared count: shared k; otherwise distractor k - shared count
            std::vector<int> order(n_steps);
            for (int i = 0; i < n_steps; ++i) order[i] = i;
            for (int i = n_steps - 1; i > 0; --i) {
                std::uniform_int_distribution<int> pick(0, i);
                std::swap(order[i], order[pick(layout_rng)]);
            }

            EmbeddedVideo video;
            video.video_id = task_id + "_v" + zero_pad(v);
            video.task_id = task_id;
            video.fps = config.fps;
            video.segment_len = config.segment_len;
            video.n_frames = static_cast<long>(config.segments_per_video) * config.segment_len;

            PlantedVideo planted;
            planted.video_id = video.video_id;
            planted.task_id = task_id;

            int seg_cursor = 0;
            for (int r = 0; r < n_steps; ++r) {
                const int proto_id = order[r];
                const bool is_shared = proto_id < config.shared_steps_per_task;
                const Vec& proto = is_shared ? shared[proto_id]
                                             : distractors[proto_id - config.shared_steps_per_task];
                PlantedStep ps;
                ps.step_id = r;
                ps.first_segment = seg_cursor;
                ps.n_segments = lengths[r];
                ps.shared = is_shared;
                ps.prototype = proto_id;
                planted.steps.push_back(ps);

                for (int k = 0; k < lengths[r]; ++k, ++seg_cursor) {
                    SegmentEmbedding se;
                    se.index = seg_cursor;
                    se.start_frame = static_cast<long>(seg_cursor) * config.segment_len;
                    se.end_frame = se.start_frame + config.segment_len;
                    se.vec = noisy_copy(proto, config.noise_sigma, seg_rng);
                    video.segments.push_back(std::move(se));
                }
            }

            if (config.with_frame_features) {
                Matrix fm(static_cast<std::size_t>(video.n_frames), config.dim);
                for (const auto& ps : planted.steps) {
                    const Vec& proto =
                        ps.shared ? shared[ps.prototype]
                                  : distractors[ps.prototype - config.shared_steps_per_task];
                    const long f0 = static_cast<long>(ps.first_segment) * config.segment_len;
                    const long f1 = f0 + static_cast<long>(ps.n_segments) * config.segment_len;
                    for (long f = f0; f < f1; ++f) {
                        const Vec row = noisy_copy(proto, frame_sigma, frame_rng);
                        std::copy(row.begin(), row.end(), fm.row(static_cast<std::size_t>(f)));
                    }
                }
                video.frame_features = std::move(fm);
            }

            std::uniform_real_distribution<double> coin(0.0, 1.0);
            for (auto& ps : planted.steps) {
                if (!ps.shared) continue;
                if (coin(text_rng) >= config.mention_prob) continue;
                ps.mentioned = true;
                const Vec& proto = shared[ps.prototype];
                TranscriptSentence sent;
                const long f0 = static_cast<long>(ps.first_segment) * config.segment_len;
                const long f1 = f0 + static_cast<long>(ps.n_segments) * config.segment_len;
                sent.start_s = double(f0) / config.fps;
                sent.end_s = double(f1) / config.fps;
                sent.text = strcat("task ", t, " step ", ps.prototype);
                sent.vec = noisy_copy(proto, config.noise_sigma, text_rng);
                video.transcript.push_back(std::move(sent));
            }

            video.validate(config.dim);
            group.videos.push_back(std::move(video));
            corpus.truth.videos.push_back(std::move(planted));
        }
        corpus.tasks.push_back(std::move(group));
    }
    return corpus;
}

void write_truth_json(const std::filesystem::path& path, const PlantedTruth& truth) {
    nlohmann::json videos = nlohmann::json::array();
    for (const auto& v : truth.videos) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : v.steps)
            steps.push_back({{"step_id", s.step_id},
                             {"first_segment", s.first_segment},
                             {"n_segments", s.n_segments},
                             {"shared", s.shared},
                             {"mentioned", s.mentioned},
                             {"prototype", s.prototype}});
        videos.push_back({{"video_id", v.video_id}, {"task_id", v.task_id}, {"steps", steps}});
    }
    nlohmann::json doc = {{"version", 1}, {"videos", videos}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeError(strcat("cannot write truth file: ", path.string()));
    out << doc.dump(2) << '\n';
}

}  // namespace ivsum
