#include "ivsum/pseudo_summary.hpp"

#include <algorithm>
#include <numeric>

#include "ivsum/common.hpp"
#include "ivsum/vec_math.hpp"

namespace ivsum {

void SelectionConfig::validate() const {
    if (!(t_percent > 0.0 && t_percent <= 100.0))
        throw ValidationError(strcat("t_percent must lie in (0,100], got ", t_percent));
}

std::vector<std::vector<double>> task_relevance(const std::vector<std::vector<Step>>& steps_by_video) {
    std::size_t total = 0;
    for (const auto& steps : steps_by_video) total += steps.size();
    if (total == 0) throw ValidationError("task_relevance: no steps in task");

    std::vector<const Step*> all;
    all.reserve(total);
    for (const auto& steps : steps_by_video)
        for (const auto& s : steps) all.push_back(&s);

    std::vector<std::vector<double>> out;
    out.reserve(steps_by_video.size());
    for (const auto& steps : steps_by_video) {
        std::vector<double> trs(steps.size(), 0.0);
        for (std::size_t i = 0; i < steps.size(); ++i) {
            double sum = 0.0;
            for (const Step* other : all) sum += dot(steps[i].vec, other->vec);
            trs[i] = sum / double(total);
        }
        out.push_back(std::move(trs));
    }
    return out;
}

std::vector<double> cross_modal(const std::vector<Step>& steps,
                                const std::vector<TranscriptSentence>& sentences) {
    std::vector<double> cms(steps.size(), 0.0);
    if (sentences.empty()) return cms;

    std::vector<std::vector<double>> unit_sentences;
    unit_sentences.reserve(sentences.size());
    for (const auto& s : sentences) {
        auto u = try_normalized(s.vec);
        if (u.empty())
            throw ValidationError("cross_modal: transcript sentence has zero-norm embedding");
        unit_sentences.push_back(std::move(u));
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        double sum = 0.0;
        for (const auto& u : unit_sentences) sum += dot(steps[i].vec, u);
        cms[i] = sum / double(unit_sentences.size());
    }
    return cms;
}

ScoreTrack select_top_t(const EmbeddedVideo& video, const std::vector<Step>& steps,
                        const std::vector<double>& step_importance, const SelectionConfig& config,
                        std::vector<uint8_t>* selected_out) {
    config.validate();
    if (steps.empty()) throw ValidationError(strcat("select_top_t: no steps for video ", video.video_id));
    if (steps.size() != step_importance.size())
        throw ValidationError("select_top_t: steps and importances misaligned");

    std::vector<std::size_t> order(steps.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (step_importance[a] != step_importance[b]) return step_importance[a] > step_importance[b];
        return steps[a].segment_indices.front() < steps[b].segment_indices.front();
    });

    const long summarizable = video.summarizable_frames();
    const double target = config.t_percent / 100.0 * double(summarizable);

    std::vector<uint8_t> selected(steps.size(), 0);
    long covered = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t i = order[rank];
        selected[i] = 1;
        covered += static_cast<long>(steps[i].segment_indices.size()) * video.segment_len;
        if (double(covered) >= target) break;
    }

    ScoreTrack track;
    track.video_id = video.video_id;
    track.n_frames = video.n_frames;
    track.segment_len = video.segment_len;
    track.segment_scores.assign(video.segments.size(), 0.0f);
    track.frame_labels.assign(video.n_frames, 0);

    // per-segment importances, min-max rescaled to [0,1]
    std::vector<double> seg_importance(video.segments.size(), 0.0);
    for (std::size_t s = 0; s < steps.size(); ++s)
        for (int seg : steps[s].segment_indices) seg_importance[seg] = step_importance[s];
    const auto [lo_it, hi_it] = std::minmax_element(seg_importance.begin(), seg_importance.end());
    const double lo = *lo_it, hi = *hi_it;
    for (std::size_t seg = 0; seg < seg_importance.size(); ++seg)
        track.segment_scores[seg] = hi - lo < 1e-12
                                        ? 0.5f
                                        : static_cast<float>((seg_importance[seg] - lo) / (hi - lo));

    for (std::size_t s = 0; s < steps.size(); ++s) {
        if (!selected[s]) continue;
        for (int seg : steps[s].segment_indices) {
            const long f0 = static_cast<long>(seg) * video.segment_len;
            std::fill(track.frame_labels.begin() + f0,
                      track.frame_labels.begin() + f0 + video.segment_len, uint8_t(1));
        }
    }

    if (selected_out) *selected_out = std::move(selected);
    return track;
}

std::vector<VideoPseudoSummary> pseudo_summaries(const TaskGroup& task, const PseudoConfig& config) {
    if (task.videos.empty()) throw ValidationError(strcat("task ", task.task_id, " has no videos"));

    std::vector<std::vector<Step>> steps_by_video;
    steps_by_video.reserve(task.videos.size());
    for (const auto& video : task.videos)
        steps_by_video.push_back(group_into_steps(video, config.merge_mode));

    const auto trs = task_relevance(steps_by_video);

    std::vector<VideoPseudoSummary> out;
    out.reserve(task.videos.size());
    for (std::size_t v = 0; v < task.videos.size(); ++v) {
        const auto& video = task.videos[v];
        VideoPseudoSummary r;
        r.video_id = video.video_id;
        r.steps = std::move(steps_by_video[v]);
        r.no_transcript = video.transcript.empty();

        const auto cms = cross_modal(r.steps, video.transcript);
        std::vector<double> importance(r.steps.size());
        r.scores.resize(r.steps.size());
        for (std::size_t i = 0; i < r.steps.size(); ++i) {
            r.scores[i].trs = trs[v][i];
            r.scores[i].cms = cms[i];
            r.scores[i].importance = (trs[v][i] + cms[i]) / 2.0;
            importance[i] = r.scores[i].importance;
        }
        r.track = select_top_t(video, r.steps, importance, config.selection, &r.selected);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ivsum
