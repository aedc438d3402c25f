#include "ivsum/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "ivsum/common.hpp"
#include "ivsum/vec_math.hpp"

namespace ivsum {

namespace {

std::vector<std::vector<double>> unit_sentence_vecs(const EmbeddedVideo& video) {
    std::vector<std::vector<double>> out;
    out.reserve(video.transcript.size());
    for (const auto& s : video.transcript) {
        auto u = try_normalized(s.vec);
        if (u.empty())
            throw ValidationError(strcat("video ", video.video_id,
                                         ": transcript sentence has zero-norm embedding"));
        out.push_back(std::move(u));
    }
    return out;
}

std::vector<float> minmax_rescaled(const std::vector<double>& values) {
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<float> out(values.size(), 0.5f);
    if (hi - lo >= 1e-12)
        for (std::size_t i = 0; i < values.size(); ++i)
            out[i] = static_cast<float>((values[i] - lo) / (hi - lo));
    return out;
}

// top-k indices by score, ties broken by earlier index
std::vector<std::size_t> top_k(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    order.resize(std::min(k, order.size()));
    return order;
}

ScoreTrack empty_track(const EmbeddedVideo& video) {
    ScoreTrack t;
    t.video_id = video.video_id;
    t.n_frames = video.n_frames;
    t.segment_len = video.segment_len;
    t.segment_scores.assign(video.segments.size(), 0.0f);
    t.frame_labels.assign(video.n_frames, 0);
    return t;
}

void label_segment(ScoreTrack& track, int seg) {
    const long f0 = static_cast<long>(seg) * track.segment_len;
    std::fill(track.frame_labels.begin() + f0, track.frame_labels.begin() + f0 + track.segment_len,
              uint8_t(1));
}

}  // namespace

BaselineResult frame_cross_modal(const EmbeddedVideo& video, double t_percent) {
    SelectionConfig{t_percent}.validate();
    if (!video.frame_features)
        throw ValidationError(strcat("video ", video.video_id,
                                     ": frame baseline requires frame features"));
    const Matrix& frames = *video.frame_features;
    if (!video.transcript.empty() && video.transcript.front().vec.size() != frames.cols)
        throw ValidationError(strcat("video ", video.video_id, ": frame feature dimension ",
                                     frames.cols, " differs from sentence dimension ",
                                     video.transcript.front().vec.size()));

    BaselineResult result;
    result.no_transcript = video.transcript.empty();
    const auto sentences = unit_sentence_vecs(video);

    std::vector<double> frame_scores(frames.rows, 0.0);
    if (!sentences.empty()) {
        for (std::size_t f = 0; f < frames.rows; ++f) {
            Vec row(frames.row(f), frames.row(f) + frames.cols);
            const auto u = try_normalized(row);
            if (u.empty()) continue;  // zero feature rows never match anything
            double sum = 0.0;
            for (const auto& s : sentences) sum += dot(u, s);
            frame_scores[f] = sum / double(sentences.size());
        }
    }

    const std::size_t k_frames =
        std::max<std::size_t>(1, std::size_t(t_percent / 100.0 * double(frames.rows)));
    std::vector<uint8_t> chosen(frames.rows, 0);
    for (std::size_t f : top_k(frame_scores, k_frames)) chosen[f] = 1;

    ScoreTrack track = empty_track(video);
    std::vector<double> seg_scores(video.segments.size(), 0.0);
    for (std::size_t seg = 0; seg < video.segments.size(); ++seg) {
        const long f0 = static_cast<long>(seg) * video.segment_len;
        long picked = 0;
        double sum = 0.0;
        for (int k = 0; k < video.segment_len; ++k) {
            picked += chosen[f0 + k];
            sum += frame_scores[f0 + k];
        }
        seg_scores[seg] = sum / double(video.segment_len);
        if (2 * picked >= video.segment_len) label_segment(track, static_cast<int>(seg));
    }
    track.segment_scores = minmax_rescaled(seg_scores);
    result.track = std::move(track);
    return result;
}

BaselineResult segment_cross_modal(const EmbeddedVideo& video, double t_percent) {
    SelectionConfig{t_percent}.validate();
    BaselineResult result;
    result.no_transcript = video.transcript.empty();
    const auto sentences = unit_sentence_vecs(video);

    std::vector<double> seg_scores(video.segments.size(), 0.0);
    if (!sentences.empty()) {
        for (std::size_t i = 0; i < video.segments.size(); ++i) {
            const auto u = try_normalized(video.segments[i].vec);
            if (u.empty())
                throw ValidationError(strcat("video ", video.video_id, ": segment ", i,
                                             " has zero-norm embedding"));
            double sum = 0.0;
            for (const auto& s : sentences) sum += dot(u, s);
            seg_scores[i] = sum / double(sentences.size());
        }
    }

    const std::size_t k =
        std::max<std::size_t>(1, std::size_t(t_percent / 100.0 * double(video.segments.size())));
    ScoreTrack track = empty_track(video);
    for (std::size_t seg : top_k(seg_scores, k)) label_segment(track, static_cast<int>(seg));
    track.segment_scores = minmax_rescaled(seg_scores);
    result.track = std::move(track);
    return result;
}

BaselineResult step_cross_modal(const EmbeddedVideo& video, double t_percent, MergeMode merge_mode) {
    BaselineResult result;
    result.no_transcript = video.transcript.empty();

    const auto steps = group_into_steps(video, merge_mode);
    const auto cms = cross_modal(steps, video.transcript);
    result.track = select_top_t(video, steps, cms, SelectionConfig{t_percent});
    return result;
}

}  // namespace ivsum
