#include "ivsum/gt_builder.hpp"

#include <algorithm>
#include <cmath>

#include "ivsum/common.hpp"
#include "ivsum/vec_math.hpp"

namespace ivsum {

namespace {

constexpr double kSimilarityFloor = 0.5;
constexpr double kImageHalfWindowS = 2.5;

}  // namespace

std::optional<FrameInterval> localize_asset(const StepAsset& asset, const Matrix& frame_features,
                                            double fps) {
    if (frame_features.rows == 0) throw ValidationError("localize_asset: empty frame features");
    if (asset.feature.size() != frame_features.cols)
        throw ValidationError(strcat("localize_asset: asset dimension ", asset.feature.size(),
                                     " != frame feature dimension ", frame_features.cols));
    if (asset.kind == StepAsset::Kind::clip && asset.clip_len_s <= 0.0)
        throw ValidationError(strcat("localize_asset: clip asset ", asset.step_id,
                                     " needs positive clip_len_s"));

    const auto unit_asset = try_normalized(asset.feature);
    if (unit_asset.empty())
        throw ValidationError(strcat("localize_asset: asset ", asset.step_id, " has zero-norm feature"));

    long best = -1;
    double best_sim = -2.0;
    for (std::size_t f = 0; f < frame_features.rows; ++f) {
        Vec row(frame_features.row(f), frame_features.row(f) + frame_features.cols);
        const auto u = try_normalized(row);
        if (u.empty()) continue;
        const double sim = dot(unit_asset, u);
        if (sim > best_sim) {  // strict: earliest frame wins ties
            best_sim = sim;
            best = static_cast<long>(f);
        }
    }
    if (best < 0 || best_sim < kSimilarityFloor) return std::nullopt;

    const long n = static_cast<long>(frame_features.rows);
    long start, end;
    if (asset.kind == StepAsset::Kind::image) {
        const long half = std::lround(kImageHalfWindowS * fps);
        start = best - half;
        end = best + half;
    } else {
        start = best;
        end = best + std::lround(asset.clip_len_s * fps);
    }
    start = std::clamp(start, 0L, n);
    end = std::clamp(end, 0L, n);
    if (start >= end) return std::nullopt;  // degenerate after clamping (fps ~ 0 windows)
    return FrameInterval{start, end};
}

GroundTruth build_ground_truth(const EmbeddedVideo& video, const std::vector<StepAsset>& assets) {
    if (assets.empty())
        throw ValidationError(strcat("build_ground_truth: no assets for video ", video.video_id));
    if (!video.frame_features)
        throw ValidationError(strcat("build_ground_truth: video ", video.video_id,
                                     " has no frame features"));

    GroundTruth gt;
    gt.video_id = video.video_id;
    gt.frame_labels.assign(video.n_frames, 0);
    gt.step_intervals.reserve(assets.size());

    for (const auto& asset : assets) {
        auto interval = localize_asset(asset, *video.frame_features, video.fps);
        if (interval) {
            std::fill(gt.frame_labels.begin() + interval->start,
                      gt.frame_labels.begin() + interval->end, uint8_t(1));
        } else {
            gt.unlocalized_steps.push_back(asset.step_id);
        }
        gt.step_intervals.push_back(interval);
    }
    gt.empty_summary =
        std::all_of(gt.frame_labels.begin(), gt.frame_labels.end(), [](uint8_t l) { return l == 0; });

    const long n_segments = video.n_frames / video.segment_len;
    gt.segment_scores.resize(n_segments);
    for (long s = 0; s < n_segments; ++s) {
        long ones = 0;
        for (int k = 0; k < video.segment_len; ++k) ones += gt.frame_labels[s * video.segment_len + k];
        gt.segment_scores[s] = static_cast<float>(ones) / static_cast<float>(video.segment_len);
    }
    return gt;
}

LengthFlags verify_lengths(const GroundTruth& gt) {
    LengthFlags flags;
    long ones = 0;
    for (uint8_t l : gt.frame_labels) ones += l;
    flags.coverage = gt.frame_labels.empty() ? 0.0 : double(ones) / double(gt.frame_labels.size());
    flags.too_short = flags.coverage < 0.30;
    flags.too_long = flags.coverage > 0.90;
    return flags;
}

}  // namespace ivsum
