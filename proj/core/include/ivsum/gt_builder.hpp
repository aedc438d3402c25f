#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ivsum/corpus.hpp"
#include "ivsum/evaluation.hpp"
#include "ivsum/score_track.hpp"

namespace ivsum {

// A step illustration scraped from a how-to article: an image feature, or
// the first-frame feature of a short clip with a known duration.
struct StepAsset {
    int step_id = 0;
    enum class Kind { image, clip } kind = Kind::image;
    Vec feature;
    double clip_len_s = 0.0;  // clips only
    std::string description;
};

struct GroundTruth {
    std::string video_id;
    std::vector<uint8_t> frame_labels;
    std::vector<float> segment_scores;  // mean of member frame labels
    // localized interval per asset, aligned with the input asset list;
    // nullopt when the asset never cleared the similarity floor
    std::vector<std::optional<FrameInterval>> step_intervals;
    std::vector<int> unlocalized_steps;  // step ids that failed the floor
    bool empty_summary = false;          // nothing localized at all
};

struct LengthFlags {
    double coverage = 0.0;  // labeled fraction of all frames
    bool too_short = false;
    bool too_long = false;
};

// Best-matching frame by normalized similarity (earliest on ties), expanded
// to a window: images +-2.5 s around the match, clips clip_len_s from the
// match, both clamped to the video. Matches below the 0.5 floor are rejected.
std::optional<FrameInterval> localize_asset(const StepAsset& asset, const Matrix& frame_features,
                                            double fps);

GroundTruth build_ground_truth(const EmbeddedVideo& video, const std::vector<StepAsset>& assets);

// Summary shorter than 30% of the video or longer than 90% is flagged for
// human review; nothing is auto-corrected.
LengthFlags verify_lengths(const GroundTruth& gt);

}  // namespace ivsum
