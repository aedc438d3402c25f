#pragma once

#include <string>
#include <vector>

#include "ivsum/corpus.hpp"
#include "ivsum/pseudo_summary.hpp"
#include "ivsum/score_track.hpp"
#include "ivsum/step_grouping.hpp"

namespace ivsum {

// The three unsupervised cross-modal baselines. All share the top-t%
// selection convention with the pseudo-summary pipeline.
struct BaselineResult {
    ScoreTrack track;
    bool no_transcript = false;
};

// Per-frame similarity to the transcript, top-t% frames thresholded, then a
// segment is chosen iff at least half of its frames were chosen.
// Requires frame features in the same space as the sentence vectors.
BaselineResult frame_cross_modal(const EmbeddedVideo& video, double t_percent);

// Per-segment mean similarity over sentences; top-t% segments
// (k = max(1, floor(t/100 * n))) labeled 1, ties broken by earlier index.
BaselineResult segment_cross_modal(const EmbeddedVideo& video, double t_percent);

// Steps grouped as in the pseudo pipeline, scored by cross-modal similarity
// alone, selected with the greedy whole-step duration rule.
BaselineResult step_cross_modal(const EmbeddedVideo& video, double t_percent,
                                MergeMode merge_mode = MergeMode::running_mean);

}  // namespace ivsum
