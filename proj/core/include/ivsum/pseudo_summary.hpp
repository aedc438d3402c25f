#pragma once

#include <string>
#include <vector>

#include "ivsum/corpus.hpp"
#include "ivsum/score_track.hpp"
#include "ivsum/step_grouping.hpp"

namespace ivsum {

struct StepScores {
    double trs = 0.0;         // task relevance
    double cms = 0.0;         // cross-modal saliency
    double importance = 0.0;  // (trs + cms) / 2
};

struct SelectionConfig {
    double t_percent = 55.0;  // summary budget as % of summarizable duration

    void validate() const;
};

struct PseudoConfig {
    SelectionConfig selection;
    MergeMode merge_mode = MergeMode::running_mean;
};

// Per-video result of the pseudo-summary pipeline.
struct VideoPseudoSummary {
    std::string video_id;
    std::vector<Step> steps;
    std::vector<StepScores> scores;   // aligned with steps
    std::vector<uint8_t> selected;    // aligned with steps
    bool no_transcript = false;       // cms degraded to 0
    ScoreTrack track;
};

// trs over all steps of all K videos of one task: for each step, the mean dot
// product of its unit vector with every step vector in the task (self term
// included). Input and output are aligned per video.
std::vector<std::vector<double>> task_relevance(const std::vector<std::vector<Step>>& steps_by_video);

// Mean similarity of each step to all transcript sentences of its video.
// Empty transcript yields all zeros; the caller flags the video.
std::vector<double> cross_modal(const std::vector<Step>& steps,
                                const std::vector<TranscriptSentence>& sentences);

// Greedy whole-step selection by descending importance (ties broken by
// earlier start) until the selected frame count first reaches
// t% of the summarizable frames. At least one step is always selected.
// Track scores are the per-segment importances min-max rescaled to [0,1].
ScoreTrack select_top_t(const EmbeddedVideo& video, const std::vector<Step>& steps,
                        const std::vector<double>& step_importance, const SelectionConfig& config,
                        std::vector<uint8_t>* selected_out = nullptr);

// Full pipeline for one task: group steps, score, select.
std::vector<VideoPseudoSummary> pseudo_summaries(const TaskGroup& task, const PseudoConfig& config);

}  // namespace ivsum
