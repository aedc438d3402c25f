#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivsum/score_track.hpp"

namespace ivsum {

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

// Frame-level overlap metrics; empty denominators score 0.
PRF prf(const std::vector<uint8_t>& pred_labels, const std::vector<uint8_t>& gt_labels);

struct RankCorr {
    double value = 0.0;
    bool degenerate = false;  // a constant score list makes the metric undefined
};

// Tie-corrected Kendall tau-b via sort + inversion counting.
RankCorr kendall_tau(const std::vector<double>& pred_scores, const std::vector<double>& gt_scores);

// Pearson correlation of fractional (tie-averaged) ranks.
RankCorr spearman_rho(const std::vector<double>& pred_scores, const std::vector<double>& gt_scores);

struct FrameInterval {
    long start = 0;
    long end = 0;  // half-open
};

enum class StepRecallMode {
    count,     // fraction of gt steps touched by >= 1 predicted frame
    duration,  // predicted-frame overlap over total gt step duration
};

double step_recall(const std::vector<uint8_t>& pred_labels,
                   const std::vector<FrameInterval>& gt_steps,
                   StepRecallMode mode = StepRecallMode::count);

struct VideoEval {
    std::string video_id;
    PRF frames;
    double tau = 0.0;
    double rho = 0.0;
    bool tau_degenerate = false;
    bool rho_degenerate = false;
    std::optional<double> step_recall;
};

struct EvalReport {
    std::vector<VideoEval> videos;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f_score = 0.0;
    double mean_tau = 0.0;
    double mean_rho = 0.0;
    std::optional<double> mean_step_recall;  // over videos with intervals
    int degenerate_count = 0;                // videos with a degenerate tau or rho
};

// Per-video metrics then unweighted means. Track sets must hold the same
// video ids; a mismatch reports the symmetric difference.
EvalReport evaluate_corpus(
    const std::vector<ScoreTrack>& pred, const std::vector<ScoreTrack>& gt,
    const std::map<std::string, std::vector<FrameInterval>>* gt_step_intervals = nullptr,
    StepRecallMode recall_mode = StepRecallMode::count);

// Aligned plain-text table, one row per video plus the corpus means.
std::string format_table(const EvalReport& report);

}  // namespace ivsum
