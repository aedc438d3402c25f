#pragma once

#include <string>
#include <vector>

#include "ivsum/corpus.hpp"

namespace ivsum {

// A maximal run of temporally adjacent segments merged by embedding
// similarity; approximates one procedural action.
struct Step {
    int step_id = 0;
    std::vector<int> segment_indices;  // contiguous, ascending
    std::vector<double> vec;           // renormalized mean of member unit vectors
    std::string video_id;
};

enum class MergeMode {
    running_mean,  // compare incoming segment to the renormalized running step mean
    prev_segment,  // compare to the immediately prior segment only
};

MergeMode parse_merge_mode(const std::string& name);

// Dot products of L2-normalized segment vectors; symmetric, unit diagonal.
// Throws if any segment has near-zero norm.
std::vector<std::vector<double>> pairwise_similarity(const EmbeddedVideo& video);

// 0.9 x the maximum off-diagonal similarity. A single segment cannot merge
// with anything, so n=1 yields +infinity.
double merge_threshold(const std::vector<std::vector<double>>& sim);

// Single left-to-right pass: a segment joins the open step iff its similarity
// to the reference (per MergeMode) is strictly greater than the threshold.
std::vector<Step> group_into_steps(const EmbeddedVideo& video,
                                   MergeMode mode = MergeMode::running_mean);

}  // namespace ivsum
