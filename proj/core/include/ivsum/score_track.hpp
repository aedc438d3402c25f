#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ivsum {

// The canonical summary representation: per-segment scores in [0,1] plus
// per-frame binary labels. Summarizer outputs keep labels constant within a
// segment and zero past the last full segment; ground-truth tracks built from
// localized intervals need not be segment-aligned.
struct ScoreTrack {
    std::string video_id;
    long n_frames = 0;
    int segment_len = 32;
    std::vector<float> segment_scores;
    std::vector<uint8_t> frame_labels;

    // Length/range invariants shared by every track.
    void validate_basic() const;
    // Additionally: labels constant per segment, zero on the tail remainder.
    void validate_segment_aligned() const;

    bool operator==(const ScoreTrack&) const = default;
};

// JSON file {video_id, n_frames, segment_len, segment_scores:[...],
// frame_labels:[[value,count],...]} with run-length-encoded labels.
// Round trip is bit-exact on the float32 scores.
void write_score_track(const ScoreTrack& track, const std::filesystem::path& path);
ScoreTrack read_score_track(const std::filesystem::path& path);

}  // namespace ivsum
