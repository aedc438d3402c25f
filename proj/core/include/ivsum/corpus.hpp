#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ivsum/matrix.hpp"

namespace ivsum {

using Vec = std::vector<float>;

// One fixed-length non-overlapping temporal unit of a video.
struct SegmentEmbedding {
    int index = 0;
    long start_frame = 0;
    long end_frame = 0;  // half-open [start_frame, end_frame)
    Vec vec;
};

// A timed ASR sentence embedded in the shared video-text space.
struct TranscriptSentence {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string text;
    Vec vec;
};

struct EmbeddedVideo {
    std::string video_id;
    std::string task_id;
    double fps = 8.0;
    long n_frames = 0;
    int segment_len = 32;
    std::vector<SegmentEmbedding> segments;
    std::optional<Matrix> frame_features;  // n_frames x D_f, localization / frame baseline only
    std::vector<TranscriptSentence> transcript;

    int n_segments() const { return static_cast<int>(segments.size()); }
    // Frames covered by full segments; the tail remainder is never summarized.
    long summarizable_frames() const {
        return static_cast<long>(segments.size()) * segment_len;
    }

    // Checks the segment partition, shared dimension and finiteness invariants.
    // `dim` is the corpus-global embedding dimension.
    void validate(int dim) const;
};

// The K videos of one task.
struct TaskGroup {
    std::string task_id;
    std::vector<EmbeddedVideo> videos;
};

}  // namespace ivsum
