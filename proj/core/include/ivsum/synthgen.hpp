#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ivsum/corpus.hpp"

namespace ivsum {

// Deterministic synthetic corpus with planted structure: each task owns a set
// of near-orthogonal shared step prototypes appearing in all of its videos;
// each video adds fresh distractor prototypes. Shared steps are mentioned in
// the transcript with probability mention_prob.
struct SynthConfig {
    int n_tasks = 1;
    int videos_per_task = 4;
    int segments_per_video = 16;
    int dim = 64;
    int shared_steps_per_task = 4;
    int distractors_per_video = 2;
    double mention_prob = 1.0;
    double noise_sigma = 0.0;
    uint64_t seed = 0;
    // plumbing knobs
    int segment_len = 32;
    double fps = 8.0;
    bool with_frame_features = false;
    double frame_noise_sigma = -1.0;  // < 0: reuse noise_sigma
    // preferred minimum run length; clamped down automatically when the step
    // count leaves no room, so singleton runs still occur in tight configs
    int min_run_segments = 2;

    void validate() const;
};

struct PlantedStep {
    int step_id = 0;         // position of the run within the video
    int first_segment = 0;
    int n_segments = 0;
    bool shared = false;     // prototype shared across the task's videos
    bool mentioned = false;  // has a transcript sentence
    int prototype = 0;       // shared: index within task; distractor: shared_count + local index
};

struct PlantedVideo {
    std::string video_id;
    std::string task_id;
    std::vector<PlantedStep> steps;  // runs in temporal order, partition the segments
};

struct PlantedTruth {
    std::vector<PlantedVideo> videos;
    const PlantedVideo& find(const std::string& video_id) const;
};

struct SynthCorpus {
    std::vector<TaskGroup> tasks;
    PlantedTruth truth;
};

// Bit-reproducible for a fixed config. Video contents depend only on
// (seed, task index, video index), so growing videos_per_task leaves the
// earlier videos of every task unchanged.
SynthCorpus generate(const SynthConfig& config);

// truth.json sidecar describing the planted runs.
void write_truth_json(const std::filesystem::path& path, const PlantedTruth& truth);

}  // namespace ivsum
