#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ivsum/corpus.hpp"

namespace ivsum {

struct ManifestVideo {
    std::string video_id;
    std::string task_id;
    double fps = 8.0;
    long n_frames = 0;
    int segment_len = 32;
    std::string segments_file;
    std::optional<std::string> frames_file;
    std::optional<std::string> transcript_file;
};

// UTF-8 JSON corpus manifest. Relative file paths resolve against the
// manifest's directory. The transcript sidecar ".emb" holding sentence vectors
// lives next to the transcript file (extension replaced by ".emb").
struct Manifest {
    int version = 1;
    int dim = 512;
    bool normalized = false;  // upstream extractor promise only; consumers renormalize anyway
    std::optional<int> frame_dim;
    std::vector<ManifestVideo> videos;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

std::filesystem::path transcript_emb_path(const std::filesystem::path& transcript_file);

// Loads and validates the whole corpus, grouping videos by task_id
// (groups ordered by first appearance, videos in manifest order).
std::vector<TaskGroup> read_corpus(const std::filesystem::path& manifest_path);

// Writes manifest.json plus per-video tensor/transcript files under dir;
// returns the manifest path.
std::filesystem::path write_corpus(const std::filesystem::path& dir,
                                   const std::vector<TaskGroup>& tasks, int dim,
                                   bool normalized = false);

}  // namespace ivsum
