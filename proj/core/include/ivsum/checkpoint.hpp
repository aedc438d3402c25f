#pragma once

#include <filesystem>

#include "ivsum/scorer.hpp"

namespace ivsum {

// Parameter checkpoint: magic "IVSP", u32 LE version=1, u32 header length,
// JSON header (the ScorerConfig), then per tensor: u32 name length, name
// bytes, u32 rank, u32 dims..., binary32 LE data.
inline constexpr char kCheckpointMagic[4] = {'I', 'V', 'S', 'P'};
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ScorerParams& params);
ScorerParams load_checkpoint(const std::filesystem::path& path);

}  // namespace ivsum
