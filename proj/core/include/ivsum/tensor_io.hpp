#pragma once

#include <filesystem>

#include "ivsum/matrix.hpp"

namespace ivsum {

// ".emb" tensor container: magic "IVSM", u32 LE version=1, u32 rows, u32 cols,
// then rows*cols IEEE-754 binary32 LE values, row-major.
inline constexpr char kEmbMagic[4] = {'I', 'V', 'S', 'M'};
inline constexpr uint32_t kEmbVersion = 1;

Matrix read_emb(const std::filesystem::path& path);
void write_emb(const std::filesystem::path& path, const Matrix& m);

}  // namespace ivsum
