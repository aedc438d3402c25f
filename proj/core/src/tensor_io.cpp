#include "ivsum/tensor_io.hpp"

#include <cstring>
#include <fstream>

#include "ivsum/common.hpp"

namespace ivsum {

namespace {

uint32_t read_u32_le(std::istream& in, const std::filesystem::path& path, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw ValidationError(strcat("truncated tensor file (", what, "): ", path.string()));
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

void write_u32_le(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

static_assert(sizeof(float) == 4, "binary32 storage assumes 4-byte float");

}  // namespace

Matrix read_emb(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(strcat("cannot open tensor file: ", path.string()));

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kEmbMagic, 4) != 0)
        throw ValidationError(strcat("bad magic in tensor file: ", path.string()));
    const uint32_t version = read_u32_le(in, path, "version");
    if (version != kEmbVersion)
        throw ValidationError(strcat("unsupported tensor file version ", version, ": ", path.string()));

    const uint32_t rows = read_u32_le(in, path, "rows");
    const uint32_t cols = read_u32_le(in, path, "cols");

    Matrix m(rows, cols);
    const std::size_t bytes = std::size_t(rows) * cols * 4;
    if (!in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(bytes)))
        throw ValidationError(strcat("truncated tensor file: ", path.string(), " (expected ", bytes,
                                     " data bytes, got ", in.gcount(), ")"));
    // Little-endian host assumed for the payload memcpy; true on every target we build for.
    return m;
}

void write_emb(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError(strcat("cannot open tensor file for writing: ", path.string()));
    out.write(kEmbMagic, 4);
    write_u32_le(out, kEmbVersion);
    write_u32_le(out, static_cast<uint32_t>(m.rows));
    write_u32_le(out, static_cast<uint32_t>(m.cols));
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * 4));
    if (!out) throw RuntimeError(strcat("write failed: ", path.string()));
}

}  // namespace ivsum
