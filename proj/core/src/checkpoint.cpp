#include "ivsum/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "ivsum/common.hpp"

namespace ivsum {

using nlohmann::json;

namespace {

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in, const std::filesystem::path& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw ValidationError(strcat("truncated checkpoint: ", path.string()));
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

json config_to_json(const ScorerConfig& c) {
    return json{{"embed_dim", c.embed_dim},
                {"d_model", c.d_model},
                {"n_layers", c.n_layers},
                {"n_heads", c.n_heads},
                {"dropout", c.dropout},
                {"max_segments", c.max_segments},
                {"text_window_s", c.text_window_s},
                {"text_mode", c.text_mode == TextMode::windowed ? "windowed" : "global"},
                {"seed", c.seed}};
}

ScorerConfig config_from_json(const json& j) {
    ScorerConfig c;
    c.embed_dim = j.at("embed_dim").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.n_layers = j.at("n_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.max_segments = j.at("max_segments").get<int>();
    c.text_window_s = j.at("text_window_s").get<double>();
    c.text_mode = parse_text_mode(j.at("text_mode").get<std::string>());
    c.seed = j.at("seed").get<uint64_t>();
    return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ScorerParams& params) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError(strcat("cannot open checkpoint for writing: ", path.string()));

    out.write(kCheckpointMagic, 4);
    write_u32(out, kCheckpointVersion);
    const std::string header = config_to_json(params.config).dump();
    write_u32(out, static_cast<uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    params.for_each([&](const std::string& name, const Tensor& t) {
        write_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<uint32_t>(t.shape.size()));
        for (std::size_t d : t.shape) write_u32(out, static_cast<uint32_t>(d));
        std::vector<float> buf(t.v.size());
        for (std::size_t i = 0; i < t.v.size(); ++i) buf[i] = static_cast<float>(t.v[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * 4));
    });
    if (!out) throw RuntimeError(strcat("write failed: ", path.string()));
}

ScorerParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(strcat("cannot open checkpoint: ", path.string()));

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw ValidationError(strcat("bad magic in checkpoint: ", path.string()));
    const uint32_t version = read_u32(in, path);
    if (version != kCheckpointVersion)
        throw ValidationError(strcat("unsupported checkpoint version ", version, ": ", path.string()));

    const uint32_t header_len = read_u32(in, path);
    std::string header(header_len, '\0');
    if (!in.read(header.data(), header_len))
        throw ValidationError(strcat("truncated checkpoint header: ", path.string()));
    ScorerConfig config;
    try {
        config = config_from_json(json::parse(header));
    } catch (const json::exception& e) {
        throw ValidationError(strcat("bad checkpoint header ", path.string(), ": ", e.what()));
    }

    ScorerParams params = init_params(config);
    std::map<std::string, Tensor*> by_name;
    params.for_each([&](const std::string& name, Tensor& t) { by_name[name] = &t; });

    std::size_t loaded = 0;
    while (loaded < by_name.size()) {
        const uint32_t name_len = read_u32(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len))
            throw ValidationError(strcat("truncated checkpoint: ", path.string()));
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw ValidationError(strcat("unknown tensor '", name, "' in checkpoint ", path.string()));
        Tensor& t = *it->second;
        const uint32_t rank = read_u32(in, path);
        if (rank != t.shape.size())
            throw ValidationError(strcat("tensor '", name, "' rank mismatch in ", path.string()));
        std::size_t total = 1;
        for (uint32_t r = 0; r < rank; ++r) {
            const uint32_t dim = read_u32(in, path);
            if (dim != t.shape[r])
                throw ValidationError(strcat("tensor '", name, "' shape mismatch in ", path.string()));
            total *= dim;
        }
        std::vector<float> buf(total);
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(total * 4)))
            throw ValidationError(strcat("truncated tensor '", name, "' in ", path.string()));
        for (std::size_t i = 0; i < total; ++i) t.v[i] = double(buf[i]);
        ++loaded;
    }
    return params;
}

}  // namespace ivsum
