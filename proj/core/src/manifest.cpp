#include "ivsum/manifest.hpp"

#include <fstream>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ivsum/common.hpp"
#include "ivsum/tensor_io.hpp"

namespace ivsum {

using nlohmann::json;

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(strcat("cannot open manifest: ", path.string()));
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError(strcat("bad manifest ", path.string(), ": ", e.what()));
    }

    Manifest m;
    try {
        m.version = doc.at("version").get<int>();
        if (m.version != 1)
            throw ValidationError(strcat("unsupported manifest version ", m.version, ": ", path.string()));
        m.dim = doc.at("dim").get<int>();
        m.normalized = doc.value("normalized", false);
        if (doc.contains("frame_dim")) m.frame_dim = doc.at("frame_dim").get<int>();
        for (const auto& v : doc.at("videos")) {
            ManifestVideo mv;
            mv.video_id = v.at("video_id").get<std::string>();
            mv.task_id = v.at("task_id").get<std::string>();
            mv.fps = v.at("fps").get<double>();
            mv.n_frames = v.at("n_frames").get<long>();
            mv.segment_len = v.at("segment_len").get<int>();
            mv.segments_file = v.at("segments_file").get<std::string>();
            if (v.contains("frames_file")) mv.frames_file = v.at("frames_file").get<std::string>();
            if (v.contains("transcript_file"))
                mv.transcript_file = v.at("transcript_file").get<std::string>();
            m.videos.push_back(std::move(mv));
        }
    } catch (const json::exception& e) {
        throw ValidationError(strcat("bad manifest ", path.string(), ": ", e.what()));
    }
    if (m.dim < 1) throw ValidationError(strcat("manifest dim must be positive: ", path.string()));
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    json videos = json::array();
    for (const auto& v : m.videos) {
        json jv = {{"video_id", v.video_id},   {"task_id", v.task_id},
                   {"fps", v.fps},             {"n_frames", v.n_frames},
                   {"segment_len", v.segment_len}, {"segments_file", v.segments_file}};
        if (v.frames_file) jv["frames_file"] = *v.frames_file;
        if (v.transcript_file) jv["transcript_file"] = *v.transcript_file;
        videos.push_back(std::move(jv));
    }
    json doc = {{"version", m.version},
                {"dim", m.dim},
                {"normalized", m.normalized},
                {"videos", videos}};
    if (m.frame_dim) doc["frame_dim"] = *m.frame_dim;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeError(strcat("cannot open manifest for writing: ", path.string()));
    out << doc.dump(2) << '\n';
    if (!out) throw RuntimeError(strcat("write failed: ", path.string()));
}

std::filesystem::path transcript_emb_path(const std::filesystem::path& transcript_file) {
    std::filesystem::path p = transcript_file;
    p.replace_extension(".emb");
    return p;
}

namespace {

std::vector<TranscriptSentence> read_transcript(const std::filesystem::path& jsonl_path,
                                                const std::string& video_id) {
    std::ifstream in(jsonl_path);
    if (!in)
        throw ValidationError(strcat("video ", video_id, ": cannot open transcript: ", jsonl_path.string()));
    const Matrix vecs = read_emb(transcript_emb_path(jsonl_path));

    std::vector<TranscriptSentence> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(strcat("video ", video_id, ": bad transcript line ", lineno, ": ", e.what()));
        }
        TranscriptSentence s;
        s.start_s = obj.at("start_s").get<double>();
        s.end_s = obj.at("end_s").get<double>();
        s.text = obj.value("text", "");
        const long row = obj.at("vec_row").get<long>();
        if (row < 0 || row >= static_cast<long>(vecs.rows))
            throw ValidationError(strcat("video ", video_id, ": transcript vec_row ", row,
                                         " outside [0,", vecs.rows, ")"));
        s.vec.assign(vecs.row(row), vecs.row(row) + vecs.cols);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

std::vector<TaskGroup> read_corpus(const std::filesystem::path& manifest_path) {
    const Manifest m = read_manifest(manifest_path);
    const std::filesystem::path base = manifest_path.parent_path();
    auto resolve = [&base](const std::string& rel) {
        std::filesystem::path p(rel);
        return p.is_absolute() ? p : base / p;
    };

    std::set<std::string> seen_ids;
    std::vector<TaskGroup> groups;
    std::unordered_map<std::string, std::size_t> group_index;
    std::optional<int> frame_dim = m.frame_dim;

    for (const auto& mv : m.videos) {
        if (!seen_ids.insert(mv.video_id).second)
            throw ValidationError(strcat("duplicate video_id in manifest: ", mv.video_id));

        EmbeddedVideo v;
        v.video_id = mv.video_id;
        v.task_id = mv.task_id;
        v.fps = mv.fps;
        v.n_frames = mv.n_frames;
        v.segment_len = mv.segment_len;

        const Matrix seg = read_emb(resolve(mv.segments_file));
        if (static_cast<int>(seg.cols) != m.dim)
            throw ValidationError(strcat("video ", mv.video_id, ": segment dimension ", seg.cols,
                                         " != corpus dimension ", m.dim));
        v.segments.reserve(seg.rows);
        for (std::size_t i = 0; i < seg.rows; ++i) {
            SegmentEmbedding se;
            se.index = static_cast<int>(i);
            se.start_frame = static_cast<long>(i) * mv.segment_len;
            se.end_frame = se.start_frame + mv.segment_len;
            se.vec.assign(seg.row(i), seg.row(i) + seg.cols);
            v.segments.push_back(std::move(se));
        }

        if (mv.frames_file) {
            Matrix fm = read_emb(resolve(*mv.frames_file));
            if (frame_dim && static_cast<int>(fm.cols) != *frame_dim)
                throw ValidationError(strcat("video ", mv.video_id, ": frame feature dimension ",
                                             fm.cols, " != corpus frame dimension ", *frame_dim));
            if (!frame_dim) frame_dim = static_cast<int>(fm.cols);
            v.frame_features = std::move(fm);
        }

        if (mv.transcript_file) v.transcript = read_transcript(resolve(*mv.transcript_file), mv.video_id);

        v.validate(m.dim);

        auto it = group_index.find(v.task_id);
        if (it == group_index.end()) {
            group_index.emplace(v.task_id, groups.size());
            groups.push_back(TaskGroup{v.task_id, {}});
            it = group_index.find(v.task_id);
        }
        groups[it->second].videos.push_back(std::move(v));
    }

    if (groups.empty()) throw ValidationError(strcat("manifest has no videos: ", manifest_path.string()));
    return groups;
}

std::filesystem::path write_corpus(const std::filesystem::path& dir,
                                   const std::vector<TaskGroup>& tasks, int dim, bool normalized) {
    std::filesystem::create_directories(dir);
    Manifest m;
    m.dim = dim;
    m.normalized = normalized;

    for (const auto& task : tasks) {
        for (const auto& video : task.videos) {
            video.validate(dim);
            ManifestVideo mv;
            mv.video_id = video.video_id;
            mv.task_id = video.task_id;
            mv.fps = video.fps;
            mv.n_frames = video.n_frames;
            mv.segment_len = video.segment_len;

            Matrix seg(video.segments.size(), dim);
            for (std::size_t i = 0; i < video.segments.size(); ++i)
                std::copy(video.segments[i].vec.begin(), video.segments[i].vec.end(), seg.row(i));
            mv.segments_file = video.video_id + ".segments.emb";
            write_emb(dir / mv.segments_file, seg);

            if (video.frame_features) {
                mv.frames_file = video.video_id + ".frames.emb";
                write_emb(dir / *mv.frames_file, *video.frame_features);
                if (!m.frame_dim) m.frame_dim = static_cast<int>(video.frame_features->cols);
            }

            if (!video.transcript.empty()) {
                mv.transcript_file = video.video_id + ".transcript.jsonl";
                Matrix vecs(video.transcript.size(), dim);
                std::ofstream jsonl(dir / *mv.transcript_file, std::ios::trunc);
                if (!jsonl)
                    throw RuntimeError(strcat("cannot write transcript for ", video.video_id));
                for (std::size_t s = 0; s < video.transcript.size(); ++s) {
                    const auto& sent = video.transcript[s];
                    std::copy(sent.vec.begin(), sent.vec.end(), vecs.row(s));
                    json line = {{"start_s", sent.start_s},
                                 {"end_s", sent.end_s},
                                 {"text", sent.text},
                                 {"vec_row", s}};
                    jsonl << line.dump() << '\n';
                }
                write_emb(transcript_emb_path(dir / *mv.transcript_file), vecs);
            }
            m.videos.push_back(std::move(mv));
        }
    }
    const std::filesystem::path manifest_path = dir / "manifest.json";
    write_manifest(manifest_path, m);
    return manifest_path;
}

}  // namespace ivsum
