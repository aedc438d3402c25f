#include "ivsum/score_track.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ivsum/common.hpp"

namespace ivsum {

using nlohmann::json;

void ScoreTrack::validate_basic() const {
    if (n_frames <= 0) throw ValidationError(strcat("track ", video_id, ": n_frames must be positive"));
    if (segment_len <= 0)
        throw ValidationError(strcat("track ", video_id, ": segment_len must be positive"));
    const long n_segments = n_frames / segment_len;
    if (static_cast<long>(segment_scores.size()) != n_segments)
        throw ValidationError(strcat("track ", video_id, ": ", segment_scores.size(),
                                     " segment scores for ", n_segments, " segments"));
    if (static_cast<long>(frame_labels.size()) != n_frames)
        throw ValidationError(strcat("track ", video_id, ": frame_labels length ",
                                     frame_labels.size(), " != n_frames ", n_frames));
    for (float s : segment_scores)
        if (!(s >= 0.0f && s <= 1.0f))
            throw ValidationError(strcat("track ", video_id, ": segment score ", s, " outside [0,1]"));
    for (uint8_t l : frame_labels)
        if (l != 0 && l != 1)
            throw ValidationError(strcat("track ", video_id, ": frame label must be 0 or 1"));
}

void ScoreTrack::validate_segment_aligned() const {
    validate_basic();
    const long n_segments = n_frames / segment_len;
    for (long s = 0; s < n_segments; ++s) {
        const uint8_t first = frame_labels[s * segment_len];
        for (int k = 1; k < segment_len; ++k)
            if (frame_labels[s * segment_len + k] != first)
                throw ValidationError(strcat("track ", video_id, ": labels differ within segment ", s));
    }
    for (long f = n_segments * segment_len; f < n_frames; ++f)
        if (frame_labels[f] != 0)
            throw ValidationError(strcat("track ", video_id, ": nonzero label on tail frame ", f));
}

void write_score_track(const ScoreTrack& track, const std::filesystem::path& path) {
    track.validate_basic();

    json rle = json::array();
    std::size_t i = 0;
    while (i < track.frame_labels.size()) {
        std::size_t j = i;
        while (j < track.frame_labels.size() && track.frame_labels[j] == track.frame_labels[i]) ++j;
        rle.push_back(json::array({int(track.frame_labels[i]), j - i}));
        i = j;
    }

    json scores = json::array();
    for (float s : track.segment_scores) scores.push_back(static_cast<double>(s));

    json doc = {{"video_id", track.video_id},
                {"n_frames", track.n_frames},
                {"segment_len", track.segment_len},
                {"segment_scores", scores},
                {"frame_labels", rle}};

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeError(strcat("cannot open track file for writing: ", path.string()));
    out << doc.dump(2) << '\n';
    if (!out) throw RuntimeError(strcat("write failed: ", path.string()));
}

ScoreTrack read_score_track(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(strcat("cannot open track file: ", path.string()));
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError(strcat("bad track file ", path.string(), ": ", e.what()));
    }

    ScoreTrack t;
    try {
        t.video_id = doc.at("video_id").get<std::string>();
        t.n_frames = doc.at("n_frames").get<long>();
        t.segment_len = doc.at("segment_len").get<int>();
        for (const auto& s : doc.at("segment_scores"))
            t.segment_scores.push_back(static_cast<float>(s.get<double>()));
        for (const auto& run : doc.at("frame_labels")) {
            const int value = run.at(0).get<int>();
            const long count = run.at(1).get<long>();
            if (count < 0) throw ValidationError(strcat("negative run length in ", path.string()));
            t.frame_labels.insert(t.frame_labels.end(), count, static_cast<uint8_t>(value));
        }
    } catch (const json::exception& e) {
        throw ValidationError(strcat("bad track file ", path.string(), ": ", e.what()));
    }
    t.validate_basic();
    return t;
}

}  // namespace ivsum
