#include "ivsum/corpus.hpp"

#include <cmath>

#include "ivsum/common.hpp"

namespace ivsum {

namespace {

bool all_finite(const Vec& v) {
    for (float x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

void EmbeddedVideo::validate(int dim) const {
    if (fps <= 0.0)
        throw ValidationError(strcat("video ", video_id, ": fps must be positive, got ", fps));
    if (n_frames <= 0)
        throw ValidationError(strcat("video ", video_id, ": n_frames must be positive"));
    if (segment_len <= 0)
        throw ValidationError(strcat("video ", video_id, ": segment_len must be positive"));

    const long expected = n_frames / segment_len;
    if (expected < 1)
        throw ValidationError(strcat("video ", video_id, ": fewer frames (", n_frames,
                                     ") than one segment (", segment_len, ")"));
    if (static_cast<long>(segments.size()) != expected)
        throw ValidationError(strcat("video ", video_id, ": expected ", expected, " segments, got ",
                                     segments.size()));

    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (s.index != static_cast<int>(i))
            throw ValidationError(strcat("video ", video_id, ": segment index ", s.index,
                                         " out of order at position ", i));
        if (s.start_frame != static_cast<long>(i) * segment_len ||
            s.end_frame - s.start_frame != segment_len)
            throw ValidationError(strcat("video ", video_id, ": segment ", i,
                                         " does not cover [", i * segment_len, ",",
                                         (i + 1) * segment_len, ")"));
        if (static_cast<int>(s.vec.size()) != dim)
            throw ValidationError(strcat("video ", video_id, ": segment ", i, " has dimension ",
                                         s.vec.size(), ", corpus dimension is ", dim));
        if (!all_finite(s.vec))
            throw ValidationError(strcat("video ", video_id, ": non-finite value in segment ", i));
    }

    for (std::size_t i = 0; i < transcript.size(); ++i) {
        const auto& t = transcript[i];
        if (t.start_s < 0.0 || t.end_s < t.start_s)
            throw ValidationError(strcat("video ", video_id, ": sentence ", i,
                                         " has invalid time span [", t.start_s, ",", t.end_s, "]"));
        if (static_cast<int>(t.vec.size()) != dim)
            throw ValidationError(strcat("video ", video_id, ": sentence ", i, " has dimension ",
                                         t.vec.size(), ", corpus dimension is ", dim));
        if (!all_finite(t.vec))
            throw ValidationError(strcat("video ", video_id, ": non-finite value in sentence ", i));
    }

    if (frame_features) {
        if (static_cast<long>(frame_features->rows) != n_frames)
            throw ValidationError(strcat("video ", video_id, ": frame features have ",
                                         frame_features->rows, " rows, expected ", n_frames));
        for (float x : frame_features->data)
            if (!std::isfinite(x))
                throw ValidationError(strcat("video ", video_id, ": non-finite frame feature"));
    }
}

}  // namespace ivsum
