#include <doctest.h>

#include "ivsum/baselines.hpp"
#include "ivsum/common.hpp"
#include "ivsum/synthgen.hpp"
#include "test_util.hpp"

using namespace ivsum;
using namespace ivsum::test;

namespace {

EmbeddedVideo with_frames_from_segments(EmbeddedVideo v) {
    Matrix f(v.n_frames, v.segments.front().vec.size());
    for (const auto& seg : v.segments)
        for (long fr = seg.start_frame; fr < seg.end_frame; ++fr)
            std::copy(seg.vec.begin(), seg.vec.end(), f.row(fr));
    v.frame_features = std::move(f);
    return v;
}

}  // namespace

TEST_CASE("frame baseline hand cases") {
    SUBCASE("all frames equal to the single sentence: earliest segments win by tie-break") {
        auto video = with_frames_from_segments(
            make_video({axis(0, 4), axis(0, 4), axis(0, 4), axis(0, 4)}));
        video.transcript = {make_sentence(0.0, 1.0, axis(0, 4))};
        const auto result = frame_cross_modal(video, 50.0);
        CHECK_FALSE(result.no_transcript);
        // 8 of 16 frames chosen -> segments 0 and 1 fully chosen
        CHECK(result.track.frame_labels ==
              std::vector<uint8_t>{1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
    }
    SUBCASE("empty transcript: all scores zero, earliest segments") {
        auto video =
            with_frames_from_segments(make_video({axis(0, 4), axis(1, 4), axis(2, 4), axis(3, 4)}));
        const auto result = frame_cross_modal(video, 50.0);
        CHECK(result.no_transcript);
        CHECK(result.track.frame_labels ==
              std::vector<uint8_t>{1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
    }
    SUBCASE("high-scoring segment is selected") {
        // segment 0 frames match the sentence, segment 1 frames are orthogonal
        auto video = with_frames_from_segments(make_video({axis(0, 4), axis(1, 4)}));
        video.transcript = {make_sentence(0.0, 1.0, axis(0, 4))};
        const auto result = frame_cross_modal(video, 50.0);
        CHECK(result.track.frame_labels == std::vector<uint8_t>{1, 1, 1, 1, 0, 0, 0, 0});
    }
    SUBCASE("missing frame features is an error") {
        auto video = make_video({axis(0, 4)});
        CHECK_THROWS_AS(frame_cross_modal(video, 50.0), ValidationError);
    }
}

TEST_CASE("segment baseline hand cases") {
    SUBCASE("segment equal to all sentences scores 1 before rescale") {
        auto video = make_video({axis(0, 4), axis(1, 4)});
        video.transcript = {make_sentence(0, 1, axis(0, 4)), make_sentence(1, 2, axis(0, 4))};
        const auto result = segment_cross_modal(video, 50.0);
        CHECK(result.track.segment_scores[0] == 1.0f);  // min-max rescaled top
        CHECK(result.track.frame_labels == std::vector<uint8_t>{1, 1, 1, 1, 0, 0, 0, 0});
    }
    SUBCASE("scores {0.9, 0.5, 0.1, 0.3} with t=50 select segments {0,1}") {
        // cosines against axis0: 0.9, 0.5, 0.1, 0.3
        auto cos_vec = [](double c) {
            Vec v(4, 0.0f);
            v[0] = float(c);
            v[1] = float(std::sqrt(1.0 - c * c));
            return v;
        };
        auto video = make_video({cos_vec(0.9), cos_vec(0.5), cos_vec(0.1), cos_vec(0.3)});
        video.transcript = {make_sentence(0, 1, axis(0, 4))};
        const auto result = segment_cross_modal(video, 50.0);
        CHECK(result.track.frame_labels ==
              std::vector<uint8_t>{1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
    }
    SUBCASE("matches a scalar double-loop oracle") {
        std::mt19937_64 rng(55);
        for (int it = 0; it < 10; ++it) {
            std::vector<Vec> vecs;
            for (int i = 0; i < 6; ++i) vecs.push_back(random_unit(rng, 12));
            auto video = make_video(vecs);
            for (int s = 0; s < 3; ++s)
                video.transcript.push_back(make_sentence(s, s + 1, random_unit(rng, 12)));
            const auto result = segment_cross_modal(video, 50.0);
            // oracle: mean cosine per segment, then min-max
            std::vector<double> oracle(6, 0.0);
            for (int i = 0; i < 6; ++i) {
                for (const auto& sent : video.transcript) {
                    double num = 0, na = 0, nb = 0;
                    for (int k = 0; k < 12; ++k) {
                        num += double(vecs[i][k]) * double(sent.vec[k]);
                        na += double(vecs[i][k]) * double(vecs[i][k]);
                        nb += double(sent.vec[k]) * double(sent.vec[k]);
                    }
                    oracle[i] += num / std::sqrt(na * nb) / 3.0;
                }
            }
            const double lo = *std::min_element(oracle.begin(), oracle.end());
            const double hi = *std::max_element(oracle.begin(), oracle.end());
            for (int i = 0; i < 6; ++i)
                CHECK(result.track.segment_scores[i] ==
                      doctest::Approx((oracle[i] - lo) / (hi - lo)).epsilon(1e-6));
        }
    }
}

TEST_CASE("step baseline hand cases") {
    SUBCASE("one step spanning the whole video selects everything") {
        auto video = make_video({axis(0, 4), axis(0, 4), axis(0, 4)});
        video.transcript = {make_sentence(0, 1, axis(1, 4))};
        const auto result = step_cross_modal(video, 55.0);
        CHECK(std::count(result.track.frame_labels.begin(), result.track.frame_labels.end(), 1) ==
              12);
    }
    SUBCASE("mentioned steps are selected first on a noise-free corpus") {
        SynthConfig c;
        c.n_tasks = 1;
        c.videos_per_task = 2;
        c.segments_per_video = 12;
        c.dim = 48;
        c.shared_steps_per_task = 2;
        c.distractors_per_video = 2;
        c.noise_sigma = 0.0;
        c.mention_prob = 1.0;  // exactly half the steps (the shared ones) are mentioned
        c.seed = 21;
        c.segment_len = 4;
        const auto corpus = generate(c);
        for (const auto& video : corpus.tasks[0].videos) {
            const auto result = step_cross_modal(video, 40.0);
            const auto& planted = corpus.truth.find(video.video_id).steps;
            // every selected frame must belong to a mentioned step before any
            // unmentioned step is touched
            double worst_selected = 2.0, best_unselected = -2.0;
            const auto steps = group_into_steps(video);
            const auto cms = cross_modal(steps, video.transcript);
            REQUIRE(steps.size() == planted.size());
            for (std::size_t s = 0; s < steps.size(); ++s) {
                const bool selected =
                    result.track.frame_labels[steps[s].segment_indices.front() * 4] != 0;
                if (selected)
                    worst_selected = std::min(worst_selected, cms[s]);
                else
                    best_unselected = std::max(best_unselected, cms[s]);
                if (planted[s].mentioned) CHECK(cms[s] > 0.5);
            }
            CHECK(worst_selected >= best_unselected);
        }
    }
}

TEST_CASE("step baseline equals the pseudo pipeline with importance := cms") {
    SynthConfig c;
    c.n_tasks = 1;
    c.videos_per_task = 3;
    c.segments_per_video = 10;
    c.dim = 24;
    c.shared_steps_per_task = 3;
    c.distractors_per_video = 1;
    c.noise_sigma = 0.08;
    c.mention_prob = 0.7;
    c.seed = 33;
    c.segment_len = 4;
    const auto corpus = generate(c);
    for (const auto& video : corpus.tasks[0].videos) {
        const auto baseline = step_cross_modal(video, 55.0);
        // independent route: group, score, select with the shared selector
        const auto steps = group_into_steps(video);
        const auto cms = cross_modal(steps, video.transcript);
        const auto expected = select_top_t(video, steps, cms, SelectionConfig{55.0});
        CHECK(baseline.track.frame_labels == expected.frame_labels);
        CHECK(baseline.track.segment_scores == expected.segment_scores);
    }
}

TEST_CASE("all baselines produce valid segment-aligned tracks") {
    SynthConfig c;
    c.n_tasks = 1;
    c.videos_per_task = 2;
    c.segments_per_video = 9;
    c.dim = 16;
    c.shared_steps_per_task = 2;
    c.distractors_per_video = 2;
    c.noise_sigma = 0.2;
    c.mention_prob = 0.8;
    c.seed = 70;
    c.segment_len = 4;
    c.with_frame_features = true;
    const auto corpus = generate(c);
    for (const auto& video : corpus.tasks[0].videos) {
        CHECK_NOTHROW(frame_cross_modal(video, 55.0).track.validate_segment_aligned());
        CHECK_NOTHROW(segment_cross_modal(video, 55.0).track.validate_segment_aligned());
        CHECK_NOTHROW(step_cross_modal(video, 55.0).track.validate_segment_aligned());
    }
}
