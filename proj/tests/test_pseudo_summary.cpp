#include <doctest.h>

#include <cmath>

#include "ivsum/common.hpp"
#include "ivsum/pseudo_summary.hpp"
#include "ivsum/synthgen.hpp"
#include "ivsum/vec_math.hpp"
#include "test_util.hpp"

using namespace ivsum;
using namespace ivsum::test;

namespace {

Step make_step(const Vec& v, int first_idx, int len, const std::string& vid = "v") {
    Step s;
    s.video_id = vid;
    s.vec = try_normalized(v);
    for (int i = 0; i < len; ++i) s.segment_indices.push_back(first_idx + i);
    return s;
}

// O(S^2) scalar double-loop oracle over raw step vectors
std::vector<double> trs_oracle(const std::vector<std::vector<Step>>& by_video) {
    std::vector<const Step*> all;
    for (const auto& v : by_video)
        for (const auto& s : v) all.push_back(&s);
    std::vector<double> out;
    for (const Step* a : all) {
        double sum = 0.0;
        for (const Step* b : all) {
            double d = 0.0;
            for (std::size_t k = 0; k < a->vec.size(); ++k) d += a->vec[k] * b->vec[k];
            sum += d;
        }
        out.push_back(sum / double(all.size()));
    }
    return out;
}

}  // namespace

TEST_CASE("task relevance: identical steps all score 1") {
    const Vec a = axis(0, 8);
    std::vector<std::vector<Step>> by_video{{make_step(a, 0, 1), make_step(a, 1, 1)},
                                            {make_step(a, 0, 2)}};
    const auto trs = task_relevance(by_video);
    for (const auto& video : trs)
        for (double x : video) CHECK(x == doctest::Approx(1.0));
}

TEST_CASE("task relevance: one orthogonal step among five keeps only its self term") {
    // |S| = 5: four identical steps plus one orthogonal one -> trs = 1/5 for the odd one
    std::vector<std::vector<Step>> by_video{
        {make_step(axis(0, 8), 0, 1), make_step(axis(0, 8), 1, 1)},
        {make_step(axis(0, 8), 0, 1), make_step(axis(0, 8), 1, 1), make_step(axis(1, 8), 2, 1)}};
    const auto trs = task_relevance(by_video);
    CHECK(trs[1][2] == doctest::Approx(0.2));
    // the identical steps see 4 ones and one zero
    CHECK(trs[0][0] == doctest::Approx(0.8));
}

TEST_CASE("task relevance matches the brute-force oracle on random instances") {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 20; ++it) {
        std::uniform_int_distribution<int> n_videos(1, 3), n_steps(1, 6);
        std::vector<std::vector<Step>> by_video(n_videos(rng));
        for (auto& v : by_video) {
            const int n = n_steps(rng);
            for (int s = 0; s < n; ++s) v.push_back(make_step(random_unit(rng, 12), s, 1));
        }
        const auto got = task_relevance(by_video);
        const auto expected = trs_oracle(by_video);
        std::size_t flat = 0;
        for (const auto& v : got)
            for (double x : v) CHECK(x == doctest::Approx(expected[flat++]).epsilon(1e-6));
    }
}

TEST_CASE("task relevance rejects an empty step set") {
    std::vector<std::vector<Step>> empty{{}, {}};
    CHECK_THROWS_AS(task_relevance(empty), ValidationError);
}

TEST_CASE("cross-modal scores") {
    const Vec a = axis(0, 8);
    SUBCASE("step equal to every sentence scores 1") {
        const auto cms = cross_modal({make_step(a, 0, 1)}, {make_sentence(0, 1, a)});
        CHECK(cms[0] == doctest::Approx(1.0));
    }
    SUBCASE("similarities 0.4 and 0.8 average to 0.6") {
        // sentences at angles giving cosines 0.4 and 0.8 against axis 0
        Vec s1(8, 0.0f), s2(8, 0.0f);
        s1[0] = 0.4f;
        s1[1] = float(std::sqrt(1.0 - 0.16));
        s2[0] = 0.8f;
        s2[1] = float(std::sqrt(1.0 - 0.64));
        const auto cms =
            cross_modal({make_step(a, 0, 1)}, {make_sentence(0, 1, s1), make_sentence(1, 2, s2)});
        CHECK(cms[0] == doctest::Approx(0.6).epsilon(1e-6));
    }
    SUBCASE("empty transcript yields zeros") {
        const auto cms = cross_modal({make_step(a, 0, 1), make_step(axis(1, 8), 1, 1)}, {});
        CHECK(cms == std::vector<double>{0.0, 0.0});
    }
}

TEST_CASE("cross-modal matches a scalar-loop oracle on random instances") {
    std::mt19937_64 rng(23);
    for (int it = 0; it < 20; ++it) {
        std::uniform_int_distribution<int> n_steps(1, 6), n_sents(1, 8);
        std::vector<Step> steps;
        std::vector<TranscriptSentence> sentences;
        const int ns = n_steps(rng), nt = n_sents(rng);
        for (int s = 0; s < ns; ++s) steps.push_back(make_step(random_unit(rng, 12), s, 1));
        for (int s = 0; s < nt; ++s) sentences.push_back(make_sentence(s, s + 1, random_unit(rng, 12)));
        const auto got = cross_modal(steps, sentences);
        for (int s = 0; s < ns; ++s) {
            double sum = 0.0;
            for (int j = 0; j < nt; ++j) {
                const auto u = try_normalized(sentences[j].vec);
                double d = 0.0;
                for (std::size_t k = 0; k < u.size(); ++k) d += steps[s].vec[k] * u[k];
                sum += d;
            }
            CHECK(got[s] == doctest::Approx(sum / nt).epsilon(1e-6));
        }
    }
}

TEST_CASE("importance is the average of trs and cms, propagated to segments") {
    // via the full per-task pipeline on a noise-free synthetic task
    SynthConfig c;
    c.n_tasks = 1;
    c.videos_per_task = 2;
    c.segments_per_video = 8;
    c.dim = 32;
    c.shared_steps_per_task = 2;
    c.distractors_per_video = 1;
    c.noise_sigma = 0.0;
    c.seed = 5;
    c.segment_len = 4;
    const auto corpus = generate(c);
    const auto results = pseudo_summaries(corpus.tasks[0], PseudoConfig{});
    for (const auto& r : results) {
        for (std::size_t s = 0; s < r.steps.size(); ++s) {
            CHECK(r.scores[s].importance ==
                  doctest::Approx((r.scores[s].trs + r.scores[s].cms) / 2.0).epsilon(1e-9));
            CHECK(r.scores[s].trs >= -1.0 - 1e-9);
            CHECK(r.scores[s].trs <= 1.0 + 1e-9);
            CHECK(r.scores[s].cms >= -1.0 - 1e-9);
            CHECK(r.scores[s].cms <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("select_top_t greedy stop rule") {
    // 2 equal-length steps, importances {0.9, 0.1}
    const auto video = make_video({axis(0, 4), axis(0, 4), axis(1, 4), axis(1, 4)});
    const std::vector<Step> steps{make_step(axis(0, 4), 0, 2), make_step(axis(1, 4), 2, 2)};

    SUBCASE("t=55 needs both steps") {
        const auto track = select_top_t(video, steps, {0.9, 0.1}, SelectionConfig{55.0});
        CHECK(std::count(track.frame_labels.begin(), track.frame_labels.end(), 1) == 16);
    }
    SUBCASE("t=50 stops after the first step") {
        std::vector<uint8_t> selected;
        const auto track = select_top_t(video, steps, {0.9, 0.1}, SelectionConfig{50.0}, &selected);
        CHECK(selected == std::vector<uint8_t>{1, 0});
        CHECK(std::count(track.frame_labels.begin(), track.frame_labels.end(), 1) == 8);
    }
    SUBCASE("t=100 labels every segment frame") {
        const auto track = select_top_t(video, steps, {0.9, 0.1}, SelectionConfig{100.0});
        CHECK(std::count(track.frame_labels.begin(), track.frame_labels.end(), 1) == 16);
    }
}

TEST_CASE("select_top_t tie-break picks earlier steps") {
    // 4 equal steps of equal length, equal importance, t=55 -> first 3 selected
    std::vector<Vec> vecs;
    std::vector<Step> steps;
    for (int i = 0; i < 4; ++i) {
        vecs.push_back(axis(i, 8));
        vecs.push_back(axis(i, 8));
        steps.push_back(make_step(axis(i, 8), 2 * i, 2));
    }
    const auto video = make_video(vecs);
    std::vector<uint8_t> selected;
    select_top_t(video, steps, {0.4, 0.4, 0.4, 0.4}, SelectionConfig{55.0}, &selected);
    CHECK(selected == std::vector<uint8_t>{1, 1, 1, 0});
}

TEST_CASE("constant importances rescale to 0.5 scores") {
    const auto video = make_video({axis(0, 4), axis(1, 4)});
    const std::vector<Step> steps{make_step(axis(0, 4), 0, 1), make_step(axis(1, 4), 1, 1)};
    const auto track = select_top_t(video, steps, {0.7, 0.7}, SelectionConfig{55.0});
    CHECK(track.segment_scores == std::vector<float>{0.5f, 0.5f});
}

TEST_CASE("raising a selected step's importance never deselects it") {
    std::mt19937_64 rng(31);
    for (int it = 0; it < 30; ++it) {
        std::uniform_int_distribution<int> n_steps(2, 6), seg_len(1, 3);
        std::uniform_real_distribution<double> imp(0.0, 1.0);
        const int n = n_steps(rng);
        std::vector<Vec> vecs;
        std::vector<Step> steps;
        std::vector<double> importance;
        int cursor = 0;
        for (int s = 0; s < n; ++s) {
            const int len = seg_len(rng);
            for (int k = 0; k < len; ++k) vecs.push_back(random_unit(rng, 8));
            steps.push_back(make_step(vecs.back(), cursor, len));
            cursor += len;
            importance.push_back(imp(rng));
        }
        const auto video = make_video(vecs);
        std::vector<uint8_t> before;
        select_top_t(video, steps, importance, SelectionConfig{55.0}, &before);
        for (int s = 0; s < n; ++s) {
            if (!before[s]) continue;
            auto boosted = importance;
            boosted[s] += 0.5;
            std::vector<uint8_t> after;
            select_top_t(video, steps, boosted, SelectionConfig{55.0}, &after);
            CHECK(after[s] == 1);
        }
    }
}

TEST_CASE("selection is invariant to a positive global scale on embeddings") {
    SynthConfig c;
    c.n_tasks = 1;
    c.videos_per_task = 3;
    c.segments_per_video = 10;
    c.dim = 24;
    c.shared_steps_per_task = 3;
    c.distractors_per_video = 1;
    c.noise_sigma = 0.05;
    c.seed = 77;
    c.segment_len = 4;
    auto corpus = generate(c);

    const auto base = pseudo_summaries(corpus.tasks[0], PseudoConfig{});
    for (auto& video : corpus.tasks[0].videos) {
        for (auto& seg : video.segments)
            for (auto& x : seg.vec) x *= 37.5f;
        for (auto& sent : video.transcript)
            for (auto& x : sent.vec) x *= 37.5f;
    }
    const auto scaled = pseudo_summaries(corpus.tasks[0], PseudoConfig{});
    REQUIRE(base.size() == scaled.size());
    for (std::size_t v = 0; v < base.size(); ++v) {
        CHECK(base[v].selected == scaled[v].selected);
        CHECK(base[v].track.frame_labels == scaled[v].track.frame_labels);
    }
}

TEST_CASE("noise-free synthetic task: mentioned steps outscore unmentioned, pseudo track flags") {
    SynthConfig c;
    c.n_tasks = 1;
    c.videos_per_task = 4;
    c.segments_per_video = 12;
    c.dim = 48;
    c.shared_steps_per_task = 3;
    c.distractors_per_video = 2;
    c.noise_sigma = 0.0;
    c.mention_prob = 1.0;
    c.seed = 13;
    c.segment_len = 4;
    const auto corpus = generate(c);
    const auto results = pseudo_summaries(corpus.tasks[0], PseudoConfig{});
    for (const auto& r : results) {
        const auto& planted = corpus.truth.find(r.video_id).steps;
        REQUIRE(r.steps.size() == planted.size());
        double min_mentioned = 2.0, max_unmentioned = -2.0;
        for (std::size_t s = 0; s < planted.size(); ++s) {
            if (planted[s].mentioned)
                min_mentioned = std::min(min_mentioned, r.scores[s].cms);
            else
                max_unmentioned = std::max(max_unmentioned, r.scores[s].cms);
        }
        CHECK(min_mentioned > max_unmentioned);
        CHECK_FALSE(r.no_transcript);
        CHECK_NOTHROW(r.track.validate_segment_aligned());
    }
}

TEST_CASE("videos without transcript are flagged and still summarized") {
    SynthConfig c;
    c.n_tasks = 1;
    c.videos_per_task = 2;
    c.segments_per_video = 8;
    c.dim = 24;
    c.shared_steps_per_task = 2;
    c.distractors_per_video = 1;
    c.mention_prob = 0.0;  // no sentences at all
    c.seed = 9;
    c.segment_len = 4;
    const auto corpus = generate(c);
    const auto results = pseudo_summaries(corpus.tasks[0], PseudoConfig{});
    for (const auto& r : results) {
        CHECK(r.no_transcript);
        for (const auto& s : r.scores) CHECK(s.cms == 0.0);
        CHECK_NOTHROW(r.track.validate_segment_aligned());
    }
}
