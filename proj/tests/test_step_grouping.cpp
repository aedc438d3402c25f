#include <doctest.h>

#include <cmath>

#include "ivsum/common.hpp"
#include "ivsum/step_grouping.hpp"
#include "ivsum/synthgen.hpp"
#include "ivsum/vec_math.hpp"
#include "test_util.hpp"

using namespace ivsum;
using namespace ivsum::test;

namespace {

// independent scalar-loop oracle
std::vector<std::vector<double>> similarity_oracle(const std::vector<Vec>& vecs) {
    const std::size_t n = vecs.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double num = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t k = 0; k < vecs[i].size(); ++k) {
                num += double(vecs[i][k]) * double(vecs[j][k]);
                na += double(vecs[i][k]) * double(vecs[i][k]);
                nb += double(vecs[j][k]) * double(vecs[j][k]);
            }
            m[i][j] = num / std::sqrt(na * nb);
        }
    }
    return m;
}

void check_partition(const std::vector<Step>& steps, int n_segments) {
    int cursor = 0;
    for (const auto& s : steps) {
        REQUIRE(!s.segment_indices.empty());
        for (int idx : s.segment_indices) {
            CHECK(idx == cursor);  // contiguous, no skips
            ++cursor;
        }
    }
    CHECK(cursor == n_segments);
}

}  // namespace

TEST_CASE("pairwise similarity: identical segments give all ones") {
    std::mt19937_64 rng(1);
    const Vec a = random_unit(rng, 8);
    const auto video = make_video({a, a, a});
    const auto sim = pairwise_similarity(video);
    for (const auto& row : sim)
        for (double x : row) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pairwise similarity: orthogonal unit vectors give the identity") {
    const auto video = make_video({axis(0, 4), axis(1, 4)});
    const auto sim = pairwise_similarity(video);
    CHECK(sim[0][0] == doctest::Approx(1.0));
    CHECK(sim[1][1] == doctest::Approx(1.0));
    CHECK(sim[0][1] == doctest::Approx(0.0));
    CHECK(sim[1][0] == doctest::Approx(0.0));
}

TEST_CASE("pairwise similarity matches the scalar-loop oracle") {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 10; ++it) {
        std::vector<Vec> vecs;
        for (int i = 0; i < 5; ++i) vecs.push_back(random_unit(rng, 16));
        const auto sim = pairwise_similarity(make_video(vecs));
        const auto oracle = similarity_oracle(vecs);
        for (std::size_t i = 0; i < vecs.size(); ++i)
            for (std::size_t j = 0; j < vecs.size(); ++j)
                CHECK(sim[i][j] == doctest::Approx(oracle[i][j]).epsilon(1e-6));
    }
}

TEST_CASE("zero-norm segment is rejected naming the segment") {
    auto video = make_video({axis(0, 4), Vec(4, 0.0f)});
    try {
        pairwise_similarity(video);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("segment 1") != std::string::npos);
    }
}

TEST_CASE("merge threshold is 90% of the off-diagonal maximum") {
    SUBCASE("off-diagonal max 0.8") {
        std::vector<std::vector<double>> sim{{1.0, 0.8}, {0.8, 1.0}};
        CHECK(merge_threshold(sim) == doctest::Approx(0.72));
    }
    SUBCASE("all identical segments") {
        std::vector<std::vector<double>> sim{{1.0, 1.0}, {1.0, 1.0}};
        CHECK(merge_threshold(sim) == doctest::Approx(0.9));
    }
    SUBCASE("mixed-sign entries {0.1, -0.2, 0.5}") {
        std::vector<std::vector<double>> sim{
            {1.0, 0.1, -0.2}, {0.1, 1.0, 0.5}, {-0.2, 0.5, 1.0}};
        CHECK(merge_threshold(sim) == doctest::Approx(0.45));
    }
    SUBCASE("single segment yields the +inf sentinel") {
        std::vector<std::vector<double>> sim{{1.0}};
        CHECK(std::isinf(merge_threshold(sim)));
    }
}

TEST_CASE("grouping [A, A, B] with orthogonal A,B splits after the pair") {
    const auto video = make_video({axis(0, 4), axis(0, 4), axis(1, 4)});
    const auto steps = group_into_steps(video);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].segment_indices == std::vector<int>{0, 1});
    CHECK(steps[1].segment_indices == std::vector<int>{2});
    // step vector is the renormalized member mean
    CHECK(steps[0].vec[0] == doctest::Approx(1.0));
}

TEST_CASE("single segment forms a single step") {
    const auto video = make_video({axis(2, 4)});
    const auto steps = group_into_steps(video);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].segment_indices == std::vector<int>{0});
}

TEST_CASE("all-identical vectors collapse to one step; orthogonal vectors stay singletons") {
    const auto one = group_into_steps(make_video({axis(1, 8), axis(1, 8), axis(1, 8), axis(1, 8)}));
    CHECK(one.size() == 1);
    const auto four = group_into_steps(make_video({axis(0, 8), axis(1, 8), axis(2, 8), axis(3, 8)}));
    CHECK(four.size() == 4);
}

TEST_CASE("noise-free synthgen videos recover exactly the planted runs") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        SynthConfig c;
        c.n_tasks = 1;
        c.videos_per_task = 2;
        c.segments_per_video = 12;
        c.dim = 32;
        c.shared_steps_per_task = 3;
        c.distractors_per_video = 2;
        c.noise_sigma = 0.0;
        c.seed = seed;
        c.segment_len = 4;
        const auto corpus = generate(c);
        for (const auto& video : corpus.tasks[0].videos) {
            for (MergeMode mode : {MergeMode::running_mean, MergeMode::prev_segment}) {
                const auto steps = group_into_steps(video, mode);
                const auto& planted = corpus.truth.find(video.video_id).steps;
                REQUIRE(steps.size() == planted.size());
                for (std::size_t s = 0; s < steps.size(); ++s) {
                    CHECK(steps[s].segment_indices.front() == planted[s].first_segment);
                    CHECK(int(steps[s].segment_indices.size()) == planted[s].n_segments);
                }
            }
        }
    }
}

TEST_CASE("partition and contiguity hold on random inputs in both merge modes") {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 40; ++it) {
        std::uniform_int_distribution<int> nseg(1, 14);
        const int n = nseg(rng);
        std::vector<Vec> vecs;
        for (int i = 0; i < n; ++i) vecs.push_back(random_unit(rng, 12));
        const auto video = make_video(vecs);
        for (MergeMode mode : {MergeMode::running_mean, MergeMode::prev_segment}) {
            const auto steps = group_into_steps(video, mode);
            check_partition(steps, n);
            for (const auto& s : steps)
                CHECK(l2_norm(s.vec) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("merge mode names parse") {
    CHECK(parse_merge_mode("running_mean") == MergeMode::running_mean);
    CHECK(parse_merge_mode("prev_segment") == MergeMode::prev_segment);
    CHECK_THROWS_AS(parse_merge_mode("bogus"), ValidationError);
}
