#include <doctest.h>

#include <cmath>
#include <map>

#include "ivsum/common.hpp"
#include "ivsum/evaluation.hpp"
#include "test_util.hpp"

using namespace ivsum;

namespace {

// O(n^2) pair-counting oracle for tau-b
double tau_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            ties_x += dx == 0;
            ties_y += dy == 0;
            if (dx * dy > 0)
                ++concordant;
            else if (dx * dy < 0)
                ++discordant;
        }
    }
    const double n0 = double(n) * double(n - 1) / 2.0;
    return (concordant - discordant) / std::sqrt((n0 - ties_x) * (n0 - ties_y));
}

// brute-force fractional ranks + raw-sum Pearson formula
double rho_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double less = 0, equal = 0;
            for (std::size_t j = 0; j < n; ++j) {
                less += v[j] < v[i];
                equal += v[j] == v[i];
            }
            r[i] = 1.0 + less + (equal - 1.0) / 2.0;
        }
        return r;
    };
    const auto ra = ranks(x), rb = ranks(y);
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += ra[i];
        sb += rb[i];
        sab += ra[i] * rb[i];
        saa += ra[i] * ra[i];
        sbb += rb[i] * rb[i];
    }
    const double num = double(n) * sab - sa * sb;
    const double den = std::sqrt((double(n) * saa - sa * sa) * (double(n) * sbb - sb * sb));
    return num / den;
}

bool constant(const std::vector<double>& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return true;
}

}  // namespace

TEST_CASE("prf hand cases") {
    SUBCASE("identical nonempty labels give (1,1,1)") {
        const std::vector<uint8_t> l{1, 0, 1, 1, 0};
        const auto r = prf(l, l);
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 1.0);
        CHECK(r.f_score == 1.0);
    }
    SUBCASE("half coverage, no extras: (1, 0.5, 2/3)") {
        std::vector<uint8_t> gt(20, 0), pred(20, 0);
        for (int i = 0; i < 10; ++i) gt[i] = 1;
        for (int i = 0; i < 5; ++i) pred[i] = 1;
        const auto r = prf(pred, gt);
        CHECK(r.precision == doctest::Approx(1.0));
        CHECK(r.recall == doctest::Approx(0.5));
        CHECK(r.f_score == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("all-zero prediction scores (0,0,0)") {
        const std::vector<uint8_t> gt{1, 1, 0}, pred{0, 0, 0};
        const auto r = prf(pred, gt);
        CHECK(r.precision == 0.0);
        CHECK(r.recall == 0.0);
        CHECK(r.f_score == 0.0);
    }
    SUBCASE("length mismatch throws") {
        CHECK_THROWS_AS(prf({1, 0}, {1, 0, 1}), ValidationError);
    }
    SUBCASE("swapping pred and gt swaps precision and recall, keeps F") {
        std::mt19937_64 rng(3);
        for (int it = 0; it < 20; ++it) {
            std::vector<uint8_t> a(12), b(12);
            for (auto& x : a) x = rng() % 2;
            for (auto& x : b) x = rng() % 2;
            const auto ab = prf(a, b), ba = prf(b, a);
            CHECK(ab.precision == doctest::Approx(ba.recall));
            CHECK(ab.recall == doctest::Approx(ba.precision));
            CHECK(ab.f_score == doctest::Approx(ba.f_score));
        }
    }
}

TEST_CASE("kendall tau basics") {
    CHECK(kendall_tau({1, 2, 3, 4}, {10, 20, 30, 40}).value == doctest::Approx(1.0));
    CHECK(kendall_tau({1, 2, 3, 4}, {40, 30, 20, 10}).value == doctest::Approx(-1.0));
    const auto degenerate = kendall_tau({1, 1, 1}, {1, 2, 3});
    CHECK(degenerate.value == 0.0);
    CHECK(degenerate.degenerate);
    CHECK_THROWS_AS(kendall_tau({1.0}, {1.0}), ValidationError);
    CHECK_THROWS_AS(kendall_tau({1, 2}, {1, 2, 3}), ValidationError);
}

TEST_CASE("spearman rho basics") {
    CHECK(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}).value == doctest::Approx(1.0));
    CHECK(spearman_rho({1, 2, 3, 4}, {40, 30, 20, 10}).value == doctest::Approx(-1.0));
    const auto degenerate = spearman_rho({2, 2, 2}, {1, 2, 3});
    CHECK(degenerate.value == 0.0);
    CHECK(degenerate.degenerate);
}

TEST_CASE("tau and rho equal brute force on every short list over {0, 0.5, 1}") {
    const double alphabet[3] = {0.0, 0.5, 1.0};
    for (std::size_t n = 2; n <= 6; ++n) {
        std::size_t combos = 1;
        for (std::size_t i = 0; i < n; ++i) combos *= 3;
        for (std::size_t ax = 0; ax < combos; ++ax) {
            std::vector<double> x(n);
            std::size_t rem = ax;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = alphabet[rem % 3];
                rem /= 3;
            }
            if (constant(x)) continue;
            for (std::size_t ay = 0; ay < combos; ++ay) {
                std::vector<double> y(n);
                std::size_t rem2 = ay;
                for (std::size_t i = 0; i < n; ++i) {
                    y[i] = alphabet[rem2 % 3];
                    rem2 /= 3;
                }
                if (constant(y)) continue;
                const double tau = kendall_tau(x, y).value;
                const double rho = spearman_rho(x, y).value;
                CHECK(std::abs(tau - tau_oracle(x, y)) <= 1e-9);
                CHECK(std::abs(rho - rho_oracle(x, y)) <= 1e-9);
            }
        }
    }
}

TEST_CASE("tau matches the pair-counting oracle on random real-valued lists") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(2, 8), coarse(0, 4);
    for (int it = 0; it < 200; ++it) {
        const int n = len(rng);
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = it % 2 ? u(rng) : coarse(rng) * 0.25;
        for (auto& v : y) v = it % 3 ? u(rng) : coarse(rng) * 0.25;
        if (constant(x) || constant(y)) continue;
        CHECK(std::abs(kendall_tau(x, y).value - tau_oracle(x, y)) <= 1e-9);
        CHECK(std::abs(spearman_rho(x, y).value - rho_oracle(x, y)) <= 1e-9);
    }
}

TEST_CASE("tau and rho are invariant under strictly monotone transforms") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(3, 10), level(0, 3);
    for (int it = 0; it < 50; ++it) {
        const int n = len(rng);
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = level(rng) / 3.0;
        for (auto& v : y) v = u(rng);
        if (constant(x) || constant(y)) continue;

        // random strictly increasing lookup table preserves ties exactly
        std::map<double, double> table;
        double acc = -3.0;
        for (double v : x) {
            if (!table.count(v)) table[v] = 0.0;
        }
        for (auto& [k, v] : table) {
            acc += 0.1 + 2.0 * u(rng);
            v = acc;
        }
        std::vector<double> tx(n);
        for (int i = 0; i < n; ++i) tx[i] = table[x[i]];

        CHECK(kendall_tau(x, y).value == doctest::Approx(kendall_tau(tx, y).value).epsilon(1e-12));
        CHECK(spearman_rho(x, y).value == doctest::Approx(spearman_rho(tx, y).value).epsilon(1e-12));
    }
}

TEST_CASE("step recall") {
    const std::vector<uint8_t> pred{1, 1, 0, 0, 0, 0, 1, 0, 0, 0};
    const std::vector<FrameInterval> steps{{0, 2}, {3, 5}, {6, 8}};
    SUBCASE("count mode counts touched steps") {
        CHECK(step_recall(pred, steps) == doctest::Approx(2.0 / 3.0));
        CHECK(step_recall(std::vector<uint8_t>(10, 1), steps) == doctest::Approx(1.0));
        CHECK(step_recall(std::vector<uint8_t>(10, 0), steps) == doctest::Approx(0.0));
    }
    SUBCASE("duration mode measures overlapping frames") {
        // overlap 2 + 0 + 1 of 6 step frames
        CHECK(step_recall(pred, steps, StepRecallMode::duration) == doctest::Approx(0.5));
    }
    SUBCASE("empty step list throws") {
        CHECK_THROWS_AS(step_recall(pred, {}), ValidationError);
    }
}

namespace {

ScoreTrack track_of(const std::string& id, std::vector<float> scores, std::vector<uint8_t> labels) {
    ScoreTrack t;
    t.video_id = id;
    t.segment_len = 2;
    t.n_frames = long(labels.size());
    t.segment_scores = std::move(scores);
    t.frame_labels = std::move(labels);
    return t;
}

}  // namespace

TEST_CASE("evaluate_corpus aggregates per-video metrics") {
    // video a: pred == gt (tau 1); video b: reversed order (tau -1 vs gt)
    const auto pa = track_of("a", {0.1f, 0.9f}, {0, 0, 1, 1});
    const auto ga = track_of("a", {0.2f, 0.8f}, {0, 0, 1, 1});
    const auto pb = track_of("b", {0.9f, 0.1f}, {1, 1, 0, 0});
    const auto gb = track_of("b", {0.1f, 0.9f}, {0, 0, 1, 1});

    SUBCASE("single video: corpus means equal the video metrics") {
        const auto report = evaluate_corpus({pa}, {ga});
        CHECK(report.videos.size() == 1);
        CHECK(report.mean_tau == doctest::Approx(1.0));
        CHECK(report.mean_f_score == doctest::Approx(1.0));
    }
    SUBCASE("two videos with tau {1,-1} average to 0") {
        const auto report = evaluate_corpus({pa, pb}, {ga, gb});
        CHECK(report.mean_tau == doctest::Approx(0.0));
        CHECK(report.mean_f_score == doctest::Approx(0.5));
    }
    SUBCASE("degenerate videos count in means as 0 and are tallied") {
        const auto pc = track_of("c", {0.5f, 0.5f}, {1, 1, 0, 0});
        const auto gc = track_of("c", {0.1f, 0.9f}, {0, 0, 1, 1});
        const auto report = evaluate_corpus({pa, pc}, {ga, gc});
        CHECK(report.degenerate_count == 1);
        CHECK(report.mean_tau == doctest::Approx(0.5));
    }
    SUBCASE("id mismatch lists the symmetric difference") {
        try {
            evaluate_corpus({pa, pb}, {ga});
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("b") != std::string::npos);
        }
    }
    SUBCASE("step recall joins the report when intervals are provided") {
        std::map<std::string, std::vector<FrameInterval>> intervals{{"a", {{2, 4}}}};
        const auto report = evaluate_corpus({pa}, {ga}, &intervals);
        REQUIRE(report.videos[0].step_recall.has_value());
        CHECK(*report.videos[0].step_recall == doctest::Approx(1.0));
        REQUIRE(report.mean_step_recall.has_value());
    }
}

TEST_CASE("format_table emits one row per video plus the mean row") {
    const auto pa = track_of("a", {0.1f, 0.9f}, {0, 0, 1, 1});
    const auto ga = track_of("a", {0.2f, 0.8f}, {0, 0, 1, 1});
    const auto table = format_table(evaluate_corpus({pa}, {ga}));
    CHECK(table.find("video") != std::string::npos);
    CHECK(table.find("a") != std::string::npos);
    CHECK(table.find("mean") != std::string::npos);
}
