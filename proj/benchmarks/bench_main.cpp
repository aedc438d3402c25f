#include <benchmark/benchmark.h>

#include <random>

#include "ivsum/evaluation.hpp"
#include "ivsum/pseudo_summary.hpp"
#include "ivsum/scorer.hpp"
#include "ivsum/step_grouping.hpp"
#include "ivsum/synthgen.hpp"

using namespace ivsum;

namespace {

EmbeddedVideo bench_video(int n_segments, int dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    EmbeddedVideo v;
    v.video_id = "bench";
    v.task_id = "bench";
    v.segment_len = 32;
    v.n_frames = long(n_segments) * 32;
    for (int i = 0; i < n_segments; ++i) {
        SegmentEmbedding s;
        s.index = i;
        s.start_frame = long(i) * 32;
        s.end_frame = s.start_frame + 32;
        s.vec.resize(dim);
        double norm2 = 0.0;
        std::vector<double> d(dim);
        for (auto& x : d) {
            x = gauss(rng);
            norm2 += x * x;
        }
        for (int k = 0; k < dim; ++k) s.vec[k] = float(d[k] / std::sqrt(norm2));
        v.segments.push_back(std::move(s));
    }
    return v;
}

void BM_PairwiseSimilarity(benchmark::State& state) {
    const auto video = bench_video(int(state.range(0)), 512, 1);
    for (auto _ : state) benchmark::DoNotOptimize(pairwise_similarity(video));
}
BENCHMARK(BM_PairwiseSimilarity)->Arg(32)->Arg(128)->Arg(512);

void BM_GroupIntoSteps(benchmark::State& state) {
    const auto video = bench_video(int(state.range(0)), 512, 2);
    for (auto _ : state) benchmark::DoNotOptimize(group_into_steps(video));
}
BENCHMARK(BM_GroupIntoSteps)->Arg(32)->Arg(128)->Arg(512);

void BM_TaskRelevance(benchmark::State& state) {
    SynthConfig c;
    c.n_tasks = 1;
    c.videos_per_task = int(state.range(0));
    c.segments_per_video = 24;
    c.dim = 128;
    c.shared_steps_per_task = 5;
    c.distractors_per_video = 3;
    c.noise_sigma = 0.05;
    c.seed = 3;
    const auto corpus = generate(c);
    std::vector<std::vector<Step>> steps;
    for (const auto& v : corpus.tasks[0].videos) steps.push_back(group_into_steps(v));
    for (auto _ : state) benchmark::DoNotOptimize(task_relevance(steps));
}
BENCHMARK(BM_TaskRelevance)->Arg(4)->Arg(16);

void BM_KendallTau(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = std::size_t(state.range(0));
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = int(u(rng) * 8) / 8.0;  // ties
    for (auto _ : state) benchmark::DoNotOptimize(kendall_tau(a, b));
}
BENCHMARK(BM_KendallTau)->Arg(100)->Arg(1000)->Arg(10000);

void BM_ScorerForward(benchmark::State& state) {
    ScorerConfig mc;
    mc.embed_dim = 512;
    mc.d_model = int(state.range(0));
    mc.n_layers = 2;
    mc.n_heads = 4;
    mc.max_segments = 28;
    mc.seed = 5;
    const auto params = init_params(mc);
    const auto video = bench_video(28, 512, 6);
    const TextContext ctx = segment_text_context(video, {}, 5.0);
    const auto input = make_scorer_input(video, ctx, 0, 28);
    for (auto _ : state) benchmark::DoNotOptimize(forward_scores(params, input));
}
BENCHMARK(BM_ScorerForward)->Arg(64)->Arg(128)->Arg(256);

void BM_ScorerGradients(benchmark::State& state) {
    ScorerConfig mc;
    mc.embed_dim = 128;
    mc.d_model = 64;
    mc.n_layers = 2;
    mc.n_heads = 4;
    mc.max_segments = 24;
    mc.seed = 7;
    const auto params = init_params(mc);
    const auto video = bench_video(24, 128, 8);
    const TextContext ctx = segment_text_context(video, {}, 5.0);
    auto input = make_scorer_input(video, ctx, 0, 24);
    input.targets.assign(24, 0.5);
    const std::vector<ScorerInput> batch{input};
    for (auto _ : state) benchmark::DoNotOptimize(batch_loss_and_grads(params, batch));
}
BENCHMARK(BM_ScorerGradients);

}  // namespace

BENCHMARK_MAIN();
