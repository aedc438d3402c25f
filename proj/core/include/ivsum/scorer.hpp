#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ivsum/corpus.hpp"
#include "ivsum/score_track.hpp"

namespace ivsum {

enum class TextMode {
    windowed,       // per-segment average of sentences near the segment
    global_fusion,  // one average over all sentences, shared by every segment
};

TextMode parse_text_mode(const std::string& name);

struct ScorerConfig {
    int embed_dim = 64;  // D, the corpus embedding dimension
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    double dropout = 0.1;
    int max_segments = 28;
    double text_window_s = 5.0;
    TextMode text_mode = TextMode::windowed;
    uint64_t seed = 0;

    int head_dim() const { return d_model / n_heads; }
    void validate() const;
};

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s);
    std::size_t size() const { return v.size(); }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

struct AttentionLayerParams {
    Tensor ln1_gamma, ln1_beta;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor ln2_gamma, ln2_beta;
    Tensor ff_w1, ff_b1, ff_w2, ff_b2;
};

// Every learnable tensor of the model. The same structure doubles as the
// gradient accumulator (identical shapes).
struct ScorerParams {
    ScorerConfig config;
    Tensor fuser_w1, fuser_b1, fuser_w2, fuser_b2;  // text fuser D->D->D
    Tensor in_w, in_b;                              // input projection 2D -> d_model
    Tensor positional;                              // max_segments x d_model
    std::vector<AttentionLayerParams> layers;
    Tensor head_w, head_b;                          // score head d_model -> 1

    template <typename F>
    void for_each(F&& f) {
        visit(*this, f);
    }
    template <typename F>
    void for_each(F&& f) const {
        visit(*this, f);
    }

private:
    template <typename Self, typename F>
    static void visit(Self& self, F&& f) {
        f("fuser.w1", self.fuser_w1);
        f("fuser.b1", self.fuser_b1);
        f("fuser.w2", self.fuser_w2);
        f("fuser.b2", self.fuser_b2);
        f("input_proj.w", self.in_w);
        f("input_proj.b", self.in_b);
        f("positional", self.positional);
        for (std::size_t i = 0; i < self.layers.size(); ++i) {
            auto& l = self.layers[i];
            const std::string p = "layers." + std::to_string(i) + ".";
            f(p + "ln1.gamma", l.ln1_gamma);
            f(p + "ln1.beta", l.ln1_beta);
            f(p + "attn.wq", l.wq);
            f(p + "attn.bq", l.bq);
            f(p + "attn.wk", l.wk);
            f(p + "attn.bk", l.bk);
            f(p + "attn.wv", l.wv);
            f(p + "attn.bv", l.bv);
            f(p + "attn.wo", l.wo);
            f(p + "attn.bo", l.bo);
            f(p + "ln2.gamma", l.ln2_gamma);
            f(p + "ln2.beta", l.ln2_beta);
            f(p + "ff.w1", l.ff_w1);
            f(p + "ff.b1", l.ff_b1);
            f(p + "ff.w2", l.ff_w2);
            f(p + "ff.b2", l.ff_b2);
        }
        f("score_head.w", self.head_w);
        f("score_head.b", self.head_b);
    }
};

ScorerParams init_params(const ScorerConfig& config);
ScorerParams zeros_like(const ScorerParams& params);

// Per-segment transcript context vectors (corpus dimension D).
struct TextContext {
    std::vector<std::vector<double>> vecs;
    std::vector<uint8_t> no_text;
};

TextContext segment_text_context(const EmbeddedVideo& video,
                                 const std::vector<TranscriptSentence>& sentences, double window_s,
                                 TextMode mode = TextMode::windowed);

// One video window presented to the model. Rows beyond n_real (up to
// padded_len) are zero-padded and excluded from attention and loss.
struct ScorerInput {
    std::vector<std::vector<double>> video_vecs;  // n_real x D, unit norm
    std::vector<std::vector<double>> contexts;    // n_real x D
    std::vector<double> targets;                  // n_real (empty for inference)
    int padded_len = 0;                           // 0 means no padding

    int n_real() const { return static_cast<int>(video_vecs.size()); }
    int n_tokens() const { return padded_len > 0 ? padded_len : n_real(); }
};

ScorerInput make_scorer_input(const EmbeddedVideo& video, const TextContext& ctx, int start,
                              int len, const ScoreTrack* target = nullptr, int padded_len = 0);

// Deterministic evaluation-mode forward (dropout off); scores in (0,1).
std::vector<double> forward_scores(const ScorerParams& params, const ScorerInput& input);

// Mean over segments of the squared residual.
double mse_loss(const std::vector<double>& pred, const std::vector<double>& target);

// Batch loss = mean over videos of the per-video MSE (evaluation mode).
double batch_loss(const ScorerParams& params, const std::vector<ScorerInput>& batch);

struct BatchGradients {
    double loss = 0.0;
    ScorerParams grads;
};

// Analytic gradients of batch_loss w.r.t. every parameter tensor.
BatchGradients batch_loss_and_grads(const ScorerParams& params,
                                    const std::vector<ScorerInput>& batch);

struct TrainConfig {
    double lr = 1e-3;
    double weight_decay = 1e-4;
    int batch_size = 24;
    int epochs = 300;
    int lr_step_epochs = 100;
    double lr_decay = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double t_percent = 55.0;
    uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

struct TrainItem {
    const EmbeddedVideo* video = nullptr;
    const ScoreTrack* pseudo = nullptr;
};

struct TrainResult {
    ScorerParams params;
    std::vector<double> loss_curve;  // mean training MSE per epoch
};

// Adam with decoupled weight decay; seeded shuffling, windowing and dropout,
// bit-reproducible for a fixed seed at any thread count.
TrainResult train(const std::vector<TrainItem>& items, const ScorerConfig& model_config,
                  const TrainConfig& train_config);

// Scores every segment (stitching non-overlapping windows past max_segments),
// labels the top t% segments (k = max(1, floor(t/100 * n)), ties to the
// earlier index) and propagates labels to frames.
ScoreTrack infer(const ScorerParams& params, const EmbeddedVideo& video, double t_percent);

}  // namespace ivsum
