#include "ivsum/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ivsum/common.hpp"
#include "ivsum/vec_math.hpp"

namespace ivsum {

TextMode parse_text_mode(const std::string& name) {
    if (name == "windowed") return TextMode::windowed;
    if (name == "global") return TextMode::global_fusion;
    throw ValidationError(strcat("unknown text mode: ", name, " (expected windowed or global)"));
}

void ScorerConfig::validate() const {
    if (embed_dim < 1) throw ValidationError("scorer: embed_dim must be positive");
    if (d_model < 1) throw ValidationError("scorer: d_model must be positive");
    if (n_layers < 1) throw ValidationError("scorer: n_layers must be >= 1");
    if (n_heads < 1) throw ValidationError("scorer: n_heads must be >= 1");
    if (d_model % n_heads != 0)
        throw ValidationError(strcat("scorer: d_model ", d_model, " not divisible by n_heads ", n_heads));
    if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("scorer: dropout must lie in [0,1)");
    if (max_segments < 1) throw ValidationError("scorer: max_segments must be >= 1");
    if (text_window_s < 0.0) throw ValidationError("scorer: text_window_s must be >= 0");
}

void TrainConfig::validate() const {
    if (lr < 0.0) throw ValidationError("train: lr must be >= 0");
    if (weight_decay < 0.0) throw ValidationError("train: weight_decay must be >= 0");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
    if (lr_step_epochs < 1) throw ValidationError("train: lr_step_epochs must be >= 1");
    if (!(t_percent > 0.0 && t_percent <= 100.0))
        throw ValidationError("train: t_percent must lie in (0,100]");
    if (threads < 1) throw ValidationError("train: threads must be >= 1");
}

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    std::size_t total = 1;
    for (std::size_t d : shape) total *= d;
    v.assign(total, 0.0);
}

namespace {

using Rows = std::vector<std::vector<double>>;

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

double gelu(double x) {
    return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
}

double gelu_grad(double x) {
    const double u = kGeluC * (x + kGeluA * x * x * x);
    const double t = std::tanh(u);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = W x + b with W stored (out, in) row-major.
void affine(const Tensor& w, const Tensor& b, const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t out = b.v.size();
    const std::size_t in = x.size();
    y.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
        double s = b.v[o];
        const double* row = w.v.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
        y[o] = s;
    }
}

// Accumulates dW += dy (x) x, db += dy and dx += W^T dy.
void affine_backward(const Tensor& w, const std::vector<double>& x, const std::vector<double>& dy,
                     Tensor& dw, Tensor& db, std::vector<double>* dx) {
    const std::size_t out = dy.size();
    const std::size_t in = x.size();
    for (std::size_t o = 0; o < out; ++o) {
        const double g = dy[o];
        db.v[o] += g;
        double* drow = dw.v.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) drow[i] += g * x[i];
    }
    if (dx) {
        dx->assign(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dy[o];
            const double* row = w.v.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) (*dx)[i] += g * row[i];
        }
    }
}

constexpr double kLnEps = 1e-5;

void layer_norm(const Tensor& gamma, const Tensor& beta, const std::vector<double>& x,
                std::vector<double>& y, std::vector<double>& xhat, double& inv_std) {
    const std::size_t d = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(d);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= double(d);
    inv_std = 1.0 / std::sqrt(var + kLnEps);
    xhat.resize(d);
    y.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        xhat[k] = (x[k] - mean) * inv_std;
        y[k] = gamma.v[k] * xhat[k] + beta.v[k];
    }
}

void layer_norm_backward(const Tensor& gamma, const std::vector<double>& xhat, double inv_std,
                         const std::vector<double>& dy, Tensor& dgamma, Tensor& dbeta,
                         std::vector<double>& dx) {
    const std::size_t d = dy.size();
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    dx.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        dgamma.v[k] += dy[k] * xhat[k];
        dbeta.v[k] += dy[k];
        const double dxh = dy[k] * gamma.v[k];
        dx[k] = dxh;  // temporarily dxhat
        mean_dxhat += dxh;
        mean_dxhat_xhat += dxh * xhat[k];
    }
    mean_dxhat /= double(d);
    mean_dxhat_xhat /= double(d);
    for (std::size_t k = 0; k < d; ++k)
        dx[k] = inv_std * (dx[k] - mean_dxhat - xhat[k] * mean_dxhat_xhat);
}

struct LayerTrace {
    Rows x_in;                            // layer input
    Rows ln1_xhat, ln1_out;
    std::vector<double> ln1_inv_std;
    Rows q, k, v;
    std::vector<Rows> probs;              // per head: n x n attention weights
    Rows ctx;                             // concatenated head outputs
    Rows attn_out;                        // after output projection
    Rows mask1;                           // dropout masks (empty in eval mode)
    Rows x_mid;
    Rows ln2_xhat, ln2_out;
    std::vector<double> ln2_inv_std;
    Rows ff_pre, ff_act;
    Rows mask2;
};

struct Trace {
    Rows concat_in;   // n x 2D inputs to the projection
    Rows fuse_pre, fuse_act, fused;
    Rows tokens0;     // after projection + positional
    Rows mask0;
    std::vector<LayerTrace> layers;
    Rows x_final;
    std::vector<double> logits;
    std::vector<double> scores;
    int n_real = 0;
    int n_tokens = 0;
};

Rows draw_mask(int rows, int cols, double p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Rows mask(rows, std::vector<double>(cols));
    const double keep = 1.0 / (1.0 - p);
    for (auto& r : mask)
        for (double& m : r) m = u(rng) < p ? 0.0 : keep;
    return mask;
}

void apply_mask(Rows& x, const Rows& mask) {
    if (mask.empty()) return;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < x[i].size(); ++k) x[i][k] *= mask[i][k];
}

void forward_item(const ScorerParams& P, const ScorerInput& input, bool train_mode,
                  std::mt19937_64* drop_rng, Trace& tr) {
    const ScorerConfig& cfg = P.config;
    const int n_real = input.n_real();
    const int n = input.n_tokens();
    const int D = cfg.embed_dim;
    const int d = cfg.d_model;
    const int dh = cfg.head_dim();
    const double scale = 1.0 / std::sqrt(double(dh));
    const bool dropping = train_mode && cfg.dropout > 0.0 && drop_rng != nullptr;

    if (n_real < 1) throw ValidationError("scorer: empty input");
    if (n > cfg.max_segments)
        throw ValidationError(strcat("scorer: ", n, " tokens exceed max_segments ", cfg.max_segments));
    for (int i = 0; i < n_real; ++i) {
        if (static_cast<int>(input.video_vecs[i].size()) != D ||
            static_cast<int>(input.contexts[i].size()) != D)
            throw ValidationError("scorer: input dimension mismatch");
    }

    tr.n_real = n_real;
    tr.n_tokens = n;

    // text fuser + input projection + positional rows
    tr.concat_in.assign(n, std::vector<double>(2 * D, 0.0));
    tr.fuse_pre.assign(n, {});
    tr.fuse_act.assign(n, std::vector<double>(D));
    tr.fused.assign(n, {});
    tr.tokens0.assign(n, {});
    const std::vector<double> ctx_zero(D, 0.0);
    for (int i = 0; i < n; ++i) {
        const std::vector<double>& ctx_in = i < n_real ? input.contexts[i] : ctx_zero;
        affine(P.fuser_w1, P.fuser_b1, ctx_in, tr.fuse_pre[i]);
        for (int k = 0; k < D; ++k) tr.fuse_act[i][k] = gelu(tr.fuse_pre[i][k]);
        affine(P.fuser_w2, P.fuser_b2, tr.fuse_act[i], tr.fused[i]);

        for (int k = 0; k < D; ++k) {
            tr.concat_in[i][k] = i < n_real ? input.video_vecs[i][k] : 0.0;
            tr.concat_in[i][D + k] = tr.fused[i][k];
        }
        affine(P.in_w, P.in_b, tr.concat_in[i], tr.tokens0[i]);
        for (int k = 0; k < d; ++k) tr.tokens0[i][k] += P.positional.v[std::size_t(i) * d + k];
    }

    Rows x = tr.tokens0;
    if (dropping) {
        tr.mask0 = draw_mask(n, d, cfg.dropout, *drop_rng);
        apply_mask(x, tr.mask0);
    }

    tr.layers.resize(cfg.n_layers);
    for (int li = 0; li < cfg.n_layers; ++li) {
        const auto& L = P.layers[li];
        LayerTrace& lt = tr.layers[li];
        lt.x_in = x;

        lt.ln1_xhat.assign(n, {});
        lt.ln1_out.assign(n, {});
        lt.ln1_inv_std.assign(n, 0.0);
        lt.q.assign(n, {});
        lt.k.assign(n, {});
        lt.v.assign(n, {});
        for (int i = 0; i < n; ++i) {
            layer_norm(L.ln1_gamma, L.ln1_beta, x[i], lt.ln1_out[i], lt.ln1_xhat[i],
                       lt.ln1_inv_std[i]);
            affine(L.wq, L.bq, lt.ln1_out[i], lt.q[i]);
            affine(L.wk, L.bk, lt.ln1_out[i], lt.k[i]);
            affine(L.wv, L.bv, lt.ln1_out[i], lt.v[i]);
        }

        lt.probs.assign(cfg.n_heads, Rows(n, std::vector<double>(n, 0.0)));
        lt.ctx.assign(n, std::vector<double>(d, 0.0));
        for (int h = 0; h < cfg.n_heads; ++h) {
            const int off = h * dh;
            for (int i = 0; i < n; ++i) {
                // padded keys are excluded; padded queries only see real keys
                double row_max = -1e300;
                std::vector<double>& p = lt.probs[h][i];
                for (int j = 0; j < n_real; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < dh; ++k) s += lt.q[i][off + k] * lt.k[j][off + k];
                    s *= scale;
                    p[j] = s;
                    row_max = std::max(row_max, s);
                }
                double z = 0.0;
                for (int j = 0; j < n_real; ++j) {
                    p[j] = std::exp(p[j] - row_max);
                    z += p[j];
                }
                for (int j = 0; j < n_real; ++j) p[j] /= z;
                for (int j = n_real; j < n; ++j) p[j] = 0.0;
                for (int j = 0; j < n_real; ++j)
                    for (int k = 0; k < dh; ++k) lt.ctx[i][off + k] += p[j] * lt.v[j][off + k];
            }
        }

        lt.attn_out.assign(n, {});
        for (int i = 0; i < n; ++i) affine(L.wo, L.bo, lt.ctx[i], lt.attn_out[i]);
        Rows ad = lt.attn_out;
        if (dropping) {
            lt.mask1 = draw_mask(n, d, cfg.dropout, *drop_rng);
            apply_mask(ad, lt.mask1);
        }
        lt.x_mid.assign(n, std::vector<double>(d));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k) lt.x_mid[i][k] = x[i][k] + ad[i][k];

        lt.ln2_xhat.assign(n, {});
        lt.ln2_out.assign(n, {});
        lt.ln2_inv_std.assign(n, 0.0);
        lt.ff_pre.assign(n, {});
        lt.ff_act.assign(n, std::vector<double>(4 * d));
        Rows fd(n);
        for (int i = 0; i < n; ++i) {
            layer_norm(L.ln2_gamma, L.ln2_beta, lt.x_mid[i], lt.ln2_out[i], lt.ln2_xhat[i],
                       lt.ln2_inv_std[i]);
            affine(L.ff_w1, L.ff_b1, lt.ln2_out[i], lt.ff_pre[i]);
            for (int k = 0; k < 4 * d; ++k) lt.ff_act[i][k] = gelu(lt.ff_pre[i][k]);
            affine(L.ff_w2, L.ff_b2, lt.ff_act[i], fd[i]);
        }
        if (dropping) {
            lt.mask2 = draw_mask(n, d, cfg.dropout, *drop_rng);
            apply_mask(fd, lt.mask2);
        }
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k) x[i][k] = lt.x_mid[i][k] + fd[i][k];
    }

    tr.x_final = x;
    tr.logits.resize(n);
    tr.scores.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = P.head_b.v[0];
        for (int k = 0; k < d; ++k) z += P.head_w.v[k] * x[i][k];
        tr.logits[i] = z;
        tr.scores[i] = sigmoid(z);
    }
}

// dscores holds dL/dscore for every real token (zero for padded ones).
void backward_item(const ScorerParams& P, const ScorerInput& input, const Trace& tr,
                   const std::vector<double>& dscores, ScorerParams& G) {
    const ScorerConfig& cfg = P.config;
    const int n = tr.n_tokens;
    const int n_real = tr.n_real;
    const int D = cfg.embed_dim;
    const int d = cfg.d_model;
    const int dh = cfg.head_dim();
    const double scale = 1.0 / std::sqrt(double(dh));

    Rows dx(n, std::vector<double>(d, 0.0));
    for (int i = 0; i < n_real; ++i) {
        const double s = tr.scores[i];
        const double dlogit = dscores[i] * s * (1.0 - s);
        G.head_b.v[0] += dlogit;
        for (int k = 0; k < d; ++k) {
            G.head_w.v[k] += dlogit * tr.x_final[i][k];
            dx[i][k] += dlogit * P.head_w.v[k];
        }
    }

    for (int li = cfg.n_layers - 1; li >= 0; --li) {
        const auto& L = P.layers[li];
        auto& GL = G.layers[li];
        const LayerTrace& lt = tr.layers[li];

        // x2 = x_mid + drop(ff_out)
        std::vector<double> dff_out(d), dff_act, dff_pre(4 * d), dln2_out, dtmp;
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < d; ++k)
                dff_out[k] = lt.mask2.empty() ? dx[i][k] : dx[i][k] * lt.mask2[i][k];
            affine_backward(L.ff_w2, lt.ff_act[i], dff_out, GL.ff_w2, GL.ff_b2, &dff_act);
            for (int k = 0; k < 4 * d; ++k) dff_pre[k] = dff_act[k] * gelu_grad(lt.ff_pre[i][k]);
            affine_backward(L.ff_w1, lt.ln2_out[i], dff_pre, GL.ff_w1, GL.ff_b1, &dln2_out);
            layer_norm_backward(L.ln2_gamma, lt.ln2_xhat[i], lt.ln2_inv_std[i], dln2_out,
                                GL.ln2_gamma, GL.ln2_beta, dtmp);
            for (int k = 0; k < d; ++k) dx[i][k] += dtmp[k];  // dx now holds d(x_mid)
        }

        // x_mid = x_in + drop(attn_out)
        Rows dattn_out(n, std::vector<double>(d));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k)
                dattn_out[i][k] = lt.mask1.empty() ? dx[i][k] : dx[i][k] * lt.mask1[i][k];

        Rows dctx(n, std::vector<double>(d, 0.0));
        for (int i = 0; i < n; ++i) {
            std::vector<double> dc;
            affine_backward(L.wo, lt.ctx[i], dattn_out[i], GL.wo, GL.bo, &dc);
            dctx[i] = std::move(dc);
        }

        Rows dq(n, std::vector<double>(d, 0.0));
        Rows dk(n, std::vector<double>(d, 0.0));
        Rows dv(n, std::vector<double>(d, 0.0));
        std::vector<double> dprob(n), dscore_row(n);
        for (int h = 0; h < cfg.n_heads; ++h) {
            const int off = h * dh;
            for (int i = 0; i < n; ++i) {
                const std::vector<double>& p = lt.probs[h][i];
                double dot_dp = 0.0;
                for (int j = 0; j < n_real; ++j) {
                    double g = 0.0;
                    for (int k = 0; k < dh; ++k) {
                        g += dctx[i][off + k] * lt.v[j][off + k];
                        dv[j][off + k] += p[j] * dctx[i][off + k];
                    }
                    dprob[j] = g;
                    dot_dp += g * p[j];
                }
                for (int j = 0; j < n_real; ++j) {
                    dscore_row[j] = p[j] * (dprob[j] - dot_dp);
                    for (int k = 0; k < dh; ++k) {
                        dq[i][off + k] += dscore_row[j] * lt.k[j][off + k] * scale;
                        dk[j][off + k] += dscore_row[j] * lt.q[i][off + k] * scale;
                    }
                }
            }
        }

        std::vector<double> dln1_out(d), dpart, dtmp2;
        for (int i = 0; i < n; ++i) {
            std::fill(dln1_out.begin(), dln1_out.end(), 0.0);
            affine_backward(L.wq, lt.ln1_out[i], dq[i], GL.wq, GL.bq, &dpart);
            for (int k = 0; k < d; ++k) dln1_out[k] += dpart[k];
            affine_backward(L.wk, lt.ln1_out[i], dk[i], GL.wk, GL.bk, &dpart);
            for (int k = 0; k < d; ++k) dln1_out[k] += dpart[k];
            affine_backward(L.wv, lt.ln1_out[i], dv[i], GL.wv, GL.bv, &dpart);
            for (int k = 0; k < d; ++k) dln1_out[k] += dpart[k];
            layer_norm_backward(L.ln1_gamma, lt.ln1_xhat[i], lt.ln1_inv_std[i], dln1_out,
                                GL.ln1_gamma, GL.ln1_beta, dtmp2);
            for (int k = 0; k < d; ++k) dx[i][k] += dtmp2[k];  // dx now holds d(x_in)
        }
    }

    // embedding: tokens = drop(in_proj(concat) + positional)
    const std::vector<double> ctx_zero(D, 0.0);
    std::vector<double> dtok(d), dconcat, dfused(D), dfuse_act, dfuse_pre(D), dunused;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k)
            dtok[k] = tr.mask0.empty() ? dx[i][k] : dx[i][k] * tr.mask0[i][k];
        for (int k = 0; k < d; ++k) G.positional.v[std::size_t(i) * d + k] += dtok[k];
        affine_backward(P.in_w, tr.concat_in[i], dtok, G.in_w, G.in_b, &dconcat);
        for (int k = 0; k < D; ++k) dfused[k] = dconcat[D + k];
        affine_backward(P.fuser_w2, tr.fuse_act[i], dfused, G.fuser_w2, G.fuser_b2, &dfuse_act);
        for (int k = 0; k < D; ++k) dfuse_pre[k] = dfuse_act[k] * gelu_grad(tr.fuse_pre[i][k]);
        const std::vector<double>& ctx_in = i < n_real ? input.contexts[i] : ctx_zero;
        affine_backward(P.fuser_w1, ctx_in, dfuse_pre, G.fuser_w1, G.fuser_b1, nullptr);
    }
}

void accumulate(ScorerParams& into, const ScorerParams& from) {
    std::vector<Tensor*> dst;
    std::vector<const Tensor*> src;
    into.for_each([&](const std::string&, Tensor& t) { dst.push_back(&t); });
    from.for_each([&](const std::string&, const Tensor& t) { src.push_back(&t); });
    for (std::size_t i = 0; i < dst.size(); ++i)
        for (std::size_t k = 0; k < dst[i]->v.size(); ++k) dst[i]->v[k] += src[i]->v[k];
}

void check_finite_grads(const ScorerParams& grads) {
    grads.for_each([](const std::string& name, const Tensor& t) {
        for (double x : t.v)
            if (!std::isfinite(x))
                throw RuntimeError(strcat("backward: non-finite gradient in tensor ", name));
    });
}

}  // namespace

ScorerParams init_params(const ScorerConfig& config) {
    config.validate();
    const std::size_t D = config.embed_dim;
    const std::size_t d = config.d_model;

    ScorerParams p;
    p.config = config;
    p.fuser_w1 = Tensor({D, D});
    p.fuser_b1 = Tensor({D});
    p.fuser_w2 = Tensor({D, D});
    p.fuser_b2 = Tensor({D});
    p.in_w = Tensor({d, 2 * D});
    p.in_b = Tensor({d});
    p.positional = Tensor({std::size_t(config.max_segments), d});
    p.layers.resize(config.n_layers);
    for (auto& l : p.layers) {
        l.ln1_gamma = Tensor({d});
        l.ln1_beta = Tensor({d});
        l.wq = Tensor({d, d});
        l.bq = Tensor({d});
        l.wk = Tensor({d, d});
        l.bk = Tensor({d});
        l.wv = Tensor({d, d});
        l.bv = Tensor({d});
        l.wo = Tensor({d, d});
        l.bo = Tensor({d});
        l.ln2_gamma = Tensor({d});
        l.ln2_beta = Tensor({d});
        l.ff_w1 = Tensor({4 * d, d});
        l.ff_b1 = Tensor({4 * d});
        l.ff_w2 = Tensor({d, 4 * d});
        l.ff_b2 = Tensor({d});
    }
    p.head_w = Tensor({1, d});
    p.head_b = Tensor({1});

    std::mt19937_64 rng(mix_seed(config.seed, 0x1417));
    auto xavier = [&rng](Tensor& t) {
        const double fan_out = double(t.shape[0]);
        const double fan_in = double(t.shape.size() > 1 ? t.shape[1] : t.shape[0]);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (double& x : t.v) x = u(rng);
    };
    std::normal_distribution<double> pos_init(0.0, 0.02);

    xavier(p.fuser_w1);
    xavier(p.fuser_w2);
    xavier(p.in_w);
    for (double& x : p.positional.v) x = pos_init(rng);
    for (auto& l : p.layers) {
        std::fill(l.ln1_gamma.v.begin(), l.ln1_gamma.v.end(), 1.0);
        std::fill(l.ln2_gamma.v.begin(), l.ln2_gamma.v.end(), 1.0);
        xavier(l.wq);
        xavier(l.wk);
        xavier(l.wv);
        xavier(l.wo);
        xavier(l.ff_w1);
        xavier(l.ff_w2);
    }
    xavier(p.head_w);
    return p;
}

ScorerParams zeros_like(const ScorerParams& params) {
    ScorerParams z = params;
    z.for_each([](const std::string&, Tensor& t) { t.zero(); });
    return z;
}

TextContext segment_text_context(const EmbeddedVideo& video,
                                 const std::vector<TranscriptSentence>& sentences, double window_s,
                                 TextMode mode) {
    if (window_s < 0.0) throw ValidationError("segment_text_context: window_s must be >= 0");
    const int n = video.n_segments();
    const std::size_t D = n > 0 ? video.segments.front().vec.size() : 0;

    std::vector<std::vector<double>> unit;
    unit.reserve(sentences.size());
    for (const auto& s : sentences) {
        auto u = try_normalized(s.vec);
        if (u.empty())
            throw ValidationError(strcat("video ", video.video_id,
                                         ": transcript sentence has zero-norm embedding"));
        unit.push_back(std::move(u));
    }

    TextContext out;
    out.vecs.assign(n, std::vector<double>(D, 0.0));
    out.no_text.assign(n, 0);

    if (mode == TextMode::global_fusion) {
        std::vector<double> mean(D, 0.0);
        if (!unit.empty()) {
            for (const auto& u : unit)
                for (std::size_t k = 0; k < D; ++k) mean[k] += u[k];
            for (double& x : mean) x /= double(unit.size());
        }
        for (int i = 0; i < n; ++i) {
            out.vecs[i] = mean;
            out.no_text[i] = unit.empty();
        }
        return out;
    }

    for (int i = 0; i < n; ++i) {
        const double a = double(video.segments[i].start_frame) / video.fps - window_s;
        const double b = double(video.segments[i].end_frame) / video.fps + window_s;
        int hits = 0;
        for (std::size_t s = 0; s < unit.size(); ++s) {
            if (sentences[s].start_s <= b && sentences[s].end_s >= a) {
                for (std::size_t k = 0; k < D; ++k) out.vecs[i][k] += unit[s][k];
                ++hits;
            }
        }
        if (hits > 0)
            for (double& x : out.vecs[i]) x /= double(hits);
        else
            out.no_text[i] = 1;
    }
    return out;
}

ScorerInput make_scorer_input(const EmbeddedVideo& video, const TextContext& ctx, int start,
                              int len, const ScoreTrack* target, int padded_len) {
    if (start < 0 || len < 1 || start + len > video.n_segments())
        throw ValidationError(strcat("scorer window [", start, ",", start + len,
                                     ") outside video with ", video.n_segments(), " segments"));
    ScorerInput input;
    input.padded_len = padded_len;
    input.video_vecs.reserve(len);
    input.contexts.reserve(len);
    for (int i = start; i < start + len; ++i) {
        auto u = try_normalized(video.segments[i].vec);
        if (u.empty())
            throw ValidationError(strcat("video ", video.video_id, ": segment ", i,
                                         " has zero-norm embedding"));
        input.video_vecs.push_back(std::move(u));
        input.contexts.push_back(ctx.vecs[i]);
        if (target) input.targets.push_back(double(target->segment_scores[i]));
    }
    return input;
}

std::vector<double> forward_scores(const ScorerParams& params, const ScorerInput& input) {
    Trace tr;
    forward_item(params, input, false, nullptr, tr);
    return std::vector<double>(tr.scores.begin(), tr.scores.begin() + input.n_real());
}

double mse_loss(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size())
        throw ValidationError(strcat("mse_loss: length mismatch (", pred.size(), " vs ",
                                     target.size(), ")"));
    if (pred.empty()) throw ValidationError("mse_loss: empty inputs");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = pred[i] - target[i];
        s += r * r;
    }
    return s / double(pred.size());
}

double batch_loss(const ScorerParams& params, const std::vector<ScorerInput>& batch) {
    if (batch.empty()) throw ValidationError("batch_loss: empty batch");
    double total = 0.0;
    for (const auto& item : batch) total += mse_loss(forward_scores(params, item), item.targets);
    return total / double(batch.size());
}

BatchGradients batch_loss_and_grads(const ScorerParams& params,
                                    const std::vector<ScorerInput>& batch) {
    if (batch.empty()) throw ValidationError("batch_loss_and_grads: empty batch");
    BatchGradients out;
    out.grads = zeros_like(params);
    const double inv_b = 1.0 / double(batch.size());
    for (const auto& item : batch) {
        Trace tr;
        forward_item(params, item, false, nullptr, tr);
        const int n_real = item.n_real();
        std::vector<double> dscores(tr.n_tokens, 0.0);
        double loss = 0.0;
        for (int i = 0; i < n_real; ++i) {
            const double r = tr.scores[i] - item.targets[i];
            loss += r * r;
            dscores[i] = 2.0 * r / double(n_real) * inv_b;
        }
        out.loss += loss / double(n_real) * inv_b;
        backward_item(params, item, tr, dscores, out.grads);
    }
    check_finite_grads(out.grads);
    return out;
}

namespace {

enum TrainStream : uint64_t { kShuffle = 0x51, kWindow = 0x52, kDropout = 0x53 };

struct Adam {
    ScorerParams m, v;
    long t = 0;

    explicit Adam(const ScorerParams& p) : m(zeros_like(p)), v(zeros_like(p)) {}

    void step(ScorerParams& p, const ScorerParams& g, const TrainConfig& cfg, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, double(t));
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, double(t));
        std::vector<Tensor*> pt, mt, vt;
        std::vector<const Tensor*> gt;
        p.for_each([&](const std::string&, Tensor& x) { pt.push_back(&x); });
        m.for_each([&](const std::string&, Tensor& x) { mt.push_back(&x); });
        v.for_each([&](const std::string&, Tensor& x) { vt.push_back(&x); });
        g.for_each([&](const std::string&, const Tensor& x) { gt.push_back(&x); });
        for (std::size_t i = 0; i < pt.size(); ++i) {
            for (std::size_t k = 0; k < pt[i]->v.size(); ++k) {
                const double grad = gt[i]->v[k];
                double& mm = mt[i]->v[k];
                double& vv = vt[i]->v[k];
                mm = cfg.adam_beta1 * mm + (1.0 - cfg.adam_beta1) * grad;
                vv = cfg.adam_beta2 * vv + (1.0 - cfg.adam_beta2) * grad * grad;
                const double mhat = mm / bc1;
                const double vhat = vv / bc2;
                double& param = pt[i]->v[k];
                param -= lr * (mhat / (std::sqrt(vhat) + cfg.adam_eps) +
                               cfg.weight_decay * param);
            }
        }
    }
};

}  // namespace

TrainResult train(const std::vector<TrainItem>& items, const ScorerConfig& model_config,
                  const TrainConfig& train_config) {
    model_config.validate();
    train_config.validate();
    if (items.empty()) throw ValidationError("train: no training videos");
    for (const auto& item : items) {
        if (!item.video || !item.pseudo) throw ValidationError("train: null training item");
        if (static_cast<int>(item.pseudo->segment_scores.size()) != item.video->n_segments())
            throw ValidationError(strcat("train: pseudo track for ", item.video->video_id,
                                         " has ", item.pseudo->segment_scores.size(),
                                         " scores for ", item.video->n_segments(), " segments"));
    }

    // contexts once per video, the full segment range
    std::vector<TextContext> contexts(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
        contexts[i] = segment_text_context(*items[i].video, items[i].video->transcript,
                                           model_config.text_window_s, model_config.text_mode);

    TrainResult result;
    result.params = init_params(model_config);
    Adam adam(result.params);

    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
        const double lr = train_config.lr *
                          std::pow(train_config.lr_decay, double(epoch / train_config.lr_step_epochs));

        std::mt19937_64 shuffle_rng(
            mix_seed(mix_seed(train_config.seed, kShuffle), uint64_t(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(order[i - 1], order[pick(shuffle_rng)]);
        }

        double epoch_loss = 0.0;
        long epoch_videos = 0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += train_config.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + train_config.batch_size);
            const std::size_t bsize = b1 - b0;

            std::vector<double> losses(bsize, 0.0);
            std::vector<ScorerParams> grads;
            grads.reserve(bsize);
            for (std::size_t s = 0; s < bsize; ++s) grads.push_back(zeros_like(result.params));

            parallel_for(bsize, train_config.threads, [&](std::size_t s) {
                const std::size_t idx = order[b0 + s];
                const EmbeddedVideo& video = *items[idx].video;
                const int n = video.n_segments();

                int start = 0;
                int len = n;
                if (n > model_config.max_segments) {
                    std::mt19937_64 wrng(mix_seed(
                        mix_seed(mix_seed(train_config.seed, kWindow), uint64_t(epoch)), idx));
                    std::uniform_int_distribution<int> pick(0, n - model_config.max_segments);
                    start = pick(wrng);
                    len = model_config.max_segments;
                }
                ScorerInput input = make_scorer_input(video, contexts[idx], start, len,
                                                      items[idx].pseudo, model_config.max_segments);

                std::mt19937_64 drop_rng(mix_seed(
                    mix_seed(mix_seed(train_config.seed, kDropout), uint64_t(epoch)), idx));
                Trace tr;
                forward_item(result.params, input, true, &drop_rng, tr);

                std::vector<double> dscores(tr.n_tokens, 0.0);
                double loss = 0.0;
                const int n_real = input.n_real();
                for (int i = 0; i < n_real; ++i) {
                    const double r = tr.scores[i] - input.targets[i];
                    loss += r * r;
                    dscores[i] = 2.0 * r / double(n_real) / double(bsize);
                }
                losses[s] = loss / double(n_real);
                backward_item(result.params, input, tr, dscores, grads[s]);
            });

            ScorerParams total = zeros_like(result.params);
            for (std::size_t s = 0; s < bsize; ++s) accumulate(total, grads[s]);
            check_finite_grads(total);

            double batch_mean = 0.0;
            for (double l : losses) batch_mean += l;
            if (!std::isfinite(batch_mean))
                throw RuntimeError(strcat("training diverged (non-finite loss) at epoch ", epoch));
            epoch_loss += batch_mean;
            epoch_videos += long(bsize);

            adam.step(result.params, total, train_config, lr);
        }

        result.loss_curve.push_back(epoch_loss / double(epoch_videos));
        log_debug("epoch ", epoch, " loss ", result.loss_curve.back(), " lr ", lr);
    }
    return result;
}

ScoreTrack infer(const ScorerParams& params, const EmbeddedVideo& video, double t_percent) {
    if (!(t_percent > 0.0 && t_percent <= 100.0))
        throw ValidationError(strcat("infer: t_percent must lie in (0,100], got ", t_percent));
    const ScorerConfig& cfg = params.config;
    const int n = video.n_segments();
    const TextContext ctx =
        segment_text_context(video, video.transcript, cfg.text_window_s, cfg.text_mode);

    std::vector<double> scores;
    scores.reserve(n);
    for (int start = 0; start < n; start += cfg.max_segments) {
        const int len = std::min(cfg.max_segments, n - start);
        const ScorerInput input = make_scorer_input(video, ctx, start, len);
        const auto window_scores = forward_scores(params, input);
        scores.insert(scores.end(), window_scores.begin(), window_scores.end());
    }

    const long k = top_k_count(t_percent, n);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    ScoreTrack track;
    track.video_id = video.video_id;
    track.n_frames = video.n_frames;
    track.segment_len = video.segment_len;
    track.segment_scores.resize(n);
    for (int i = 0; i < n; ++i) track.segment_scores[i] = static_cast<float>(scores[i]);
    track.frame_labels.assign(video.n_frames, 0);
    for (long r = 0; r < k; ++r) {
        const long f0 = static_cast<long>(idx[r]) * video.segment_len;
        std::fill(track.frame_labels.begin() + f0, track.frame_labels.begin() + f0 + video.segment_len,
                  uint8_t(1));
    }
    return track;
}

}  // namespace ivsum
