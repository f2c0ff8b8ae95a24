#include <cmath>

#include "../model.hpp"

namespace skiprec {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }
inline double gelu_grad(double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// out = in . W + b, W row-major [d_in, d_out]
void linear(const Mat& in, std::span<const double> w, std::span<const double> b, Mat& out) {
    int64_t d_in = in.cols, d_out = out.cols;
    for (int64_t t = 0; t < in.rows; ++t) {
        const double* x = in.row(t);
        double* y = out.row(t);
        std::copy(b.begin(), b.end(), y);
        for (int64_t i = 0; i < d_in; ++i) {
            double xi = x[i];
            const double* wr = w.data() + i * d_out;
            for (int64_t j = 0; j < d_out; ++j) y[j] += xi * wr[j];
        }
    }
}

// d_in += d_out . W^T ; dW += in^T . d_out ; db += column sums of d_out
void linear_backward(const Mat& in, std::span<const double> w, const Mat& d_out, Mat& d_in,
                     double* dw, double* db) {
    int64_t d_i = in.cols, d_o = d_out.cols;
    for (int64_t t = 0; t < in.rows; ++t) {
        const double* x = in.row(t);
        const double* dy = d_out.row(t);
        double* dx = d_in.row(t);
        for (int64_t j = 0; j < d_o; ++j) db[j] += dy[j];
        for (int64_t i = 0; i < d_i; ++i) {
            const double* wr = w.data() + i * d_o;
            double* dwr = dw + i * d_o;
            double s = 0.0;
            double xi = x[i];
            for (int64_t j = 0; j < d_o; ++j) {
                s += dy[j] * wr[j];
                dwr[j] += xi * dy[j];
            }
            dx[i] += s;
        }
    }
}

void layer_norm(const Mat& x, std::span<const double> gain, std::span<const double> bias, Mat& out,
                Mat& xhat, std::vector<double>& rstd) {
    int64_t d = x.cols;
    xhat = Mat(x.rows, d);
    rstd.assign(static_cast<size_t>(x.rows), 0.0);
    for (int64_t t = 0; t < x.rows; ++t) {
        const double* xr = x.row(t);
        double mean = 0.0;
        for (int64_t j = 0; j < d; ++j) mean += xr[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (int64_t j = 0; j < d; ++j) {
            double c = xr[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        double r = 1.0 / std::sqrt(var + kLnEps);
        rstd[static_cast<size_t>(t)] = r;
        double* xh = xhat.row(t);
        double* y = out.row(t);
        for (int64_t j = 0; j < d; ++j) {
            xh[j] = (xr[j] - mean) * r;
            y[j] = gain[j] * xh[j] + bias[j];
        }
    }
}

// d_x += backprop of layer_norm; dgain/dbias accumulated.
void layer_norm_backward(const Mat& xhat, const std::vector<double>& rstd,
                         std::span<const double> gain, const Mat& d_out, Mat& d_x, double* dgain,
                         double* dbias) {
    int64_t d = xhat.cols;
    std::vector<double> dyg(static_cast<size_t>(d));
    for (int64_t t = 0; t < xhat.rows; ++t) {
        const double* xh = xhat.row(t);
        const double* dy = d_out.row(t);
        double m1 = 0.0, m2 = 0.0;
        for (int64_t j = 0; j < d; ++j) {
            dgain[j] += dy[j] * xh[j];
            dbias[j] += dy[j];
            dyg[static_cast<size_t>(j)] = dy[j] * gain[j];
            m1 += dyg[static_cast<size_t>(j)];
            m2 += dyg[static_cast<size_t>(j)] * xh[j];
        }
        m1 /= static_cast<double>(d);
        m2 /= static_cast<double>(d);
        double r = rstd[static_cast<size_t>(t)];
        double* dx = d_x.row(t);
        for (int64_t j = 0; j < d; ++j)
            dx[j] += r * (dyg[static_cast<size_t>(j)] - m1 - xh[j] * m2);
    }
}

}  // namespace

Mat attn_forward(const ModelParams& params, std::span<const int32_t> items, AttnCache& cache) {
    const ModelConfig& cfg = params.config;
    int64_t T = static_cast<int64_t>(items.size());
    int64_t d = cfg.embed_dim;
    int64_t H = cfg.heads;
    int64_t hd = d / H;
    double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    bool causal = cfg.architecture == Architecture::causal_attention;

    auto pos = params.store.tensor("pos_embeddings");
    Mat x(T, d);
    for (int64_t t = 0; t < T; ++t) {
        auto emb = params.embedding(items[t]);
        const double* p = pos.data() + t * d;
        double* xr = x.row(t);
        for (int64_t j = 0; j < d; ++j) xr[j] = emb[j] + p[j];
    }

    cache.blocks.resize(static_cast<size_t>(cfg.blocks));
    for (int b = 0; b < cfg.blocks; ++b) {
        auto& blk = cache.blocks[static_cast<size_t>(b)];
        std::string base = "blk" + std::to_string(b);

        blk.a_in = Mat(T, d);
        layer_norm(x, params.store.tensor(base + ".attn_ln.gain"),
                   params.store.tensor(base + ".attn_ln.bias"), blk.a_in, blk.ln1_xhat,
                   blk.ln1_rstd);

        blk.q = Mat(T, d);
        blk.k = Mat(T, d);
        blk.vv = Mat(T, d);
        linear(blk.a_in, params.store.tensor(base + ".wq"), params.store.tensor(base + ".bq"),
               blk.q);
        linear(blk.a_in, params.store.tensor(base + ".wk"), params.store.tensor(base + ".bk"),
               blk.k);
        linear(blk.a_in, params.store.tensor(base + ".wv"), params.store.tensor(base + ".bv"),
               blk.vv);

        blk.attn.assign(static_cast<size_t>(H * T * T), 0.0);
        blk.ctx = Mat(T, d);
        std::vector<double> scores(static_cast<size_t>(T));
        for (int64_t h = 0; h < H; ++h) {
            int64_t c0 = h * hd;
            for (int64_t t = 0; t < T; ++t) {
                int64_t jmax = causal ? t : T - 1;
                double mx = -1e300;
                for (int64_t j = 0; j <= jmax; ++j) {
                    double s = scale * dot(blk.q.row(t) + c0, blk.k.row(j) + c0, hd);
                    scores[static_cast<size_t>(j)] = s;
                    mx = std::max(mx, s);
                }
                double z = 0.0;
                for (int64_t j = 0; j <= jmax; ++j) {
                    double e = std::exp(scores[static_cast<size_t>(j)] - mx);
                    scores[static_cast<size_t>(j)] = e;
                    z += e;
                }
                double* a = blk.attn.data() + (h * T + t) * T;
                double* ctx = blk.ctx.row(t) + c0;
                for (int64_t j = 0; j <= jmax; ++j) {
                    double w = scores[static_cast<size_t>(j)] / z;
                    a[j] = w;
                    axpy(w, blk.vv.row(j) + c0, ctx, hd);
                }
            }
        }

        Mat attn_out(T, d);
        linear(blk.ctx, params.store.tensor(base + ".wo"), params.store.tensor(base + ".bo"),
               attn_out);
        for (int64_t t = 0; t < T; ++t) axpy(1.0, attn_out.row(t), x.row(t), d);

        blk.f_in = Mat(T, d);
        layer_norm(x, params.store.tensor(base + ".ffn_ln.gain"),
                   params.store.tensor(base + ".ffn_ln.bias"), blk.f_in, blk.ln2_xhat,
                   blk.ln2_rstd);

        blk.h1 = Mat(T, d);
        linear(blk.f_in, params.store.tensor(base + ".w1"), params.store.tensor(base + ".b1"),
               blk.h1);
        blk.a1 = Mat(T, d);
        for (int64_t t = 0; t < T; ++t)
            for (int64_t j = 0; j < d; ++j) blk.a1.at(t, j) = gelu(blk.h1.at(t, j));

        Mat ffn_out(T, d);
        linear(blk.a1, params.store.tensor(base + ".w2"), params.store.tensor(base + ".b2"),
               ffn_out);
        for (int64_t t = 0; t < T; ++t) axpy(1.0, ffn_out.row(t), x.row(t), d);
    }

    Mat rows(T, d);
    layer_norm(x, params.store.tensor("final_ln.gain"), params.store.tensor("final_ln.bias"),
               rows, cache.final_xhat, cache.final_rstd);
    return rows;
}

void attn_backward(const ModelParams& params, std::span<const int32_t> items,
                   const AttnCache& cache, const Mat& d_rows, std::vector<double>& grads) {
    const ModelConfig& cfg = params.config;
    int64_t T = static_cast<int64_t>(items.size());
    int64_t d = cfg.embed_dim;
    int64_t H = cfg.heads;
    int64_t hd = d / H;
    double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    bool causal = cfg.architecture == Architecture::causal_attention;

    auto off = [&](const std::string& name) { return params.store.spec(name).offset; };

    Mat dx(T, d);
    layer_norm_backward(cache.final_xhat, cache.final_rstd, params.store.tensor("final_ln.gain"),
                        d_rows, dx, grads.data() + off("final_ln.gain"),
                        grads.data() + off("final_ln.bias"));

    for (int b = cfg.blocks - 1; b >= 0; --b) {
        const auto& blk = cache.blocks[static_cast<size_t>(b)];
        std::string base = "blk" + std::to_string(b);

        // FFN sublayer: x_out = x_mid + W2.gelu(W1.LN2(x_mid)+b1)+b2
        Mat d_a1(T, d);
        linear_backward(blk.a1, params.store.tensor(base + ".w2"), dx, d_a1,
                        grads.data() + off(base + ".w2"), grads.data() + off(base + ".b2"));
        Mat d_h1(T, d);
        for (int64_t t = 0; t < T; ++t)
            for (int64_t j = 0; j < d; ++j)
                d_h1.at(t, j) = d_a1.at(t, j) * gelu_grad(blk.h1.at(t, j));
        Mat d_f_in(T, d);
        linear_backward(blk.f_in, params.store.tensor(base + ".w1"), d_h1, d_f_in,
                        grads.data() + off(base + ".w1"), grads.data() + off(base + ".b1"));
        layer_norm_backward(blk.ln2_xhat, blk.ln2_rstd,
                            params.store.tensor(base + ".ffn_ln.gain"), d_f_in, dx,
                            grads.data() + off(base + ".ffn_ln.gain"),
                            grads.data() + off(base + ".ffn_ln.bias"));

        // Attention sublayer: x_mid = x_in + Wo.attend(LN1(x_in)) + bo
        Mat d_ctx(T, d);
        linear_backward(blk.ctx, params.store.tensor(base + ".wo"), dx, d_ctx,
                        grads.data() + off(base + ".wo"), grads.data() + off(base + ".bo"));

        Mat dq(T, d), dk(T, d), dv(T, d);
        std::vector<double> da(static_cast<size_t>(T)), ds(static_cast<size_t>(T));
        for (int64_t h = 0; h < H; ++h) {
            int64_t c0 = h * hd;
            for (int64_t t = 0; t < T; ++t) {
                int64_t jmax = causal ? t : T - 1;
                const double* a = blk.attn.data() + (h * T + t) * T;
                const double* dctx = d_ctx.row(t) + c0;
                double inner = 0.0;
                for (int64_t j = 0; j <= jmax; ++j) {
                    da[static_cast<size_t>(j)] = dot(dctx, blk.vv.row(j) + c0, hd);
                    axpy(a[j], dctx, dv.row(j) + c0, hd);
                    inner += da[static_cast<size_t>(j)] * a[j];
                }
                for (int64_t j = 0; j <= jmax; ++j) {
                    double dsj = a[j] * (da[static_cast<size_t>(j)] - inner);
                    ds[static_cast<size_t>(j)] = dsj;
                    axpy(dsj * scale, blk.k.row(j) + c0, dq.row(t) + c0, hd);
                    axpy(dsj * scale, blk.q.row(t) + c0, dk.row(j) + c0, hd);
                }
            }
        }

        Mat d_a_in(T, d);
        linear_backward(blk.a_in, params.store.tensor(base + ".wq"), dq, d_a_in,
                        grads.data() + off(base + ".wq"), grads.data() + off(base + ".bq"));
        linear_backward(blk.a_in, params.store.tensor(base + ".wk"), dk, d_a_in,
                        grads.data() + off(base + ".wk"), grads.data() + off(base + ".bk"));
        linear_backward(blk.a_in, params.store.tensor(base + ".wv"), dv, d_a_in,
                        grads.data() + off(base + ".wv"), grads.data() + off(base + ".bv"));
        layer_norm_backward(blk.ln1_xhat, blk.ln1_rstd,
                            params.store.tensor(base + ".attn_ln.gain"), d_a_in, dx,
                            grads.data() + off(base + ".attn_ln.gain"),
                            grads.data() + off(base + ".attn_ln.bias"));
    }

    double* d_emb = grads.data() + off("item_embeddings");
    double* d_pos = grads.data() + off("pos_embeddings");
    for (int64_t t = 0; t < T; ++t) {
        axpy(1.0, dx.row(t), d_emb + static_cast<int64_t>(items[t]) * d, d);
        axpy(1.0, dx.row(t), d_pos + t * d, d);
    }
}

}  // namespace skiprec
