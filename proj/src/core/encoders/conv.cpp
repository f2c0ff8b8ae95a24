#include <cmath>

#include "../model.hpp"

namespace skiprec {

// Sliding-window encoder: each position sees the last conv_window items
// (front-padded with the padding token), runs horizontal filter banks of
// every height with max-over-time pooling plus vertical per-dimension
// filters, and maps the concatenated features through a two-layer head.

namespace {

// Item feeding window slot a (0..W-1) for output position t; pad below 0.
inline int32_t window_item(std::span<const int32_t> items, int64_t t, int64_t W, int64_t a) {
    int64_t p = t - (W - 1) + a;
    return p < 0 ? Vocabulary::kPad : items[static_cast<size_t>(p)];
}

}  // namespace

Mat conv_forward(const ModelParams& params, std::span<const int32_t> items, ConvCache& cache) {
    const ModelConfig& cfg = params.config;
    int64_t T = static_cast<int64_t>(items.size());
    int64_t d = cfg.embed_dim;
    int64_t W = cfg.conv_window;
    int64_t nh = cfg.conv_h_filters;
    int64_t nv = cfg.conv_v_filters;
    int64_t concat_dim = W * nh + nv * d;

    auto vw = params.store.tensor("conv.v.w");
    auto vb = params.store.tensor("conv.v.b");
    auto fc1w = params.store.tensor("conv.fc1.w");
    auto fc1b = params.store.tensor("conv.fc1.b");
    auto fc2w = params.store.tensor("conv.fc2.w");
    auto fc2b = params.store.tensor("conv.fc2.b");

    cache.positions.resize(static_cast<size_t>(T));
    Mat rows(T, d);

    std::vector<const double*> window(static_cast<size_t>(W));
    for (int64_t t = 0; t < T; ++t) {
        auto& pc = cache.positions[static_cast<size_t>(t)];
        pc.argmax.assign(static_cast<size_t>(W * nh), 0);
        pc.concat.assign(static_cast<size_t>(concat_dim), 0.0);
        pc.hidden.assign(static_cast<size_t>(d), 0.0);

        for (int64_t a = 0; a < W; ++a)
            window[static_cast<size_t>(a)] = params.embedding(window_item(items, t, W, a)).data();

        // Horizontal banks, one per height, tanh then max over offsets.
        int64_t c = 0;
        for (int64_t h = 1; h <= W; ++h) {
            auto kw = params.store.tensor("conv.h" + std::to_string(h) + ".w");
            auto kb = params.store.tensor("conv.h" + std::to_string(h) + ".b");
            for (int64_t f = 0; f < nh; ++f) {
                const double* kernel = kw.data() + f * h * d;
                double best = 0.0;
                int32_t best_o = 0;
                for (int64_t o = 0; o + h <= W; ++o) {
                    double pre = kb[static_cast<size_t>(f)];
                    for (int64_t a = 0; a < h; ++a)
                        pre += dot(kernel + a * d, window[static_cast<size_t>(o + a)], d);
                    double act = std::tanh(pre);
                    if (o == 0 || act > best) {
                        best = act;
                        best_o = static_cast<int32_t>(o);
                    }
                }
                pc.argmax[static_cast<size_t>((h - 1) * nh + f)] = best_o;
                pc.concat[static_cast<size_t>(c++)] = best;
            }
        }

        // Vertical filters: weighted sums over window rows, one d-vector each.
        for (int64_t f = 0; f < nv; ++f) {
            double* out = pc.concat.data() + W * nh + f * d;
            for (int64_t j = 0; j < d; ++j) out[j] = vb[static_cast<size_t>(f)];
            for (int64_t a = 0; a < W; ++a)
                axpy(vw[static_cast<size_t>(f * W + a)], window[static_cast<size_t>(a)], out, d);
        }

        // Head: tanh hidden layer then linear projection to embedding space.
        for (int64_t j = 0; j < d; ++j) {
            double pre = fc1b[static_cast<size_t>(j)];
            for (int64_t i = 0; i < concat_dim; ++i)
                pre += pc.concat[static_cast<size_t>(i)] * fc1w[static_cast<size_t>(i * d + j)];
            pc.hidden[static_cast<size_t>(j)] = std::tanh(pre);
        }
        double* out_row = rows.row(t);
        for (int64_t j = 0; j < d; ++j) {
            double s = fc2b[static_cast<size_t>(j)];
            for (int64_t i = 0; i < d; ++i)
                s += pc.hidden[static_cast<size_t>(i)] * fc2w[static_cast<size_t>(i * d + j)];
            out_row[j] = s;
        }
    }
    return rows;
}

void conv_backward(const ModelParams& params, std::span<const int32_t> items,
                   const ConvCache& cache, const Mat& d_rows, std::vector<double>& grads) {
    const ModelConfig& cfg = params.config;
    int64_t T = static_cast<int64_t>(items.size());
    int64_t d = cfg.embed_dim;
    int64_t W = cfg.conv_window;
    int64_t nh = cfg.conv_h_filters;
    int64_t nv = cfg.conv_v_filters;
    int64_t concat_dim = W * nh + nv * d;

    auto vw = params.store.tensor("conv.v.w");
    auto fc1w = params.store.tensor("conv.fc1.w");
    auto fc2w = params.store.tensor("conv.fc2.w");

    auto off = [&](const std::string& name) { return params.store.spec(name).offset; };
    double* d_vw = grads.data() + off("conv.v.w");
    double* d_vb = grads.data() + off("conv.v.b");
    double* d_fc1w = grads.data() + off("conv.fc1.w");
    double* d_fc1b = grads.data() + off("conv.fc1.b");
    double* d_fc2w = grads.data() + off("conv.fc2.w");
    double* d_fc2b = grads.data() + off("conv.fc2.b");
    double* d_emb = grads.data() + off("item_embeddings");

    std::vector<const double*> window(static_cast<size_t>(W));
    std::vector<double*> d_window(static_cast<size_t>(W));
    std::vector<double> d_hidden(static_cast<size_t>(d)), d_pre(static_cast<size_t>(d)),
        d_concat(static_cast<size_t>(concat_dim));

    for (int64_t t = 0; t < T; ++t) {
        const auto& pc = cache.positions[static_cast<size_t>(t)];
        const double* dy = d_rows.row(t);

        for (int64_t a = 0; a < W; ++a) {
            int32_t item = window_item(items, t, W, a);
            window[static_cast<size_t>(a)] = params.embedding(item).data();
            d_window[static_cast<size_t>(a)] = d_emb + static_cast<int64_t>(item) * d;
        }

        // Head backward.
        std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
        for (int64_t j = 0; j < d; ++j) {
            d_fc2b[j] += dy[j];
            for (int64_t i = 0; i < d; ++i) {
                d_fc2w[i * d + j] += pc.hidden[static_cast<size_t>(i)] * dy[j];
                d_hidden[static_cast<size_t>(i)] += dy[j] * fc2w[static_cast<size_t>(i * d + j)];
            }
        }
        for (int64_t j = 0; j < d; ++j) {
            double hj = pc.hidden[static_cast<size_t>(j)];
            d_pre[static_cast<size_t>(j)] = d_hidden[static_cast<size_t>(j)] * (1.0 - hj * hj);
            d_fc1b[j] += d_pre[static_cast<size_t>(j)];
        }
        std::fill(d_concat.begin(), d_concat.end(), 0.0);
        for (int64_t i = 0; i < concat_dim; ++i) {
            double ci = pc.concat[static_cast<size_t>(i)];
            for (int64_t j = 0; j < d; ++j) {
                d_fc1w[i * d + j] += ci * d_pre[static_cast<size_t>(j)];
                d_concat[static_cast<size_t>(i)] +=
                    d_pre[static_cast<size_t>(j)] * fc1w[static_cast<size_t>(i * d + j)];
            }
        }

        // Vertical backward.
        for (int64_t f = 0; f < nv; ++f) {
            const double* dvert = d_concat.data() + W * nh + f * d;
            double sum = 0.0;
            for (int64_t j = 0; j < d; ++j) sum += dvert[j];
            d_vb[f] += sum;
            for (int64_t a = 0; a < W; ++a) {
                d_vw[f * W + a] += dot(dvert, window[static_cast<size_t>(a)], d);
                axpy(vw[static_cast<size_t>(f * W + a)], dvert, d_window[static_cast<size_t>(a)],
                     d);
            }
        }

        // Horizontal backward through the pooled argmax.
        int64_t c = 0;
        for (int64_t h = 1; h <= W; ++h) {
            auto kw = params.store.tensor("conv.h" + std::to_string(h) + ".w");
            double* d_kw = grads.data() + off("conv.h" + std::to_string(h) + ".w");
            double* d_kb = grads.data() + off("conv.h" + std::to_string(h) + ".b");
            for (int64_t f = 0; f < nh; ++f) {
                double pooled = pc.concat[static_cast<size_t>(c)];
                double dp = d_concat[static_cast<size_t>(c)] * (1.0 - pooled * pooled);
                ++c;
                int64_t o = pc.argmax[static_cast<size_t>((h - 1) * nh + f)];
                const double* kernel = kw.data() + f * h * d;
                double* d_kernel = d_kw + f * h * d;
                d_kb[f] += dp;
                for (int64_t a = 0; a < h; ++a) {
                    axpy(dp, window[static_cast<size_t>(o + a)], d_kernel + a * d, d);
                    axpy(dp, kernel + a * d, d_window[static_cast<size_t>(o + a)], d);
                }
            }
        }
    }
}

}  // namespace skiprec
