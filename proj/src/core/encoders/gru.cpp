#include <cmath>

#include "../model.hpp"

namespace skiprec {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y += x . W  for W stored row-major [in, out]
inline void mat_vec(const double* x, std::span<const double> w, double* y, int64_t in,
                    int64_t out) {
    for (int64_t i = 0; i < in; ++i) {
        double xi = x[i];
        if (xi == 0.0) continue;
        const double* wr = w.data() + i * out;
        for (int64_t j = 0; j < out; ++j) y[j] += xi * wr[j];
    }
}

// dx += dy . W^T
inline void mat_vec_t(const double* dy, std::span<const double> w, double* dx, int64_t in,
                      int64_t out) {
    for (int64_t i = 0; i < in; ++i) {
        const double* wr = w.data() + i * out;
        double s = 0.0;
        for (int64_t j = 0; j < out; ++j) s += dy[j] * wr[j];
        dx[i] += s;
    }
}

// dW += x (outer) dy
inline void outer_acc(const double* x, const double* dy, double* dw, int64_t in, int64_t out) {
    for (int64_t i = 0; i < in; ++i) {
        double xi = x[i];
        if (xi == 0.0) continue;
        double* wr = dw + i * out;
        for (int64_t j = 0; j < out; ++j) wr[j] += xi * dy[j];
    }
}

}  // namespace

Mat gru_forward(const ModelParams& params, std::span<const int32_t> items, GruCache& cache) {
    int64_t T = static_cast<int64_t>(items.size());
    int64_t d = params.config.embed_dim;
    auto wz = params.store.tensor("gru.wz"), uz = params.store.tensor("gru.uz");
    auto wr = params.store.tensor("gru.wr"), ur = params.store.tensor("gru.ur");
    auto wh = params.store.tensor("gru.wh"), uh = params.store.tensor("gru.uh");
    auto bz = params.store.tensor("gru.bz"), br = params.store.tensor("gru.br"),
         bh = params.store.tensor("gru.bh");

    cache.h = Mat(T + 1, d);
    cache.z = Mat(T, d);
    cache.r = Mat(T, d);
    cache.g = Mat(T, d);
    Mat rows(T, d);

    std::vector<double> pre_z(d), pre_r(d), pre_g(d), rh(d);
    for (int64_t t = 0; t < T; ++t) {
        const double* x = params.embedding(items[t]).data();
        const double* h_prev = cache.h.row(t);

        std::copy(bz.begin(), bz.end(), pre_z.begin());
        mat_vec(x, wz, pre_z.data(), d, d);
        mat_vec(h_prev, uz, pre_z.data(), d, d);

        std::copy(br.begin(), br.end(), pre_r.begin());
        mat_vec(x, wr, pre_r.data(), d, d);
        mat_vec(h_prev, ur, pre_r.data(), d, d);

        for (int64_t j = 0; j < d; ++j) {
            cache.z.at(t, j) = sigmoid(pre_z[j]);
            cache.r.at(t, j) = sigmoid(pre_r[j]);
            rh[j] = cache.r.at(t, j) * h_prev[j];
        }

        std::copy(bh.begin(), bh.end(), pre_g.begin());
        mat_vec(x, wh, pre_g.data(), d, d);
        mat_vec(rh.data(), uh, pre_g.data(), d, d);

        double* h = cache.h.row(t + 1);
        for (int64_t j = 0; j < d; ++j) {
            cache.g.at(t, j) = std::tanh(pre_g[j]);
            h[j] = (1.0 - cache.z.at(t, j)) * h_prev[j] + cache.z.at(t, j) * cache.g.at(t, j);
            rows.at(t, j) = h[j];
        }
    }
    return rows;
}

void gru_backward(const ModelParams& params, std::span<const int32_t> items, const GruCache& cache,
                  const Mat& d_rows, std::vector<double>& grads) {
    int64_t T = static_cast<int64_t>(items.size());
    int64_t d = params.config.embed_dim;
    auto wz = params.store.tensor("gru.wz"), uz = params.store.tensor("gru.uz");
    auto wr = params.store.tensor("gru.wr"), ur = params.store.tensor("gru.ur");
    auto wh = params.store.tensor("gru.wh"), uh = params.store.tensor("gru.uh");

    auto off = [&](const char* name) { return params.store.spec(name).offset; };
    double* d_wz = grads.data() + off("gru.wz");
    double* d_uz = grads.data() + off("gru.uz");
    double* d_bz = grads.data() + off("gru.bz");
    double* d_wr = grads.data() + off("gru.wr");
    double* d_ur = grads.data() + off("gru.ur");
    double* d_br = grads.data() + off("gru.br");
    double* d_wh = grads.data() + off("gru.wh");
    double* d_uh = grads.data() + off("gru.uh");
    double* d_bh = grads.data() + off("gru.bh");
    double* d_emb = grads.data() + off("item_embeddings");

    std::vector<double> carry(d, 0.0);  // dL/dh_t flowing backwards
    std::vector<double> dh(d), dz(d), dg(d), dg_pre(d), d_rh(d), dr(d), dz_pre(d), dr_pre(d),
        dx(d), dh_prev(d), rh(d);

    for (int64_t t = T - 1; t >= 0; --t) {
        const double* x = params.embedding(items[t]).data();
        const double* h_prev = cache.h.row(t);
        const double* z = cache.z.row(t);
        const double* r = cache.r.row(t);
        const double* g = cache.g.row(t);

        for (int64_t j = 0; j < d; ++j) {
            dh[j] = d_rows.at(t, j) + carry[j];
            dz[j] = dh[j] * (g[j] - h_prev[j]);
            dg[j] = dh[j] * z[j];
            dh_prev[j] = dh[j] * (1.0 - z[j]);
            dg_pre[j] = dg[j] * (1.0 - g[j] * g[j]);
            rh[j] = r[j] * h_prev[j];
        }

        outer_acc(x, dg_pre.data(), d_wh, d, d);
        outer_acc(rh.data(), dg_pre.data(), d_uh, d, d);
        for (int64_t j = 0; j < d; ++j) d_bh[j] += dg_pre[j];

        std::fill(dx.begin(), dx.end(), 0.0);
        mat_vec_t(dg_pre.data(), wh, dx.data(), d, d);
        std::fill(d_rh.begin(), d_rh.end(), 0.0);
        mat_vec_t(dg_pre.data(), uh, d_rh.data(), d, d);

        for (int64_t j = 0; j < d; ++j) {
            dr[j] = d_rh[j] * h_prev[j];
            dh_prev[j] += d_rh[j] * r[j];
            dz_pre[j] = dz[j] * z[j] * (1.0 - z[j]);
            dr_pre[j] = dr[j] * r[j] * (1.0 - r[j]);
        }

        outer_acc(x, dz_pre.data(), d_wz, d, d);
        outer_acc(h_prev, dz_pre.data(), d_uz, d, d);
        outer_acc(x, dr_pre.data(), d_wr, d, d);
        outer_acc(h_prev, dr_pre.data(), d_ur, d, d);
        for (int64_t j = 0; j < d; ++j) {
            d_bz[j] += dz_pre[j];
            d_br[j] += dr_pre[j];
        }
        mat_vec_t(dz_pre.data(), wz, dx.data(), d, d);
        mat_vec_t(dr_pre.data(), wr, dx.data(), d, d);
        mat_vec_t(dz_pre.data(), uz, dh_prev.data(), d, d);
        mat_vec_t(dr_pre.data(), ur, dh_prev.data(), d, d);

        axpy(1.0, dx.data(), d_emb + static_cast<int64_t>(items[t]) * d, d);
        carry = dh_prev;
    }
}

}  // namespace skiprec
