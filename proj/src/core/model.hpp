#pragma once

#include <span>
#include <variant>
#include <vector>

#include "linalg.hpp"
#include "model_config.hpp"
#include "session.hpp"
#include "tensors.hpp"

namespace skiprec {

// Item embedding matrix plus encoder weights, all in one flat store so the
// optimizer and the finite-difference harness operate on a single vector.
struct ModelParams {
    ModelConfig config;
    int32_t vocab_size = 0;  // reserved tokens included
    ParameterStore store;

    std::span<const double> embedding(int32_t item) const {
        return store.tensor("item_embeddings").subspan(
            static_cast<size_t>(item) * static_cast<size_t>(config.embed_dim),
            static_cast<size_t>(config.embed_dim));
    }
};

// Every tensor entry is drawn from N(0,1) restricted to [-0.02, 0.02] by
// rejection; deterministic in the seed.
ModelParams init_params(const ModelConfig& config, int32_t vocab_size, uint64_t seed);

constexpr double kInitLow = -0.02;
constexpr double kInitHigh = 0.02;

// --- Encoder forward/backward -------------------------------------------

struct GruCache {
    Mat h;        // (T+1) x d, row 0 is the zero initial state
    Mat z, r, g;  // T x d gate activations
};

struct ConvCache {
    struct PerPosition {
        std::vector<int32_t> argmax;   // per (height, filter): winning offset
        std::vector<double> concat;    // pooled ++ vertical features
        std::vector<double> hidden;    // post-tanh fc1 output
    };
    std::vector<PerPosition> positions;
};

struct AttnCache {
    struct Block {
        Mat ln1_xhat, ln2_xhat;          // normalized inputs
        std::vector<double> ln1_rstd, ln2_rstd;
        Mat a_in, f_in;                  // sublayer inputs after LN
        Mat q, k, vv;                    // projections
        std::vector<double> attn;        // heads x T x T softmax weights
        Mat ctx;                         // attention context before Wo
        Mat h1;                          // FFN pre-activation
        Mat a1;                          // FFN post-GELU
    };
    std::vector<Block> blocks;
    Mat final_xhat;
    std::vector<double> final_rstd;
};

using EncodeCache = std::variant<GruCache, ConvCache, AttnCache>;

// Runs the configured encoder over the given item sequence and returns one
// predicted-embedding row per input position. Validates indices and length.
Mat encoder_forward(const ModelParams& params, std::span<const int32_t> items, EncodeCache& cache);

// Accumulates d(loss)/d(params) into grads (same layout as params.store)
// given d(loss)/d(output rows).
void encoder_backward(const ModelParams& params, std::span<const int32_t> items,
                      const EncodeCache& cache, const Mat& d_rows, std::vector<double>& grads);

// Convenience forward without gradient bookkeeping.
Mat encode(const ModelParams& params, std::span<const int32_t> items);

// Builds the inference input for the bidirectional encoder: the last
// max_len-1 prefix items with the end token appended. Causal encoders use
// the last max_len items unchanged.
std::vector<int32_t> inference_input(const ModelConfig& config, std::span<const int32_t> prefix);

// Row of the encoder output that predicts the next item after the prefix.
int64_t inference_row(const ModelConfig& config, int64_t input_len);

// Inner-product scores of one predicted embedding against candidate items.
std::vector<double> score_items(std::span<const double> predicted, const ModelParams& params,
                                std::span<const int32_t> candidates);

// Per-architecture internals (defined in encoders/).
Mat gru_forward(const ModelParams&, std::span<const int32_t>, GruCache&);
void gru_backward(const ModelParams&, std::span<const int32_t>, const GruCache&, const Mat&,
                  std::vector<double>&);
Mat conv_forward(const ModelParams&, std::span<const int32_t>, ConvCache&);
void conv_backward(const ModelParams&, std::span<const int32_t>, const ConvCache&, const Mat&,
                   std::vector<double>&);
Mat attn_forward(const ModelParams&, std::span<const int32_t>, AttnCache&);
void attn_backward(const ModelParams&, std::span<const int32_t>, const AttnCache&, const Mat&,
                   std::vector<double>&);

}  // namespace skiprec
