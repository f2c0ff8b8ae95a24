#include "model.hpp"

#include <algorithm>

#include "rng.hpp"

namespace skiprec {

namespace {

constexpr uint64_t kInitStream = 0x494e4954ULL;

void allocate_tensors(ModelParams& p) {
    const ModelConfig& c = p.config;
    int64_t d = c.embed_dim;
    p.store.add("item_embeddings", {p.vocab_size, d});
    switch (c.architecture) {
        case Architecture::recurrent:
            for (const char* gate : {"z", "r", "h"}) {
                p.store.add(std::string("gru.w") + gate, {d, d});
                p.store.add(std::string("gru.u") + gate, {d, d});
                p.store.add(std::string("gru.b") + gate, {d});
            }
            break;
        case Architecture::convolutional: {
            for (int h = 1; h <= c.conv_window; ++h) {
                std::string base = "conv.h" + std::to_string(h);
                p.store.add(base + ".w", {c.conv_h_filters, h, d});
                p.store.add(base + ".b", {c.conv_h_filters});
            }
            p.store.add("conv.v.w", {c.conv_v_filters, c.conv_window});
            p.store.add("conv.v.b", {c.conv_v_filters});
            int64_t concat = static_cast<int64_t>(c.conv_window) * c.conv_h_filters +
                             static_cast<int64_t>(c.conv_v_filters) * d;
            p.store.add("conv.fc1.w", {concat, d});
            p.store.add("conv.fc1.b", {d});
            p.store.add("conv.fc2.w", {d, d});
            p.store.add("conv.fc2.b", {d});
            break;
        }
        case Architecture::causal_attention:
        case Architecture::bidirectional_attention: {
            p.store.add("pos_embeddings", {c.max_len, d});
            for (int b = 0; b < c.blocks; ++b) {
                std::string base = "blk" + std::to_string(b);
                p.store.add(base + ".attn_ln.gain", {d});
                p.store.add(base + ".attn_ln.bias", {d});
                for (const char* w : {"wq", "wk", "wv", "wo"})
                    p.store.add(base + "." + w, {d, d});
                for (const char* b2 : {"bq", "bk", "bv", "bo"})
                    p.store.add(base + "." + b2, {d});
                p.store.add(base + ".ffn_ln.gain", {d});
                p.store.add(base + ".ffn_ln.bias", {d});
                p.store.add(base + ".w1", {d, d});
                p.store.add(base + ".b1", {d});
                p.store.add(base + ".w2", {d, d});
                p.store.add(base + ".b2", {d});
            }
            p.store.add("final_ln.gain", {d});
            p.store.add("final_ln.bias", {d});
            break;
        }
    }
}

}  // namespace

ModelParams init_params(const ModelConfig& config, int32_t vocab_size, uint64_t seed) {
    config.validate();
    if (vocab_size < Vocabulary::kFirstItem)
        fail_config("init_params: vocab_size must cover the reserved tokens");
    ModelParams p;
    p.config = config;
    p.vocab_size = vocab_size;
    allocate_tensors(p);
    Rng rng(mix_seed({seed, kInitStream}));
    for (double& w : p.store.data()) w = rng.next_truncated_normal(kInitLow, kInitHigh);
    return p;
}

Mat encoder_forward(const ModelParams& params, std::span<const int32_t> items,
                    EncodeCache& cache) {
    if (items.empty()) fail_config("encode: empty input");
    if (static_cast<int64_t>(items.size()) > params.config.max_len)
        fail_config("encode: input length " + std::to_string(items.size()) +
                    " exceeds max_len " + std::to_string(params.config.max_len));
    for (int32_t it : items)
        if (it < 0 || it >= params.vocab_size)
            fail_config("encode: item index " + std::to_string(it) + " out of range");

    switch (params.config.architecture) {
        case Architecture::recurrent:
            cache.emplace<GruCache>();
            return gru_forward(params, items, std::get<GruCache>(cache));
        case Architecture::convolutional:
            cache.emplace<ConvCache>();
            return conv_forward(params, items, std::get<ConvCache>(cache));
        case Architecture::causal_attention:
        case Architecture::bidirectional_attention:
            cache.emplace<AttnCache>();
            return attn_forward(params, items, std::get<AttnCache>(cache));
    }
    fail_config("encode: unknown architecture");
}

void encoder_backward(const ModelParams& params, std::span<const int32_t> items,
                      const EncodeCache& cache, const Mat& d_rows, std::vector<double>& grads) {
    if (grads.size() != params.store.size())
        fail_config("encoder_backward: gradient buffer size mismatch");
    switch (params.config.architecture) {
        case Architecture::recurrent:
            gru_backward(params, items, std::get<GruCache>(cache), d_rows, grads);
            return;
        case Architecture::convolutional:
            conv_backward(params, items, std::get<ConvCache>(cache), d_rows, grads);
            return;
        case Architecture::causal_attention:
        case Architecture::bidirectional_attention:
            attn_backward(params, items, std::get<AttnCache>(cache), d_rows, grads);
            return;
    }
}

Mat encode(const ModelParams& params, std::span<const int32_t> items) {
    EncodeCache cache;
    return encoder_forward(params, items, cache);
}

std::vector<int32_t> inference_input(const ModelConfig& config, std::span<const int32_t> prefix) {
    if (prefix.empty()) fail_config("inference_input: empty prefix");
    std::vector<int32_t> input;
    if (config.architecture == Architecture::bidirectional_attention) {
        size_t keep = std::min(prefix.size(), static_cast<size_t>(config.max_len - 1));
        input.assign(prefix.end() - static_cast<ptrdiff_t>(keep), prefix.end());
        input.push_back(Vocabulary::kEnd);
    } else {
        size_t keep = std::min(prefix.size(), static_cast<size_t>(config.max_len));
        input.assign(prefix.end() - static_cast<ptrdiff_t>(keep), prefix.end());
    }
    return input;
}

int64_t inference_row(const ModelConfig& config, int64_t input_len) {
    (void)config;
    return input_len - 1;  // last row: final position (causal) or end token (bidirectional)
}

std::vector<double> score_items(std::span<const double> predicted, const ModelParams& params,
                                std::span<const int32_t> candidates) {
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (int32_t c : candidates) {
        if (c < 0 || c >= params.vocab_size)
            fail_config("score_items: candidate index out of range");
        scores.push_back(dot(predicted, params.embedding(c)));
    }
    return scores;
}

}  // namespace skiprec
