#pragma once

#include <string>

#include <json.hpp>

#include "util.hpp"

namespace skiprec {

enum class Architecture {
    recurrent,                // single-layer GRU
    convolutional,            // horizontal + vertical filter banks over a sliding window
    causal_attention,         // self-attention with an upper-triangular ban
    bidirectional_attention,  // masked-token training, end-token inference
};

Architecture parse_architecture(const std::string& name);
const char* architecture_name(Architecture arch);
bool is_causal(Architecture arch);

struct ModelConfig {
    Architecture architecture = Architecture::causal_attention;
    int embed_dim = 128;
    int max_len = 20;
    int blocks = 2;
    int heads = 8;
    double mask_prob = 0.2;  // bidirectional only

    // Convolutional variant knobs.
    int conv_window = 5;
    int conv_h_filters = 4;  // per filter height
    int conv_v_filters = 2;

    void validate() const {
        if (embed_dim < 1) fail_config("model: embed_dim must be positive");
        if (max_len < 1) fail_config("model: max_len must be positive");
        if (mask_prob < 0.0 || mask_prob > 1.0) fail_config("model: mask_prob must be in [0, 1]");
        bool attention = architecture == Architecture::causal_attention ||
                         architecture == Architecture::bidirectional_attention;
        if (attention) {
            if (blocks < 1 || heads < 1) fail_config("model: blocks and heads must be positive");
            if (embed_dim % heads != 0)
                fail_config("model: embed_dim must be divisible by heads");
        }
        if (architecture == Architecture::convolutional) {
            if (conv_window < 1 || conv_h_filters < 1 || conv_v_filters < 1)
                fail_config("model: convolutional filter counts must be positive");
        }
    }

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
};

}  // namespace skiprec
