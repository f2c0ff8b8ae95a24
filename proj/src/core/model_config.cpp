#include "model_config.hpp"

namespace skiprec {

Architecture parse_architecture(const std::string& name) {
    if (name == "recurrent" || name == "gru4rec" || name == "gru") return Architecture::recurrent;
    if (name == "convolutional" || name == "caser") return Architecture::convolutional;
    if (name == "causal-attention" || name == "sasrec") return Architecture::causal_attention;
    if (name == "bidirectional-attention" || name == "bert4rec")
        return Architecture::bidirectional_attention;
    fail_config("unknown architecture: '" + name +
                "' (expected recurrent|convolutional|causal-attention|bidirectional-attention "
                "or gru4rec|caser|sasrec|bert4rec)");
}

const char* architecture_name(Architecture arch) {
    switch (arch) {
        case Architecture::recurrent: return "recurrent";
        case Architecture::convolutional: return "convolutional";
        case Architecture::causal_attention: return "causal-attention";
        case Architecture::bidirectional_attention: return "bidirectional-attention";
    }
    return "?";
}

bool is_causal(Architecture arch) { return arch != Architecture::bidirectional_attention; }

nlohmann::json ModelConfig::to_json() const {
    return {
        {"architecture", architecture_name(architecture)},
        {"embed_dim", embed_dim},
        {"max_len", max_len},
        {"blocks", blocks},
        {"heads", heads},
        {"mask_prob", mask_prob},
        {"conv_window", conv_window},
        {"conv_h_filters", conv_h_filters},
        {"conv_v_filters", conv_v_filters},
    };
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.architecture = parse_architecture(j.at("architecture").get<std::string>());
    cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
    cfg.max_len = j.value("max_len", cfg.max_len);
    cfg.blocks = j.value("blocks", cfg.blocks);
    cfg.heads = j.value("heads", cfg.heads);
    cfg.mask_prob = j.value("mask_prob", cfg.mask_prob);
    cfg.conv_window = j.value("conv_window", cfg.conv_window);
    cfg.conv_h_filters = j.value("conv_h_filters", cfg.conv_h_filters);
    cfg.conv_v_filters = j.value("conv_v_filters", cfg.conv_v_filters);
    cfg.validate();
    return cfg;
}

}  // namespace skiprec
