#pragma once

#include <string>

#include <json.hpp>

#include "tensors.hpp"

namespace skiprec {

inline constexpr const char* kCheckpointMagic = "SKIPREC-CKPT/1";

// Versioned container: magic line, little-endian u32 header length, JSON
// header (kind, configs, hashes, named-tensor index), then raw
// little-endian float64 tensor data.
struct Checkpoint {
    std::string kind;         // "sequential" | "baseline"
    nlohmann::json header;    // kind-specific configuration and metadata
    ParameterStore tensors;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);
};

}  // namespace skiprec
