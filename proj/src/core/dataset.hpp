#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "session.hpp"

namespace skiprec {

// Planted structure behind a synthetic dataset: unit-norm item factors and
// one taste vector per session.
struct GroundTruth {
    int64_t catalog = 0;
    int64_t dim = 0;
    int64_t sessions = 0;
    std::vector<double> item_factors;  // catalog x dim, row-major
    std::vector<double> tastes;        // sessions x dim, row-major

    const double* item_row(int64_t c) const { return item_factors.data() + c * dim; }
    const double* taste_row(int64_t s) const { return tastes.data() + s * dim; }
};

// A fully preprocessed dataset: vocabulary plus indexed sessions, optionally
// carrying the synthetic ground truth used by oracle evaluation.
struct Dataset {
    Vocabulary vocab;
    std::vector<Session> sessions;
    nlohmann::json source;  // provenance echoed into the manifest
    std::optional<GroundTruth> truth;

    size_t event_count() const;
    size_t skip_count() const;
    double skip_rate() const;
    uint64_t content_hash() const;

    nlohmann::json manifest(const std::string& prefix) const;

    // Writes <prefix>.manifest.json, <prefix>.sessions.txt and, when ground
    // truth is present, <prefix>.truth.bin.
    void save(const std::string& prefix) const;
    static Dataset load(const std::string& prefix);
};

inline constexpr const char* kDatasetMagic = "SKIPREC-DS/1";
inline constexpr const char* kGroundTruthMagic = "SKIPREC-GT/1";

}  // namespace skiprec
