#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dataset.hpp"

namespace skiprec {

struct SyntheticConfig {
    int64_t catalog_size = 500;
    int64_t latent_dim = 8;
    int64_t sessions = 2000;
    int64_t min_session_length = 5;
    int64_t max_session_length = 20;
    double skip_threshold = 0.1;  // cosine affinity below this is a skip
    double coherence = 0.8;       // probability the next draw tracks the session taste
    uint64_t seed = 1;

    void validate() const;
};

// Draws a taste vector per session and fills it with coherence-weighted item
// draws; an item is skipped iff its cosine affinity to the taste is below
// skip_threshold. Fully deterministic in the seed. The returned dataset
// carries the ground truth as a sidecar.
Dataset generate_dataset(const SyntheticConfig& config);

double cosine(std::span<const double> a, std::span<const double> b);

// Candidates sorted by descending affinity to the taste vector, ties broken
// by ascending catalog index. Candidates are catalog indices (0-based).
std::vector<int64_t> oracle_rank(const GroundTruth& truth, std::span<const double> taste,
                                 std::span<const int64_t> candidates);

}  // namespace skiprec
