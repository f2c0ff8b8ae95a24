#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "model.hpp"
#include "rng.hpp"
#include "session.hpp"

namespace skiprec {

enum class NceScope {
    between_next_positive,  // skips strictly between t and its next positive
    all_session_skips,      // every skipped track in the session
};

NceScope parse_nce_scope(const std::string& name);
const char* nce_scope_name(NceScope scope);

struct LossConfig {
    double alpha = 1.0;
    double beta = 0.5;
    int num_negatives = 1000;
    NceScope nce_scope = NceScope::all_session_skips;

    void validate() const {
        if (alpha < 0.0 || beta < 0.0) fail_config("loss: alpha and beta must be >= 0");
        if (num_negatives < 1) fail_config("loss: num_negatives must be >= 1");
    }
};

struct LossBreakdown {
    double nll = 0.0;
    double nce = 0.0;
    double combined = 0.0;
    int64_t contributing_positions = 0;
};

// Uniform draw of n distinct real items absent from the session. Falls back
// to every eligible item (counting a warning) when fewer than n exist.
std::vector<int32_t> sample_negatives(const Vocabulary& vocab, const Session& session, int n,
                                      Rng& rng, int64_t* shortfall_warnings = nullptr);

// -log( exp(s+) / (exp(s+) + sum exp(s-)) ), max-subtracted.
double nll_sampled_softmax(double target_score, std::span<const double> negative_scores);

// Eq-style contrastive term with f(a,b) = exp(cos(a,b)); zero-norm vectors
// take cosine 0 by convention. Negatives enter the sum in list order.
double info_nce(std::span<const double> predicted, std::span<const double> positive,
                const std::vector<std::span<const double>>& negatives);

// One encoder pass worth of supervision: the input sequence, the supervised
// rows with their next-positive targets and contrastive negatives, and the
// session's shared sampled-softmax negatives.
struct PositionTarget {
    int32_t row = 0;
    int32_t target_item = 0;
    std::vector<int32_t> nce_negative_items;
};

struct TrainingExample {
    std::vector<int32_t> input_items;
    std::vector<PositionTarget> targets;
    std::vector<int32_t> sampled_negatives;
};

// Causal encoders: every position with a next positive is supervised.
TrainingExample make_causal_example(const Session& session, const TargetMap& targets,
                                    const LossConfig& loss_config,
                                    std::vector<int32_t> sampled_negatives);

// Bidirectional encoder: the last item is withheld and the end token takes
// its slot; supervision lands on the masked positions (toward their next
// positives) and on the end token (toward the withheld item when positive).
TrainingExample make_bidirectional_example(const Session& session, const TargetMap& targets,
                                           const LossConfig& loss_config,
                                           std::span<const int32_t> masked_items,
                                           std::span<const int32_t> masked_positions,
                                           std::vector<int32_t> sampled_negatives);

enum class Reduction {
    mean,  // mean over contributing positions per example, then over examples
    sum,   // plain sum over all contributing positions
};

// Combined objective over a batch; when grads is non-null, accumulates exact
// analytic gradients for every parameter. Errors when no position in the
// batch contributes or the loss goes non-finite.
LossBreakdown combined_loss(const ModelParams& params, const LossConfig& loss_config,
                            std::span<const TrainingExample> batch,
                            Reduction reduction = Reduction::mean,
                            std::vector<double>* grads = nullptr, int64_t batch_id = -1);

}  // namespace skiprec
