#include "objective.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace skiprec {

NceScope parse_nce_scope(const std::string& name) {
    if (name == "between-next-positive") return NceScope::between_next_positive;
    if (name == "all-session-skips") return NceScope::all_session_skips;
    fail_config("unknown nce_negative_scope: '" + name + "'");
}

const char* nce_scope_name(NceScope scope) {
    return scope == NceScope::between_next_positive ? "between-next-positive"
                                                    : "all-session-skips";
}

std::vector<int32_t> sample_negatives(const Vocabulary& vocab, const Session& session, int n,
                                      Rng& rng, int64_t* shortfall_warnings) {
    std::unordered_set<int32_t> seen(session.items.begin(), session.items.end());
    std::vector<int32_t> eligible;
    eligible.reserve(static_cast<size_t>(vocab.real_item_count()));
    for (int32_t idx = Vocabulary::kFirstItem; idx < vocab.size(); ++idx)
        if (!seen.count(idx)) eligible.push_back(idx);

    if (static_cast<size_t>(n) >= eligible.size()) {
        if (static_cast<size_t>(n) > eligible.size() && shortfall_warnings)
            ++*shortfall_warnings;
        return eligible;
    }
    // Partial Fisher-Yates over the ascending eligible list.
    for (size_t i = 0; i < static_cast<size_t>(n); ++i) {
        size_t j = i + static_cast<size_t>(rng.next_below(eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
    }
    eligible.resize(static_cast<size_t>(n));
    return eligible;
}

double nll_sampled_softmax(double target_score, std::span<const double> negative_scores) {
    double mx = target_score;
    for (double s : negative_scores) mx = std::max(mx, s);
    double z = std::exp(target_score - mx);
    for (double s : negative_scores) z += std::exp(s - mx);
    return std::log(z) + mx - target_score;
}

namespace {

double cosine_or_zero(std::span<const double> a, std::span<const double> b, double* na_out,
                      double* nb_out) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na_out) *na_out = na;
    if (nb_out) *nb_out = nb;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (na * nb);
}

}  // namespace

double info_nce(std::span<const double> predicted, std::span<const double> positive,
                const std::vector<std::span<const double>>& negatives) {
    if (negatives.empty()) return 0.0;
    double c_pos = cosine_or_zero(predicted, positive, nullptr, nullptr);
    double mx = c_pos;
    std::vector<double> c_neg(negatives.size());
    for (size_t j = 0; j < negatives.size(); ++j) {
        c_neg[j] = cosine_or_zero(predicted, negatives[j], nullptr, nullptr);
        mx = std::max(mx, c_neg[j]);
    }
    double z = std::exp(c_pos - mx);
    for (double c : c_neg) z += std::exp(c - mx);
    return std::log(z) + mx - c_pos;
}

TrainingExample make_causal_example(const Session& session, const TargetMap& targets,
                                    const LossConfig& loss_config,
                                    std::vector<int32_t> sampled_negatives) {
    TrainingExample ex;
    ex.input_items = session.items;
    ex.sampled_negatives = std::move(sampled_negatives);
    for (size_t t = 0; t < session.size(); ++t) {
        int32_t m = targets.next_positive[t];
        if (m < 0) continue;
        PositionTarget pt;
        pt.row = static_cast<int32_t>(t);
        pt.target_item = session.items[static_cast<size_t>(m)];
        const std::vector<int32_t>& positions =
            loss_config.nce_scope == NceScope::between_next_positive ? targets.negatives_between[t]
                                                                     : targets.negatives_all;
        std::vector<int32_t> sorted = positions;
        std::sort(sorted.begin(), sorted.end());
        pt.nce_negative_items.reserve(sorted.size());
        for (int32_t pos : sorted)
            pt.nce_negative_items.push_back(session.items[static_cast<size_t>(pos)]);
        ex.targets.push_back(std::move(pt));
    }
    return ex;
}

TrainingExample make_bidirectional_example(const Session& session, const TargetMap& targets,
                                           const LossConfig& loss_config,
                                           std::span<const int32_t> masked_items,
                                           std::span<const int32_t> masked_positions,
                                           std::vector<int32_t> sampled_negatives) {
    size_t n = session.size();
    if (masked_items.size() + 1 != n && !(n == 1 && masked_items.empty()))
        fail_config("bidirectional example: masked sequence must cover all but the last item");

    TrainingExample ex;
    ex.input_items.assign(masked_items.begin(), masked_items.end());
    ex.input_items.push_back(Vocabulary::kEnd);
    ex.sampled_negatives = std::move(sampled_negatives);

    auto nce_negatives_at = [&](size_t t) {
        const std::vector<int32_t>& positions =
            loss_config.nce_scope == NceScope::between_next_positive ? targets.negatives_between[t]
                                                                     : targets.negatives_all;
        std::vector<int32_t> sorted = positions;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int32_t> items;
        items.reserve(sorted.size());
        for (int32_t pos : sorted) items.push_back(session.items[static_cast<size_t>(pos)]);
        return items;
    };

    for (int32_t t : masked_positions) {
        int32_t m = targets.next_positive[static_cast<size_t>(t)];
        if (m < 0) continue;
        PositionTarget pt;
        pt.row = t;
        pt.target_item = session.items[static_cast<size_t>(m)];
        pt.nce_negative_items = nce_negatives_at(static_cast<size_t>(t));
        ex.targets.push_back(std::move(pt));
    }

    // End token: predicts the withheld final item when it is positive.
    if (!session.skipped[n - 1]) {
        PositionTarget pt;
        pt.row = static_cast<int32_t>(ex.input_items.size()) - 1;
        pt.target_item = session.items[n - 1];
        if (loss_config.nce_scope == NceScope::all_session_skips)
            pt.nce_negative_items = nce_negatives_at(n - 1);  // negatives_all regardless of t
        ex.targets.push_back(std::move(pt));
    }
    return ex;
}

namespace {

// Accumulates d(cos(u,v)) into du and dv with weight w.
void cosine_backward(std::span<const double> u, std::span<const double> v, double w, double* du,
                     double* dv) {
    double nu = 0.0, nv = 0.0, uv = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        nu += u[i] * u[i];
        nv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu == 0.0 || nv == 0.0) return;  // cosine pinned to 0, zero gradient
    double inv = 1.0 / (nu * nv);
    double c = uv * inv;
    for (size_t i = 0; i < u.size(); ++i) {
        du[i] += w * (v[i] * inv - c * u[i] / (nu * nu));
        dv[i] += w * (u[i] * inv - c * v[i] / (nv * nv));
    }
}

}  // namespace

LossBreakdown combined_loss(const ModelParams& params, const LossConfig& loss_config,
                            std::span<const TrainingExample> batch, Reduction reduction,
                            std::vector<double>* grads, int64_t batch_id) {
    loss_config.validate();
    int64_t d = params.config.embed_dim;

    int64_t nonempty = 0;
    for (const auto& ex : batch)
        if (!ex.targets.empty()) ++nonempty;
    if (nonempty == 0)
        fail_config("combined_loss: batch " + std::to_string(batch_id) +
                    " has zero contributing positions");

    LossBreakdown out;
    KahanSum nll_sum, nce_sum;
    const bool use_nce = loss_config.beta != 0.0;

    std::vector<double> exp_scores;
    std::vector<double> c_neg;
    for (const auto& ex : batch) {
        if (ex.targets.empty()) continue;
        double example_w = reduction == Reduction::mean
                               ? 1.0 / (static_cast<double>(nonempty) *
                                        static_cast<double>(ex.targets.size()))
                               : 1.0;

        EncodeCache cache;
        Mat rows = encoder_forward(params, ex.input_items, cache);
        Mat d_rows(rows.rows, rows.cols);

        KahanSum ex_nll, ex_nce;
        for (const auto& pt : ex.targets) {
            std::span<const double> row{rows.row(pt.row), static_cast<size_t>(d)};
            auto target_emb = params.embedding(pt.target_item);

            // Sampled-softmax NLL over the shared negative set.
            double s_target = dot(row, target_emb);
            double mx = s_target;
            exp_scores.resize(ex.sampled_negatives.size());
            for (size_t j = 0; j < ex.sampled_negatives.size(); ++j) {
                exp_scores[j] = dot(row, params.embedding(ex.sampled_negatives[j]));
                mx = std::max(mx, exp_scores[j]);
            }
            double z = std::exp(s_target - mx);
            for (double& s : exp_scores) {
                s = std::exp(s - mx);
                z += s;
            }
            ex_nll.add(std::log(z) + mx - s_target);

            if (grads) {
                double w = loss_config.alpha * example_w;
                double p_target = std::exp(s_target - mx) / z;
                double* d_row = d_rows.row(pt.row);
                double* d_emb = grads->data() + params.store.spec("item_embeddings").offset;
                axpy(w * (p_target - 1.0), target_emb.data(), d_row, d);
                axpy(w * (p_target - 1.0), row.data(),
                     d_emb + static_cast<int64_t>(pt.target_item) * d, d);
                for (size_t j = 0; j < ex.sampled_negatives.size(); ++j) {
                    double p = exp_scores[j] / z;
                    auto neg_emb = params.embedding(ex.sampled_negatives[j]);
                    axpy(w * p, neg_emb.data(), d_row, d);
                    axpy(w * p, row.data(),
                         d_emb + static_cast<int64_t>(ex.sampled_negatives[j]) * d, d);
                }
            }

            // Contrastive term over the session's skipped tracks.
            if (use_nce && !pt.nce_negative_items.empty()) {
                double c_pos = cosine_or_zero(row, target_emb, nullptr, nullptr);
                double cmx = c_pos;
                c_neg.resize(pt.nce_negative_items.size());
                for (size_t j = 0; j < pt.nce_negative_items.size(); ++j) {
                    c_neg[j] = cosine_or_zero(row, params.embedding(pt.nce_negative_items[j]),
                                              nullptr, nullptr);
                    cmx = std::max(cmx, c_neg[j]);
                }
                double cz = std::exp(c_pos - cmx);
                for (double c : c_neg) cz += std::exp(c - cmx);
                ex_nce.add(std::log(cz) + cmx - c_pos);

                if (grads) {
                    double w = loss_config.beta * example_w;
                    double q_pos = std::exp(c_pos - cmx) / cz;
                    double* d_row = d_rows.row(pt.row);
                    double* d_emb = grads->data() + params.store.spec("item_embeddings").offset;
                    cosine_backward(row, target_emb, w * (q_pos - 1.0), d_row,
                                    d_emb + static_cast<int64_t>(pt.target_item) * d);
                    for (size_t j = 0; j < pt.nce_negative_items.size(); ++j) {
                        double q = std::exp(c_neg[j] - cmx) / cz;
                        cosine_backward(
                            row, params.embedding(pt.nce_negative_items[j]), w * q, d_row,
                            d_emb + static_cast<int64_t>(pt.nce_negative_items[j]) * d);
                    }
                }
            }
        }

        double pos_w = reduction == Reduction::mean
                           ? 1.0 / static_cast<double>(ex.targets.size())
                           : 1.0;
        double batch_w = reduction == Reduction::mean ? 1.0 / static_cast<double>(nonempty) : 1.0;
        nll_sum.add(ex_nll.value() * pos_w * batch_w);
        nce_sum.add(ex_nce.value() * pos_w * batch_w);
        out.contributing_positions += static_cast<int64_t>(ex.targets.size());

        if (grads) encoder_backward(params, ex.input_items, cache, d_rows, *grads);
    }

    out.nll = nll_sum.value();
    out.nce = nce_sum.value();
    out.combined = loss_config.alpha * out.nll + loss_config.beta * out.nce;
    if (!std::isfinite(out.combined))
        fail_numeric("combined_loss: non-finite loss in batch " + std::to_string(batch_id));
    return out;
}

}  // namespace skiprec
