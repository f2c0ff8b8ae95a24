#include "synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "rng.hpp"

namespace skiprec {

namespace {

constexpr uint64_t kItemStream = 0x49544d53ULL;     // factor matrix
constexpr uint64_t kSessionStream = 0x53455353ULL;  // per-session draws

// How many uniform candidates compete when a coherent draw is made. Larger
// values pull draws closer to the taste vector.
constexpr int kCoherentCandidates = 8;

void fill_unit_rows(std::vector<double>& out, int64_t rows, int64_t dim, Rng& rng) {
    out.resize(static_cast<size_t>(rows * dim));
    for (int64_t r = 0; r < rows; ++r) {
        double* row = out.data() + r * dim;
        double norm_sq = 0.0;
        for (int64_t j = 0; j < dim; ++j) {
            row[j] = rng.next_normal();
            norm_sq += row[j] * row[j];
        }
        if (norm_sq == 0.0) {
            row[0] = 1.0;  // zero draws are measure zero, but stay total
            norm_sq = 1.0;
        }
        double inv = 1.0 / std::sqrt(norm_sq);
        for (int64_t j = 0; j < dim; ++j) row[j] *= inv;
    }
}

}  // namespace

void SyntheticConfig::validate() const {
    if (catalog_size < 1) fail_config("synthetic: catalog_size must be positive");
    if (latent_dim < 1) fail_config("synthetic: latent_dim must be positive");
    if (sessions < 0) fail_config("synthetic: sessions must be non-negative");
    if (min_session_length < 1 || min_session_length > max_session_length)
        fail_config("synthetic: need 1 <= min_session_length <= max_session_length");
    if (catalog_size < max_session_length)
        fail_config("synthetic: catalog smaller than requested session length");
    if (coherence < 0.0 || coherence > 1.0) fail_config("synthetic: coherence must be in [0, 1]");
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Dataset generate_dataset(const SyntheticConfig& config) {
    config.validate();

    GroundTruth gt;
    gt.catalog = config.catalog_size;
    gt.dim = config.latent_dim;
    gt.sessions = config.sessions;

    Rng item_rng(mix_seed({config.seed, kItemStream}));
    fill_unit_rows(gt.item_factors, gt.catalog, gt.dim, item_rng);

    Dataset ds;
    gt.tastes.reserve(static_cast<size_t>(config.sessions * config.latent_dim));
    ds.sessions.reserve(static_cast<size_t>(config.sessions));

    int64_t span = config.max_session_length - config.min_session_length + 1;
    for (int64_t s = 0; s < config.sessions; ++s) {
        Rng rng(mix_seed({config.seed, kSessionStream, static_cast<uint64_t>(s)}));

        std::vector<double> taste;
        fill_unit_rows(taste, 1, gt.dim, rng);

        int64_t len = config.min_session_length + static_cast<int64_t>(rng.next_below(
                                                      static_cast<uint64_t>(span)));
        Session session;
        session.items.reserve(static_cast<size_t>(len));
        session.skipped.reserve(static_cast<size_t>(len));
        for (int64_t k = 0; k < len; ++k) {
            int64_t item;
            if (rng.next_double() < config.coherence) {
                // Best-of-k candidate draw: approximates sampling near the taste.
                item = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(gt.catalog)));
                double best = cosine({gt.item_row(item), static_cast<size_t>(gt.dim)},
                                     {taste.data(), static_cast<size_t>(gt.dim)});
                for (int c = 1; c < kCoherentCandidates; ++c) {
                    int64_t cand =
                        static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(gt.catalog)));
                    double aff = cosine({gt.item_row(cand), static_cast<size_t>(gt.dim)},
                                        {taste.data(), static_cast<size_t>(gt.dim)});
                    if (aff > best || (aff == best && cand < item)) {
                        best = aff;
                        item = cand;
                    }
                }
            } else {
                item = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(gt.catalog)));
            }
            double affinity = cosine({gt.item_row(item), static_cast<size_t>(gt.dim)},
                                     {taste.data(), static_cast<size_t>(gt.dim)});
            session.items.push_back(Vocabulary::kFirstItem + static_cast<int32_t>(item));
            session.skipped.push_back(affinity < config.skip_threshold ? 1 : 0);
        }
        ds.sessions.push_back(std::move(session));
        gt.tastes.insert(gt.tastes.end(), taste.begin(), taste.end());
    }

    for (int64_t c = 0; c < config.catalog_size; ++c)
        ds.vocab.add("syn:" + std::to_string(c));

    ds.source = {
        {"kind", "synthetic"},
        {"catalog_size", config.catalog_size},
        {"latent_dim", config.latent_dim},
        {"sessions", config.sessions},
        {"min_session_length", config.min_session_length},
        {"max_session_length", config.max_session_length},
        {"skip_threshold", config.skip_threshold},
        {"coherence", config.coherence},
        {"seed", config.seed},
    };
    ds.truth = std::move(gt);
    return ds;
}

std::vector<int64_t> oracle_rank(const GroundTruth& truth, std::span<const double> taste,
                                 std::span<const int64_t> candidates) {
    std::vector<std::pair<double, int64_t>> scored;
    scored.reserve(candidates.size());
    for (int64_t c : candidates) {
        if (c < 0 || c >= truth.catalog) fail_config("oracle_rank: candidate outside catalog");
        double aff = cosine({truth.item_row(c), static_cast<size_t>(truth.dim)}, taste);
        scored.emplace_back(aff, c);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int64_t> out;
    out.reserve(scored.size());
    for (const auto& [aff, c] : scored) out.push_back(c);
    return out;
}

}  // namespace skiprec
