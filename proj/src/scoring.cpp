#include "modesel/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "modesel/kernels.hpp"

namespace modesel {

ScoreTable make_score_table(std::size_t n, int classes, double smoothing) {
    ScoreTable t;
    t.n = n;
    t.classes = classes;
    t.smoothing = smoothing;
    t.raw.assign(n * kStrategyCount, 0.0);
    t.normalized.assign(n * kStrategyCount, 0.0);
    t.min_dist.assign(n, kNoCoresetDistance);
    t.class_counts.assign(static_cast<std::size_t>(classes), 0.0);
    return t;
}

double score_uncertainty(std::span<const double> probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (p < -1e-9 || p > 1.0 + 1e-9) throw Error("score_uncertainty: not a distribution");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw Error("score_uncertainty: probabilities must sum to 1");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return std::max(h, 0.0);
}

double score_boundary(std::span<const double> probs) {
    if (probs.size() < 2) throw Error("score_boundary: need at least 2 classes");
    double p1 = 0.0, p2 = 0.0;
    for (double p : probs) {
        if (p > p1) {
            p2 = p1;
            p1 = p;
        } else if (p > p2) {
            p2 = p;
        }
    }
    return 1.0 - (p1 - p2);
}

double score_class_balance(int label, std::span<const double> coreset_counts, double smoothing) {
    if (label < 0 || static_cast<std::size_t>(label) >= coreset_counts.size())
        throw Error("score_class_balance: label out of range");
    return 1.0 / (coreset_counts[static_cast<std::size_t>(label)] + smoothing);
}

double score_diversity(std::span<const double> /*x_embed*/, const ScoreTable& table,
                       std::size_t i) {
    if (i >= table.n) throw Error("score_diversity: sample index out of range");
    return table.min_dist[i];
}

std::vector<double> normalize_column(std::span<const double> raw) {
    if (raw.empty()) throw Error("normalize_column: empty input");
    const auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
    std::vector<double> out(raw.size());
    if (*mx - *mn <= 0.0) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double inv = 1.0 / (*mx - *mn);
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - *mn) * inv;
    return out;
}

double combined_score(std::span<const double> normalized, std::span<const double> weights) {
    if (normalized.size() != kStrategyCount || weights.size() != kStrategyCount)
        throw Error("combined_score: expected 4 scores and 4 weights");
    double sum = 0.0;
    for (double w : weights) {
        if (w < -1e-12) throw Error("combined_score: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("combined_score: weights must sum to 1");
    double acc = 0.0;
    for (std::size_t j = 0; j < kStrategyCount; ++j) acc += normalized[j] * weights[j];
    return acc;
}

void refresh_model_scores(ScoreTable& table, const ProbeModel& model, const Dataset& ds,
                          IndexSpan pool, bool force) {
    if (!force && table.model_version == model.version) {
        table.model_score_cache_hits += pool.size();
        return;
    }
    std::vector<double> entropy(pool.size()), margin(pool.size());
    kernels::model_scores(model.weights.data(), model.bias.data(), model.classes, model.dim,
                          model.temperature_scale, ds.features.data(), pool, entropy.data(),
                          margin.data());
    for (std::size_t r = 0; r < pool.size(); ++r) {
        table.raw_at(pool[r], StrategyId::Uncertainty) = entropy[r];
        table.raw_at(pool[r], StrategyId::Boundary) = margin[r];
    }
    table.model_score_evals += pool.size();
    table.model_version = model.version;
}

void update_diversity_cache(ScoreTable& table, const double* embeds, std::size_t k,
                            IndexSpan pool, IndexSpan batch) {
    if (batch.empty()) return;
    table.distance_evals +=
        kernels::min_dist_update(embeds, k, pool, batch, table.min_dist.data());
    table.coreset_size += batch.size();
}

void recompute_diversity_full(ScoreTable& table, const double* embeds, std::size_t k,
                              IndexSpan pool, IndexSpan coreset) {
    for (std::size_t i : pool) table.min_dist[i] = kNoCoresetDistance;
    table.distance_evals +=
        kernels::min_dist_update(embeds, k, pool, coreset, table.min_dist.data());
    table.coreset_size = coreset.size();
}

void update_class_counts(ScoreTable& table, std::span<const int> batch_labels) {
    for (int y : batch_labels) {
        if (y < 0 || y >= table.classes) throw Error("update_class_counts: label out of range");
        table.class_counts[static_cast<std::size_t>(y)] += 1.0;
    }
}

void finalize_pool_scores(ScoreTable& table, const Dataset& ds, IndexSpan pool) {
    const bool coreset_empty = table.coreset_size == 0;
    for (std::size_t i : pool) {
        table.raw_at(i, StrategyId::Diversity) = coreset_empty ? 0.0 : table.min_dist[i];
        table.raw_at(i, StrategyId::ClassBalance) =
            score_class_balance(ds.labels[i], table.class_counts, table.smoothing);
    }

    std::vector<double> column(pool.size());
    for (std::size_t s = 0; s < kStrategyCount; ++s) {
        const auto sid = static_cast<StrategyId>(s);
        if (sid == StrategyId::Diversity && coreset_empty) {
            // round-0 convention: everything is maximally diverse
            for (std::size_t i : pool) table.norm_at(i, sid) = 1.0;
            continue;
        }
        for (std::size_t r = 0; r < pool.size(); ++r) column[r] = table.raw_at(pool[r], sid);
        const auto scaled = normalize_column(column);
        for (std::size_t r = 0; r < pool.size(); ++r) table.norm_at(pool[r], sid) = scaled[r];
    }
}

}  // namespace modesel
